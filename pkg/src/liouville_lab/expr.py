"""Immutable expression trees for scalar nonlinearities ``f(s)``.

Every node evaluates in three ways:

* ``value(s)``   direct numpy evaluation (vectorised, may overflow),
* ``slog(ls)``   signed log-domain evaluation, takes ``log s`` and returns
  ``(sign, log|value|)`` so that ``s`` far outside the double range is fine,
* ``dual(s)``    forward-mode value and derivative.

The textual grammar is a restricted subset of Python expression syntax,
e.g. ``pow(s,2)*log(2+s)``, and ``parse(str(e)) == e`` for trees built
through :func:`parse` or the helper constructors below.
"""
from __future__ import annotations

import ast
import math
from dataclasses import dataclass
from typing import Callable, Mapping

import numpy as np

from .errors import ConfigError, PreconditionError

_NEG_INF = -np.inf

__all__ = [
    "Expr", "Const", "Var", "Neg", "Add", "Sub", "Mul", "Div", "Func",
    "Piecewise", "S", "const", "log", "exp", "sin", "cos", "fabs", "power",
    "fmin", "fmax", "piecewise", "iterated_log", "parse", "FUNCTIONS",
]

# name -> arity
FUNCTIONS: dict[str, int] = {
    "log": 1, "exp": 1, "sin": 1, "cos": 1, "abs": 1,
    "pow": 2, "min": 2, "max": 2,
}


# --------------------------------------------------------------------------
# signed-log helpers: a value x is carried as (sign(x), log|x|)

def _to_slog(x):
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.sign(x), np.log(np.abs(x))


def _plain(a):
    sg, lg = a
    with np.errstate(over="ignore", invalid="ignore"):
        return sg * np.exp(lg)


def _sadd(a, b):
    sa, la = a
    sb, lb = b
    with np.errstate(invalid="ignore", over="ignore"):
        a_big = la >= lb
        hi = np.where(a_big, la, lb)
        lo = np.where(a_big, lb, la)
        shi = np.where(a_big, sa, sb)
        slo = np.where(a_big, sb, sa)
        d = np.exp(lo - hi)
        same = shi * slo >= 0
        with np.errstate(divide="ignore"):
            lg = hi + np.where(same, np.log1p(d), np.log1p(-np.minimum(d, 1.0)))
        hi_zero = np.isneginf(hi) | (shi == 0)
        lg = np.where(hi_zero, np.where(slo == 0, _NEG_INF, lo), lg)
        sg = np.where(hi_zero, slo, shi)
        sg = np.where(np.isneginf(lg), 0.0, sg)
    return sg, lg


def _slog_less(a, b):
    sa, la = a
    sb, lb = b
    return np.where(
        sa != sb, sa < sb,
        np.where(sa > 0, la < lb, np.where(sa < 0, la > lb, False)))


# --------------------------------------------------------------------------
# nodes

class Expr:
    """Base class; subclasses are frozen dataclasses."""

    prec = 4  # printing precedence, atoms bind tightest

    # evaluation --------------------------------------------------------
    def value(self, s):
        raise NotImplementedError

    def slog(self, ls):
        raise NotImplementedError

    def dual(self, s):
        raise NotImplementedError

    # structure ---------------------------------------------------------
    def children(self) -> tuple["Expr", ...]:
        return ()

    def subs(self, repl: "Expr") -> "Expr":
        """Replace the variable ``s`` by ``repl``."""
        raise NotImplementedError

    def breakpoints(self) -> tuple[float, ...]:
        """Switching points of piecewise nodes anywhere in the tree."""
        pts = set()
        for c in self.children():
            pts.update(c.breakpoints())
        return tuple(sorted(pts))

    def walk(self):
        yield self
        for c in self.children():
            yield from c.walk()

    # printing ----------------------------------------------------------
    def _fmt(self) -> str:
        raise NotImplementedError

    def fmt(self, min_prec: int = 0) -> str:
        text = self._fmt()
        return f"({text})" if self.prec < min_prec else text

    def __str__(self) -> str:
        return self.fmt()

    # operator sugar ----------------------------------------------------
    def __add__(self, o):
        return Add(self, _wrap(o))

    def __radd__(self, o):
        return Add(_wrap(o), self)

    def __sub__(self, o):
        return Sub(self, _wrap(o))

    def __rsub__(self, o):
        return Sub(_wrap(o), self)

    def __mul__(self, o):
        return Mul(self, _wrap(o))

    def __rmul__(self, o):
        return Mul(_wrap(o), self)

    def __truediv__(self, o):
        return Div(self, _wrap(o))

    def __rtruediv__(self, o):
        return Div(_wrap(o), self)

    def __pow__(self, o):
        return Func("pow", (self, _wrap(o)))

    def __neg__(self):
        return const(-self.c) if isinstance(self, Const) else Neg(self)


def _wrap(x) -> Expr:
    if isinstance(x, Expr):
        return x
    return const(x)


def _fmt_number(c: float) -> str:
    if c.is_integer() and abs(c) < 1e16:
        text = str(int(c))
    else:
        text = repr(c)
    return f"({text})" if c < 0 or text.startswith("-") else text


@dataclass(frozen=True)
class Const(Expr):
    c: float

    def __post_init__(self):
        if not math.isfinite(self.c):
            raise PreconditionError(f"non-finite constant {self.c!r}")

    def value(self, s):
        return np.full(np.shape(s), self.c)

    def slog(self, ls):
        sg, lg = _to_slog(self.c)
        shape = np.shape(ls)
        return np.full(shape, sg), np.full(shape, lg)

    def dual(self, s):
        return np.full(np.shape(s), self.c), np.zeros(np.shape(s))

    def subs(self, repl):
        return self

    def _fmt(self):
        return _fmt_number(self.c)


@dataclass(frozen=True)
class Var(Expr):
    def value(self, s):
        return np.asarray(s, dtype=float)

    def slog(self, ls):
        ls = np.asarray(ls, dtype=float)
        return np.ones_like(ls), ls

    def dual(self, s):
        s = np.asarray(s, dtype=float)
        return s, np.ones_like(s)

    def subs(self, repl):
        return repl

    def _fmt(self):
        return "s"


@dataclass(frozen=True)
class Neg(Expr):
    a: Expr
    prec = 3

    def value(self, s):
        return -self.a.value(s)

    def slog(self, ls):
        sg, lg = self.a.slog(ls)
        return -sg, lg

    def dual(self, s):
        v, d = self.a.dual(s)
        return -v, -d

    def children(self):
        return (self.a,)

    def subs(self, repl):
        return -self.a.subs(repl)

    def _fmt(self):
        return "-" + self.a.fmt(3)


@dataclass(frozen=True)
class _Binary(Expr):
    a: Expr
    b: Expr
    op = "?"

    def children(self):
        return (self.a, self.b)

    def subs(self, repl):
        return type(self)(self.a.subs(repl), self.b.subs(repl))

    def _fmt(self):
        return self.a.fmt(self.prec) + self.op + self.b.fmt(self.prec + 1)


@dataclass(frozen=True)
class Add(_Binary):
    op = "+"
    prec = 1

    def value(self, s):
        return self.a.value(s) + self.b.value(s)

    def slog(self, ls):
        return _sadd(self.a.slog(ls), self.b.slog(ls))

    def dual(self, s):
        va, da = self.a.dual(s)
        vb, db = self.b.dual(s)
        return va + vb, da + db


@dataclass(frozen=True)
class Sub(_Binary):
    op = "-"
    prec = 1

    def value(self, s):
        return self.a.value(s) - self.b.value(s)

    def slog(self, ls):
        sb, lb = self.b.slog(ls)
        return _sadd(self.a.slog(ls), (-sb, lb))

    def dual(self, s):
        va, da = self.a.dual(s)
        vb, db = self.b.dual(s)
        return va - vb, da - db


@dataclass(frozen=True)
class Mul(_Binary):
    op = "*"
    prec = 2

    def value(self, s):
        return self.a.value(s) * self.b.value(s)

    def slog(self, ls):
        sa, la = self.a.slog(ls)
        sb, lb = self.b.slog(ls)
        sg = sa * sb
        with np.errstate(invalid="ignore"):
            lg = np.where(sg == 0, _NEG_INF, la + lb)
        return sg, lg

    def dual(self, s):
        va, da = self.a.dual(s)
        vb, db = self.b.dual(s)
        return va * vb, da * vb + va * db


@dataclass(frozen=True)
class Div(_Binary):
    op = "/"
    prec = 2

    def value(self, s):
        with np.errstate(divide="ignore", invalid="ignore"):
            return self.a.value(s) / self.b.value(s)

    def slog(self, ls):
        sa, la = self.a.slog(ls)
        sb, lb = self.b.slog(ls)
        with np.errstate(invalid="ignore"):
            lg = np.where(sa == 0, _NEG_INF, la - lb)
            sg = np.where(sb == 0, np.nan, sa * sb)
        return sg, lg

    def dual(self, s):
        va, da = self.a.dual(s)
        vb, db = self.b.dual(s)
        with np.errstate(divide="ignore", invalid="ignore"):
            return va / vb, (da * vb - va * db) / (vb * vb)


def _pow_value(x, y):
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        return np.power(x, y)


@dataclass(frozen=True)
class Func(Expr):
    name: str
    args: tuple[Expr, ...]

    def __post_init__(self):
        if self.name not in FUNCTIONS:
            raise PreconditionError(f"unknown function {self.name!r}")
        if len(self.args) != FUNCTIONS[self.name]:
            raise PreconditionError(
                f"{self.name} takes {FUNCTIONS[self.name]} argument(s), got {len(self.args)}")

    def children(self):
        return self.args

    def subs(self, repl):
        return Func(self.name, tuple(a.subs(repl) for a in self.args))

    def _fmt(self):
        return f"{self.name}(" + ",".join(a.fmt() for a in self.args) + ")"

    # direct ------------------------------------------------------------
    def value(self, s):
        vals = [a.value(s) for a in self.args]
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            n = self.name
            if n == "log":
                arg = self.args[0]
                if isinstance(arg, Add):
                    for one, x in ((arg.a, arg.b), (arg.b, arg.a)):
                        if isinstance(one, Const) and one.c == 1.0:
                            return np.log1p(x.value(s))
                return np.log(vals[0])
            if n == "exp":
                return np.exp(vals[0])
            if n == "sin":
                return np.sin(vals[0])
            if n == "cos":
                return np.cos(vals[0])
            if n == "abs":
                return np.abs(vals[0])
            if n == "pow":
                return _pow_value(vals[0], vals[1])
            if n == "min":
                return np.minimum(vals[0], vals[1])
            return np.maximum(vals[0], vals[1])

    # log domain --------------------------------------------------------
    def slog(self, ls):
        n = self.name
        a = self.args[0].slog(ls)
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            if n == "log":
                sg, lg = a
                inner = np.where(sg > 0, lg, np.nan)
                out = _to_slog(inner)
                small = self._one_plus_small(ls)
                if small is not None:
                    # log(1+x) = x to double precision once |x| < e^-40
                    use = small[1] < -40.0
                    out = (np.where(use, small[0], out[0]), np.where(use, small[1], out[1]))
                return out
            if n == "exp":
                x = _plain(a)
                return np.where(np.isnan(x), np.nan, 1.0), x
            if n == "sin":
                return _to_slog(np.sin(_plain(a)))
            if n == "cos":
                return _to_slog(np.cos(_plain(a)))
            if n == "abs":
                return np.abs(a[0]), a[1]
            b = self.args[1].slog(ls)
            if n == "pow":
                sg, lg = a
                y = _plain(b)
                pos = sg > 0
                zero = sg == 0
                out_lg = np.where(pos, y * lg, np.where(zero & (y > 0), _NEG_INF, np.nan))
                out_sg = np.where(pos, 1.0, np.where(zero & (y > 0), 0.0, np.nan))
                return out_sg, out_lg
            take_a = _slog_less(a, b) if n == "min" else _slog_less(b, a)
            return np.where(take_a, a[0], b[0]), np.where(take_a, a[1], b[1])

    def _one_plus_small(self, ls):
        """slog of ``x`` when the log argument is ``1 + x`` or ``x + 1``."""
        arg = self.args[0]
        if not isinstance(arg, Add):
            return None
        for one, x in ((arg.a, arg.b), (arg.b, arg.a)):
            if isinstance(one, Const) and one.c == 1.0:
                return x.slog(ls)
        return None

    # forward mode ------------------------------------------------------
    def dual(self, s):
        n = self.name
        va, da = self.args[0].dual(s)
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            if n == "log":
                return np.log(va), da / va
            if n == "exp":
                e = np.exp(va)
                return e, e * da
            if n == "sin":
                return np.sin(va), np.cos(va) * da
            if n == "cos":
                return np.cos(va), -np.sin(va) * da
            if n == "abs":
                return np.abs(va), np.sign(va) * da
            vb, db = self.args[1].dual(s)
            if n == "pow":
                v = _pow_value(va, vb)
                const_exp = db == 0
                d_const = vb * _pow_value(va, vb - 1.0) * da
                d_gen = v * (db * np.log(va) + vb * da / va)
                d = np.where(const_exp, np.where(da == 0, 0.0, d_const), d_gen)
                return v, d
            take_a = va <= vb if n == "min" else va >= vb
            return np.where(take_a, va, vb), np.where(take_a, da, db)


@dataclass(frozen=True)
class Piecewise(Expr):
    """``pieces[i]`` applies on ``[breaks[i-1], breaks[i])``.

    Adjacent pieces must agree at every breakpoint (relative 1e-12).
    """

    pieces: tuple[Expr, ...]
    breaks: tuple[float, ...]

    def __post_init__(self):
        if len(self.pieces) != len(self.breaks) + 1 or not self.breaks:
            raise PreconditionError("piecewise needs k breakpoints and k+1 pieces, k >= 1")
        b = np.asarray(self.breaks, dtype=float)
        if not (np.all(b > 0) and np.all(np.diff(b) > 0) and np.all(np.isfinite(b))):
            raise PreconditionError("piecewise breakpoints must be positive, finite, increasing")
        for i, bi in enumerate(self.breaks):
            left = float(self.pieces[i].value(bi))
            right = float(self.pieces[i + 1].value(bi))
            if not (math.isfinite(left) and math.isfinite(right)):
                raise PreconditionError(f"piece not finite at breakpoint {bi!r}")
            if abs(left - right) > 1e-12 * max(abs(left), abs(right)):
                raise PreconditionError(
                    f"discontinuity at breakpoint {bi!r}: {left!r} != {right!r}")

    def children(self):
        return self.pieces

    def subs(self, repl):
        raise PreconditionError("substitution into a piecewise node is not supported")

    def breakpoints(self):
        pts = set(self.breaks)
        for c in self.pieces:
            pts.update(c.breakpoints())
        return tuple(sorted(pts))

    def _index(self, x):
        return np.searchsorted(np.asarray(self.breaks), x, side="right")

    def _select(self, idx, parts):
        out = np.array(parts[0], dtype=float, copy=True)
        for i in range(1, len(parts)):
            out = np.where(idx == i, parts[i], out)
        return out

    def value(self, s):
        s = np.asarray(s, dtype=float)
        idx = self._index(s)
        return self._select(idx, [p.value(s) for p in self.pieces])

    def slog(self, ls):
        ls = np.asarray(ls, dtype=float)
        idx = np.searchsorted(np.log(np.asarray(self.breaks)), ls, side="right")
        parts = [p.slog(ls) for p in self.pieces]
        return (self._select(idx, [p[0] for p in parts]),
                self._select(idx, [p[1] for p in parts]))

    def dual(self, s):
        s = np.asarray(s, dtype=float)
        idx = self._index(s)
        parts = [p.dual(s) for p in self.pieces]
        return (self._select(idx, [p[0] for p in parts]),
                self._select(idx, [p[1] for p in parts]))

    def _fmt(self):
        items = [self.pieces[0].fmt()]
        for b, p in zip(self.breaks, self.pieces[1:]):
            items += [_fmt_number(float(b)), p.fmt()]
        return "piecewise(" + ",".join(items) + ")"


# --------------------------------------------------------------------------
# constructors

S = Var()


def const(c) -> Const:
    return Const(float(c))


def log(x) -> Func:
    return Func("log", (_wrap(x),))


def exp(x) -> Func:
    return Func("exp", (_wrap(x),))


def sin(x) -> Func:
    return Func("sin", (_wrap(x),))


def cos(x) -> Func:
    return Func("cos", (_wrap(x),))


def fabs(x) -> Func:
    return Func("abs", (_wrap(x),))


def power(x, y) -> Func:
    return Func("pow", (_wrap(x), _wrap(y)))


def fmin(x, y) -> Func:
    return Func("min", (_wrap(x), _wrap(y)))


def fmax(x, y) -> Func:
    return Func("max", (_wrap(x), _wrap(y)))


def piecewise(pieces, breaks) -> Piecewise:
    return Piecewise(tuple(_wrap(p) for p in pieces), tuple(float(b) for b in breaks))


def iterated_log(depth: int, K: float, arg: Expr = S) -> Expr:
    """``log∘...∘log(K + arg)`` (``depth`` times), positive for ``arg >= 0``.

    Requires ``K`` above ``exp∘...∘exp(0)`` (``depth`` exponentials).
    """
    if depth < 1:
        raise PreconditionError("iterated log depth must be >= 1")
    floor = 0.0
    for _ in range(depth):
        floor = math.exp(floor)
    if not K > floor:
        raise PreconditionError(
            f"iterated log of depth {depth} needs K > {floor!r}, got K={K!r}")
    out: Expr = Add(const(K), arg)
    for _ in range(depth):
        out = log(out)
    return out


# --------------------------------------------------------------------------
# parser

_BINOPS: dict[type, Callable[[Expr, Expr], Expr]] = {
    ast.Add: Add, ast.Sub: Sub, ast.Mult: Mul, ast.Div: Div,
    ast.Pow: lambda a, b: Func("pow", (a, b)),
}


def parse(text: str, params: Mapping[str, float] | None = None) -> Expr:
    """Parse the textual grammar into a tree.

    ``params`` supplies values for free names other than ``s`` (used by
    parametric families such as ``pow(s,2)*pow(log(2+s),a)``).
    """
    params = dict(params or {})
    try:
        tree = ast.parse(text.strip(), mode="eval")
    except SyntaxError as exc:
        raise ConfigError(f"cannot parse expression {text!r}: {exc.msg}") from None
    return _convert(tree.body, params, text)


def _convert(node, params, text) -> Expr:
    if isinstance(node, ast.Constant):
        if isinstance(node.value, bool) or not isinstance(node.value, (int, float)):
            raise ConfigError(f"unsupported literal {node.value!r} in {text!r}")
        return const(node.value)
    if isinstance(node, ast.Name):
        if node.id == "s":
            return S
        if node.id in params:
            return const(params[node.id])
        raise ConfigError(f"unknown name {node.id!r} in {text!r}")
    if isinstance(node, ast.UnaryOp):
        inner = _convert(node.operand, params, text)
        if isinstance(node.op, ast.UAdd):
            return inner
        if isinstance(node.op, ast.USub):
            return -inner
    if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
        return _BINOPS[type(node.op)](_convert(node.left, params, text),
                                      _convert(node.right, params, text))
    if isinstance(node, ast.Call) and isinstance(node.func, ast.Name) and not node.keywords:
        name = node.func.id
        args = [_convert(a, params, text) for a in node.args]
        if name == "piecewise":
            if len(args) < 3 or len(args) % 2 == 0:
                raise ConfigError("piecewise(e0, b1, e1, ...) needs an odd number >= 3 of arguments")
            breaks = args[1::2]
            if not all(isinstance(b, Const) for b in breaks):
                raise ConfigError("piecewise breakpoints must be numeric literals")
            return Piecewise(tuple(args[0::2]), tuple(b.c for b in breaks))
        if name in FUNCTIONS:
            if len(args) != FUNCTIONS[name]:
                raise ConfigError(f"{name} takes {FUNCTIONS[name]} argument(s)")
            return Func(name, tuple(args))
        raise ConfigError(f"unknown function {name!r} in {text!r}")
    raise ConfigError(f"unsupported syntax in {text!r}: {ast.dump(node)[:60]}")
