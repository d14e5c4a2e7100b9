"""Compile expression trees to flat numpy functions for hot loops.

The generated code reproduces ``Expr.value`` and ``Expr.dual`` node by node
but avoids the per-node Python dispatch and error-state switching.
"""
from __future__ import annotations

import numpy as np

from . import expr as E


class _Emitter:
    def __init__(self, with_deriv: bool):
        self.lines: list[str] = []
        self.consts: dict[str, object] = {}
        self.count = 0
        self.deriv = with_deriv

    def fresh(self) -> str:
        self.count += 1
        return f"t{self.count}"

    def emit(self, line: str) -> None:
        self.lines.append("        " + line)

    def array(self, values) -> str:
        name = f"c{len(self.consts)}"
        self.consts[name] = np.asarray(values, dtype=float)
        return name

    # each visit returns (value name, derivative name or None)
    def visit(self, e):
        if isinstance(e, E.Const):
            return repr(e.c), "0.0"
        if isinstance(e, E.Var):
            return "s", "1.0"
        if isinstance(e, E.Neg):
            a, da = self.visit(e.a)
            return self.out(f"-({a})", f"-({da})" if self.deriv else None)
        if isinstance(e, (E.Add, E.Sub, E.Mul, E.Div)):
            a, da = self.visit(e.a)
            b, db = self.visit(e.b)
            if isinstance(e, E.Add):
                return self.out(f"{a} + {b}", f"{da} + {db}")
            if isinstance(e, E.Sub):
                return self.out(f"{a} - {b}", f"{da} - {db}")
            if isinstance(e, E.Mul):
                return self.out(f"{a} * {b}", f"{da} * {b} + {a} * {db}")
            return self.out(f"{a} / {b}", f"({da} * {b} - {a} * {db}) / ({b} * {b})")
        if isinstance(e, E.Func):
            return self.func(e)
        if isinstance(e, E.Piecewise):
            return self.piecewise(e)
        raise TypeError(f"cannot compile {type(e).__name__}")

    def out(self, value: str, deriv):
        """Emit a value line and, when tracking, a derivative line.

        ``deriv`` is a string or a function of the new value's name.
        """
        v = self.fresh()
        self.emit(f"{v} = {value}")
        if not self.deriv:
            return v, None
        d = "d" + v
        self.emit(f"{d} = {deriv(v) if callable(deriv) else deriv}")
        return v, d

    def func(self, e):
        n = e.name
        a, da = self.visit(e.args[0])
        if n == "log":
            arg = e.args[0]
            if isinstance(arg, E.Add):
                for one, x in ((arg.a, arg.b), (arg.b, arg.a)):
                    if isinstance(one, E.Const) and one.c == 1.0:
                        xv, _ = self.visit(x)
                        return self.out(f"np.log1p({xv})", f"{da} / {a}")
            return self.out(f"np.log({a})", f"{da} / {a}")
        if n == "exp":
            return self.out(f"np.exp({a})", lambda v: f"{v} * {da}")
        if n == "sin":
            return self.out(f"np.sin({a})", f"np.cos({a}) * {da}")
        if n == "cos":
            return self.out(f"np.cos({a})", f"-np.sin({a}) * {da}")
        if n == "abs":
            return self.out(f"np.abs({a})", f"np.sign({a}) * {da}")
        b, db = self.visit(e.args[1])
        if n == "pow":
            const_d = f"np.where({da} == 0, 0.0, {b} * np.power({a}, {b} - 1.0) * {da})"
            if isinstance(e.args[1], E.Const):
                return self.out(f"np.power({a}, {b})", const_d)
            return self.out(f"np.power({a}, {b})",
                            lambda v: f"np.where({db} == 0, {const_d}, "
                                      f"{v} * ({db} * np.log({a}) + {b} * {da} / {a}))")
        cmp = "<=" if n == "min" else ">="
        take = self.fresh()
        self.emit(f"{take} = {a} {cmp} {b}")
        return self.out(f"np.where({take}, {a}, {b})", f"np.where({take}, {da}, {db})")

    def piecewise(self, e):
        brk = self.array(e.breaks)
        idx = self.fresh()
        self.emit(f"{idx} = np.searchsorted({brk}, s, side='right')")
        parts = [self.visit(p) for p in e.pieces]
        conds = ", ".join(f"{idx} == {i}" for i in range(len(parts)))
        vals = ", ".join(p[0] for p in parts)
        ders = ", ".join(p[1] for p in parts) if self.deriv else ""
        return self.out(f"np.select([{conds}], [{vals}])",
                        f"np.select([{conds}], [{ders}])" if self.deriv else None)


def compile_expr(e: E.Expr, with_deriv: bool = False):
    """Return ``g(s)`` giving ``value`` (and the derivative) as float arrays."""
    em = _Emitter(with_deriv)
    v, d = em.visit(e)
    ret = f"v = {v} + z" if not with_deriv else f"v = {v} + z\n        d = {d} + z"
    src = ("def _g(s):\n"
           "    s = np.asarray(s, dtype=float)\n"
           "    z = np.zeros(s.shape)\n"
           "    with np.errstate(all='ignore'):\n"
           + "\n".join(em.lines + ["        " + ln.strip() for ln in ret.splitlines()])
           + ("\n    return v, d\n" if with_deriv else "\n    return v\n"))
    scope = {"np": np, **em.consts}
    exec(compile(src, "<expr>", "exec"), scope)
    fn = scope["_g"]
    fn.source = src
    return fn
