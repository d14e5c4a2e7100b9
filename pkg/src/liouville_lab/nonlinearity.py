"""Nonlinearities ``f(s)``: evaluation, transforms and example builders.

A :class:`Nonlinearity` wraps an expression tree (see :mod:`.expr`) and may
carry closed forms for ``F(s) = ∫_0^s f`` and ``f̃(s) = ∫_0^s f(z)/z dz``.
When no closed form is attached both are computed by adaptive quadrature in
the variable ``u = log z``, which resolves the origin and works entirely in
log space.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from functools import cached_property
from typing import Union

import numpy as np
from scipy import integrate

from . import expr as E
from ._codegen import compile_expr
from .errors import (DivergentIntegralError, NumericalFailure, OutOfRangeError,
                     PreconditionError)
from .exponents import critical_exponents, entire_solution_regime, power_log_clause

LOG_MAX = math.log(np.finfo(float).max)
LOG_TINY = math.log(np.finfo(float).tiny)

# integrability probe at the origin: local log-log slope of f must exceed this
ORIGIN_SLOPE_MIN = 0.05


@dataclass(frozen=True)
class Nonlinearity:
    """A positive nonlinearity with optional closed-form antiderivatives."""

    expr: E.Expr
    label: str = ""
    tilde: E.Expr | None = field(default=None, compare=False)
    primitive: E.Expr | None = field(default=None, compare=False)

    def __str__(self) -> str:
        return str(self.expr)

    def __call__(self, s):
        """Fast vectorised ``f(s)`` for ``s >= 0``; may overflow to ``inf``."""
        s = np.asarray(s, dtype=float)
        v = self._compiled(s)
        if not self._zero_safe and np.any(s == 0):
            v = np.where(s == 0, self.at_zero, v)
        return v

    @cached_property
    def _zero_safe(self) -> bool:
        """True when the compiled tree already returns ``at_zero`` at 0."""
        return float(self._compiled(0.0)) == self.at_zero

    @cached_property
    def _compiled(self):
        return compile_expr(self.expr)

    @cached_property
    def _compiled_dual(self):
        return compile_expr(self.expr, with_deriv=True)

    @cached_property
    def at_zero(self) -> float:
        """``f(0)``, or the limit ``f(0+)`` when the tree is singular at 0."""
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            v = float(self.expr.value(0.0))
        if math.isfinite(v):
            return v
        lg = float(self.log_at(-1e4))
        if math.isnan(lg):
            raise NumericalFailure(f"{self}: no continuous extension to s=0")
        return math.exp(lg) if lg < LOG_MAX else math.inf

    def log_at(self, ls):
        """``log f(e^ls)`` evaluated in the log domain (NaN where f <= 0)."""
        sg, lg = self.expr.slog(np.asarray(ls, dtype=float))
        return np.where(sg > 0, lg, np.nan)

    def deriv(self, s):
        """``f'(s)``: analytic chain rule, central differences as fallback."""
        return self.value_and_deriv(s)[1]

    def value_and_deriv(self, s):
        """``(f(s), f'(s))`` from one forward-mode pass."""
        s = np.asarray(s, dtype=float)
        v, d = self._compiled_dual(s)
        if not self._zero_safe and np.any(s == 0):
            v = np.where(s == 0, self.at_zero, v)
        if math.isfinite(float(np.sum(d))):
            return v, d
        bad = ~np.isfinite(d) & (s > 0)
        if np.any(bad):
            h = s * 1e-6
            fd = (self._compiled(s + h) - self._compiled(s - h)) / (2 * h)
            d = np.where(bad, fd, d)
        return v, d


NonlinearityLike = Union[Nonlinearity, E.Expr, str]


def as_nonlinearity(f: NonlinearityLike) -> Nonlinearity:
    if isinstance(f, Nonlinearity):
        return f
    if isinstance(f, E.Expr):
        return Nonlinearity(f)
    if isinstance(f, str):
        return Nonlinearity(E.parse(f), label=f)
    raise TypeError(f"cannot interpret {type(f).__name__} as a nonlinearity")


def parse_nonlinearity(text: str, params=None) -> Nonlinearity:
    return Nonlinearity(E.parse(text, params), label=text)


# --------------------------------------------------------------------------
# evaluation

def evaluate(f: NonlinearityLike, s: float) -> float:
    """``f(s)`` as a finite positive float.

    Raises :class:`OutOfRangeError` when the value is not representable.
    """
    f = as_nonlinearity(f)
    s = float(s)
    if s < 0 or math.isnan(s):
        raise PreconditionError(f"s must be >= 0, got {s!r}")
    if s == 0:
        v = f.at_zero
        if not math.isfinite(v):
            raise OutOfRangeError(f"{f}: f(0) is not finite")
        return v
    if 1e-300 <= s <= 1e300:
        v = float(f.expr.value(s))
        if math.isfinite(v) and v > 0:
            return v
    return math.exp(_checked_log(f, math.log(s)))


def log_value(f: NonlinearityLike, ls: float) -> float:
    """``log f(e^ls)`` for arbitrary real ``ls`` (no double-range limit)."""
    f = as_nonlinearity(f)
    lg = float(f.log_at(float(ls)))
    if not math.isfinite(lg):
        raise NumericalFailure(f"{f} is not positive and finite at s=exp({ls!r})")
    return lg


def _checked_log(f: Nonlinearity, ls: float) -> float:
    lg = float(f.log_at(ls))
    if math.isnan(lg):
        raise NumericalFailure(f"{f} is not positive at s=exp({ls!r})")
    if not LOG_TINY < lg < LOG_MAX:
        raise OutOfRangeError(f"{f} at s=exp({ls!r}) has log value {lg!r}, outside double range")
    return lg


def derivative(f: NonlinearityLike, s: float) -> float:
    return float(as_nonlinearity(f).deriv(float(s)))


# --------------------------------------------------------------------------
# antiderivatives

def _quad(g, a, b, tol, points=None):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        val, err = integrate.quad(g, a, b, epsabs=0.0, epsrel=tol, limit=400,
                                  points=points)
    if not math.isfinite(val) or err > 50 * tol * abs(val) + 1e-300:
        raise NumericalFailure(f"quadrature on [{a}, {b}] reached only {err:.3g} (value {val:.6g})")
    return val


def log_line_integral(log_integrand, upper: float, tol: float, breaks_log=()) -> float:
    """``∫_{-inf}^{upper} exp(log_integrand(u)) du`` by adaptive quadrature."""
    pts = sorted(b for b in breaks_log if b < upper)
    split = min([upper - 1.0] + [b - 1.0 for b in pts])

    def g(u):
        return math.exp(float(log_integrand(u)))

    head = _quad(g, -math.inf, split, tol)
    body = _quad(g, split, upper, tol, points=pts or None)
    return head + body


def origin_slope(f: Nonlinearity) -> float:
    """Least-squares slope of ``log f`` against ``log s`` for s in [e^-80, e^-40]."""
    ls = np.linspace(-80.0, -40.0, 9)
    lg = f.log_at(ls)
    if np.any(np.isnan(lg)):
        raise NumericalFailure(f"{f} is not positive near s=0")
    if np.any(np.isneginf(lg)):
        return math.inf    # underflows to 0 faster than any power
    return float(np.polyfit(ls, lg, 1)[0])


def tilde_f(f: NonlinearityLike, s: float, tol: float = 1e-10) -> float:
    """``f̃(s) = ∫_0^s f(z)/z dz``; closed form when attached, quadrature otherwise."""
    f = as_nonlinearity(f)
    if s < 0:
        raise PreconditionError(f"s must be >= 0, got {s!r}")
    if f.tilde is not None:
        return float(f.tilde.value(float(s)))
    slope = origin_slope(f)
    if not slope >= ORIGIN_SLOPE_MIN:
        raise DivergentIntegralError(
            f"f(z)/z is not integrable at 0 for {f}: local exponent {slope:.3g} < {ORIGIN_SLOPE_MIN}")
    if s == 0:
        return 0.0
    brk = [math.log(b) for b in f.expr.breakpoints()]
    return log_line_integral(f.log_at, math.log(s), tol, brk)


def antiderivative_F(f: NonlinearityLike, s: float, tol: float = 1e-10) -> float:
    """``F(s) = ∫_0^s f(z) dz`` (substitution ``z = e^u``)."""
    f = as_nonlinearity(f)
    if s < 0:
        raise PreconditionError(f"s must be >= 0, got {s!r}")
    if f.primitive is not None:
        return float(f.primitive.value(float(s)))
    if s == 0:
        return 0.0
    if not math.isfinite(f.at_zero):
        raise DivergentIntegralError(f"{f} is unbounded at 0")
    brk = [math.log(b) for b in f.expr.breakpoints()]
    return log_line_integral(lambda u: f.log_at(u) + u, math.log(s), tol, brk)


# --------------------------------------------------------------------------
# piecewise powers oscillating between two exponents

@dataclass(frozen=True)
class PiecewisePowerSpec:
    """Continuous piecewise power touching ``s^p`` and ``s^m`` alternately.

    Breakpoints are stored as logarithms because they grow doubly
    exponentially. ``exponents[0] = p`` applies on ``[0, s_2)``; segment
    ``i >= 1`` starts at ``exp(log_breaks[i-1])``.
    """

    ell: float
    m: float
    p: float
    p_star: float
    m_bar: float
    p_bar: float
    log_breaks: tuple[float, ...]
    exponents: tuple[float, ...]
    log_values: tuple[float, ...]   # log f at each breakpoint

    def log_at(self, ls):
        ls = np.asarray(ls, dtype=float)
        lb = np.asarray(self.log_breaks)
        idx = np.searchsorted(lb, ls, side="right")
        e = np.asarray(self.exponents)[idx]
        j = np.maximum(idx - 1, 0)
        base_l = np.where(idx == 0, 0.0, lb[j])
        base_v = np.where(idx == 0, 0.0, np.asarray(self.log_values)[j])
        return base_v + e * (ls - base_l)

    def to_expr(self) -> E.Expr:
        if max(self.log_breaks) > math.log(1e300):
            raise OutOfRangeError("breakpoints beyond 1e300 cannot be written as an expression tree")
        breaks = [math.exp(lb) for lb in self.log_breaks]
        breaks[0] = 2.0
        values = [float(np.power(breaks[0], self.p))]
        for i in range(1, len(breaks)):
            ratio = breaks[i] / breaks[i - 1]
            values.append(float(values[-1] * np.power(ratio, self.exponents[i])))
        pieces: list[E.Expr] = [E.power(E.S, self.p)]
        for b, v, e in zip(breaks, values, self.exponents[1:]):
            pieces.append(E.const(v) * E.power(E.S / E.const(b), e))
        return E.Piecewise(tuple(pieces), tuple(breaks))

    def to_nonlinearity(self) -> Nonlinearity:
        return Nonlinearity(self.to_expr(), label="oscillating piecewise power")


def build_piecewise_power(ell: float, m: float, p: float, p_star: float,
                          n_segments: int = 4) -> PiecewisePowerSpec:
    """Piecewise power with ``f(s_even) = s^p``, ``f(s_odd) = s^m``.

    Between breakpoints the local exponent is ``m_bar`` (midpoint of
    ``(ell, m)``) on even-to-odd segments and ``p_bar`` (midpoint of
    ``(p, p_star)``) on odd-to-even segments, so ``s^-ell f`` increases and
    ``s^-p_star f`` decreases.
    """
    if not (1 < ell < m < p < p_star):
        raise PreconditionError(
            f"need 1 < ell < m < p < p_star, got {ell}, {m}, {p}, {p_star}")
    if not math.isfinite(p_star):
        raise PreconditionError("p_star must be finite; pass any finite exponent above p")
    if n_segments < 2:
        raise PreconditionError("n_segments must be >= 2")
    m_bar = 0.5 * (ell + m)
    p_bar = 0.5 * (p + p_star)
    log_breaks = [math.log(2.0)]
    exponents = [p]
    log_values = [p * log_breaks[0]]
    for k in range(n_segments):
        if k % 2 == 0:     # from an s^p contact to an s^m contact
            e, nxt = m_bar, log_breaks[-1] * (p - m_bar) / (m - m_bar)
        else:              # from an s^m contact back to s^p
            e, nxt = p_bar, log_breaks[-1] * (p_bar - m) / (p_bar - p)
        exponents.append(e)
        if k < n_segments - 1:
            log_values.append(log_values[-1] + e * (nxt - log_breaks[-1]))
            log_breaks.append(nxt)
    return PiecewisePowerSpec(ell, m, p, p_star, m_bar, p_bar, tuple(log_breaks),
                              tuple(exponents), tuple(log_values))


# --------------------------------------------------------------------------
# catalog

def _power_log(p, q, K) -> E.Expr:
    base = E.power(E.S, p)
    if q == 0:
        return base
    lg = E.log(E.const(K) + E.S)
    return base * (lg if q == 1 else E.power(lg, q))


def _arg(two_sided: bool) -> E.Expr:
    return E.S + E.const(1) / E.S if two_sided else E.S


def slow_factor(kind: str, two_sided: bool = True, **params) -> E.Expr:
    """Slowly varying factors ``L`` (at 0 and infinity when ``two_sided``)."""
    x = _arg(two_sided)
    if kind == "log":
        a, K = params.get("a", 2.0), params.get("K", 2.0)
        if not K > 1:
            raise PreconditionError("log factor needs K > 1")
        return E.power(E.log(E.const(K) + x), a)
    if kind == "iterated_log":
        return E.iterated_log(int(params.get("depth", 3)), params.get("K", 16.0), x)
    if kind == "exp_log_ratio":
        K = params.get("K", 2.0)
        if not K > 1:
            raise PreconditionError("exp_log_ratio needs K > 1")
        return E.exp(E.log(x) / E.log(E.const(K) + E.fabs(E.log(x))))
    if kind == "exp_abslog_pow":
        nu = params.get("nu", 0.5)
        if not 0 < nu < 1:
            raise PreconditionError("exp_abslog_pow needs 0 < nu < 1")
        return E.exp(E.power(E.fabs(E.log(x)), nu))
    if kind == "osc_log":
        inner = E.log(E.const(3) + x)
        return E.power(inner, E.sin(E.log(inner)))
    if kind == "osc_exp":
        nu = params.get("nu", 0.25)
        if not 0 < nu < 0.5:
            raise PreconditionError("osc_exp needs 0 < nu < 1/2")
        w = E.power(E.fabs(E.log(x)), nu)
        return E.exp(w * E.cos(w))
    if kind == "one_plus_sin":
        a, nu = params.get("a", 0.5), params.get("nu", 0.5)
        if not (abs(a) < 1 and 0 < nu < 1):
            raise PreconditionError("one_plus_sin needs |a| < 1 and 0 < nu < 1")
        return E.const(1) + E.const(a) * E.sin(E.power(E.log(E.const(2) + x), nu))
    raise PreconditionError(f"unknown slowly varying factor {kind!r}")


SLOW_FACTORS = ("log", "iterated_log", "exp_log_ratio", "exp_abslog_pow",
                "osc_log", "osc_exp", "one_plus_sin")


def slow_variation_catalog(p: float, two_sided: bool = True) -> dict[str, Nonlinearity]:
    """``s^p L(s)`` for one representative ``L`` of each catalog family."""
    return {kind: Nonlinearity(E.power(E.S, p) * slow_factor(kind, two_sided),
                               label=f"s^{p} L_{kind}")
            for kind in SLOW_FACTORS}


def counterexample_coefficients(n: int, p: float) -> tuple[float, float]:
    """``(A, B)`` making ``(1+r^2)^(-1/(p-1))`` an entire solution."""
    alpha = 1.0 / (p - 1.0)
    return 2 * alpha * (n - 2 - 2 * alpha), 4 * alpha * (1 + alpha)


def counterexample_residual(n: int, p: float, A: float, B: float,
                            r=None) -> float:
    """Max relative residual of ``-Δv = [A + B min(v^(p-1),1)] v^p`` for the closed form."""
    r = np.linspace(0.0, 100.0, 4001) if r is None else np.asarray(r, float)
    alpha = 1.0 / (p - 1.0)
    w = 1.0 + r * r
    v = w ** -alpha
    # derivatives of (1+r^2)^(-alpha), written out by hand
    d1 = -2 * alpha * r * w ** (-alpha - 1)
    d2 = -2 * alpha * w ** (-alpha - 1) + 4 * alpha * (alpha + 1) * r * r * w ** (-alpha - 2)
    with np.errstate(invalid="ignore", divide="ignore"):
        radial = np.where(r > 0, (n - 1) * d1 / np.where(r > 0, r, 1.0), (n - 1) * d2)
    lap = d2 + radial
    rhs = (A + B * np.minimum(v ** (p - 1), 1.0)) * v ** p
    return float(np.max(np.abs(-lap - rhs) / rhs))


def _two_branch(m: float, q: float, n: int) -> Nonlinearity:
    p_B = float(critical_exponents(n, "parabolic").p_B)
    if not (1 < m < p_B < q):
        raise PreconditionError(f"need 1 < m < p_B={p_B:g} < q, got m={m}, q={q}")
    a = ((p_B - m) / (q - p_B)) ** (1.0 / (q - m))
    c = 1.0 + a ** (q - m)
    S, C = E.S, E.const
    f = E.piecewise([E.power(S, m) + E.power(S, q), C(c) * E.power(S, m)], [a])
    tilde = E.piecewise([E.power(S, m) / C(m) + E.power(S, q) / C(q),
                         C(c / m) * E.power(S, m) + C((1 / q - 1 / m) * a ** q)], [a])
    Fa = a ** (m + 1) / (m + 1) + a ** (q + 1) / (q + 1)
    prim = E.piecewise([E.power(S, m + 1) / C(m + 1) + E.power(S, q + 1) / C(q + 1),
                        C(c / (m + 1)) * E.power(S, m + 1) + C(Fa - c * a ** (m + 1) / (m + 1))],
                       [a])
    return Nonlinearity(f, label=f"two_branch(m={m},q={q},n={n})", tilde=tilde, primitive=prim)


def two_branch_threshold(m: float, q: float, n: int) -> float:
    """Switch point ``a = [(p_B-m)/(q-p_B)]^(1/(q-m))``."""
    p_B = float(critical_exponents(n, "parabolic").p_B)
    return ((p_B - m) / (q - p_B)) ** (1.0 / (q - m))


CATALOG_IDS = ("power", "linear", "power_log", "power_log_entire", "oscillating_exponent",
               "power_sum", "power_switch", "piecewise_power", "power_band",
               "estimate_counterexample", "two_branch", "toggle", "slow")


def build_example(catalog_id: str, **params) -> Nonlinearity:
    """Build a catalog nonlinearity, rejecting parameters outside its range."""
    S, C = E.S, E.const
    n = params.get("n")
    case = params.get("case", "elliptic")

    def need(cond, msg):
        if not cond:
            raise PreconditionError(f"{catalog_id}: {msg}")

    if catalog_id == "power":
        p = params["p"]
        need(p > 0, "p > 0")
        return Nonlinearity(E.power(S, p), label=f"s^{p}",
                            tilde=E.power(S, p) / C(p),
                            primitive=E.power(S, p + 1) / C(p + 1))
    if catalog_id == "linear":
        return Nonlinearity(S, label="s", tilde=S, primitive=E.power(S, 2) / C(2))
    if catalog_id == "power_log":
        p, q, K = params["p"], params["q"], params.get("K", 2.0)
        need(p > 1, f"p > 1 violated (p={p})")
        need(K >= 1, f"K >= 1 violated (K={K})")
        if n is not None:
            clause = power_log_clause(p, q, K, n, case)
            need(clause not in ("none", "entire"),
                 f"(p={p}, q={q}, K={K}) satisfies no clause for n={n}, {case} "
                 f"(p < p_star needs K > 1; p_star <= p < p_c needs the q/K conditions)")
        return Nonlinearity(_power_log(p, q, K), label=f"s^{p} log^{q}({K}+s)")
    if catalog_id == "power_log_entire":
        p, q, K = params["p"], params["q"], params.get("K", 1.0)
        need(n is not None, "dimension n required")
        need(entire_solution_regime(p, q, K, n),
             f"(p={p}, q={q}, K={K}) is outside the entire-solution regime: need "
             f"1<p<p_S, q>p_S-p, K=1, or p>=p_S, q>0, K>=1")
        return Nonlinearity(_power_log(p, q, K), label=f"s^{p} log^{q}({K}+s)")
    if catalog_id == "oscillating_exponent":
        p, a = params["p"], params["a"]
        need(p > 1, f"p > 1 violated (p={p})")
        need(0 < a < p - 1, f"0 < a < p-1 violated (a={a}, p={p})")
        if n is not None:
            need(p < float(critical_exponents(n).p_S), f"p < p_S violated for n={n}")
        h = E.log(E.log(C(3) + S + C(1) / S))
        return Nonlinearity(E.power(S, C(p) + C(a) * E.sin(h)), label=f"oscillating_exponent(p={p},a={a})")
    if catalog_id in ("power_sum", "power_switch"):
        p, q = params["p"], params["q"]
        need(p > 1 and q > 1, "p, q > 1")
        if n is not None:
            p_c = float(critical_exponents(n, case).p_c)
            need(p < p_c and q < p_c, f"p, q < p_c={p_c:g}")
        if catalog_id == "power_sum":
            return Nonlinearity(E.power(S, p) + E.power(S, q), label=f"s^{p}+s^{q}")
        return Nonlinearity(E.piecewise([E.power(S, p), E.power(S, q)], [1.0]),
                            label=f"s^{p} | s^{q}")
    if catalog_id == "piecewise_power":
        spec = build_piecewise_power(params["ell"], params["m"], params["p"],
                                     params["p_star"], params.get("n_segments", 4))
        return spec.to_nonlinearity()
    if catalog_id == "power_band":
        p, c1, c2 = params["p"], params.get("c1", 1.0), params.get("c2", 2.0)
        need(p > 1, "p > 1")
        need(0 < c1 <= c2, "0 < c1 <= c2")
        if n is not None:
            p_star = float(critical_exponents(n, case).p_star)
            need(p <= p_star, f"p <= p_star={p_star:g}")
        band = C(c1) + C((c2 - c1) / 2) * (C(1) + E.sin(E.log(C(1) + S)))
        return Nonlinearity(band * E.power(S, p), label=f"power_band(p={p})")
    if catalog_id == "estimate_counterexample":
        p = params["p"]
        need(n is not None and n >= 3, "n >= 3")
        need(p > n / (n - 2), f"p > n/(n-2) violated (p={p}, n={n})")
        A, B = counterexample_coefficients(n, p)
        res = counterexample_residual(n, p, A, B)
        if not res < 1e-10:
            raise NumericalFailure(f"closed-form residual {res:.3g} exceeds 1e-10; coefficients wrong")
        f = (C(A) + C(B) * E.fmin(E.power(S, p - 1), 1)) * E.power(S, p)
        return Nonlinearity(f, label=f"counterexample(n={n},p={p},A={A:g},B={B:g})")
    if catalog_id == "two_branch":
        need(n is not None, "dimension n required")
        return _two_branch(params["m"], params["q"], n)
    if catalog_id == "toggle":
        p, a = params.get("p", 2.0), params.get("a", 1.0)
        need(a > 0, "a > 0")
        return Nonlinearity(E.power(S, C(p) + C(a) * E.sin(E.log(C(1) + S))),
                            label=f"toggle(p={p},a={a})")
    if catalog_id == "slow":
        p = params.get("p", 2.0)
        kind = params["kind"]
        rest = {k: v for k, v in params.items() if k not in ("p", "kind", "two_sided", "n", "case")}
        L = slow_factor(kind, params.get("two_sided", True), **rest)
        return Nonlinearity(E.power(S, p) * L, label=f"s^{p} L_{kind}")
    raise PreconditionError(f"unknown catalog id {catalog_id!r}; known: {', '.join(CATALOG_IDS)}")


# --------------------------------------------------------------------------
# vectorised panel quadrature on log grids

_GL_X, _GL_W = np.polynomial.legendre.leggauss(16)


def panel_increments(log_integrand, u_edges, breaks_log=(), max_width: float = 0.25):
    """``∫_{u_i}^{u_{i+1}} exp(log_integrand(u)) du`` for consecutive edges.

    Each interval is split at the given log breakpoints and into panels no
    wider than ``max_width``; every panel uses 16-point Gauss-Legendre.
    """
    u_edges = np.asarray(u_edges, dtype=float)
    if np.any(np.diff(u_edges) <= 0):
        raise PreconditionError("edges must be strictly increasing")
    brk = np.asarray(sorted(breaks_log), dtype=float)
    lo_list, hi_list, owner = [], [], []
    for i, (a, b) in enumerate(zip(u_edges[:-1], u_edges[1:])):
        cuts = [a, *brk[(brk > a) & (brk < b)], b]
        for c0, c1 in zip(cuts[:-1], cuts[1:]):
            k = max(1, math.ceil((c1 - c0) / max_width))
            e = np.linspace(c0, c1, k + 1)
            lo_list.append(e[:-1])
            hi_list.append(e[1:])
            owner.append(np.full(k, i))
    lo, hi, own = np.concatenate(lo_list), np.concatenate(hi_list), np.concatenate(owner)
    half = 0.5 * (hi - lo)
    nodes = (0.5 * (hi + lo))[:, None] + half[:, None] * _GL_X[None, :]
    vals = np.exp(np.asarray(log_integrand(nodes), dtype=float))
    panel = half * (vals @ _GL_W)
    return np.bincount(own, weights=panel, minlength=len(u_edges) - 1)


def tilde_f_grid(f: NonlinearityLike, s_grid, tol: float = 1e-10) -> np.ndarray:
    """``f̃`` on an increasing positive grid (one quadrature plus panel sums)."""
    f = as_nonlinearity(f)
    s_grid = np.asarray(s_grid, dtype=float)
    if f.tilde is not None:
        return np.asarray(f.tilde.value(s_grid), dtype=float)
    first = tilde_f(f, float(s_grid[0]), tol)
    brk = [math.log(b) for b in f.expr.breakpoints()]
    inc = panel_increments(f.log_at, np.log(s_grid), brk)
    return first + np.concatenate([[0.0], np.cumsum(inc)])
