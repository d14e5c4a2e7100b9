"""Radial shooting for ``-(r^{n-1} v')' = r^{n-1} f(v)``.

The system is integrated in ``(v, w)`` with ``w = r^{n-1} v'``, starting
from the centre series ``v0 - f(v0) r^2/(2n) + ...``. ``f`` is extended by 0
for negative arguments.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from .errors import PreconditionError
from .exponents import critical_exponents
from .nonlinearity import NonlinearityLike, antiderivative_F, as_nonlinearity

CROSSES_ZERO = "CrossesZero"
POSITIVE_GLOBAL = "PositiveGlobal"
INCONCLUSIVE = "Inconclusive"


@dataclass
class ShootResult:
    outcome: str
    v0: float
    n: int
    R: float | None
    r: np.ndarray
    v: np.ndarray
    dv: np.ndarray
    diagnostics: dict = field(default_factory=dict)
    dense: object = field(default=None, repr=False)

    def at(self, r) -> np.ndarray:
        """Dense-output value of ``v`` (series below the first step)."""
        r = np.asarray(r, dtype=float)
        r0 = self.diagnostics["r_start"]
        out = np.empty_like(r)
        small = r < r0
        c2, c4 = self.diagnostics["series"]
        out[small] = self.v0 + c2 * r[small] ** 2 + c4 * r[small] ** 4
        if np.any(~small):
            out[~small] = self.dense(r[~small])[0]
        return out

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["r", "v", "dv"])
            for row in zip(self.r, self.v, self.dv):
                w.writerow([repr(float(x)) for x in row])

    def summary(self) -> dict:
        d = {k: v for k, v in self.diagnostics.items() if k != "series"}
        return {"outcome": self.outcome, "v0": self.v0, "n": self.n, "R": self.R, **d}


def _series(f, n, v0):
    a = float(f(v0))
    b = float(f.deriv(v0))
    c2 = -a / (2 * n)
    c4 = a * b / (8 * n * (n + 2))
    return c2, c4


def shoot(f: NonlinearityLike, n: int, v0: float, r_max: float = 1e3,
          rtol: float = 1e-12) -> ShootResult:
    """Shoot from ``v(0) = v0``, ``v'(0) = 0`` until a zero or ``r_max``."""
    f = as_nonlinearity(f)
    if not v0 > 0:
        raise PreconditionError(f"need v0 > 0, got {v0!r}")
    if int(n) != n or n < 1:
        raise PreconditionError(f"need integer n >= 1, got {n!r}")
    n = int(n)
    c2, c4 = _series(f, n, v0)
    # start where the neglected r^6 term is far below rtol
    scale = max(abs(c2) / v0, math.sqrt(abs(c4) / v0), 1e-300)
    r0 = min(1e-3, 1e-3 / math.sqrt(scale))
    v_start = v0 + c2 * r0 ** 2 + c4 * r0 ** 4
    w_start = r0 ** (n - 1) * (2 * c2 * r0 + 4 * c4 * r0 ** 3)

    def rhs(r, y):
        v, w = y
        fv = float(f(v)) if v > 0 else 0.0
        return [w / r ** (n - 1), -(r ** (n - 1)) * fv]

    def zero(r, y):
        return y[0]
    zero.terminal = True
    zero.direction = -1

    sol = integrate.solve_ivp(rhs, (r0, r_max), [v_start, w_start], method="DOP853",
                              rtol=rtol, atol=[1e-300, 1e-300], events=zero,
                              dense_output=True)
    diag = {"r_start": r0, "series": (c2, c4), "nfev": int(sol.nfev),
            "status": int(sol.status), "message": str(sol.message)}
    r, v, w = sol.t, sol.y[0], sol.y[1]
    dv = w / r ** (n - 1)
    base = dict(v0=float(v0), n=n, r=r, v=v, dv=dv, diagnostics=diag, dense=sol.sol)
    if sol.status < 0 or not np.all(np.isfinite(sol.y)):
        return ShootResult(outcome=INCONCLUSIVE, R=None, **base)
    # while v > 0: v' <= 0 and r^{n-1} v' nonincreasing
    pos = v > 0
    mono_ok = bool(np.all(w[pos] <= 0) and np.all(np.diff(w[pos]) <= 1e-14 * np.abs(w[pos][1:]).max(initial=0)))
    diag["monotone"] = mono_ok
    if not mono_ok:
        return ShootResult(outcome=INCONCLUSIVE, R=None, **base)
    if sol.status == 1 and len(sol.t_events[0]):
        return ShootResult(outcome=CROSSES_ZERO, R=float(sol.t_events[0][0]), **base)
    tail = r >= r[-1] / 10
    if np.count_nonzero(tail) >= 3:
        diag["decay_exponent"] = float(np.polyfit(np.log(r[tail]), np.log(v[tail]), 1)[0])
    return ShootResult(outcome=POSITIVE_GLOBAL, R=None, **base)


def integral_identity_gap(res: ShootResult, f: NonlinearityLike, checkpoints) -> float:
    """Max relative gap in ``r^{n-1} v'(r) = -∫_0^r ρ^{n-1} f(v(ρ)) dρ``."""
    f = as_nonlinearity(f)
    n = res.n
    worst = 0.0
    for rc in checkpoints:
        lhs = float(res.dense(rc)[1])

        def g(rho):
            v = float(res.at(rho)[()])
            return rho ** (n - 1) * (float(f(v)) if v > 0 else 0.0)

        val, _ = integrate.quad(g, 0.0, rc, epsabs=0.0, epsrel=1e-12, limit=500)
        worst = max(worst, abs(lhs + val) / abs(val))
    return worst


@dataclass
class SearchSummary:
    n: int
    function: str
    outcomes: dict
    existence_corroborated: bool

    def to_dict(self) -> dict:
        return {"n": self.n, "function": self.function, "outcomes": self.outcomes,
                "existence_corroborated": self.existence_corroborated}


def entire_solution_search(f: NonlinearityLike, n: int, v0_grid, r_max: float = 1e3) -> SearchSummary:
    """Tabulate shooting outcomes; existence is corroborated by any positive shot."""
    f = as_nonlinearity(f)
    outcomes = {}
    for v0 in v0_grid:
        res = shoot(f, n, float(v0), r_max)
        outcomes[repr(float(v0))] = {"outcome": res.outcome, "R": res.R,
                                     "v_at_rmax": float(res.v[-1]) if res.outcome == POSITIVE_GLOBAL else None}
    ok = any(o["outcome"] == POSITIVE_GLOBAL for o in outcomes.values())
    return SearchSummary(n, str(f), outcomes, ok)


@dataclass(frozen=True)
class SingularSteadyState:
    p: float
    n: int
    beta: float
    c_p: float

    def __call__(self, r):
        return self.c_p * np.asarray(r, dtype=float) ** (-self.beta)

    def residual(self, r=None) -> float:
        """Max relative residual of ``-Δu - u^p`` (closed-form derivatives)."""
        r = np.logspace(-3, 0, 1001) if r is None else np.asarray(r, float)
        b, c, n = self.beta, self.c_p, self.n
        u = c * r ** -b
        lap = c * b * (b + 2 - n) * r ** (-b - 2)
        return float(np.max(np.abs(-lap - u ** self.p) / u ** self.p))


def singular_steady_state(p: float, n: int) -> SingularSteadyState:
    """``u = c_p r^{-β}``, ``β = 2/(p-1)``, ``c_p = [β(n-2-β)]^{1/(p-1)}``."""
    if int(n) != n or n < 3:
        raise PreconditionError(f"need n >= 3, got {n!r}")
    ex = critical_exponents(int(n))
    if not float(ex.p_sg) < p < float(ex.p_S):
        raise PreconditionError(
            f"need p_sg={float(ex.p_sg):g} < p < p_S={float(ex.p_S):g}, got p={p!r}")
    beta = 2.0 / (p - 1.0)
    coef = beta * (n - 2 - beta)
    if not coef > 0:
        raise PreconditionError(f"degenerate coefficient β(n-2-β)={coef!r}")
    out = SingularSteadyState(float(p), int(n), beta, coef ** (1.0 / (p - 1.0)))
    res = out.residual()
    if not res < 1e-12:
        raise PreconditionError(f"singular solution residual {res:.3g} exceeds 1e-12")
    return out


def pohozaev_phi(f: NonlinearityLike, n: int, s_grid) -> dict:
    """``φ(s) = s f(s) - (p_S+1) F(s)`` on a grid and where it is nonnegative."""
    f = as_nonlinearity(f)
    p_S = float(critical_exponents(n).p_S)
    if not math.isfinite(p_S):
        raise PreconditionError("needs n >= 3")
    s = np.asarray(s_grid, dtype=float)
    phi = np.array([si * float(f(si)) - (p_S + 1) * antiderivative_F(f, si) for si in s])
    nonneg = phi >= 0
    # largest s0 with φ >= 0 on the whole sampled [s_min, s0]
    k = len(s) if np.all(nonneg) else int(np.argmin(nonneg))
    return {"s": s, "phi": phi, "s0": float(s[k - 1]) if k > 0 else None}
