"""Blow-up of ``y' = f(y)``: time by quadrature, trajectory by inversion.

With ``H(s) = ∫_s^∞ dz/f(z)`` the solution satisfies ``H(y(t)) = T - t``.
All integrals run in ``u = log z`` where the integrand is
``exp(u - log f(e^u))``.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, optimize

from .errors import DivergentIntegralError, NumericalFailure, PreconditionError
from .nonlinearity import NonlinearityLike, _quad, as_nonlinearity, panel_increments

TAIL_SLOPE_MAX = -0.05


def _log_integrand(f):
    return lambda u: np.asarray(u) - f.log_at(u)


def _breaks_log(f) -> list[float]:
    return [math.log(b) for b in f.expr.breakpoints()]


def tail_probe(f: NonlinearityLike) -> float:
    """Slope of ``log(s/f(s))`` against ``log s`` on ``s in [1e6, 1e12]``.

    Raises :class:`DivergentIntegralError` unless it is below ``-0.05``.
    """
    f = as_nonlinearity(f)
    ls = np.log(np.logspace(6, 12, 7))
    y = ls - f.log_at(ls)
    slope = float(np.polyfit(ls, y, 1)[0]) if np.all(np.isfinite(y)) else math.nan
    if not slope < TAIL_SLOPE_MAX:
        raise DivergentIntegralError(
            f"non-integrable tail: s/f(s) decays with exponent {slope:.3g} >= {TAIL_SLOPE_MAX}")
    return slope


def H_value(f: NonlinearityLike, y: float, tol: float = 1e-12) -> float:
    """``H(y) = ∫_y^∞ dz/f(z)`` by adaptive quadrature."""
    f = as_nonlinearity(f)
    if not y > 0:
        raise PreconditionError(f"need y > 0, got {y!r}")
    u0 = math.log(y)
    g = _log_integrand(f)

    def h(u):
        return math.exp(float(g(u)))

    pts = [b for b in _breaks_log(f) if b > u0]
    if pts:
        top = max(pts) + 1.0
        return _quad(h, u0, top, tol, points=pts) + _quad(h, top, math.inf, tol)
    return _quad(h, u0, math.inf, tol)


def blowup_time(f: NonlinearityLike, y0: float, tol: float = 1e-12) -> float:
    """Blow-up time ``T = H(y0)`` after the tail integrability probe."""
    f = as_nonlinearity(f)
    if not y0 > 0:
        raise PreconditionError(f"need y0 > 0, got {y0!r}")
    tail_probe(f)
    return H_value(f, y0, tol)


def H_grid(f: NonlinearityLike, y, tol: float = 1e-12) -> np.ndarray:
    """``H`` at many points: one quadrature at the top, panel sums below it."""
    f = as_nonlinearity(f)
    y = np.asarray(y, dtype=float)
    order = np.argsort(y)
    us = np.log(y[order])
    uniq, inv = np.unique(us, return_inverse=True)
    top = H_value(f, float(np.exp(uniq[-1])), tol)
    if len(uniq) == 1:
        vals = np.array([top])
    else:
        inc = panel_increments(_log_integrand(f), uniq, _breaks_log(f))
        vals = top + np.concatenate([np.cumsum(inc[::-1])[::-1], [0.0]])
    out = np.empty_like(y)
    out[order] = vals[inv]
    return out


@dataclass(frozen=True)
class BlowupProfile:
    y0: float
    T: float
    t: np.ndarray
    y: np.ndarray
    rho: np.ndarray
    tau: np.ndarray          # T - t, carried separately to avoid cancellation

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["t", "y", "rho", "T_minus_t"])
            for row in zip(self.t, self.y, self.rho, self.tau):
                w.writerow([repr(float(v)) for v in row])


def _solve_tau(f, tau, T, u0, tol=1e-13):
    """Invert ``H(e^u) = tau`` for increasing ``tau`` (decreasing ``u``).

    The first target is bracketed against adaptive quadrature of H; every
    later one adds panel integrals to the previous anchor, so H is built from
    positive increments only.
    """
    g = _log_integrand(f)
    brk = _breaks_log(f)
    us = np.empty(len(tau))
    Hs = np.empty(len(tau))

    # smallest tau: bracket by doubling then Brent on log H
    t0 = float(tau[0])
    hi = u0 + 1.0
    while H_value(f, math.exp(hi)) > t0:
        hi = u0 + 2 * (hi - u0)
        if hi > 700:
            raise NumericalFailure("cannot bracket the blow-up profile")
    u_a = optimize.brentq(lambda u: math.log(H_value(f, math.exp(u))) - math.log(t0),
                          u0, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps)
    H_a = H_value(f, math.exp(u_a))
    us[0], Hs[0] = u_a, H_a

    for i in range(1, len(tau)):
        target = float(tau[i])
        lo, hi_b = u0, u_a
        u = u_a
        H_u = H_a
        for _ in range(100):
            if abs(H_u - target) <= tol * target:
                break
            dH = -math.exp(float(g(u)))
            step = (H_u - target) / dH
            u_new = u - step
            if not lo < u_new < hi_b:
                u_new = 0.5 * (lo + hi_b)
            u = u_new
            H_u = H_a + (float(panel_increments(g, [u, u_a], brk)[0]) if u < u_a else 0.0)
            if H_u > target:
                lo = u
            else:
                hi_b = u
        else:
            raise NumericalFailure(f"inversion did not converge at T-t={target!r}")
        us[i], Hs[i] = u, H_u
        u_a, H_a = u, H_u
    return us, Hs


def trajectory_tau(f: NonlinearityLike, y0: float, tau, T: float | None = None) -> BlowupProfile:
    """Profile at prescribed ``T - t`` values in ``(0, T]``."""
    f = as_nonlinearity(f)
    T = blowup_time(f, y0) if T is None else T
    tau = np.asarray(tau, dtype=float)
    if np.any(tau <= 0) or np.any(tau > T * (1 + 1e-14)):
        raise PreconditionError("T - t must lie in (0, T]")
    order = np.argsort(tau)
    us, Hs = _solve_tau(f, tau[order], T, math.log(y0))
    u = np.empty_like(us)
    u[order] = us
    y = np.exp(u)
    rho = np.exp(f.log_at(u) - u) * tau
    return BlowupProfile(y0=float(y0), T=T, t=T - tau, y=y, rho=rho, tau=tau)


def trajectory(f: NonlinearityLike, y0: float, t_grid) -> BlowupProfile:
    """Profile at times ``t_grid ⊂ [0, T)``."""
    f = as_nonlinearity(f)
    T = blowup_time(f, y0)
    t = np.asarray(t_grid, dtype=float)
    if np.any(t < 0) or np.any(t >= T):
        raise PreconditionError(f"times must lie in [0, T) with T={T!r}")
    if np.any(np.diff(t) <= 0):
        raise PreconditionError("t_grid must be strictly increasing")
    prof = trajectory_tau(f, y0, T - t, T)
    return BlowupProfile(prof.y0, T, t, prof.y, prof.rho, prof.tau)


@dataclass(frozen=True)
class RateCheck:
    rho_min: float
    rho_max: float
    passed: bool
    profile: BlowupProfile


def verify_rate(f: NonlinearityLike, y0: float, window=None, decades: float = 8.0,
                count: int = 161) -> RateCheck:
    """Min and max of ``ρ`` on a log grid in ``T - t``.

    ``window = (t_a, t_b)``; by default ``T - t`` spans ``[10^-decades T, T/2]``.
    """
    f = as_nonlinearity(f)
    T = blowup_time(f, y0)
    if window is None:
        tau = np.logspace(math.log10(T) - decades, math.log10(0.5 * T), count)
    else:
        ta, tb = window
        if not 0 < ta < tb < T:
            raise PreconditionError("window must satisfy 0 < t_a < t_b < T")
        tau = np.logspace(math.log10(T - tb), math.log10(T - ta), count)
    prof = trajectory_tau(f, y0, tau, T)
    lo, hi = float(prof.rho.min()), float(prof.rho.max())
    return RateCheck(lo, hi, bool(lo > 0 and math.isfinite(hi)), prof)


def rk_crosscheck(f: NonlinearityLike, y0: float, frac: float = 0.9, count: int = 50) -> float:
    """Max relative gap between DOP853 and the inversion profile on ``[0, frac T]``."""
    f = as_nonlinearity(f)
    T = blowup_time(f, y0)
    t = np.linspace(0.0, frac * T, count)
    sol = integrate.solve_ivp(lambda _t, y: f(y), (0.0, t[-1]), [y0], method="DOP853",
                              t_eval=t, rtol=1e-13, atol=1e-300)
    if not sol.success:
        raise NumericalFailure(sol.message)
    prof = trajectory(f, y0, t)
    return float(np.max(np.abs(sol.y[0] / prof.y - 1)))
