"""Sampled corroboration and falsification of function-class hypotheses.

Every check here works on finite grids and therefore never proves class
membership. Reports always carry the grid they were computed on. All
ratios ``f(λs)/f(λ)`` are formed as differences of ``log f`` so nothing is
ever evaluated as ``inf/inf``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .errors import PreconditionError
from .exponents import critical_exponents
from .nonlinearity import NonlinearityLike, as_nonlinearity, tilde_f_grid

RV_TOL = 0.02
CV_MIN = 1e-6


def _grid_info(arr) -> dict:
    a = np.asarray(arr, dtype=float)
    return {"min": float(a.min()), "max": float(a.max()), "count": int(a.size)}


@dataclass
class VariationReport:
    """Outcome of a regular/controlled variation probe."""

    function: str
    check: str
    location: str
    verdict: str
    index: float | None = None
    residual: float | None = None
    grid: dict = field(default_factory=dict)
    witness: dict | None = None
    params: dict = field(default_factory=dict)
    detail: dict = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        out = {"function": self.function, "check": self.check, "grid": self.grid,
               "verdict": self.verdict,
               "params": {**self.params, "location": self.location,
                          "index": self.index, "residual": self.residual, **self.detail}}
        if self.witness is not None:
            out["witness"] = self.witness
        return out


@dataclass
class HypothesisReport:
    """Per-condition verdicts for one theorem's hypothesis set."""

    function: str
    check: str
    verdict: str
    conditions: dict[str, dict]
    grid: dict
    params: dict = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        return {"function": self.function, "check": self.check, "grid": self.grid,
                "verdict": self.verdict, "params": {**self.params, "conditions": self.conditions}}


# --------------------------------------------------------------------------
# log-ratio helpers

def default_lambda_logs(location: str, deep: bool = False) -> np.ndarray:
    """``log λ`` values ordered toward ``location``.

    The default grid has one point per decade over ``1e4..1e10`` (or
    ``1e-10..1e-4`` at 0). The deep grid uses ``log λ = ±10^k``, k = 2..12,
    for factors whose deviation from a power decays like a root of
    ``log λ``.
    """
    if deep:
        ll = 10.0 ** np.arange(2, 13)
    else:
        ll = np.log(10.0) * np.arange(4, 11)
    if location == "inf":
        return ll
    if location == "0":
        return -ll
    raise PreconditionError(f"location must be '0' or 'inf', got {location!r}")


def default_s_grid() -> np.ndarray:
    return np.logspace(math.log10(1 / 8), math.log10(8), 33)


def _log_ratio(f, log_lam, log_s):
    """``log f(λs) - log f(λ)`` for all grid pairs, shape ``(len(λ), len(s))``."""
    log_lam = np.asarray(log_lam, dtype=float)[:, None]
    log_s = np.asarray(log_s, dtype=float)[None, :]
    return f.log_at(log_lam + log_s) - f.log_at(log_lam)


# --------------------------------------------------------------------------
# regular variation

def estimate_rv_index(f: NonlinearityLike, location: str = "inf", lam_grid=None,
                      s_grid=None, tol: float = RV_TOL, deep: bool = False) -> VariationReport:
    """Estimate the regular-variation index of ``f`` at ``0`` or ``∞``.

    For each λ the slope of ``log[f(λs)/f(λ)]`` against ``log s`` is fitted
    by least squares. The index is the intercept of a linear fit of the last
    three slopes against ``1/|log λ|``, which removes the leading
    correction of logarithmic factors.

    ``lam_grid`` holds λ values (not logs) ordered toward the location.
    """
    f = as_nonlinearity(f)
    location = str(location)
    if lam_grid is None:
        log_lam = default_lambda_logs(location, deep)
    else:
        log_lam = np.log(np.asarray(lam_grid, dtype=float))
    s = default_s_grid() if s_grid is None else np.asarray(s_grid, dtype=float)
    if s.min() < 1 / 8 - 1e-15 or s.max() > 8 + 1e-15:
        raise PreconditionError("s_grid must lie in [1/8, 8]")
    if len(log_lam) < 3:
        raise PreconditionError("need at least three λ values")
    ls = np.log(s)
    R = _log_ratio(f, log_lam, ls)
    grid = {"log_lambda": [float(x) for x in log_lam], "s": _grid_info(s)}
    base = dict(function=str(f), check="regular_variation", location=location, grid=grid,
                params={"tol": tol})
    if not np.all(np.isfinite(R)):
        i, j = np.argwhere(~np.isfinite(R))[0]
        return VariationReport(verdict="inconclusive",
                               witness={"log_lambda": float(log_lam[i]), "s": float(s[j]),
                                        "reason": "log f not finite"}, **base)
    A = np.vstack([ls, np.ones_like(ls)]).T
    coef, *_ = np.linalg.lstsq(A, R.T, rcond=None)
    slopes = coef[0]
    resid = np.max(np.abs(R - (coef[0][:, None] * ls[None, :] + coef[1][:, None])), axis=1)
    last = slopes[-3:]
    spread = float(np.ptp(last))
    x = 1.0 / np.abs(log_lam[-3:])
    index = float(np.polyfit(x, last, 1)[1])
    detail = {"slopes": [float(v) for v in slopes], "spread_last3": spread}
    max_res = float(resid.max())
    if spread < tol and max_res < tol:
        return VariationReport(verdict="regular", index=index, residual=max_res,
                               detail=detail, **base)
    first_spread = float(np.ptp(slopes[:3]))
    if spread > 1.0 and spread >= first_spread:
        # slopes oscillate with non-shrinking amplitude of order one or more
        i = int(np.argmax(np.abs(slopes - np.median(slopes))))
        j = int(np.argmax(np.abs(R[i] - np.median(slopes) * ls)))
        witness = {"lambda_log": float(log_lam[i]), "s": float(s[j]),
                   "log_ratio": float(R[i, j]), "slope": float(slopes[i])}
        return VariationReport(verdict="falsified", index=None, residual=max_res,
                               witness=witness, detail=detail, **base)
    return VariationReport(verdict="inconclusive", index=float(slopes[-1]), residual=max_res,
                           detail=detail, **base)


# --------------------------------------------------------------------------
# controlled variation and superlinearity

def default_cv_lambda_logs(extent: float = 10.0, count: int = 401) -> np.ndarray:
    return np.linspace(-extent, extent, count) * math.log(10.0)


def controlled_variation_inf(f: NonlinearityLike, s_compact=(0.5, 2.0), lam_grid=None,
                             n_s: int = 33, floor: float = CV_MIN) -> VariationReport:
    """Sampled ``inf f(λs)/f(λ)`` over λ in the grid and ``s`` in a compact.

    ``lam_grid`` holds λ values; default is 401 points log-spaced over
    ``[1e-10, 1e10]``. Verdict ``positive`` when the sampled infimum is at
    least ``floor``, ``falsified`` with the minimising pair otherwise.
    """
    f = as_nonlinearity(f)
    lo, hi = map(float, s_compact)
    if not 0 < lo <= hi < math.inf:
        raise PreconditionError("s_compact must be [s_lo, s_hi] inside (0, inf)")
    log_lam = default_cv_lambda_logs() if lam_grid is None else np.log(np.asarray(lam_grid, float))
    ls = np.linspace(math.log(lo), math.log(hi), n_s)
    R = _log_ratio(f, log_lam, ls)
    i, j = np.unravel_index(int(np.nanargmin(R)), R.shape)
    log_inf = float(R[i, j])
    grid = {"lambda": _grid_info(np.exp(log_lam)), "s": _grid_info(np.exp(ls))}
    witness = {"lambda_log": float(log_lam[i]), "s": float(math.exp(ls[j])), "log_ratio": log_inf}
    positive = log_inf >= math.log(floor)
    return VariationReport(
        function=str(f), check="controlled_variation", location="all",
        verdict="positive" if positive else "falsified",
        index=None, residual=None, grid=grid,
        witness=None if positive else witness,
        params={"s_compact": [lo, hi], "floor": floor},
        detail={"inf": math.exp(log_inf), "log_inf": log_inf, "argmin": witness})


def classify(f: NonlinearityLike, location: str = "inf", deep: bool = False) -> VariationReport:
    """Regular-variation probe, downgraded to ``controlled-only`` when applicable."""
    rv = estimate_rv_index(f, location, deep=deep)
    if rv.verdict == "regular":
        return rv
    cv = controlled_variation_inf(f)
    if cv.verdict == "positive":
        rv.verdict = "controlled-only"
        rv.detail["controlled_inf"] = cv.detail["inf"]
    return rv


def superlinearity_profile(f: NonlinearityLike, s_grid=None, lam_grid=None,
                           threshold: float = 10.0) -> VariationReport:
    """Profile ``P(s) = inf_λ f(λs)/(s f(λ))`` on an increasing s-grid."""
    f = as_nonlinearity(f)
    s = np.logspace(0, 6, 25) if s_grid is None else np.asarray(s_grid, dtype=float)
    if np.any(np.diff(s) <= 0):
        raise PreconditionError("s_grid must be increasing")
    log_lam = default_cv_lambda_logs() if lam_grid is None else np.log(np.asarray(lam_grid, float))
    ls = np.log(s)
    R = _log_ratio(f, log_lam, ls) - ls[None, :]
    log_prof = R.min(axis=0)
    prof = np.exp(np.minimum(log_prof, 700.0))
    upper = log_prof[len(log_prof) // 2:]
    increasing = bool(np.all(np.diff(upper) >= -1e-9))
    ok = bool(prof[-1] > threshold and increasing)
    i = int(np.argmin(R[:, -1]))
    witness = None if ok else {"lambda_log": float(log_lam[i]), "s": float(s[-1]),
                               "ratio": float(prof[-1])}
    return VariationReport(
        function=str(f), check="superlinearity", location="inf",
        verdict="superlinear" if ok else "falsified", grid={
            "s": [float(v) for v in s], "lambda": _grid_info(np.exp(log_lam))},
        witness=witness, params={"threshold": threshold},
        detail={"profile": [float(v) for v in prof]})


# --------------------------------------------------------------------------
# monotone quotients

@dataclass
class MonotoneResult:
    passed: bool
    m: float
    witness: dict | None
    grid: dict

    def to_dict(self) -> dict:
        return {"passed": self.passed, "m": self.m, "witness": self.witness, "grid": self.grid}


def default_monotone_grid() -> np.ndarray:
    return np.logspace(-12, 12, 10001)


def monotone_quotient_check(f: NonlinearityLike, m: float, s_grid=None,
                            rtol: float = 1e-13) -> MonotoneResult:
    """Check that ``s^{-m} f(s)`` is nonincreasing on a log grid.

    Adjacent values may increase by at most ``rtol`` relative. The witness
    is the pair with the largest relative increase.
    """
    f = as_nonlinearity(f)
    s = default_monotone_grid() if s_grid is None else np.asarray(s_grid, dtype=float)
    ls = np.log(s)
    lq = f.log_at(ls) - m * ls
    d = np.diff(lq)
    i = int(np.argmax(d))
    passed = bool(d[i] <= rtol)
    witness = None if passed else {"s": float(s[i]), "s_next": float(s[i + 1]),
                                   "log_increase": float(d[i])}
    return MonotoneResult(passed, float(m), witness, _grid_info(s))


def quotient_bound_check(f: NonlinearityLike, p: float, s_grid=None) -> MonotoneResult:
    """Check ``f(s) <= p f̃(s)`` on a grid.

    On ``(0, ∞)`` this is equivalent to ``s^{-p} f̃(s)`` being
    nonincreasing, since ``s f̃'(s) = f(s)``.
    """
    f = as_nonlinearity(f)
    s = np.logspace(-8, 8, 2049) if s_grid is None else np.asarray(s_grid, dtype=float)
    ratio = np.exp(f.log_at(np.log(s))) / tilde_f_grid(f, s)
    i = int(np.argmax(ratio))
    passed = bool(ratio[i] <= p * (1 + 1e-12))
    witness = None if passed else {"s": float(s[i]), "f_over_tilde": float(ratio[i])}
    return MonotoneResult(passed, float(p), witness, _grid_info(s))


# --------------------------------------------------------------------------
# growth bounds from regular variation

def power_growth_bound(f: NonlinearityLike, m0: float, m_inf: float, s_grid=None,
                       lam_grid=None) -> dict:
    """Exhibit ``c, q`` with ``inf_λ f(λs)/f(λ) >= c s^q`` for sampled ``s >= 1``.

    Uses ``q = 1 + (min(m0, m_inf) - 1)/2`` from the estimated indices.
    """
    if not (m0 > 1 and m_inf > 1):
        raise PreconditionError("need both indices > 1")
    f = as_nonlinearity(f)
    q = 1.0 + 0.5 * (min(m0, m_inf) - 1.0)
    s = np.logspace(0, 8, 65) if s_grid is None else np.asarray(s_grid, dtype=float)
    log_lam = default_cv_lambda_logs() if lam_grid is None else np.log(np.asarray(lam_grid, float))
    ls = np.log(s)
    g = _log_ratio(f, log_lam, ls).min(axis=0)
    log_c = float(np.min(g - q * ls))
    return {"q": q, "c": math.exp(log_c), "log_c": log_c, "passed": log_c > math.log(CV_MIN),
            "grid": {"s": _grid_info(s), "lambda": _grid_info(np.exp(log_lam))}}


# --------------------------------------------------------------------------
# hypothesis set for the parabolic Liouville theorem with f̃

def _interior_grid(lo: float, hi: float, count: int) -> np.ndarray:
    return lo + (hi - lo) * (np.arange(count) + 0.5) / count


def liouville_hypothesis_check(f: NonlinearityLike, n: int, m_count: int = 64,
                               s_grid=None, p_count: int = 64,
                               slope_tol: float = 1e-6) -> HypothesisReport:
    """Sampled check of the ``f̃``-based parabolic Liouville hypotheses.

    Condition ``bound``: ``f <= p f̃`` for some ``p`` in ``(1, p_B)``.
    Condition ``growth``: ``f >= c s^{m_i} f̃^{2 m_i - 1}`` on ``(0,1]``
    (i=1) and ``(1,∞)`` (i=2) with ``2/3 < m_2 < m_1 < m*``. The search
    runs over an ``m_count`` x ``m_count`` grid; a branch exponent is
    feasible when the sampled infimum is positive and the log ratio does not
    trend to ``-∞`` at the far end of its branch.
    """
    f = as_nonlinearity(f)
    ex = critical_exponents(n, "parabolic")
    p_B = float(ex.p_B)
    m_star = float(ex.m_star)
    s = np.logspace(-8, 8, 512) if s_grid is None else np.asarray(s_grid, dtype=float)
    ls = np.log(s)
    lf = f.log_at(ls)
    lt = np.log(tilde_f_grid(f, s))
    ratio_max = float(np.max(np.exp(lf - lt)))
    p_grid = _interior_grid(1.0, p_B, p_count) if math.isfinite(p_B) else np.linspace(1.01, 50, p_count)
    p_pass = [float(p) for p in p_grid if ratio_max <= p]
    bound = {"verdict": bool(p_pass), "sup_f_over_tilde": ratio_max,
             "passing_p": p_pass[:3] + (["..."] if len(p_pass) > 3 else [])}
    if not p_pass:
        i = int(np.argmax(lf - lt))
        bound["witness"] = {"s": float(s[i]), "f_over_tilde": ratio_max}

    m_grid = _interior_grid(2.0 / 3.0, m_star, m_count)
    w1, w2 = s <= 1, s > 1

    def branch(m, mask, far_end):
        r = lf[mask] - m * ls[mask] - (2 * m - 1) * lt[mask]
        x = ls[mask]
        k = max(8, len(x) // 16)
        if far_end == "hi":
            slope = np.polyfit(x[-k:], r[-k:], 1)[0]
            ok_tail = slope >= -slope_tol
        else:
            slope = np.polyfit(x[:k], r[:k], 1)[0]
            ok_tail = slope <= slope_tol
        c = math.exp(float(r.min()))
        return (ok_tail and c > 0), c, float(slope)

    b1 = [branch(m, w1, "lo") for m in m_grid]
    b2 = [branch(m, w2, "hi") for m in m_grid]
    best = {"c1": 0.0, "c2": 0.0, "m1": None, "m2": None}
    feasible_cells = 0
    for i, m1 in enumerate(m_grid):
        for j, m2 in enumerate(m_grid):
            if not (m2 < m1 and b1[i][0] and b2[j][0]):
                continue
            feasible_cells += 1
            if b1[i][1] > best["c1"]:
                best.update(c1=b1[i][1], m1=float(m1))
            if b2[j][1] > best["c2"]:
                best.update(c2=b2[j][1], m2=float(m2))
    feas1 = [float(m) for m, b in zip(m_grid, b1) if b[0]]
    feas2 = [float(m) for m, b in zip(m_grid, b2) if b[0]]
    growth = {"verdict": feasible_cells > 0, "feasible_cells": feasible_cells, "best": best,
              "m1_feasible_range": [min(feas1), max(feas1)] if feas1 else None,
              "m2_feasible_range": [min(feas2), max(feas2)] if feas2 else None}
    if feasible_cells == 0:
        j = len(m_grid) - 1 if not feas2 else 0
        growth["witness"] = {"branch": "s>1" if not feas2 else "s<=1",
                             "m": float(m_grid[j]),
                             "tail_slope": b2[j][2] if not feas2 else b1[j][2]}
    verdict = "pass" if bound["verdict"] and growth["verdict"] else "fail"
    return HypothesisReport(
        function=str(f), check="parabolic_liouville_hypotheses", verdict=verdict,
        conditions={"bound": bound, "growth": growth},
        grid={"s": _grid_info(s), "m": _grid_info(m_grid), "p": _grid_info(p_grid)},
        params={"n": n, "p_B": p_B, "m_star": m_star})
