"""Explicit finite differences for ``u_t = Δu + f(u)`` with blow-up detection.

Geometries: an interval ``(a, b)``, a ball of radius ``R`` in ``R^n`` (radial
form), or the interval with Neumann ends standing in for the whole line
with spatially homogeneous data. Time stepping is SSP-RK3 (or forward
Euler) with ``dt = min(safety/max|diag Δ_h|, safety_f/max f'(u))``. The
diffusive bound keeps every stage a monotone update, so nonnegative data stay
nonnegative; the separate ``safety_f`` keeps the ODE phase near blow-up
accurate.
"""
from __future__ import annotations

import csv
import json
import math
import os
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np

from .errors import NumericalFailure, PreconditionError
from .nonlinearity import Nonlinearity, NonlinearityLike, as_nonlinearity
from .ode_blowup import H_grid

BLOW_UP = "blow-up"
GLOBAL = "global-to-horizon"
DECAYED = "decayed"


@dataclass(frozen=True)
class Geometry:
    kind: str                 # "interval", "ball" or "line"
    a: float = 0.0
    b: float = 1.0
    n: int = 1

    @staticmethod
    def interval(a: float, b: float) -> "Geometry":
        return Geometry("interval", float(a), float(b), 1)

    @staticmethod
    def ball(n: int, R: float) -> "Geometry":
        return Geometry("ball", 0.0, float(R), int(n))

    @staticmethod
    def line(a: float = 0.0, b: float = 1.0) -> "Geometry":
        return Geometry("line", float(a), float(b), 1)


@dataclass(frozen=True)
class SimOptions:
    h: float = 1.0 / 256
    safety: float = 0.9
    safety_f: float = 0.03
    cap: float = 1e12
    horizon: float = 10.0
    decay: float = 1e-10
    scheme: str = "ssprk3"
    snapshot_times: tuple = ()
    decade_snapshots: bool = True
    max_steps: int = 50_000_000


@dataclass
class Trajectory:
    geometry: Geometry
    bc: str
    x: np.ndarray
    snap_times: list
    snaps: list
    t_hist: np.ndarray
    M_hist: np.ndarray
    termination: str
    steps: int
    options: SimOptions
    dt_underflow: bool = False
    T_hat: float | None = None
    T_unc: float | None = None
    extra: dict = field(default_factory=dict)

    def manifest(self) -> dict:
        return {"geometry": asdict(self.geometry), "bc": self.bc,
                "grid": {"count": int(self.x.size), "h": self.options.h,
                         "x_min": float(self.x[0]), "x_max": float(self.x[-1])},
                "times": [float(t) for t in self.snap_times],
                "termination": self.termination, "steps": self.steps,
                "dt_underflow": self.dt_underflow,
                "T_hat": self.T_hat, "T_uncertainty": self.T_unc,
                "options": {k: (list(v) if isinstance(v, tuple) else v)
                            for k, v in asdict(self.options).items()}}

    def write_snapshots(self, outdir, prefix: str = "snap") -> str:
        """One CSV per snapshot (columns x, u) plus ``manifest.json``."""
        os.makedirs(outdir, exist_ok=True)
        files = []
        for i, (t, u) in enumerate(zip(self.snap_times, self.snaps)):
            name = f"{prefix}_{i:03d}.csv"
            with open(os.path.join(outdir, name), "w", newline="") as fh:
                w = csv.writer(fh, lineterminator="\n")
                w.writerow(["x", "u"])
                for xi, ui in zip(self.x, u):
                    w.writerow([repr(float(xi)), repr(float(ui))])
            files.append(name)
        man = self.manifest()
        man["files"] = files
        path = os.path.join(outdir, "manifest.json")
        with open(path, "w") as fh:
            json.dump(man, fh, indent=2, sort_keys=True)
            fh.write("\n")
        return path


def _stencil(geom: Geometry, bc: str, h: float):
    """Nodes and tridiagonal coefficients of the discrete Laplacian on the unknowns."""
    length = geom.b - geom.a
    N = int(round(length / h))
    if N < 4 or not math.isclose(N * h, length, rel_tol=1e-9):
        raise PreconditionError(f"h={h!r} must divide the domain length {length!r} into >= 4 cells")
    x = geom.a + h * np.arange(N + 1)
    inv = 1.0 / (h * h)
    cL = np.full(N + 1, inv)
    cR = np.full(N + 1, inv)
    cC = np.full(N + 1, -2 * inv)
    if geom.kind == "ball":
        n = geom.n
        r = x
        rp = (r + 0.5 * h) ** (n - 1)
        rm = np.abs(r - 0.5 * h) ** (n - 1)
        with np.errstate(divide="ignore", invalid="ignore"):
            w = np.where(r > 0, r ** (n - 1), 1.0)
            cL = rm / w * inv
            cR = rp / w * inv
            cC = -(rp + rm) / w * inv
        # centre: Δu(0) = n u_rr(0) with the reflection u(-h) = u(h)
        cL[0], cR[0], cC[0] = 0.0, 2 * n * inv, -2 * n * inv
        if bc == "neumann":
            cL[N], cR[N], cC[N] = 2 * inv, 0.0, -2 * inv
            keep = slice(0, N + 1)
        else:
            keep = slice(0, N)
    else:
        if bc == "neumann":
            cR[0], cL[0] = 2 * inv, 0.0
            cL[N], cR[N] = 2 * inv, 0.0
            keep = slice(0, N + 1)
        else:
            keep = slice(1, N)
    # Dirichlet zeros drop out: the end couplings are never applied
    cL, cC, cR = cL[keep].copy(), cC[keep].copy(), cR[keep].copy()
    return x, keep, cL, cC, cR


def _laplacian(u, cL, cC, cR, out):
    np.multiply(cC, u, out=out)
    out[1:] += cL[1:] * u[:-1]
    out[:-1] += cR[:-1] * u[1:]
    return out


def simulate(f: NonlinearityLike | None, geometry: Geometry, bc: str,
             u0: Callable | np.ndarray, opts: SimOptions = SimOptions()) -> Trajectory:
    """Integrate until blow-up (``max u > cap``), the horizon, or decay."""
    if bc not in ("dirichlet", "neumann"):
        raise PreconditionError(f"bc must be 'dirichlet' or 'neumann', got {bc!r}")
    if geometry.kind == "line" and bc != "neumann":
        raise PreconditionError("the line geometry uses Neumann ends")
    if opts.scheme not in ("ssprk3", "euler"):
        raise PreconditionError(f"unknown scheme {opts.scheme!r}")
    if not (0 < opts.safety <= 1 and 0 < opts.safety_f <= 1):
        raise PreconditionError("safety factors must lie in (0, 1]")
    fn: Nonlinearity | None = None if f is None else as_nonlinearity(f)
    x, keep, cL, cC, cR = _stencil(geometry, bc, opts.h)
    full = np.asarray(u0(x) if callable(u0) else u0, dtype=float)
    if full.shape != x.shape:
        raise PreconditionError(f"initial data must have {x.size} values")
    if np.any(full < 0) or not np.all(np.isfinite(full)):
        raise PreconditionError("initial data must be finite and nonnegative")
    scale = max(float(full.max()), 1e-300)
    if bc == "dirichlet":
        ends = [full[-1]] if geometry.kind == "ball" else [full[0], full[-1]]
        if max(ends) > 1e-12 * scale:
            raise PreconditionError("initial data must vanish on the Dirichlet boundary")
    u = full[keep].copy()
    dt_diff = 1.0 / float(np.max(np.abs(cC)))
    lap = np.empty_like(u)

    def rhs(v, out, fv=None):
        _laplacian(v, cL, cC, cR, out)
        if fn is not None:
            out += fn(v) if fv is None else fv
        return out

    def embed(v):
        out = np.zeros_like(x)
        out[keep] = v
        return out

    snap_req = sorted(float(t) for t in opts.snapshot_times)
    snap_times, snaps = [0.0], [embed(u)]
    next_decade = math.floor(math.log10(max(u.max(), 1e-300))) + 1
    t = 0.0
    t_hist, M_hist = [0.0], [float(u.max())]
    termination, underflow = GLOBAL, False
    steps = 0
    k1 = np.empty_like(u)
    M = float(u.max())
    while True:
        if M > opts.cap:
            termination = BLOW_UP
            break
        if M < opts.decay:
            termination = DECAYED
            break
        if t >= opts.horizon:
            termination = GLOBAL
            break
        if steps >= opts.max_steps:
            raise NumericalFailure(f"step budget {opts.max_steps} exhausted at t={t!r}, M={M!r}")
        dt = dt_diff
        f_u = None
        if fn is not None:
            f_u, fp_u = fn.value_and_deriv(u)
            fp = float(np.max(fp_u))
            dt *= opts.safety
            if fp > 0:
                dt = min(dt, opts.safety_f / fp)
        else:
            dt *= opts.safety
        dt = min(dt, opts.horizon - t)
        while snap_req and snap_req[0] <= t:
            snap_req.pop(0)
        if snap_req and t + dt > snap_req[0]:
            dt = snap_req[0] - t
        if not t + dt > t:
            underflow = True
            termination = BLOW_UP
            break
        if opts.scheme == "euler":
            u = u + dt * rhs(u, lap, f_u)
        else:
            u1 = u + dt * rhs(u, lap, f_u)
            u2 = 0.75 * u + 0.25 * (u1 + dt * rhs(u1, k1))
            u = u / 3.0 + (2.0 / 3.0) * (u2 + dt * rhs(u2, k1))
        t += dt
        steps += 1
        umin, M = float(u.min()), float(u.max())
        # min and max propagate NaN and inf
        if not (math.isfinite(umin) and math.isfinite(M)):
            raise NumericalFailure(f"nonfinite field at t={t!r} after {steps} steps")
        if umin < -1e-12 * max(M, 1.0):
            raise NumericalFailure(f"positivity lost at t={t!r}: min u = {umin!r}")
        t_hist.append(t)
        M_hist.append(M)
        if snap_req and t >= snap_req[0]:
            snap_times.append(t)
            snaps.append(embed(u))
            snap_req.pop(0)
        elif opts.decade_snapshots and M >= 10.0 ** next_decade and M <= opts.cap:
            snap_times.append(t)
            snaps.append(embed(u))
        if M >= 10.0 ** next_decade:
            next_decade = math.floor(math.log10(M)) + 1
    if snap_times[-1] != t:
        snap_times.append(t)
        snaps.append(embed(u))
    return Trajectory(geometry, bc, x, snap_times, snaps, np.array(t_hist), np.array(M_hist),
                      termination, steps, opts, underflow)


def estimate_blowup_time(traj: Trajectory, f: NonlinearityLike, decades: int = 3) -> tuple[float, float]:
    """``T̂`` from ``H(M(t)) ≈ T - t`` over the top decade of ``M``.

    With the slope fixed at -1 the least-squares estimate is the mean of
    ``t_i + H(M_i)``. The uncertainty is the largest deviation of the same
    estimate on the next ``decades - 1`` decades below.
    """
    if traj.termination != BLOW_UP:
        raise PreconditionError(f"not a blow-up trajectory (termination: {traj.termination})")
    f = as_nonlinearity(f)
    M, t = traj.M_hist, traj.t_hist
    top = float(min(M[-1], traj.options.cap))
    ests = []
    for k in range(decades):
        hi = top / 10.0 ** k
        lo = hi / 10.0
        mask = (M > lo) & (M <= hi if k else M <= M[-1])
        if np.count_nonzero(mask) < 2:
            continue
        ests.append(float(np.mean(t[mask] + H_grid(f, M[mask]))))
    if not ests:
        raise NumericalFailure("no resolved decade to fit the blow-up time")
    T_hat = ests[0]
    unc = max((abs(e - T_hat) for e in ests[1:]), default=0.0)
    traj.T_hat, traj.T_unc = T_hat, unc
    return T_hat, unc


def rate_report(traj: Trajectory, f: NonlinearityLike, T_hat: float | None = None,
                unc: float | None = None, min_M: float = 1.0) -> dict:
    """``ρ(t) = (f(M)/M)(T̂ - t)`` on the resolved window.

    The window keeps samples with ``M >= min_M`` and ``T̂ - t`` at least ten
    times the blow-up-time uncertainty (and above a relative floor of 1e-9).
    """
    f = as_nonlinearity(f)
    if T_hat is None:
        T_hat, unc = estimate_blowup_time(traj, f)
    unc = 0.0 if unc is None else unc
    tau = T_hat - traj.t_hist
    floor = max(10.0 * unc, 1e-9 * T_hat)
    mask = (tau >= floor) & (traj.M_hist >= min_M)
    if not np.any(mask):
        raise NumericalFailure("empty resolved window")
    M = traj.M_hist[mask]
    lm = np.log(M)
    rho = np.exp(f.log_at(lm) - lm) * tau[mask]
    tm = traj.t_hist[mask]
    last = tau[mask] <= 10.0 * tau[mask].min()
    return {"t": tm, "rho": rho, "sup": float(rho.max()), "inf": float(rho.min()),
            "sup_last_decade": float(rho[last].max()), "inf_last_decade": float(rho[last].min()),
            "window": [float(tau[mask].min()), float(tau[mask].max())], "T_hat": T_hat,
            "uncertainty": unc}


def refinement_study(f: NonlinearityLike, geometry: Geometry, bc: str, u0,
                     hs=(1 / 128, 1 / 256, 1 / 512), **opt_kw) -> dict:
    """Blow-up time and rate at successively halved grid spacings."""
    rows = []
    for h in hs:
        traj = simulate(f, geometry, bc, u0, SimOptions(h=h, **opt_kw))
        T_hat, unc = estimate_blowup_time(traj, f)
        rep = rate_report(traj, f, T_hat, unc)
        rows.append({"h": h, "T_hat": T_hat, "uncertainty": unc, "sup_rho": rep["sup"],
                     "steps": traj.steps})
    out = {"rows": rows}
    if len(rows) >= 3:
        d1 = rows[0]["T_hat"] - rows[1]["T_hat"]
        d2 = rows[1]["T_hat"] - rows[2]["T_hat"]
        out["observed_order"] = math.log2(abs(d1 / d2)) if d2 != 0 and d1 != 0 else math.inf
        # Richardson estimate of the remaining error on the finest grid
        out["richardson_error"] = abs(d2) / 3.0 if d2 else 0.0
    return out
