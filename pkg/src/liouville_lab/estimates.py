"""Universal-estimate functionals and a numerical check of the
Gidas-Spruck-type integral inequality.

Distances to the boundary are analytic for intervals, balls, punctured
balls and annuli. In the parabolic case the boundary distance of ``(x, t)``
in ``Ω x (0, T)`` under ``d_P = |x-y| + |t-s|^{1/2}`` is
``min(dist(x, ∂Ω), t^{1/2}, (T-t)^{1/2})``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import NumericalFailure, PreconditionError
from .nonlinearity import NonlinearityLike, as_nonlinearity


def elliptic_distance(x, y) -> float:
    return float(np.linalg.norm(np.atleast_1d(np.asarray(x, float) - np.asarray(y, float))))


def parabolic_distance(X, Y) -> float:
    """``|x - y| + |t - s|^{1/2}`` for ``X = (x, t)``, ``Y = (y, s)``."""
    (x, t), (y, s) = X, Y
    return elliptic_distance(x, y) + math.sqrt(abs(t - s))


@dataclass(frozen=True)
class Domain:
    """``kind`` in interval, ball, punctured_ball, annulus (radii ``r0 < R``)."""

    kind: str
    a: float = 0.0
    b: float = 1.0

    def dist_to_boundary(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.kind == "interval":
            return np.minimum(x - self.a, self.b - x)
        r = np.abs(x) if x.ndim <= 1 else np.linalg.norm(x, axis=-1)
        if self.kind == "ball":
            return self.b - r
        if self.kind == "punctured_ball":
            return np.minimum(r, self.b - r)
        if self.kind == "annulus":
            return np.minimum(r - self.a, self.b - r)
        raise PreconditionError(f"unknown domain kind {self.kind!r}")


@dataclass(frozen=True)
class DistanceModel:
    case: str
    domain: Domain
    T: float | None = None

    def dist_to_boundary(self, x, t=None) -> np.ndarray:
        d = self.domain.dist_to_boundary(x)
        if self.case == "elliptic":
            return d
        if self.case != "parabolic":
            raise PreconditionError(f"case must be elliptic or parabolic, got {self.case!r}")
        if t is None or self.T is None:
            raise PreconditionError("parabolic distance needs t and T")
        t = np.asarray(t, dtype=float)
        return np.minimum(d, np.sqrt(np.minimum(t, self.T - t)))


@dataclass
class EstimateReport:
    functional: str
    sup: float
    argmax: dict
    family: str = ""
    members: dict = field(default_factory=dict)
    count: int = 0

    def to_dict(self) -> dict:
        return {"functional": self.functional, "sup": self.sup, "argmax": self.argmax,
                "family": self.family, "members": self.members, "count": self.count}


def _ratio(f, u):
    u = np.asarray(u, dtype=float)
    lu = np.log(u)
    return np.exp(f.log_at(lu) - lu)


def interior_constant(u, x, f: NonlinearityLike, model: DistanceModel,
                      variant: str = "homogeneous", t=None, family: str = "") -> EstimateReport:
    """Sup of ``(f(u)/u) d^2`` (homogeneous) or ``(f(u)/u)/(1 + d^-2)`` on ``u >= 1`` (shifted)."""
    f = as_nonlinearity(f)
    u = np.asarray(u, dtype=float)
    x = np.asarray(x, dtype=float)
    d = model.dist_to_boundary(x, t)
    if np.any(d <= 0):
        raise PreconditionError("samples must lie strictly inside the domain")
    if np.any(u <= 0):
        raise PreconditionError("u must be positive at the samples")
    if variant == "homogeneous":
        mask = np.ones(u.shape, dtype=bool)
        val = lambda uu, dd: _ratio(f, uu) * dd ** 2
    elif variant == "shifted":
        mask = u >= 1.0
        val = lambda uu, dd: _ratio(f, uu) / (1.0 + dd ** -2)
    else:
        raise PreconditionError(f"unknown variant {variant!r}")
    if not np.any(mask):
        raise PreconditionError("no admissible points (u >= 1 is empty)")
    vals = val(u[mask], d[mask])
    i = int(np.argmax(vals))
    loc = x[mask][i] if x.ndim <= 1 else x[mask][i].tolist()
    arg = {"x": np.asarray(loc).tolist(), "u": float(u[mask][i]), "d": float(d[mask][i])}
    if t is not None:
        arg["t"] = float(np.broadcast_to(t, u.shape)[mask][i])
    return EstimateReport(f"interior_{variant}", float(vals[i]), arg, family, {}, int(mask.sum()))


def family_sup(reports: dict[str, EstimateReport], family: str = "") -> EstimateReport:
    """Combine per-member reports; the sup dominates every member."""
    if not reports:
        raise PreconditionError("empty family")
    best = max(reports, key=lambda k: reports[k].sup)
    r = reports[best]
    return EstimateReport(r.functional, r.sup, {**r.argmax, "member": best}, family,
                          {k: v.sup for k, v in reports.items()},
                          sum(v.count for v in reports.values()))


def snapshot_interior_constant(traj, f: NonlinearityLike, T_hat: float,
                               domain: Domain | None = None) -> EstimateReport:
    """Parabolic homogeneous functional ``(f(u)/u) min(d_x^2, t, T̂-t)`` over snapshots."""
    f = as_nonlinearity(f)
    if domain is None:
        g = traj.geometry
        domain = Domain("interval", g.a, g.b) if g.kind != "ball" else Domain("ball", 0.0, g.b)
    model = DistanceModel("parabolic", domain, T_hat)
    best = None
    count = 0
    for t, u in zip(traj.snap_times, traj.snaps):
        if not 0 < t < T_hat:
            continue
        inside = (domain.dist_to_boundary(traj.x) > 0) & (u > 0)
        if not np.any(inside):
            continue
        rep = interior_constant(u[inside], traj.x[inside], f, model, "homogeneous",
                                t=np.full(int(inside.sum()), t))
        count += rep.count
        if best is None or rep.sup > best.sup:
            best = rep
    if best is None:
        raise PreconditionError("no admissible snapshots")
    best.count = count
    return best


def temporal_constant(traj, f: NonlinearityLike, T_hat: float) -> EstimateReport:
    """Sup over snapshots and points with ``u >= 1`` of ``(f(u)/u)/(1 + 1/t + 1/(T̂-t))``."""
    f = as_nonlinearity(f)
    best_val, best_arg, count = -math.inf, None, 0
    for t, u in zip(traj.snap_times, traj.snaps):
        if not 0 < t < T_hat:
            continue
        mask = u >= 1.0
        if not np.any(mask):
            continue
        vals = _ratio(f, u[mask]) / (1.0 + 1.0 / t + 1.0 / (T_hat - t))
        count += int(mask.sum())
        i = int(np.argmax(vals))
        if vals[i] > best_val:
            best_val = float(vals[i])
            best_arg = {"t": float(t), "x": float(traj.x[mask][i]), "u": float(u[mask][i])}
    if best_arg is None:
        raise PreconditionError("no admissible points (u >= 1 is empty at every snapshot)")
    return EstimateReport("temporal", best_val, best_arg, "", {}, count)


# --------------------------------------------------------------------------
# integral inequality

def gs_coefficients(n: int, q: float, k: float) -> tuple[float, float, float]:
    """``(α, β, γ)`` of the integral inequality."""
    if k == -1:
        raise PreconditionError("k = -1 is excluded")
    alpha = -(n - 1) / n * k * k + (q - 1) * k - q * (q - 1) / 2
    beta = (n + 2) / n * k - 1.5 * q
    gamma = -(n - 1) / n
    return alpha, beta, gamma


def _derivatives(v, h):
    """Central-difference gradient (list per axis) and 3-point Laplacian."""
    n = v.ndim
    grads = []
    lap = np.zeros_like(v)
    for ax in range(n):
        g = np.zeros_like(v)
        sl_c = [slice(None)] * n
        sl_p = [slice(None)] * n
        sl_m = [slice(None)] * n
        sl_c[ax], sl_p[ax], sl_m[ax] = slice(1, -1), slice(2, None), slice(None, -2)
        g[tuple(sl_c)] = (v[tuple(sl_p)] - v[tuple(sl_m)]) / (2 * h)
        lap[tuple(sl_c)] += (v[tuple(sl_p)] - 2 * v[tuple(sl_c)] + v[tuple(sl_m)]) / (h * h)
        grads.append(g)
    return grads, lap


def _gs_sides(v, phi, q, k, h):
    n = v.ndim
    a, b, c = gs_coefficients(n, q, k)
    gv, lv = _derivatives(v, h)
    gp, lp = _derivatives(phi, h)
    g2 = sum(g * g for g in gv)
    dot = sum(x * y for x, y in zip(gv, gp))
    w = h ** n        # integrands vanish on the edges, so trapezoid = plain sum
    I = np.sum(phi * v ** (q - 2) * g2 * g2) * w
    J = np.sum(phi * v ** (q - 1) * g2 * lv) * w
    K = np.sum(phi * v ** q * lv * lv) * w
    rhs = (0.5 * np.sum(v ** q * g2 * lp) * w
           + np.sum(v ** q * (lv + (q - k) * g2 / v) * dot) * w)
    lhs = a * I + b * J + c * K
    return float(lhs), float(rhs), {"I": float(I), "J": float(J), "K": float(K)}


@dataclass
class GSResult:
    lhs: float
    rhs: float
    slack: float
    slack_coarse: float
    C_disc: float
    h: float
    passed: bool
    coefficients: tuple
    integrals: dict

    @property
    def extrapolated(self) -> float:
        """Richardson limit of the slack."""
        return self.slack + (self.slack - self.slack_coarse) / 3.0


def gs_inequality_check(v, phi, q: float, k: float, h: float, margin: int = 2,
                        delta: float = 1e-12) -> GSResult:
    """Evaluate both sides on a uniform grid of spacing ``h`` (``v.ndim`` = dimension).

    ``C_disc`` comes from the Richardson pair ``(h, 2h)`` on the same samples:
    ``C_disc = 2|S_2h - S_h|/(3h^2)``; the check passes iff
    ``slack >= -C_disc h^2``.
    """
    v = np.asarray(v, dtype=float)
    phi = np.asarray(phi, dtype=float)
    if v.shape != phi.shape:
        raise PreconditionError("v and phi must share the grid")
    if np.any(v < delta):
        raise PreconditionError(f"v must be bounded below by {delta}")
    if np.any(phi < 0):
        raise PreconditionError("phi must be nonnegative")
    for ax in range(v.ndim):
        edge = np.concatenate([np.take(phi, range(margin + 1), axis=ax).ravel(),
                               np.take(phi, range(-margin - 1, 0), axis=ax).ravel()])
        if np.any(edge != 0):
            raise PreconditionError("support of phi touches the boundary of the grid box")
    if any(s % 2 != 1 for s in v.shape):
        raise PreconditionError("need an odd number of samples per axis for the 2h pair")
    lhs, rhs, ints = _gs_sides(v, phi, q, k, h)
    sub = tuple(slice(None, None, 2) for _ in range(v.ndim))
    lhs2, rhs2, _ = _gs_sides(v[sub], phi[sub], q, k, 2 * h)
    slack, slack2 = rhs - lhs, rhs2 - lhs2
    if not (math.isfinite(slack) and math.isfinite(slack2)):
        raise NumericalFailure("nonfinite integrals")
    C = 2.0 * abs(slack2 - slack) / (3.0 * h * h)
    return GSResult(lhs, rhs, slack, slack2, C, h, bool(slack >= -C * h * h),
                    gs_coefficients(v.ndim, q, k), ints)


def bump(r, radius: float = 0.8):
    """Smooth compactly supported ``exp(-1/(1-(r/radius)^2))``."""
    r = np.asarray(r, dtype=float) / radius
    out = np.zeros_like(r)
    inside = r < 1
    out[inside] = np.exp(-1.0 / (1.0 - r[inside] ** 2))
    return out


def box_grid(n: int, h: float):
    """Nodes of ``[-1, 1]^n`` with spacing ``h`` (``1/h`` must be an integer)."""
    m = int(round(1 / h))
    if not math.isclose(m * h, 1.0, rel_tol=1e-12):
        raise PreconditionError("1/h must be an integer")
    x = np.linspace(-1.0, 1.0, 2 * m + 1)
    return np.meshgrid(*([x] * n), indexing="ij") if n > 1 else [x]


def random_gs_case(rng: np.random.Generator, n: int):
    """Random smooth positive ``v``, bump ``φ`` and admissible ``(q, k)`` as callables."""
    modes = rng.integers(1, 4, size=(3, n))
    amps = rng.uniform(-0.25, 0.25, size=3)
    phases = rng.uniform(0, 2 * math.pi, size=(3, n))
    centre = rng.uniform(-0.1, 0.1, size=n)
    radius = float(rng.uniform(0.5, 0.8))
    q = float(rng.uniform(-2, 2))
    k = float(rng.uniform(-3, 3))
    while abs(k + 1) < 0.1:
        k = float(rng.uniform(-3, 3))

    def v(*X):
        out = 2.0 + 0 * X[0]
        for m, a, ph in zip(modes, amps, phases):
            term = a
            for j in range(n):
                term = term * np.cos(math.pi * m[j] * X[j] / 2 + ph[j])
            out = out + term
        return out

    def phi(*X):
        r2 = sum((X[j] - centre[j]) ** 2 for j in range(n))
        return bump(np.sqrt(r2), radius)

    return v, phi, q, k
