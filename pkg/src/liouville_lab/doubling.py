"""Doubling lemma on finite metric spaces.

Given ``M: D -> (0, ∞)`` and ``y`` with ``M(y) dist(y, Γ) > 2k`` the
selection walks to points where ``M`` at least doubles until no point of
``D`` within ``k/M(x)`` of the current point has ``M > 2 M(x)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse.csgraph import shortest_path

from .errors import PreconditionError


@dataclass(frozen=True)
class FiniteMetricSpace:
    """Points ``0..N-1`` with distance matrix; ``Γ = Σ \\ D``."""

    dist: np.ndarray
    sigma: frozenset
    domain: frozenset
    validate: bool = field(default=True, compare=False)

    def __post_init__(self):
        d = np.asarray(self.dist, dtype=float)
        object.__setattr__(self, "dist", d)
        object.__setattr__(self, "sigma", frozenset(int(i) for i in self.sigma))
        object.__setattr__(self, "domain", frozenset(int(i) for i in self.domain))
        n = d.shape[0]
        if d.ndim != 2 or d.shape[1] != n:
            raise PreconditionError("distance matrix must be square")
        if not self.domain:
            raise PreconditionError("D must be nonempty")
        if not self.domain <= self.sigma:
            raise PreconditionError("D must be a subset of Σ")
        if not self.sigma <= set(range(n)):
            raise PreconditionError("Σ must index points of the space")
        if self.validate:
            check_metric(d)

    @property
    def n_points(self) -> int:
        return self.dist.shape[0]

    @property
    def gamma(self) -> frozenset:
        return self.sigma - self.domain

    def dist_to_gamma(self) -> np.ndarray:
        """``dist(x, Γ)`` for every point; ``+inf`` when Γ is empty."""
        g = sorted(self.gamma)
        if not g:
            return np.full(self.n_points, math.inf)
        return self.dist[:, g].min(axis=1)


def check_metric(d: np.ndarray, rtol: float = 1e-12) -> None:
    """Raise unless ``d`` is a metric (with relative slack for rounding)."""
    if not np.all(np.isfinite(d)) or np.any(d < 0):
        raise PreconditionError("distances must be finite and nonnegative")
    if not np.array_equal(d, d.T):
        raise PreconditionError("distance matrix must be symmetric")
    if np.any(np.diag(d) != 0):
        raise PreconditionError("distance of a point to itself must be 0")
    off = d + np.eye(len(d))
    if np.any(off <= 0):
        raise PreconditionError("distinct points must have positive distance")
    scale = float(d.max()) if d.size else 0.0
    # d is a metric iff no path is shorter than the direct distance
    closure = shortest_path(d, method="FW", directed=False)
    bad = d > closure + rtol * scale
    if np.any(bad):
        i, j = np.argwhere(bad)[0]
        raise PreconditionError(
            f"triangle inequality fails: d({i},{j})={d[i, j]!r} exceeds path length {closure[i, j]!r}")


@dataclass(frozen=True)
class DoublingResult:
    x: int
    trace: tuple[int, ...]
    iterations: int
    bound: int


def iteration_bound(M: np.ndarray, domain, y: int) -> int:
    m_max = max(M[i] for i in domain)
    return math.ceil(math.log2(m_max / M[y])) + 1


def doubling_select(space: FiniteMetricSpace, M, k: float, y: int) -> DoublingResult:
    """Select ``x`` satisfying the three doubling conclusions.

    ``M`` is an array over all points; only its values on ``D`` matter.
    Among candidates with ``M(z) > 2M(x_j)`` inside the closed ball the one
    with the largest ``M`` (lowest index on ties) is taken.
    """
    M = np.asarray(M, dtype=float)
    dom = np.array(sorted(space.domain))
    if not k > 0:
        raise PreconditionError(f"k must be positive, got {k!r}")
    if y not in space.domain:
        raise PreconditionError(f"y={y} is not in D")
    vals = M[dom]
    if not np.all(np.isfinite(vals) & (vals > 0)):
        raise PreconditionError("M must be finite and positive on D")
    dg = space.dist_to_gamma()
    prod = M[y] * dg[y]
    if not prod > 2 * k:
        raise PreconditionError(f"precondition fails: M(y) dist(y, Γ) = {prod!r} <= 2k = {2 * k!r}")
    bound = iteration_bound(M, dom, y)
    x = y
    trace = [y]
    while True:
        near = space.dist[x, dom] <= k / M[x]
        cand = dom[near & (vals > 2 * M[x])]
        if cand.size == 0:
            break
        best = cand[np.argmax(M[cand])]   # argmax returns the first, i.e. lowest index
        assert M[best] > 2 * M[x]
        x = int(best)
        trace.append(x)
        assert M[x] * dg[x] > 2 * k, "invariant M(x) dist(x, Γ) > 2k lost"
        if len(trace) - 1 > bound:
            raise AssertionError("iteration bound exceeded")
    return DoublingResult(x=x, trace=tuple(trace), iterations=len(trace) - 1, bound=bound)


def verify_conclusions(space: FiniteMetricSpace, M, k: float, y: int, x: int) -> dict:
    """Exhaustively check the three conclusions for a selected ``x``."""
    M = np.asarray(M, dtype=float)
    dom = np.array(sorted(space.domain))
    dg = space.dist_to_gamma()
    a = bool(M[x] * dg[x] > 2 * k)
    b = bool(M[x] >= M[y])
    ball = dom[space.dist[x, dom] <= k / M[x]]
    c = bool(np.all(M[ball] <= 2 * M[x]))
    return {"a": a, "b": b, "c": c}


def random_space(rng: np.random.Generator, n_points: int, edge_prob: float = 0.3,
                 gamma_fraction: float = 0.2) -> FiniteMetricSpace:
    """Random metric by shortest-path completion of a random weighted graph."""
    w = rng.exponential(1.0, size=(n_points, n_points))
    w = np.triu(w, 1)
    mask = np.triu(rng.random((n_points, n_points)) < edge_prob, 1)
    # a chain keeps the graph connected
    idx = np.arange(n_points - 1)
    mask[idx, idx + 1] = True
    g = np.where(mask, w + 1e-3, 0.0)
    g = g + g.T
    d = shortest_path(g, method="FW", directed=False)
    d = 0.5 * (d + d.T)
    np.fill_diagonal(d, 0.0)
    n_gamma = int(rng.integers(0, max(1, int(gamma_fraction * n_points)) + 1))
    perm = rng.permutation(n_points)
    gamma = set(perm[:n_gamma].tolist())
    sigma = set(range(n_points))
    return FiniteMetricSpace(d, frozenset(sigma), frozenset(sigma - gamma), validate=False)


def random_instance(rng: np.random.Generator, n_max: int = 200):
    """A random ``(space, M, k, y)``; M spans several orders of magnitude."""
    n = int(rng.integers(2, n_max + 1))
    space = random_space(rng, n)
    M = np.exp(rng.uniform(-4.0, 10.0, size=n))
    dom = sorted(space.domain)
    y = int(dom[int(rng.integers(0, len(dom)))])
    dg = space.dist_to_gamma()[y]
    # k below the admissible bound most of the time, above it sometimes
    k = float(0.5 * M[y] * min(dg, 10.0) * rng.uniform(0.01, 1.2))
    return space, M, k, y
