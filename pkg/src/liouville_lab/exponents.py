"""Critical exponents and the clause arithmetic of the log-power example."""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

from .errors import PreconditionError

Exponent = Union[Fraction, float]  # float only for math.inf

INF = math.inf
CASES = ("elliptic", "parabolic")


def _check_case(case: str) -> str:
    if case not in CASES:
        raise PreconditionError(f"case must be one of {CASES}, got {case!r}")
    return case


@dataclass(frozen=True)
class CriticalExponents:
    n: int
    case: str
    p_S: Exponent
    p_sg: Exponent
    p_F: Exponent
    p_B: Exponent
    p_c: Exponent
    p_star: Exponent
    p_dstar: Exponent
    n_star: int
    m_star: Fraction

    def as_dict(self) -> dict:
        out = {}
        for k, v in self.__dict__.items():
            if isinstance(v, Fraction):
                out[k] = float(v)
            elif isinstance(v, float) and math.isinf(v):
                out[k] = "inf"
            else:
                out[k] = v
        return out


def critical_exponents(n: int, case: str = "elliptic") -> CriticalExponents:
    """Exact exponent table for dimension ``n``; ``math.inf`` where degenerate."""
    if int(n) != n or n < 1:
        raise PreconditionError(f"dimension must be an integer >= 1, got {n!r}")
    n = int(n)
    _check_case(case)
    p_S = Fraction(n + 2, n - 2) if n >= 3 else INF
    p_sg = Fraction(n, n - 2) if n >= 3 else INF
    p_F = Fraction(n + 2, n)
    p_B = Fraction(n * (n + 2), (n - 1) ** 2) if n >= 2 else INF
    if case == "elliptic":
        p_c, p_star, n_star = p_S, p_sg, 2
        p_dstar = Fraction(n + 1, n - 1) if n >= 2 else INF
    else:
        p_c, p_star, n_star = p_B, p_F, 1
        p_dstar = 1 + Fraction(2, n + 1)
    return CriticalExponents(
        n=n, case=case, p_S=p_S, p_sg=p_sg, p_F=p_F, p_B=p_B, p_c=p_c,
        p_star=p_star, p_dstar=p_dstar, n_star=n_star,
        m_star=Fraction(2 * (n + 2), 3 * n + 2),
    )


def _eq(a: float, b: float) -> bool:
    return math.isclose(a, b, rel_tol=1e-12, abs_tol=1e-12)


def entire_solution_regime(p: float, q: float, K: float, n: int) -> bool:
    """True when ``-Δv = v^p log^q(K+v)`` is known to admit a positive entire solution."""
    p_S = float(critical_exponents(n, "elliptic").p_S)
    first = 1 < p < p_S and q > p_S - p and not _eq(q, p_S - p) and _eq(K, 1.0)
    second = (p >= p_S or _eq(p, p_S)) and q > 0 and K >= 1
    return bool(first or second)


def power_log_clause(p: float, q: float, K: float, n: int, case: str = "elliptic") -> str:
    """Which clause covers ``f(s) = s^p log^q(K+s)``.

    Returns ``"low_power"`` (p < p_star, K > 1), ``"log_below_gap"``,
    ``"log_at_gap"`` or ``"log_above_gap"`` (p_star <= p < p_c, comparing q
    with the gap p_c - p), ``"parabolic_band"`` (p_B <= p < p_S),
    ``"entire"`` (a positive entire elliptic solution exists, so the
    homogeneous estimate fails) or ``"none"``. Boundary ties go to
    ``"none"``. ``"parabolic_band"`` does not test the size of ``|q|``.
    """
    if not p > 1:
        raise PreconditionError(f"need p > 1, got p={p!r}")
    if not K >= 1:
        raise PreconditionError(f"need K >= 1, got K={K!r}")
    ex = critical_exponents(n, case)
    p_star, p_c = float(ex.p_star), float(ex.p_c)
    if entire_solution_regime(p, q, K, n):
        return "entire"
    if p < p_star and not _eq(p, p_star):
        return "low_power" if K > 1 and not _eq(K, 1.0) else "none"
    if p < p_c and not _eq(p, p_c):
        gap = p_c - p
        if _eq(q, gap):
            return "log_at_gap" if K > 1 and not _eq(K, 1.0) else "none"
        if q < gap:
            return "log_below_gap"
        k_min = gap / q * math.exp(q / gap - 1.0)
        return "log_above_gap" if K > k_min and not _eq(K, k_min) else "none"
    if case == "parabolic":
        p_B, p_S = float(ex.p_B), float(ex.p_S)
        if p_B <= p < p_S and not _eq(p, p_S):
            return "parabolic_band"
    return "none"
