"""Independent reference values built with mpmath and sympy.

Nothing here imports the package under test.
"""
from __future__ import annotations

import mpmath as mp
import sympy as sp

mp.mp.dps = 30

r = sp.symbols("r", positive=True)


def _radial_laplacian(u, n):
    return sp.diff(u, r, 2) + (n - 1) / r * sp.diff(u, r)


def aubin_talenti(n: int = 3):
    """``(u, residual)`` for ``u = (1 + r^2/(n(n-2)))^{-(n-2)/2}`` and ``-Δu = u^{p_S}``."""
    p = sp.Rational(n + 2, n - 2)
    u = (1 + r ** 2 / (n * (n - 2))) ** (-sp.Rational(n - 2, 2))
    res = sp.simplify(-_radial_laplacian(u, n) - u ** p)
    return sp.lambdify(r, u, "numpy"), res


def counterexample(n: int, p, A, B):
    """``(v, residual)`` for ``v = (1+r^2)^{-1/(p-1)}`` and ``-Δv = [A + B v^{p-1}] v^p``.

    ``v <= 1`` so ``min(v^{p-1}, 1) = v^{p-1}``.
    """
    p = sp.nsimplify(p)
    v = (1 + r ** 2) ** (-1 / (p - 1))
    res = sp.simplify(-_radial_laplacian(v, n) - (A + B * v ** (p - 1)) * v ** p)
    return sp.lambdify(r, v, "numpy"), res


def singular_state(n: int, p):
    """``(c, beta, residual)`` for ``u = c r^{-beta}`` solving ``-Δu = u^p``."""
    p = sp.nsimplify(p)
    beta = 2 / (p - 1)
    c = (beta * (n - 2 - beta)) ** (1 / (p - 1))
    u = c * r ** (-beta)
    res = sp.simplify(-_radial_laplacian(u, n) - u ** p)
    return float(c), float(beta), res


def blowup_time(f, y0) -> float:
    """``∫_{y0}^∞ dz / f(z)`` with mpmath (``f`` acts on mpf)."""
    return float(mp.quad(lambda z: 1 / f(z), [y0, 10 * y0, mp.inf]))


def _nodes(s, breaks):
    return [0] + sorted(b for b in breaks if 0 < b < s) + [s]


def tilde(f, s, breaks=()) -> float:
    """``∫_0^s f(z)/z dz`` with mpmath, split at kinks."""
    return float(mp.quad(lambda z: f(z) / z, _nodes(s, breaks)))


def primitive(f, s, breaks=()) -> float:
    return float(mp.quad(f, _nodes(s, breaks)))


def ode_profile(f, y0, t) -> float:
    """``y(t)`` for ``y' = f(y)`` by mpmath's Taylor integrator."""
    sol = mp.odefun(lambda _t, y: f(y), 0, mp.mpf(y0))
    return float(sol(t))


def gs_exact_1d(v_expr, phi_expr, x, q, k, a=-1, b=1):
    """Both sides of the one-dimensional integral inequality by exact calculus.

    ``v_expr``/``phi_expr`` are sympy expressions in ``x``; the integrals use
    mpmath quadrature on the symbolic derivatives.
    """
    n = 1
    alpha = -sp.Rational(n - 1, n) * k ** 2 + (q - 1) * k - q * (q - 1) / 2
    beta = sp.Rational(n + 2, n) * k - sp.Rational(3, 2) * q
    gamma = -sp.Rational(n - 1, n)
    v1, v2 = sp.diff(v_expr, x), sp.diff(v_expr, x, 2)
    p1, p2 = sp.diff(phi_expr, x), sp.diff(phi_expr, x, 2)
    I = phi_expr * v_expr ** (q - 2) * v1 ** 4
    J = phi_expr * v_expr ** (q - 1) * v1 ** 2 * v2
    K = phi_expr * v_expr ** q * v2 ** 2
    R = (sp.Rational(1, 2) * v_expr ** q * v1 ** 2 * p2
         + v_expr ** q * (v2 + (q - k) * v1 ** 2 / v_expr) * v1 * p1)

    def integ(e):
        g = sp.lambdify(x, e, "mpmath")
        return float(mp.quad(g, [a, 0, b]))

    lhs = float(alpha) * integ(I) + float(beta) * integ(J) + float(gamma) * integ(K)
    return lhs, integ(R)


def doubling_brute(dist, M, domain, gamma, k, y, x):
    """Plain-loop check of the three doubling conclusions for a selected ``x``."""
    dg = min((dist[x][g] for g in gamma), default=float("inf"))
    a = M[x] * dg > 2 * k
    b = M[x] >= M[y]
    c = all(M[z] <= 2 * M[x] for z in domain if dist[x][z] <= k / M[x])
    return a, b, c
