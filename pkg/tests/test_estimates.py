import math

import numpy as np
import pytest
import sympy as sp

from liouville_lab import elliptic_radial as ER
from liouville_lab import estimates as ES
from liouville_lab.errors import PreconditionError
from liouville_lab.nonlinearity import build_example, parse_nonlinearity

from . import oracles as O

x_sym = sp.symbols("x", real=True)
SUPPORT = 0.8


def _phi_1d(x):
    y = np.clip(1 - (x / SUPPORT) ** 2, 0.0, None)
    return y ** 6


def _v_1d(x):
    return 2.0 + 0.3 * np.cos(math.pi * x) + 0.2 * np.sin(2 * x)


V_SYM = 2 + sp.Rational(3, 10) * sp.cos(sp.pi * x_sym) + sp.Rational(1, 5) * sp.sin(2 * x_sym)
PHI_SYM = (1 - (x_sym / sp.Rational(4, 5)) ** 2) ** 6


def test_coefficients_closed_form():
    assert ES.gs_coefficients(1, 0.0, -2.0) == (2.0, -6.0, 0.0)
    a, b, c = ES.gs_coefficients(3, 1.0, 2.0)
    assert (a, b, c) == pytest.approx((-8 / 3, 5 / 3 * 2 - 1.5, -2 / 3))
    with pytest.raises(PreconditionError):
        ES.gs_coefficients(2, 0.0, -1.0)


@pytest.mark.parametrize("n", [1, 2])
def test_constant_v_has_zero_slack(n):
    h = 1 / 32
    X = ES.box_grid(n, h)
    v = 3.0 + 0 * X[0]
    phi = ES.bump(np.sqrt(sum(x * x for x in X)))
    res = ES.gs_inequality_check(v, phi, 1.3, 0.7, h)
    assert res.slack == 0.0 and res.lhs == 0.0 and res.rhs == 0.0
    assert res.passed


@pytest.mark.parametrize("q,k", [(0.5, -2.0), (1.5, 0.5), (-1.0, 2.0)])
def test_one_dimensional_sides_converge_to_exact_calculus(q, k):
    lhs_ex, rhs_ex = O.gs_exact_1d(V_SYM, PHI_SYM, x_sym, sp.nsimplify(q), sp.nsimplify(k),
                                   a=-SUPPORT, b=SUPPORT)
    # in one dimension the inequality is an identity
    assert lhs_ex == pytest.approx(rhs_ex, rel=1e-12, abs=1e-14)
    errs = []
    for h in (1 / 64, 1 / 128, 1 / 256):
        x = ES.box_grid(1, h)[0]
        res = ES.gs_inequality_check(_v_1d(x), _phi_1d(x), q, k, h)
        errs.append(abs(res.lhs - lhs_ex))
        assert res.passed
    # second order
    assert errs[1] / errs[2] > 3.0 and errs[0] / errs[1] > 3.0


def test_two_dimensional_random_case_passes():
    rng = np.random.default_rng(3)
    v, phi, q, k = ES.random_gs_case(rng, 2)
    h = 1 / 64
    X = ES.box_grid(2, h)
    res = ES.gs_inequality_check(v(*X), phi(*X), q, k, h)
    assert res.passed and res.C_disc >= 0


def test_gs_rejects_bad_inputs():
    x = ES.box_grid(1, 1 / 16)[0]
    with pytest.raises(PreconditionError):
        ES.gs_inequality_check(np.ones_like(x), np.ones_like(x), 1.0, 0.0, 1 / 16)
    with pytest.raises(PreconditionError):
        ES.gs_inequality_check(-np.ones_like(x), _phi_1d(x), 1.0, 0.0, 1 / 16)


def test_singular_state_gives_constant_functional():
    sol = ER.singular_steady_state(4.0, 3)
    c, beta, res = O.singular_state(3, 4)
    assert res == 0 and sol.c_p == pytest.approx(c, rel=1e-14)
    r = np.linspace(0.01, 0.5, 50)
    model = ES.DistanceModel("elliptic", ES.Domain("punctured_ball", 0.0, 1.0))
    f = parse_nonlinearity("pow(s,4)")
    for ri in r:
        rep = ES.interior_constant(sol(np.array([ri])), np.array([ri]), f, model)
        assert rep.sup == pytest.approx(2 / 9, rel=1e-10)


def test_counterexample_interior_functional_grows_with_the_ball():
    n, p = 5, 2.0
    f = build_example("estimate_counterexample", p=p, n=n)
    v, _ = O.counterexample(n, p, 2, 8)
    sups = []
    for R in (1.0, 10.0, 100.0):
        r = np.linspace(0, R, 401)[:-1]
        model = ES.DistanceModel("elliptic", ES.Domain("ball", 0.0, R))
        sups.append(ES.interior_constant(v(r), r, f, model).sup)
    assert sups[0] < sups[1] < sups[2]
    # at the centre the functional is (A+B) R^2
    assert sups[2] >= 10 * 100 ** 2 * (1 - 1e-9)


def test_distances():
    assert ES.parabolic_distance(([0.0], 0.0), ([3.0], 4.0)) == pytest.approx(5.0)
    for a, b, c in np.random.default_rng(0).normal(size=(20, 3, 2)):
        assert ES.elliptic_distance(a, c) <= ES.elliptic_distance(a, b) + ES.elliptic_distance(b, c) + 1e-15
    m = ES.DistanceModel("parabolic", ES.Domain("interval", 0.0, 1.0), T=1.0)
    assert float(m.dist_to_boundary(0.5, 0.01)) == pytest.approx(0.1)
    assert float(ES.Domain("annulus", 0.5, 2.0).dist_to_boundary(np.array([[1.0, 0.0]]))[0]) == 0.5


def test_family_sup_dominates_members():
    model = ES.DistanceModel("elliptic", ES.Domain("interval", 0.0, 1.0))
    f = parse_nonlinearity("pow(s,2)")
    x = np.linspace(0.05, 0.95, 19)
    reps = {f"a{a}": ES.interior_constant(a * np.sin(math.pi * x), x, f, model) for a in (1, 5, 2)}
    fam = ES.family_sup(reps, "sines")
    assert all(fam.sup >= r.sup for r in reps.values())
    assert fam.argmax["member"] == "a5" and fam.count == 3 * 19


def test_shifted_variant_needs_admissible_points():
    model = ES.DistanceModel("elliptic", ES.Domain("interval", 0.0, 1.0))
    with pytest.raises(PreconditionError, match="no admissible points"):
        ES.interior_constant(np.full(3, 0.5), np.array([0.2, 0.5, 0.8]), "pow(s,2)", model,
                             variant="shifted")
