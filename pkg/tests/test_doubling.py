import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from liouville_lab import doubling as D
from liouville_lab.errors import PreconditionError

from . import oracles as O


def _line_space(n, gamma):
    x = np.arange(n, dtype=float)
    d = np.abs(x[:, None] - x[None, :])
    sigma = frozenset(range(n))
    return D.FiniteMetricSpace(d, sigma, sigma - frozenset(gamma))


def test_metric_validation_rejects_triangle_violation():
    d = np.array([[0, 1, 5], [1, 0, 1], [5, 1, 0]], float)
    with pytest.raises(PreconditionError):
        D.FiniteMetricSpace(d, {0, 1, 2}, {0, 1})


def test_precondition_enforced():
    sp = _line_space(10, [9])
    M = np.ones(10)
    with pytest.raises(PreconditionError):
        D.doubling_select(sp, M, k=10.0, y=0)


def test_hand_instance_climbs_to_peak():
    sp = _line_space(20, [0, 19])
    M = np.full(20, 1.0)
    M[10] = 50.0
    M[9] = 10.0
    res = D.doubling_select(sp, M, k=0.5, y=5)
    assert res.x in (9, 10) or M[res.x] >= M[5]
    assert all(D.verify_conclusions(sp, M, 0.5, 5, res.x).values())


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_random_instances_against_brute_force(seed):
    rng = np.random.default_rng(seed)
    space, M, k, y = D.random_instance(rng, n_max=40)
    try:
        res = D.doubling_select(space, M, k, y)
    except PreconditionError:
        dg = space.dist_to_gamma()[y]
        assert not M[y] * dg > 2 * k
        return
    dist = space.dist.tolist()
    assert all(O.doubling_brute(dist, M.tolist(), sorted(space.domain), sorted(space.gamma),
                                k, y, res.x))
    assert res.iterations <= math.ceil(math.log2(max(M[i] for i in space.domain) / M[y])) + 1


def test_random_space_is_a_metric():
    rng = np.random.default_rng(1)
    sp = D.random_space(rng, 60)
    D.check_metric(sp.dist)
