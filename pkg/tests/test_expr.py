import math

import numpy as np
import pytest
import sympy as sp
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from liouville_lab import expr as E
from liouville_lab.errors import ConfigError, PreconditionError

SYM = {"pow": sp.Pow, "abs": sp.Abs, "min": sp.Min, "max": sp.Max,
       "log": sp.log, "exp": sp.exp, "sin": sp.sin, "cos": sp.cos}
s_sym = sp.symbols("s", positive=True)


def to_sympy(e):
    return sp.sympify(str(e), locals={**SYM, "s": s_sym})


# positive-valued trees on s > 0
_leaf = st.one_of(st.just(E.S), st.floats(0.25, 4.0).map(E.const))


def _extend(children):
    pos = st.floats(1.0, 3.0).map(E.const)
    return st.one_of(
        st.tuples(children, children).map(lambda t: t[0] + t[1]),
        st.tuples(children, children).map(lambda t: t[0] * t[1]),
        st.tuples(children, children).map(lambda t: t[0] / t[1]),
        st.tuples(children, st.floats(-2.0, 3.0)).map(lambda t: E.power(t[0], t[1])),
        st.tuples(pos, children).map(lambda t: E.log(E.const(1.0) + t[0] + t[1])),
        children.map(lambda c: E.exp(E.sin(c))),
        children.map(lambda c: E.const(2.0) + E.cos(c)),
    )


trees = st.recursive(_leaf, _extend, max_leaves=6)


def _max_trig_argument(e, s):
    """Largest ``|x|`` over ``sin(x)``/``cos(x)`` nodes of ``e`` at ``s``."""
    out = 0.0
    stack = [e]
    while stack:
        node = stack.pop()
        if isinstance(node, E.Func) and node.name in ("sin", "cos"):
            out = max(out, abs(float(node.args[0].value(s))))
        stack.extend(c for c in vars(node).values() if isinstance(c, E.Expr))
        stack.extend(c for c in getattr(node, "args", ()) if isinstance(c, E.Expr))
    return out


@settings(max_examples=150, deadline=None)
@given(trees)
def test_print_parse_round_trip(e):
    assert E.parse(str(e)) == e


@settings(max_examples=150, deadline=None)
@given(trees, st.floats(-6.0, 6.0))
def test_log_domain_agrees_with_direct(e, ls):
    # an ulp of a large trig argument moves the result by more than 1e-10
    with np.errstate(all="ignore"):
        assume(_max_trig_argument(e, math.exp(ls)) < 1e3)
    v = float(e.value(math.exp(ls)))
    sg, lg = e.slog(np.array(ls))
    if not (math.isfinite(v) and 1e-250 < v < 1e250):
        return
    assert sg == 1.0
    assert lg == pytest.approx(math.log(v), abs=1e-10 * max(1.0, abs(math.log(v))))


@settings(max_examples=60, deadline=None)
@given(trees, st.floats(0.1, 5.0))
def test_dual_derivative_matches_sympy(e, s):
    v, d = e.dual(np.array(s))
    ref = float(sp.diff(to_sympy(e), s_sym).subs(s_sym, s).evalf(30))
    if not math.isfinite(ref) or abs(ref) > 1e12:
        return
    assert float(d) == pytest.approx(ref, rel=1e-8, abs=1e-10)


def test_log_domain_far_beyond_float_range():
    e = E.parse("pow(s,2)*log(2+s)")
    ls = 1e4
    sg, lg = e.slog(np.array(ls))
    assert sg == 1 and lg == pytest.approx(2 * ls + math.log(ls), rel=1e-14)


def test_log1p_branch_for_tiny_arguments():
    e = E.parse("log(1+s)")
    assert float(e.value(1e-20)) == 1e-20
    sg, lg = e.slog(np.array(-1000.0))
    assert sg == 1 and lg == pytest.approx(-1000.0, rel=1e-15)


def test_iterated_log_structure():
    e = E.iterated_log(3, 16.0)
    assert str(e) == "log(log(log(16+s)))"
    assert float(e.value(0.0)) == pytest.approx(math.log(math.log(math.log(16))))


def test_piecewise_continuity_enforced():
    with pytest.raises(PreconditionError):
        E.piecewise([E.S, E.const(5.0)], [1.0])
    pw = E.piecewise([E.S, E.power(E.S, 2)], [1.0])
    assert pw.breakpoints() == (1.0,)
    np.testing.assert_allclose(pw.value(np.array([0.5, 2.0])), [0.5, 4.0])


def test_parse_params_and_errors():
    assert E.parse("pow(s,a)", {"a": 2.5}) == E.power(E.S, 2.5)
    for bad in ("pow(s,2", "foo(s)", "s ** t", "pow(s)", "'x'"):
        with pytest.raises(ConfigError):
            E.parse(bad)


@settings(max_examples=150, deadline=None)
@given(trees, st.floats(0.05, 20.0))
def test_compiled_matches_tree_walk(e, s):
    from liouville_lab._codegen import compile_expr
    x = np.array([s, 2 * s])
    with np.errstate(all="ignore"):
        v_ref = e.value(x)
        dv_ref, d_ref = e.dual(x)
    np.testing.assert_allclose(compile_expr(e)(x), v_ref, rtol=1e-13, equal_nan=True)
    v, d = compile_expr(e, with_deriv=True)(x)
    np.testing.assert_allclose(v, dv_ref, rtol=1e-13, equal_nan=True)
    np.testing.assert_allclose(d, d_ref, rtol=1e-12, atol=1e-300, equal_nan=True)


def test_compiled_piecewise_and_minmax():
    from liouville_lab._codegen import compile_expr
    e = E.parse("piecewise(s,1,pow(s,2)) + min(s,2) + max(s,1)")
    x = np.array([0.0, 0.5, 1.0, 1.5, 3.0])
    np.testing.assert_allclose(compile_expr(e)(x), e.value(x), rtol=1e-15)
    v, d = compile_expr(e, True)(x)
    v0, d0 = e.dual(x)
    np.testing.assert_allclose(d, d0, rtol=1e-15)
