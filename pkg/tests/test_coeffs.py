import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hjfront.coeffs import Expression, PiecewiseConstantFn as F, PiecewiseSpec, discretize, slopes_from_potential
from hjfront.errors import ExpressionError, InputError


def test_constant():
    fn = discretize(PiecewiseSpec.from_config(1.0), (0, 1), 0.1)
    assert list(fn.values) == [1.0] and fn.total_variation() == 0.0


def test_step_in_time_captured():
    spec = PiecewiseSpec.from_config({"jumps": [0.5], "pieces": [1, 2]}, var="t")
    fn = discretize(spec, (0, 1), 0.3)
    assert 0.5 in fn.breakpoints
    assert fn.values[0] == 1 and fn.values[-1] == 2 and fn.total_variation() == 1.0


def test_smooth_l1_halves():
    spec = PiecewiseSpec.from_config("1 + 0.25*sin(x)")
    dom = (0.0, 2 * math.pi)
    fine = discretize(spec, dom, 1e-3)
    d1 = discretize(spec, dom, 0.1).l1_distance(fine, *dom)
    d2 = discretize(spec, dom, 0.05).l1_distance(fine, *dom)
    assert 1.7 < d1 / d2 < 2.3


@settings(max_examples=40, deadline=None)
@given(st.floats(0.01, 0.5), st.floats(0.1, 2.0))
def test_variation_not_increased(h, k):
    spec = PiecewiseSpec.from_config({"jumps": [0.3], "pieces": [f"sin({k}*x)", "2 + cos(x)"]})
    fn = discretize(spec, (-2, 2), h)
    exact = 0.0
    xs = np.linspace(-2, 2, 40001)
    vals = spec(xs)
    exact = np.sum(np.abs(np.diff(vals)))
    assert fn.total_variation() <= exact + 1e-9
    assert np.all(np.diff(fn.breakpoints) > 0) and len(fn.values) == len(fn.breakpoints) + 1
    assert 0.3 in fn.breakpoints


def test_expression_whitelist():
    assert float(Expression("sqrt(4) + pi*0")(0.0)) == 2.0
    for bad in ["__import__('os')", "x.real", "open('f')", "y + 1", "[1]", "1 if x else 2"]:
        with pytest.raises(ExpressionError):
            Expression(bad)
    with pytest.raises(ExpressionError):
        Expression("log(x)")(-1.0)


def test_spec_errors():
    with pytest.raises(ExpressionError):
        PiecewiseSpec.from_config({"jumps": [0, 1], "pieces": ["1", "2"]})
    with pytest.raises(ExpressionError):
        PiecewiseSpec.from_config({"jumps": [1, 0], "pieces": ["1", "2", "3"]})


def test_step_function_checks():
    with pytest.raises(InputError):
        F.steps([1.0, 0.0], [1, 2, 3])
    with pytest.raises(InputError):
        F.steps([0.0], [1.0])


def test_step_function_eval():
    f = F.steps([0.0, 1.0], [1.0, 3.0, 2.0], (-1, 2))
    assert f.at(0.0) == 3.0 and f.left_value(0.0) == 1.0
    assert f.total_variation() == 3.0
    assert f.jumps() == [(0.0, 1.0, 3.0), (1.0, 3.0, 2.0)]
    assert f.l1_distance(F.constant(1.0), -1, 2) == pytest.approx(2.0 + 1.0)


def test_slopes_from_potential():
    spec = PiecewiseSpec.from_config({"jumps": [0.0], "pieces": ["-x", "2*x"]})
    p0, u_ref = slopes_from_potential(spec, (-1, 1), 0.25)
    assert u_ref == 0.0
    assert list(p0.values) == [-1.0, 2.0] and list(p0.breakpoints) == [0.0]
