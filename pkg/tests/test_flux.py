import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hjfront.errors import DomainError, NoPreimageError, RangeError
from hjfront.flux import custom, offset_eikonal, quadratic_cap, validate

from oracles import eik_H

ps = st.floats(-10, 10, allow_nan=False)
As = st.floats(1, 2)
Gs = st.floats(1, 2)


def test_eval_examples(eik):
    assert eik.eval(0, 1, 1) == 1.0
    assert eik.eval(1, 1, 1) == pytest.approx(2 - math.sqrt(2), abs=1e-15)
    assert eik.eval(-1, 1, 1) == eik.eval(1, 1, 1)


def test_inverse_examples(eik):
    assert eik.inverse(1, 1, 1, "+") == 0.0
    assert eik.inverse(2 - math.sqrt(2), 1, 1, "+") == pytest.approx(1.0, abs=1e-12)
    assert eik.inverse(2 - math.sqrt(2), 1, 1, "-") == pytest.approx(-1.0, abs=1e-12)


def test_inverse_above_peak(eik):
    with pytest.raises(NoPreimageError):
        eik.inverse(1.5, 1, 1)


def test_box_violation(eik):
    with pytest.raises(DomainError):
        eik.eval(0.0, 2.5, 1.0)


def test_guard(cap):
    assert cap.eval(2.0, 1, 1) == -3.0
    with pytest.raises(RangeError):
        cap.eval(2.5, 1, 1)


@given(ps, As, Gs)
def test_eikonal_matches_closed_form(p, a, g):
    assert offset_eikonal().eval(p, a, g) == pytest.approx(eik_H(p, a, g), abs=1e-13)


@given(ps, As, Gs)
def test_even_and_peaked(p, a, g):
    m = offset_eikonal()
    assert m.eval(p, a, g) == m.eval(-p, a, g)
    assert m.eval(p, a, g) <= m.peak(a, g)


@given(st.floats(0, 10), st.floats(0, 10), As, Gs)
def test_unimodal(p, q, a, g):
    m = offset_eikonal()
    lo, hi = sorted((p, q))
    assert m.eval(hi, a, g) <= m.eval(lo, a, g)


@given(st.floats(0, 8), As, Gs, st.sampled_from(["+", "-"]))
def test_inverse_roundtrip(p, a, g, br):
    m = offset_eikonal()
    q = m.inverse(m.eval(p, a, g), a, g, br)
    assert abs(q) == pytest.approx(p, abs=1e-7 * (1 + p))
    assert math.copysign(1, q) == (1 if br == "+" else -1) or q == 0


@settings(max_examples=50)
@given(st.floats(0, 1.9), As, Gs)
def test_bisection_inverse_matches_closed(p, a, g):
    m = quadratic_cap()
    bare = custom("cap_bisect", m.flux, m.a_box, m.g_box, p_guard=2.0)
    h = m.eval(p, a, g)
    # near the peak p is ill-conditioned, so compare in flux space
    q = bare.inverse(h, a, g)
    assert q >= 0 and m.eval(q, a, g) == pytest.approx(h, abs=1e-11)


def test_inverse_array_matches_scalar(eik):
    hs = np.linspace(-3, 1, 9)
    arr = eik.inverse_array(hs, 1.0, 1.0)
    assert np.allclose(arr, [eik.inverse(h, 1.0, 1.0) for h in hs])


def test_validate_eikonal_passes(eik):
    rep = validate(eik, n=6, p_range=10.0)
    assert rep.passed, rep.failures()
    assert rep.constants["lipschitz_p"] <= 1.0 + 1e-12


def test_validate_quadratic_unbounded_fails_lipschitz():
    m = custom("quad", lambda p, a, g: a + g - p * p, (1, 2), (1, 2))
    rep = validate(m, n=5)
    assert not rep.flags["flux_lipschitz"]
    assert rep.witnesses["flux_lipschitz"]


def test_validate_negative_peak_fails():
    m = custom("neg", lambda p, a, g: -a + g - np.sqrt(1 + p * p), (1, 2), (1, 1))
    rep = validate(m, n=5)
    assert not rep.flags["psi_defined"]
    assert rep.witnesses["psi_defined"]


def test_failure_implies_witness():
    m = custom("quad", lambda p, a, g: a + g - p * p, (1, 2), (1, 2))
    rep = validate(m, n=5)
    for k in rep.failures():
        assert rep.witnesses[k]


def test_validate_guarded_cap(cap):
    rep = validate(cap, n=5)
    assert rep.restricted
    assert rep.passed, rep.failures()
