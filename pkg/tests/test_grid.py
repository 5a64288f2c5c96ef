import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hjfront import grid as gm
from hjfront.errors import InputError, RangeError
from hjfront.flux import offset_eikonal

M = offset_eikonal()
R2 = math.sqrt(2) - 1


def test_z_examples():
    assert gm.z_transform(M, 0, 1, 1) == 0.0
    assert gm.z_transform(M, 1, 1, 1) == pytest.approx(R2, abs=1e-15)
    assert gm.z_transform(M, -1, 1, 1) == pytest.approx(-R2, abs=1e-15)


def test_psi_examples():
    assert gm.psi(M, 0, 1.3, 1.1) == 0.0
    assert gm.psi(M, 1, 1, 1) == pytest.approx(-R2, abs=1e-15)
    assert gm.psi(M, -1, 1, 1) == pytest.approx(R2, abs=1e-15)


@given(st.floats(-8, 8), st.floats(1, 2), st.floats(1, 2))
def test_psi_z_relation(p, a, g):
    assert abs(gm.psi(M, p, a, g) + gm.z_transform(M, p, a, g) / M.peak(a, g)) <= 1e-12


@given(st.floats(-8, 8), st.floats(-8, 8), st.floats(1, 2), st.floats(1, 2))
def test_z_odd_monotone(p, q, a, g):
    assert gm.z_transform(M, -p, a, g) == -gm.z_transform(M, p, a, g)
    if p <= q:
        assert gm.z_transform(M, p, a, g) <= gm.z_transform(M, q, a, g)


@given(st.floats(-3, 3), st.floats(1, 2), st.floats(1, 2))
def test_z_inverse(p, a, g):
    z = gm.z_transform(M, p, a, g)
    q = gm.z_inverse(M, z, a, g)
    assert gm.z_transform(M, q, a, g) == pytest.approx(z, abs=1e-12)
    if abs(p) > 1e-3:  # p is ill-conditioned near the peak
        assert q == pytest.approx(p, abs=1e-9)


def test_build_single_level():
    gr = gm.build(M, 0.5, [1.0], 1.0, [0.0], 1.0)
    assert len(gr.levels) == 1 and gr.levels[0].alpha == 1.0
    z = gr.levels[0].z
    assert 0.0 in z
    assert z[0] == pytest.approx(-R2) and z[-1] == pytest.approx(R2)


def test_lattice_data_adds_nothing():
    base = gm.build(M, 0.1, [1.0], 1.0, [0.0], 2.0)
    # p-values whose z sits on the lattice
    on = [gm.z_inverse(M, 0.3, 1.0, 1.0), gm.z_inverse(M, -0.5, 1.0, 1.0)]
    gr = gm.build(M, 0.1, [1.0], 1.0, [0.0] + on, 2.0)
    assert len(gr.levels[0]) == len(base.levels[0])


def test_levels_contain_data_alphas():
    gr = gm.build(M, 0.2, [1.0, 1.5], 1.0, [0.0], 2.0)
    al = [lev.alpha for lev in gr.levels]
    assert any(abs(x - 1.0) < 1e-12 for x in al) and any(abs(x - 1.5) < 1e-12 for x in al)


def test_interp_examples():
    gr = gm.build(M, 1.0, [1.0], 1.0, [0.0, 1.0], 1.0)
    lev = gr.levels[0]
    k0, k1 = lev.index_of(0.0), lev.index_of(1.0)
    assert k1 == k0 + 1
    assert gm.flux_interp(gr, 0, 1.0) == lev.H[k1]
    assert gm.flux_interp(gr, 0, 0.5) == pytest.approx((1 + 2 - math.sqrt(2)) / 2, abs=1e-12)
    with pytest.raises(RangeError):
        gm.flux_interp(gr, 0, 5.0)


def test_build_errors():
    with pytest.raises(InputError):
        gm.build(M, 0.0, [1.0], 1.0, [0.0], 1.0)
    with pytest.raises(InputError):
        gm.build(M, 0.1, [], 1.0, [0.0], 1.0)
    with pytest.raises(InputError):
        gm.build(M, 0.1, [1.0], 1.0, [3.0], 1.0)


grids = st.builds(
    lambda d, a, pv: gm.build(M, d, a, 1.0, pv, 2.0),
    st.sampled_from([0.05, 0.1, 0.25]),
    st.lists(st.floats(1, 2), min_size=1, max_size=3),
    st.lists(st.floats(-2, 2), min_size=1, max_size=4),
)


@settings(max_examples=40, deadline=None)
@given(grids)
def test_grid_invariants(gr):
    for j, lev in enumerate(gr.levels):
        assert np.all(np.diff(lev.z) > 0) and np.all(np.diff(lev.p) > 0)
        # closure at nodes and agreement with the model
        for k in range(len(lev)):
            assert gm.flux_interp(gr, j, lev.p[k]) == lev.H[k]
        assert np.allclose(lev.H, M.eval_array(lev.p, lev.a, gr.g), atol=1e-13)
        # unimodal and lattice density
        neg, pos = lev.p <= 0, lev.p >= 0
        assert np.all(np.diff(lev.H[neg]) >= -1e-13) and np.all(np.diff(lev.H[pos]) <= 1e-13)
        assert np.max(np.diff(lev.z)) <= gr.delta + 1e-12
        zP = gm.z_transform(M, gr.P, lev.a, gr.g)
        assert lev.z[0] <= -zP + 1e-9 and lev.z[-1] >= zP - 1e-9
    for v in gr.data_values:
        for j in gr.active_levels:
            gr.levels[j].index_of(v)


@settings(max_examples=20, deadline=None)
@given(grids, st.floats(-1.5, 1.5))
def test_interp_error_bounded_by_delta(gr, p):
    for j, lev in enumerate(gr.levels):
        assert abs(gm.flux_interp(gr, j, p) - M.eval(p, lev.a, gr.g)) <= gr.delta + 1e-12


def test_regrid_identity_and_idempotence():
    gr = gm.build(M, 0.1, [1.0, 1.5], 1.0, [0.0, 0.7], 2.0)
    same = gm.regrid_for_g(gr, 1.0, [0.0, 0.7])
    for l1, l2 in zip(gr.levels, same.levels):
        assert np.array_equal(l1.p, l2.p)
    g2 = gm.regrid_for_g(gr, 1.3, [0.7])
    g3 = gm.regrid_for_g(gr, 1.3, [0.7])
    assert all(np.array_equal(a.p, b.p) for a, b in zip(g2.levels, g3.levels))
    for j in g2.active_levels:
        g2.levels[j].index_of(0.7)
    assert g2.breakpoint_count() >= sum(len(g2.levels[j]) for j in g2.active_levels)


def test_dump_columns():
    gr = gm.build(M, 0.5, [1.0], 1.0, [0.0], 1.0)
    lines = gr.dump().splitlines()
    assert lines[0] == "# level k z p H"
    assert len(lines) == 1 + gr.breakpoint_count()
    assert all(len(x.split()) == 5 for x in lines[1:])
