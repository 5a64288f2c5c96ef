import math

import numpy as np
import pytest

from hjfront import verify
from hjfront.coeffs import PiecewiseConstantFn as F, PiecewiseSpec
from hjfront.errors import InputError
from hjfront.flux import offset_eikonal
from hjfront.tracker import track

from conftest import SQ125, interface_data, random_bv_data

M = offset_eikonal()
DOM = (-2.0, 2.0)
G1 = F.constant(1.0, (0.0, 1.0))
A1 = F.constant(1.0, DOM)


def _shock_log():
    return track(M, F.steps([0.0], [-1.0, 1.0], DOM), A1, G1, 0.1, 1.0)


def test_bump_support_and_derivatives():
    b = verify.Bump(0.1, 0.5, 0.3, 0.2)
    assert b(0.1, 0.5) == 1.0 and b(0.4, 0.5) == 0.0 and b(0.1, 0.75) == 0.0
    h = 1e-6
    assert b.dx(0.2, 0.45) == pytest.approx((b(0.2 + h, 0.45) - b(0.2 - h, 0.45)) / (2 * h), rel=1e-6)
    assert b.dt(0.2, 0.45) == pytest.approx((b(0.2, 0.45 + h) - b(0.2, 0.45 - h)) / (2 * h), rel=1e-6)
    xs = np.linspace(-0.2, 0.4, 200001)
    assert b.int_x(-0.2, 0.4) == pytest.approx(np.sum(0.5 * (b(xs[1:], 0.5) + b(xs[:-1], 0.5)) * np.diff(xs)), abs=1e-9)


def test_family_inside_window():
    fam = verify.TestFunctionFamily.random((-1, 1), 0.5, 20, seed=4)
    for phi in fam:
        lo, hi = phi.x_support
        t0, t1 = phi.t_support
        assert -1 <= lo and hi <= 1 and 0 <= t0 and t1 <= 0.5


def test_entropy_constant_is_zero():
    lg = track(M, F.constant(0.3, DOM), A1, G1, 0.1, 1.0)
    phi = verify.Bump(0.0, 0.5, 0.5, 0.3)
    r = verify.entropy_residual(lg, verify.kruzkov_constants(lg), phi)
    assert np.max(np.abs(r)) <= 1e-12


def test_entropy_admissible_shock():
    lg = _shock_log()
    phi = verify.Bump(0.0, 0.5, 0.3, 0.45)
    r = verify.entropy_residual(lg, [0.0], phi)
    assert r[0] >= -1e-12


def test_entropy_forged_shock_detected():
    flog = verify.forged_stationary_log(M, 1.0, -1.0, 1.0, 1.0, 1.0)
    phi = verify.Bump(0.0, 0.5, 0.3, 0.45)
    assert verify.entropy_residual(flog, [0.0], phi)[0] < -1e-3


def test_entropy_line_and_area_forms_agree():
    p0, a, g = random_bv_data(11)
    lg = track(M, p0, a, g, 0.1, 1.0)
    cs = verify.kruzkov_constants(lg)[::7]
    for phi in verify.TestFunctionFamily.random(DOM, 1.0, 3, seed=2):
        r1 = verify.entropy_residual(lg, cs, phi, method="fronts")
        r2 = verify.entropy_residual(lg, cs, phi, method="area")
        assert np.allclose(r1, r2, atol=1e-9)


def test_weak_residual_constant():
    lg = track(M, F.constant(0.3, DOM), A1, G1, 0.1, 1.0)
    assert verify.weak_residual(lg, verify.Bump(0.0, 0.5, 0.5, 0.3)) <= 1e-10


def test_weak_residual_exact_for_step_coefficients():
    lg = track(M, *interface_data(), 0.05, 1.0)
    for phi in verify.TestFunctionFamily.random(DOM, 1.0, 5, seed=1):
        assert verify.weak_residual(lg, phi) <= 1e-10


def test_viscosity_interface_example():
    lg = track(M, *interface_data(), 0.05, 1.0)
    rep = verify.interface_viscosity_check(lg)
    assert rep.epochs >= 1 and rep.passed, rep.summary()
    assert rep.concave >= 1
    # equality at sigma = p'_l = 0: phi_t + min(H(0, 1), H(0, 1.5)) = -1 + 1
    assert rep.worst_sub == pytest.approx(0.0, abs=1e-12)


def test_viscosity_flags_bad_epoch():
    lg = track(M, *interface_data(), 0.05, 1.0)
    i = int(np.nonzero(lg.arrays["is_a"] > 0)[0][0])
    lg.rows[lg.order[i]][5:7] = [0.5, -0.2]  # concave kink straddling 0
    lg._arr = None
    rep = verify.interface_viscosity_check(lg)
    assert rep.dichotomy_violations and not rep.passed


def test_fd_oracle_constant():
    res = verify.fd_oracle(F.constant(0.3, DOM), A1, G1, M, verify.FDOracleConfig(0.05), 0.5)
    assert np.all(res.p == 0.3)


def test_fd_oracle_stationary_shock():
    dx = 1e-3
    lg = _shock_log()
    res = verify.fd_oracle(F.steps([0.0], [-1.0, 1.0], DOM), A1, G1, M, verify.FDOracleConfig(dx), 1.0)
    assert verify.l1_to_log(lg, res, 1.0) <= 3 * dx


def test_fd_oracle_interface():
    p0, a, g = interface_data()
    lg = track(M, p0, a, g, 0.05, 1.0)
    res = verify.fd_oracle(p0, a, g, M, verify.FDOracleConfig(2e-3), 1.0)
    assert verify.l1_to_log(lg, res, 1.0) <= 0.02


def test_fd_config_errors():
    with pytest.raises(InputError):
        verify.FDOracleConfig(0.0)
    with pytest.raises(InputError):
        verify.FDOracleConfig(0.1, cfl=1.5)


def test_contraction_identical_and_shifted():
    rng = np.random.default_rng(0)
    u0 = verify.random_potential(rng, DOM)
    a = F.steps([0.3], [1.0, 1.4], DOM)
    r = verify.contraction_pair(M, u0, u0, a, G1, 0.1, 1.0, DOM)
    assert r.linf_gap == 0.0 and r.l1_gap == 0.0
    v0 = PiecewiseSpec(u0.jumps, tuple(type(e)(e.source + " + 1.0") for e in u0.pieces))
    r = verify.contraction_pair(M, u0, v0, a, G1, 0.1, 1.0, DOM, ordered=True)
    # u - v = -1 everywhere; positive parts only are reported
    assert r.linf_gap == 0.0 and r.order_gap == 0.0


def test_ordered_partner_dominates():
    rng = np.random.default_rng(5)
    u0 = verify.random_potential(rng, DOM)
    v0 = verify.ordered_partner(u0, rng, DOM)
    xs = np.linspace(*DOM, 2001)
    assert np.all(v0(xs) >= u0(xs) - 1e-15)


def test_interaction_estimate_finite():
    c1, bad1 = verify.interaction_estimate(M, [1.0, 1.5], [1.0, 1.3], 2.0, 500, seed=0)
    assert math.isfinite(c1) and bad1 == 0
    _, bad = verify.interaction_estimate(M, [1.0, 1.5], [1.0, 1.3], 2.0, 500, seed=0, C=c1)
    assert bad == 0


def test_monitor_report_interface():
    p0, a, g = interface_data()
    lg = track(M, p0, a, g, 0.05, 1.0)
    rep = verify.monitor_report(lg, p0)
    assert rep.passed and rep.events == 0


def test_psi_variation_scales():
    p0 = F.steps([0.0], [-1.0, 1.0], DOM)
    rel = verify.psi_variation(M, p0, A1, 1.0, "relative")
    ab = verify.psi_variation(M, p0, A1, 1.0, "absolute")
    assert rel == pytest.approx(2 * (math.sqrt(2) - 1)) and ab == pytest.approx(rel)
    a = F.constant(1.5, DOM)
    assert verify.psi_variation(M, p0, a, 1.0, "absolute") == pytest.approx(
        1.5 * verify.psi_variation(M, p0, a, 1.0, "relative"))
