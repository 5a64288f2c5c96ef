"""Acceptance criteria, one test per criterion.  Tolerances are fixed here and not tuned."""

import math
import time

import numpy as np
import pytest

from hjfront import cli, hj, verify
from hjfront import grid as gm
from hjfront.errors import RunError
from hjfront.config import PRESETS, load
from hjfront.flux import offset_eikonal
from hjfront.riemann import brute_force_pair, interface_pair
from hjfront.tracker import Tracker, state_cap, track

from conftest import SQ125, interface_data, random_bv_data

M = offset_eikonal()
pytestmark = pytest.mark.acceptance


def _report(n, ok, detail):
    print(f"criterion {n}: {'PASS' if ok else 'FAIL'} {detail}")


# 1 ------------------------------------------------------------------------------


def test_criterion_1_riemann_oracle_equivalence():
    rng = np.random.default_rng(2024)
    t0 = time.perf_counter()
    solved = mismatched = 0
    worst_flux = 0.0
    while solved < 200:
        a_l, a_r = rng.uniform(1, 2, 2)
        p_l, p_r = rng.uniform(-1.5, 1.5, 2)
        delta = rng.choice([0.1, 0.2, 0.3])
        P, _ = state_cap(M, [p_l, p_r, p_l, p_r], [a_l, a_l, a_r, a_r], 1.0, max(a_l, a_r))
        gr = gm.build(M, delta, [a_l, a_r], 1.0, [p_l, p_r], max(P, abs(p_l), abs(p_r)))
        jl, jr = gr.level_of(a_l), gr.level_of(a_r)
        ll, lr = gr.levels[jl], gr.levels[jr]
        if jl == jr or max(len(ll), len(lr)) > 60:
            continue
        kl, kr = ll.index_of(p_l), lr.index_of(p_r)
        i, j = interface_pair(ll, kl, lr, kr)[:2]
        mismatched += (i, j) != brute_force_pair(ll, kl, lr, kr)
        worst_flux = max(worst_flux, abs(ll.H[i] - lr.H[j]))
        solved += 1
    elapsed = time.perf_counter() - t0
    ok = mismatched == 0 and worst_flux <= 1e-10 and elapsed <= 10.0
    _report(1, ok, f"problems={solved} mismatches={mismatched} flux={worst_flux:.2e} time={elapsed:.2f}s")
    assert ok


# 2 ------------------------------------------------------------------------------


def test_criterion_2_worked_interface_example():
    lg = track(M, *interface_data(), 0.05, 1.0)
    prof = lg.profile(1.0)
    p_r = float(lg.sample(1.0, [0.2])[0])
    speed = float(prof["speed"][prof["is_a"] == 0.0][0])
    u = hj.reconstruct(lg, 0.0, 0.2, 1.0)
    ok = abs(p_r + SQ125) <= 1e-9 and abs(speed - 0.4472135955) <= 1e-9 and abs(u + 1.2236067977) <= 1e-8
    _report(2, ok, f"p'_r={p_r!r} speed={speed!r} u(0.2,1)-u0(0)={u!r}")
    assert ok


# 3 ------------------------------------------------------------------------------


def _monitor_sweep(scale):
    worst_T = worst_G = -math.inf
    worst_bound = -math.inf
    fuses = 0
    for seed in range(50):
        p0, a, g = random_bv_data(seed)
        try:
            lg = Tracker(M, p0, a, g, 0.05, 1.0, temple_scale=scale).run()
        except RunError:
            fuses += 1
            continue
        rep = verify.monitor_report(lg, p0)
        worst_T, worst_G = max(worst_T, rep.temple_increase), max(worst_G, rep.glimm_increase)
        worst_bound = max(worst_bound, rep.bound_excess)
    return worst_T, worst_G, worst_bound, fuses


def test_criterion_3_monitor_monotonicity():
    dT, dG, excess, fuses = _monitor_sweep("relative")
    ok = dT <= 1e-10 and dG <= 1e-10 and excess <= 1e-8 and fuses == 0
    _report(3, ok, f"worst_dT={dT:.3e} worst_dG={dG:.3e} bound_excess={excess:.3e} fuses={fuses}")
    assert dT <= 1e-10, f"Temple functional increased by {dT:.3e} at a collision"
    assert dG <= 1e-10 and excess <= 1e-8 and fuses == 0


def test_criterion_3_diagnostic_absolute_scale():
    """Same sweep with the flux-difference (unnormalised) weights and the matching bound."""
    dT, dG, excess, fuses = _monitor_sweep("absolute")
    print(f"criterion 3 (absolute-scale diagnostic): worst_dT={dT:.3e} worst_dG={dG:.3e} "
          f"bound_excess={excess:.3e} fuses={fuses}")
    assert dT <= 1e-10 and dG <= 1e-10 and excess <= 1e-8 and fuses == 0


# 4 ------------------------------------------------------------------------------


def test_criterion_4_convergence():
    t0 = time.perf_counter()
    rows = cli.convergence_table(load("builtin:interface"))
    elapsed = time.perf_counter() - t0
    diffs = [r[2] for r in rows[:-1]]
    decreasing = all(d2 < d1 for d1, d2 in zip(diffs[:-1], diffs[1:]))
    ratios = [d2 / d1 if d1 > 0 else math.nan for d1, d2 in zip(diffs[:-1], diffs[1:])]
    ratio_ok = all(r <= 0.9 for r in ratios)
    fd_l1, norm = rows[-1][5], rows[-1][6]
    fd_ok = fd_l1 <= 0.05 * norm
    ok = decreasing and ratio_ok and fd_ok and elapsed <= 120
    _report(4, ok, f"diffs={diffs} ratios={ratios} fd_l1={fd_l1:.3e} p_l1={norm:.3e} time={elapsed:.1f}s")
    assert fd_ok and elapsed <= 120
    assert decreasing and ratio_ok, f"differences {diffs} are not strictly decreasing with ratio <= 0.9"


# 5 ------------------------------------------------------------------------------


def test_criterion_5_contraction_and_comparison():
    cfg = load("builtin:interface", {"seed": 5})
    cfg.verify["pairs"] = 20
    cfg.verify["deltas"] = [0.1, 0.05]
    p0, a, g, _, _ = cfg.coefficients()
    ctx = {"a": a, "g": g}
    con = cli._contraction(cfg, ctx, False)
    cmp_ = cli._contraction(cfg, ctx, True)
    ok = con.stable(2.0) and cmp_.stable(2.0)
    _report(5, ok, f"contraction {con.constants} comparison {cmp_.constants}")
    assert ok


# 6 ------------------------------------------------------------------------------


def test_criterion_6_entropy_and_weak_residuals():
    lines, ok = [], True
    for name in sorted(PRESETS):
        cfg = load(f"builtin:{name}")
        cfg.verify["forged"] = {"p_l": 1.0, "p_r": -1.0, "a": 1.0, "g": 1.0, "x": 0.0}
        res = cli.run_suites(cfg, ["entropy", "weak"])
        ent, weak = res
        sol_ok = any(x.startswith("case solution") and x.endswith("PASS") for x in ent.lines)
        forged = [x for x in ent.lines if x.startswith("case forged")][0]
        forged_detected = float(forged.split()[3]) < -1e-3
        ok &= sol_ok and forged_detected and weak.passed
        lines.append(f"{name}: entropy={'ok' if sol_ok else 'NEG'} forged={forged.split()[3]} "
                     f"weak=[{'; '.join(weak.lines)}]")
    _report(6, ok, " | ".join(lines))
    assert ok


# 7 ------------------------------------------------------------------------------


def test_criterion_7_interface_viscosity():
    total = verify.ViscosityReport()
    bad = 0
    for seed in range(100):
        p0, a, g = random_bv_data(seed)
        rep = verify.interface_viscosity_check(track(M, p0, a, g, 0.05, 1.0))
        total.epochs += rep.epochs
        total.concave += rep.concave
        total.convex += rep.convex
        bad += (len(rep.dichotomy_violations) + len(rep.mirrored_violations)
                + len(rep.sub_violations) + len(rep.super_violations))
    ok = bad == 0 and total.epochs > 0
    _report(7, ok, f"epochs={total.epochs} concave={total.concave} convex={total.convex} violations={bad}")
    assert ok


# 8 ------------------------------------------------------------------------------


def test_criterion_8_hj_structure():
    rng = np.random.default_rng(8)
    closed = 0.0
    for _ in range(100):
        a_l, a_r = rng.uniform(1, 2, 2)
        p_l, p_r = rng.uniform(-1, 1, 2)
        x, t = rng.uniform(-1.5, 1.5), rng.uniform(0.1, 1.5)
        u1 = hj.riemann_hj(M, a_l, a_r, p_l, p_r, 0.0, x, t, delta=0.1)
        u2 = hj.riemann_hj_integral(M, a_l, a_r, p_l, p_r, 0.0, x, t, delta=0.1)
        closed = max(closed, abs(u1 - u2))
    cont = grad = 0.0
    logs = [track(M, *interface_data(), 0.05, 1.0)]
    logs += [track(M, *random_bv_data(s), 0.05, 1.0) for s in range(5)]
    for lg in logs:
        cont = max(cont, hj.continuity_check(lg), hj.frontwise_consistency(lg))
        sol = hj.HJSolution(lg)
        for t in (0.3, 0.7, 1.0):
            fx = lg.profile(t)["x"]
            if len(fx):
                cont = max(cont, float(np.max(np.abs(sol.u(fx + 1e-12, t) - sol.u(fx - 1e-12, t)))))
            xs = hj.away_from_fronts(lg, t, np.linspace(-2, 2, 401), margin=1e-4)
            grad = max(grad, hj.gradient_check(lg, t, xs))
    ok = cont <= 1e-9 and closed <= 1e-10 and grad <= 1e-6
    _report(8, ok, f"continuity={cont:.2e} closed_vs_integral={closed:.2e} gradient={grad:.2e}")
    assert ok


# 9 ------------------------------------------------------------------------------


def test_criterion_9_interaction_estimate():
    av, gv = [1.0, 1.5, 2.0], [1.0, 1.3]
    P, _ = state_cap(M, [1.0, 1.0, 1.0], av, 1.0, 2.0)
    c1, b1 = verify.interaction_estimate(M, av, gv, P, 1000, seed=0)
    c2, b2 = verify.interaction_estimate(M, av, gv, P, 1000, seed=1)
    _, v1 = verify.interaction_estimate(M, av, gv, P, 1000, seed=0, C=c1)
    _, v2 = verify.interaction_estimate(M, av, gv, P, 1000, seed=1, C=c2)
    ok = (math.isfinite(c1) and math.isfinite(c2) and b1 == b2 == v1 == v2 == 0
          and max(c1, c2) <= 2 * min(c1, c2))
    _report(9, ok, f"C_seed0={c1:.4f} C_seed1={c2:.4f} violations={v1 + v2}")
    assert ok
