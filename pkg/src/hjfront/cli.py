"""Command-line front end.

    hjfront run          --config cfg.yaml --out out/
    hjfront riemann      --config cfg.yaml
    hjfront convergence  --config builtin:interface
    hjfront verify       --config builtin:smooth --seed 3
    hjfront grid-dump    --config cfg.yaml --delta 0.1

Exit codes: 0 pass, 1 configuration error, 2 solver failure, 3 verification failure.
"""

from __future__ import annotations

import argparse
import logging
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from hjfront import hj, tracker, verify
from hjfront.config import SUITES, RunConfig, load
from hjfront.errors import ConfigError, DomainError, ExpressionError, HJFrontError, InputError, RunError

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER, EXIT_VERIFY = 0, 1, 2, 3

log = logging.getLogger("hjfront")


def _fmt(v) -> str:
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return str(int(v))
    if isinstance(v, str):
        return v
    return f"{float(v):.17g}"


def write_table(path: Path, header, rows):
    with open(path, "w") as fh:
        fh.write("# " + " ".join(header) + "\n")
        for row in rows:
            fh.write(" ".join(_fmt(v) for v in row) + "\n")


def _tag(t: float) -> str:
    return f"{t:.6g}"


def make_tracker(cfg: RunConfig, delta: float | None = None) -> tracker.Tracker:
    delta = cfg.delta if delta is None else delta
    p0, a, g, x_ref, u_ref = cfg.coefficients(delta)
    return tracker.Tracker(cfg.model, p0, a, g, delta, cfg.horizon, glimm_c=cfg.glimm_c,
                           temple_rule=cfg.temple_rule, temple_scale=cfg.temple_scale,
                           x_ref=x_ref, u_ref=u_ref, seed=cfg.seed)


def _sample_points(cfg: RunConfig):
    return np.linspace(cfg.domain[0], cfg.domain[1], cfg.samples)


def _far_window(cfg: RunConfig, *logs):
    """Window containing the domain and every front of the given logs, padded by 1."""
    lo, hi = verify.front_extent(*logs)
    return min(lo, cfg.domain[0]) - 1.0, max(hi, cfg.domain[1]) + 1.0


# -- run -------------------------------------------------------------------------


def cmd_run(cfg: RunConfig, out: Path) -> int:
    tr = make_tracker(cfg)
    lg = tr.run()
    sol = hj.HJSolution(lg)
    xs = _sample_points(cfg)
    (out / "events.txt").write_text(lg.event_table())
    (out / "monitors.txt").write_text(lg.monitor_table())
    for t in cfg.snapshots:
        write_table(out / f"p_t{_tag(t)}.txt", ["x", "p"], zip(xs, lg.sample(t, xs)))
        write_table(out / f"u_t{_tag(t)}.txt", ["x", "u"], zip(xs, sol.u(xs, t)))
        prof = lg.profile(t)
        write_table(out / f"fronts_t{_tag(t)}.txt", ["x", "speed", "p_left", "p_right", "kind"],
                    [(x, s, pl, pr, "a" if ia else "p")
                     for x, s, pl, pr, ia in zip(prof["x"], prof["speed"], prof["p_l"], prof["p_r"], prof["is_a"])])
    ts = np.linspace(0.0, cfg.horizon, cfg.samples)
    write_table(out / "trace.txt", ["t", "u_ref"], [(t, sol.u(lg.x_ref, t)) for t in ts])
    summary = [
        ("delta", cfg.delta), ("horizon", cfg.horizon), ("events", tr.n_events), ("segments", len(lg)),
        ("fronts_final", len(lg.profile(cfg.horizon)["x"])), ("x_ref", lg.x_ref), ("u_ref", lg.u_ref),
        ("P", tr.P), ("glimm_c", tr.C), ("empirical_glimm_c", lg.empirical_glimm_c()),
        ("temple_rule", cfg.temple_rule), ("temple_scale", cfg.temple_scale),
    ]
    write_table(out / "summary.txt", ["key", "value"], summary)
    for note in lg.notes:
        log.info("note: %s", note)
    print(f"run: {tr.n_events} events, {len(lg)} front segments, output in {out}")
    return EXIT_OK


# -- riemann ---------------------------------------------------------------------


def cmd_riemann(cfg: RunConfig, out: Path) -> int:
    r = cfg.riemann
    fan = hj.RiemannFan(cfg.model, r["a_l"], r["a_r"], r["p_l"], r["p_r"], r["g"], cfg.delta)
    t = r["t"]
    rows = [(s, pl, pr, k) for s, pl, pr, k in zip(fan.speeds, fan.p[:-1], fan.p[1:], fan.kinds)]
    write_table(out / "fan.txt", ["speed", "p_left", "p_right", "kind"], rows)
    half = max(1.0, 1.5 * t * max([abs(s) for s in fan.speeds] + [0.0]))
    xs = np.linspace(-half, half, r["samples"])
    prof = []
    for x in xs:
        side = "-" if x <= 0 else "+"
        p, a = fan.state(x / t, side)
        if x == 0:
            a = r["a_l"]
        prof.append((x, p, x * p - t * cfg.model.eval(p, a, r["g"])))
    write_table(out / "riemann_profile.txt", ["x", "p", "u"], prof)
    print("# speed p_left p_right kind")
    for row in rows:
        print(" ".join(_fmt(v) for v in row))
    print(f"# interface flux {_fmt(fan.H0)}")
    return EXIT_OK


# -- convergence -----------------------------------------------------------------


def convergence_table(cfg: RunConfig):
    """Rows (delta, events, l1_diff, ratio, linf_u_diff, fd_l1, p_l1) over the configured sweep."""
    deltas = cfg.convergence["deltas"]
    logs = [make_tracker(cfg, d).run() for d in deltas]
    T = cfg.horizon
    lo, hi = _far_window(cfg, *logs)
    fd = None
    if cfg.convergence["fd_dx"] is not None:
        p0, a, g, _, _ = cfg.coefficients(deltas[-1])
        fcfg = verify.FDOracleConfig(cfg.convergence["fd_dx"], cfg.convergence["fd_cfl"])
        fd = verify.fd_oracle(p0, a, g, cfg.model, fcfg, T, window=cfg.domain)
    rows = []
    prev = None
    for k, (d, lg) in enumerate(zip(deltas, logs)):
        if k + 1 < len(logs):
            l1 = lg.l1_distance(logs[k + 1], T, lo, hi)
            linf = hj.max_gap(hj.HJSolution(lg), hj.HJSolution(logs[k + 1]), T)[0]
        else:
            l1 = linf = math.nan
        ratio = l1 / prev if prev not in (None, 0.0) and not math.isnan(l1) else math.nan
        fd_l1 = verify.l1_to_log(lg, fd, T) if fd is not None else math.nan
        rows.append((d, len(lg.events), l1, ratio, linf, fd_l1, lg.l1_norm(T, lo, hi)))
        prev = l1
    return rows


CONV_HEADER = ["delta", "events", "l1_diff_next", "ratio", "linf_u_diff_next", "fd_l1", "p_l1_norm"]


def cmd_convergence(cfg: RunConfig, out: Path) -> int:
    rows = convergence_table(cfg)
    write_table(out / "convergence.txt", CONV_HEADER, rows)
    print("# " + " ".join(CONV_HEADER))
    for row in rows:
        print(" ".join(_fmt(v) for v in row))
    return EXIT_OK


# -- verify ----------------------------------------------------------------------


@dataclass
class SuiteResult:
    name: str
    passed: bool
    lines: list = field(default_factory=list)


def _family(cfg: RunConfig, a, p0, seed):
    lo, hi = cfg.domain
    fam = verify.TestFunctionFamily.random((lo, hi), cfg.horizon, cfg.verify["test_functions"], seed)
    rx = min(0.3, 0.25 * (hi - lo))
    pts = [b for b in list(a.breakpoints) + list(p0.breakpoints) if lo + rx < b < hi - rx][:4]
    return list(fam) + list(verify.TestFunctionFamily.straddling(pts, cfg.horizon, rx=rx))


def suite_entropy(cfg: RunConfig, ctx) -> SuiteResult:
    lg, p0, a = ctx["log"], ctx["p0"], ctx["a"]
    res = SuiteResult("entropy", True)
    cs = verify.kruzkov_constants(lg)
    worst = min(float(np.min(verify.entropy_residual(lg, cs, phi))) for phi in _family(cfg, a, p0, cfg.seed))
    ok = worst >= -1e-6
    res.lines.append(f"case solution min_residual {_fmt(worst)} {'PASS' if ok else 'FAIL'}")
    res.passed &= ok
    f = cfg.verify["forged"]
    if f is not None:
        flog = verify.forged_stationary_log(cfg.model, f["p_l"], f["p_r"], f["a"], f["g"], cfg.horizon, f["x"],
                                           cfg.domain, cfg.delta)
        rx = min(0.3, 0.25 * (cfg.domain[1] - cfg.domain[0]))
        phi = verify.Bump(f["x"], 0.5 * cfg.horizon, rx, 0.45 * cfg.horizon)
        fw = float(np.min(verify.entropy_residual(flog, verify.kruzkov_constants(flog), phi)))
        ok = fw >= -1e-6
        res.lines.append(f"case forged min_residual {_fmt(fw)} {'PASS' if ok else 'FAIL'}")
        res.passed &= ok
    return res


def suite_weak(cfg: RunConfig, ctx) -> SuiteResult:
    res = SuiteResult("weak", True)
    prev = None
    for d in cfg.verify["deltas"]:
        tr = make_tracker(cfg, d)
        lg = tr.run()
        fam = verify.TestFunctionFamily.random(cfg.domain, cfg.horizon, cfg.verify["test_functions"], cfg.seed)
        r = max(verify.weak_residual(lg, phi, a_exact=cfg.a_spec, g_exact=cfg.g_spec) for phi in fam)
        if prev is None or max(prev, r) <= 1e-10:
            ok, ratio = True, math.nan
        else:
            ratio = r / prev
            ok = ratio <= 0.7
        res.passed &= ok
        res.lines.append(f"delta {_fmt(d)} residual {_fmt(r)} ratio {_fmt(ratio)} {'PASS' if ok else 'FAIL'}")
        prev = r
    return res


def suite_viscosity(cfg: RunConfig, ctx) -> SuiteResult:
    rep = verify.interface_viscosity_check(ctx["log"])
    return SuiteResult("interface-viscosity", rep.passed, [rep.summary()])


def _pairs(cfg: RunConfig, ordered: bool):
    rng = np.random.default_rng(cfg.seed)
    out = []
    for _ in range(cfg.verify["pairs"]):
        u = verify.random_potential(rng, cfg.domain)
        v = verify.ordered_partner(u, rng, cfg.domain) if ordered else verify.random_potential(rng, cfg.domain)
        out.append((u, v, True if ordered else None))
    return out


def _contraction(cfg: RunConfig, ctx, ordered: bool) -> verify.ContractionReport:
    return verify.contraction_suite(_pairs(cfg, ordered), cfg.model, ctx["a"], ctx["g"],
                                    cfg.verify["deltas"][:2], cfg.horizon, cfg.domain)


def suite_contraction(cfg: RunConfig, ctx) -> SuiteResult:
    rep = _contraction(cfg, ctx, False)
    return SuiteResult("contraction", rep.stable(2.0), rep.table().strip().splitlines())


def suite_comparison(cfg: RunConfig, ctx) -> SuiteResult:
    rep = _contraction(cfg, ctx, True)
    return SuiteResult("comparison", rep.stable(2.0), rep.table().strip().splitlines())


def suite_monitors(cfg: RunConfig, ctx) -> SuiteResult:
    rep = verify.monitor_report(ctx["log"], ctx["p0"])
    line = (f"temple_increase {_fmt(rep.temple_increase)} temple_violations {rep.temple_violations} "
            f"glimm_increase {_fmt(rep.glimm_increase)} glimm_violations {rep.glimm_violations} "
            f"bound_excess {_fmt(rep.bound_excess)} events {rep.events}")
    return SuiteResult("monitors", rep.passed, [line])


def suite_interaction(cfg: RunConfig, ctx) -> SuiteResult:
    tr = ctx["tracker"]
    av, gv = ctx["a"].distinct_values(), ctx["g"].distinct_values()
    if len(gv) == 1:
        gv = list(cfg.model.g_box)
    n = cfg.verify["interaction_samples"]
    c1, b1 = verify.interaction_estimate(cfg.model, av, gv, tr.P, n, cfg.seed)
    c2, b2 = verify.interaction_estimate(cfg.model, av, gv, tr.P, n, cfg.seed + 1)
    ok = math.isfinite(c1) and math.isfinite(c2) and b1 == b2 == 0
    if ok and min(c1, c2) > 0:
        ok = max(c1, c2) / min(c1, c2) <= 2.0
    return SuiteResult("interaction-estimate", ok, [f"C_seed{cfg.seed} {_fmt(c1)} C_seed{cfg.seed + 1} {_fmt(c2)}"])


SUITE_FUNCS = {
    "entropy": suite_entropy, "weak": suite_weak, "interface-viscosity": suite_viscosity,
    "contraction": suite_contraction, "comparison": suite_comparison, "monitors": suite_monitors,
    "interaction-estimate": suite_interaction,
}
assert set(SUITE_FUNCS) == set(SUITES)


def run_suites(cfg: RunConfig, names=None):
    names = cfg.verify["suites"] if names is None else names
    if not names:
        return []
    tr = make_tracker(cfg)
    lg = tr.run()
    ctx = {"tracker": tr, "log": lg, "p0": tr.p0, "a": tr.a, "g": tr.g}
    return [SUITE_FUNCS[n](cfg, ctx) for n in names]


def cmd_verify(cfg: RunConfig, out: Path, names=None) -> int:
    results = run_suites(cfg, names)
    lines = []
    for r in results:
        lines.append(f"{r.name} {'PASS' if r.passed else 'FAIL'}")
        lines += [f"  {x}" for x in r.lines]
    text = "\n".join(lines) + ("\n" if lines else "")
    (out / "verify_summary.txt").write_text(text)
    sys.stdout.write(text or "no suites selected\n")
    return EXIT_OK if all(r.passed for r in results) else EXIT_VERIFY


# -- grid-dump -------------------------------------------------------------------


def cmd_grid_dump(cfg: RunConfig, out: Path) -> int:
    p0, a, g, _, _ = cfg.coefficients()
    gr, P = tracker.shared_grid(cfg.model, cfg.delta, [p0], a, g)
    (out / "grid.txt").write_text(gr.dump())
    print(f"grid: {len(gr.levels)} levels ({len(gr.active_levels)} active), "
          f"{gr.breakpoint_count()} breakpoints, P = {_fmt(P)}")
    return EXIT_OK


COMMANDS = {"run": cmd_run, "riemann": cmd_riemann, "convergence": cmd_convergence,
            "verify": cmd_verify, "grid-dump": cmd_grid_dump}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="hjfront", description=__doc__.split("\n\n")[0])
    sub = ap.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", help="YAML file or builtin:<preset> (default builtin:interface)")
        sp.add_argument("--out", default="out", help="output directory (default ./out)")
        sp.add_argument("--delta", type=float, help="override the grid spacing delta")
        sp.add_argument("--seed", type=int, help="override the RNG seed")
        sp.add_argument("--glimm-c", type=float, dest="glimm_c", help="override the Glimm constant")
        sp.add_argument("-v", "--verbose", action="store_true")
        if name == "verify":
            sp.add_argument("--suite", action="append", choices=SUITES,
                            help="run only this suite (repeatable)")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    overrides = {}
    if args.delta is not None:
        overrides["delta"] = args.delta
        overrides["h"] = None
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.glimm_c is not None:
        overrides["glimm_c"] = args.glimm_c
    out = Path(args.out)
    try:
        cfg = load(args.config, overrides)
        out.mkdir(parents=True, exist_ok=True)
        if args.command == "verify":
            return cmd_verify(cfg, out, args.suite)
        return COMMANDS[args.command](cfg, out)
    except (ConfigError, ExpressionError, InputError, DomainError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except RunError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        if exc.dump:
            out.mkdir(parents=True, exist_ok=True)
            (out / "state_dump.txt").write_text(exc.dump + "\n")
            print(f"state dump written to {out / 'state_dump.txt'}", file=sys.stderr)
        return EXIT_SOLVER
    except HJFrontError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
