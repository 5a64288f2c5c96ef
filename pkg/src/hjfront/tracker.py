"""Front-tracking engine.

The approximate solution is a finite list of fronts between grid states.
Fronts move with chord speeds; when two of them meet, the local Riemann
problem between the outer states of the meeting cluster is solved on the
grid and the new fan replaces the cluster.  At every jump of g the grid is
rebuilt with the current states as nodes and every discontinuity is
re-solved.  The whole history is kept as a list of straight front segments,
from which the solution can be evaluated at any (x, t).
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from hjfront import grid as gridmod
from hjfront.coeffs import PiecewiseConstantFn
from hjfront.errors import InputError, NoPreimageError, RunError, UnsolvableRiemannError
from hjfront.flux import HamiltonianModel
from hjfront.riemann import solve_interface, solve_scalar

POS_TOL = 1e-9
TIME_TOL = 1e-11
EVENT_FUSE = 10_000_000
MONO_TOL = 1e-10


@dataclass(eq=False)
class Front:
    x0: float
    t0: float
    speed: float
    kind: str  # "p" or "a"
    left: tuple
    right: tuple
    fid: int
    prev: Optional["Front"] = field(default=None, repr=False)
    next: Optional["Front"] = field(default=None, repr=False)
    alive: bool = True

    def pos(self, t: float) -> float:
        if self.speed == 0.0:
            return self.x0
        return self.x0 + self.speed * (t - self.t0)


@dataclass(frozen=True)
class MonitorSample:
    time: float
    T: float
    Q: float
    G: float
    C: float
    kind: str
    interval: int


@dataclass(frozen=True)
class EventRecord:
    time: float
    kind: str  # "collide" or "g-jump"
    position: float
    fronts_in: int
    fronts_out: int
    T: float
    Q: float
    G: float


# -- a-priori bounds -------------------------------------------------------------


def state_cap(model: HamiltonianModel, p_values, a_values, g: float, a_sup: float):
    """G+(inf H(p, a), sup a) for paired samples; returns (P, capped_flag)."""
    hmin = min(model.eval(p, a, g) for p, a in zip(p_values, a_values))
    try:
        return model.inverse(hmin, a_sup, g, "+"), False
    except NoPreimageError:
        return 0.0, True


def _paired_values(p: PiecewiseConstantFn, a: PiecewiseConstantFn):
    pts = np.unique(np.concatenate([p.breakpoints, a.breakpoints]))
    if len(pts) == 0:
        return [p.values[0]], [a.values[0]]
    mids = np.concatenate([[pts[0] - 1.0], 0.5 * (pts[:-1] + pts[1:]), [pts[-1] + 1.0]])
    return list(p(mids)), list(a(mids))


def remaining_variation(g: PiecewiseConstantFn, t: float, horizon: float, inclusive: bool) -> float:
    """|g|_BV over [t, horizon]; ``inclusive`` counts a jump located exactly at t."""
    total = 0.0
    for tb, gl, gr in g.jumps():
        if tb > horizon or tb <= 0.0:
            continue
        if tb > t or (inclusive and tb == t):
            total += abs(gr - gl)
    return total


def sample_interaction_constant(model: HamiltonianModel, a_values, g_values, P: float,
                                n: int = 1000, seed: int = 0):
    """Largest observed ratio (|dPsi(g+)| - |dPsi(g-)|) / (|g+ - g-| |dPsi(g-)|)."""
    rng = np.random.default_rng(seed)
    a_values = list(a_values)
    glo, ghi = min(g_values), max(g_values)
    worst = 0.0
    for _ in range(n):
        pl, pr = rng.uniform(-P, P, 2)
        a = a_values[rng.integers(len(a_values))] if rng.random() < 0.5 else rng.uniform(min(a_values), max(a_values))
        gm, gp = rng.uniform(glo, ghi, 2) if ghi > glo else (glo, glo)
        if gm == gp or pl == pr:
            continue
        d0 = abs(gridmod.psi(model, pr, a, gm) - gridmod.psi(model, pl, a, gm))
        d1 = abs(gridmod.psi(model, pr, a, gp) - gridmod.psi(model, pl, a, gp))
        if d0 <= 1e-14:
            continue
        worst = max(worst, (d1 - d0) / (abs(gp - gm) * d0))
    return worst


def calibrate_glimm_c(model, a_values, g: PiecewiseConstantFn, horizon: float, P: float, seed=0):
    """Glimm constant large enough for monotonicity across every g-jump.

    With per-jump growth factor 1 + K|dg| the functional T(1 + C V) is
    non-increasing when C >= K / (1 - K V), V the remaining variation.  K
    covers the sampled Psi estimate and the linear g-dependence of the
    a-front weights.
    """
    gvals = [float(v) for v in g.values]
    V = remaining_variation(g, 0.0, horizon, True)
    if V == 0.0:
        return 1.0, 0.0
    K = max(sample_interaction_constant(model, a_values, gvals, P, 400, seed), 1.0 / min(gvals))
    K *= 1.25
    if K * V >= 0.9:
        return 10.0 * K / max(1e-3, 1.0 - min(K * V, 0.999)), K
    return K / (1.0 - K * V), K


# -- solution log ----------------------------------------------------------------


class SolutionLog:
    """Complete space-time history of a tracked solution."""

    COLS = ("x0", "t0", "speed", "t_end", "is_a", "p_l", "p_r", "a_l", "a_r", "H_l", "H_r", "g", "fid",
            "interval")

    def __init__(self, model, a, g, horizon, far_left, x_ref=0.0, u_ref=0.0):
        self.model = model
        self.a = a
        self.g = g
        self.horizon = float(horizon)
        self.far_left = far_left  # (p, a)
        self.x_ref = float(x_ref)
        self.u_ref = float(u_ref)
        self.rows = {}
        self.order = []
        self.events = []
        self.monitors = []
        self.caps = []  # (t_n, P_n, max |p| at start of interval, capped flag)
        self.glimm_c = None
        self.temple_rule = None
        self.temple_scale = None
        self.delta = None
        self.notes = []
        self.grids = []  # (t_start, grid) per g-interval
        self._arr = None

    def open(self, front: Front, grid, interval: int):
        (jl, kl), (jr, kr) = front.left, front.right
        ll, lr = grid.levels[jl], grid.levels[jr]
        self.rows[front.fid] = [front.x0, front.t0, front.speed, math.inf, front.kind == "a",
                                ll.p[kl], lr.p[kr], ll.a, lr.a, ll.H[kl], lr.H[kr], grid.g,
                                front.fid, interval]
        self.order.append(front.fid)
        self._arr = None

    def close(self, front: Front, t: float):
        self.rows[front.fid][3] = t
        self._arr = None

    @property
    def arrays(self):
        if self._arr is None:
            data = np.array([self.rows[f] for f in self.order], dtype=float).reshape(-1, len(self.COLS))
            self._arr = {c: data[:, i] for i, c in enumerate(self.COLS)}
        return self._arr

    def __len__(self):
        return len(self.order)

    def _check_t(self, t):
        if not (0.0 <= t <= self.horizon + 1e-12):
            raise InputError(f"t={t} outside the simulated range [0, {self.horizon}]")

    def profile(self, t: float):
        """(positions, right states) of the fronts alive at t, sorted left to right."""
        self._check_t(t)
        A = self.arrays
        m = (A["t0"] <= t) & (t < A["t_end"])
        x = A["x0"][m] + A["speed"][m] * (t - A["t0"][m])
        x = np.where(A["speed"][m] == 0.0, A["x0"][m], x)
        order = np.lexsort((A["fid"][m], A["speed"][m], x))
        out = {c: A[c][m][order] for c in self.COLS}
        out["x"] = x[order]
        return out

    def sample(self, t: float, xs, with_a=False):
        prof = self.profile(t)
        xs = np.atleast_1d(np.asarray(xs, dtype=float))
        idx = np.searchsorted(prof["x"], xs, side="right") - 1
        p = np.where(idx < 0, self.far_left[0], prof["p_r"][np.maximum(idx, 0)] if len(idx) and len(prof["x"]) else self.far_left[0])
        if not with_a:
            return p
        a = np.where(idx < 0, self.far_left[1], prof["a_r"][np.maximum(idx, 0)] if len(idx) and len(prof["x"]) else self.far_left[1])
        return p, a

    def integral_p(self, t: float, x_from: float, x_to: float) -> float:
        """Exact integral of p(., t) from x_from to x_to."""
        if x_to < x_from:
            return -self.integral_p(t, x_to, x_from)
        prof = self.profile(t)
        xs = prof["x"]
        inside = (xs > x_from) & (xs < x_to)
        pts = np.concatenate([[x_from], xs[inside], [x_to]])
        mids = 0.5 * (pts[:-1] + pts[1:])
        vals = self.sample(t, mids)
        return float(np.sum(vals * np.diff(pts)))

    def l1_distance(self, other: "SolutionLog", t: float, lo: float, hi: float) -> float:
        pts = np.concatenate([[lo, hi], self.profile(t)["x"], other.profile(t)["x"]])
        pts = np.unique(pts[(pts >= lo) & (pts <= hi)])
        mids = 0.5 * (pts[:-1] + pts[1:])
        return float(np.sum(np.abs(self.sample(t, mids) - other.sample(t, mids)) * np.diff(pts)))

    def l1_norm(self, t: float, lo: float, hi: float) -> float:
        pts = self.profile(t)["x"]
        pts = np.unique(np.concatenate([[lo, hi], pts[(pts > lo) & (pts < hi)]]))
        mids = 0.5 * (pts[:-1] + pts[1:])
        return float(np.sum(np.abs(self.sample(t, mids)) * np.diff(pts)))

    def g_at(self, t: float) -> float:
        return self.g.at(t)

    def grid_at(self, t: float):
        """Grid in force at time t (the later one at a restart time)."""
        out = self.grids[0][1]
        for t0, gr in self.grids:
            if t0 <= t:
                out = gr
        return out

    def flux_trace(self, x0: float, t: float):
        """Piecewise-constant flux through x = x0 on [0, t] as (t_start, t_end, value) pieces."""
        self._check_t(t)
        A = self.arrays
        times = {0.0, float(t)}
        times.update(tb for tb, _, _ in self.g.jumps() if 0.0 < tb < t)
        s = A["speed"]
        moving = s != 0.0
        with np.errstate(divide="ignore", invalid="ignore"):
            tau = A["t0"] + (x0 - A["x0"]) / np.where(moving, s, 1.0)
        hit = moving & (tau >= A["t0"]) & (tau < A["t_end"]) & (tau > 0) & (tau < t)
        times.update(float(v) for v in tau[hit])
        at = np.abs(A["x0"] - x0) <= POS_TOL
        times.update(float(v) for v in A["t0"][at] if 0 < v < t)
        times.update(float(v) for v in A["t_end"][at] if 0 < v < t)
        ts = sorted(times)
        pieces = []
        for ta, tb in zip(ts[:-1], ts[1:]):
            if tb - ta <= 0.0:
                continue
            tm = 0.5 * (ta + tb)
            p, a = self.sample(tm, [x0], with_a=True)
            h = self.model.eval(float(p[0]), float(a[0]), self.g.at(tm))
            if pieces and pieces[-1][2] == h and pieces[-1][1] == ta:
                pieces[-1] = (pieces[-1][0], tb, h)
            else:
                pieces.append((ta, tb, h))
        return pieces

    def flux_integral(self, x0: float, t: float) -> float:
        return float(sum((tb - ta) * h for ta, tb, h in self.flux_trace(x0, t)))

    def front_positions(self, t: float):
        return self.profile(t)["x"]

    def event_table(self) -> str:
        lines = ["# time type position fronts_in fronts_out T Q G"]
        for e in self.events:
            lines.append(f"{e.time:.17g} {e.kind} {e.position:.17g} {e.fronts_in} {e.fronts_out} "
                         f"{e.T:.17g} {e.Q:.17g} {e.G:.17g}")
        return "\n".join(lines) + "\n"

    def monitor_table(self) -> str:
        lines = ["# t T Q G C kind interval"]
        for m in self.monitors:
            lines.append(f"{m.time:.17g} {m.T:.17g} {m.Q:.17g} {m.G:.17g} {m.C:.17g} {m.kind} {m.interval}")
        return "\n".join(lines) + "\n"

    def empirical_glimm_c(self) -> float:
        """Smallest C for which G would have been non-increasing over the run."""
        need = 0.0
        mons = self.monitors
        V = lambda m, incl: remaining_variation(self.g, m.time, self.horizon, incl)
        for b, a in zip(mons[:-1], mons[1:]):
            if a.T <= b.T + MONO_TOL:
                continue
            if b.kind == "g-before" and a.kind == "g-after":
                den = b.T * V(b, True) - a.T * V(a, False)
                need = max(need, (a.T - b.T) / den if den > 0 else math.inf)
            else:
                return math.inf
        return need


# -- engine ----------------------------------------------------------------------


class Tracker:
    """Event-driven front tracking for p_t + H(p, a(x), g(t))_x = 0."""

    def __init__(self, model: HamiltonianModel, p0: PiecewiseConstantFn, a: PiecewiseConstantFn,
                 g: PiecewiseConstantFn, delta: float, horizon: float, glimm_c: float | None = None,
                 temple_rule: str = "flipped", temple_scale: str = "relative", grid=None, P: float | None = None,
                 x_ref: float = 0.0, u_ref: float = 0.0, seed: int = 0, fuse: int = EVENT_FUSE):
        if not (horizon > 0 and math.isfinite(horizon)):
            raise InputError(f"horizon must be positive, got {horizon}")
        if temple_rule not in ("flipped", "literal"):
            raise InputError(f"unknown temple rule {temple_rule!r}")
        if temple_scale not in ("relative", "absolute"):
            raise InputError(f"unknown temple scale {temple_scale!r}")
        self.temple_scale = temple_scale
        if np.any(np.diff(a.breakpoints) <= 10 * POS_TOL):
            raise InputError("coefficient jumps closer than the clustering tolerance")
        self.model, self.p0, self.a, self.g = model, p0, a, g
        self.delta = float(delta)
        self.horizon = float(horizon)
        self.temple_rule = temple_rule
        self.fuse = fuse
        for av in a.values:
            for gv in g.values:
                model.check_coefficients(av, gv)
        self.g_jumps = [(tb, gr) for tb, gl, gr in g.jumps() if 0.0 < tb < self.horizon and gr != gl]
        g0 = g.at(0.0)
        self.t = 0.0
        self.interval = 0
        pv, av = _paired_values(p0, a)
        capped = False
        if P is None:
            P, capped = state_cap(model, pv, av, g0, max(a.values))
            P = max(P, float(np.max(np.abs(p0.values))), 1e-12)
        self.P = float(P)
        if grid is None:
            grid = gridmod.build(model, delta, a.distinct_values(), g0, p0.distinct_values(), self.P)
        self.grid = grid
        self._psi = self._psi_arrays()
        if glimm_c is None:
            glimm_c, _ = calibrate_glimm_c(model, a.distinct_values(), g, self.horizon, self.P, seed)
        self.C = float(glimm_c)
        self.log = SolutionLog(model, a, g, self.horizon, (float(p0.values[0]), float(a.values[0])), x_ref, u_ref)
        self.log.glimm_c = self.C
        self.log.temple_rule = temple_rule
        self.log.temple_scale = temple_scale
        self.log.delta = self.delta
        self.log.grids.append((0.0, grid))
        self.log.caps.append((0.0, self.P, float(np.max(np.abs(p0.values))), capped))
        if capped:
            self.log.notes.append("t=0: no preimage for the state cap, capped at the peak")
        self._fid = 0
        self.head: Optional[Front] = None
        self.heap = []
        self.n_events = 0
        self.T = 0.0
        self._init_fronts()
        self.T = self.temple()
        self._monitor("init")

    # -- construction helpers

    def _psi_arrays(self):
        # "relative" is the singular mapping sign(p)(H - H0)/H0; "absolute" drops the division
        out = []
        for lev in self.grid.levels:
            scale = lev.alpha if self.temple_scale == "relative" else 1.0
            out.append(np.sign(lev.p) * (lev.H - lev.alpha) / scale)
        return out

    def _state(self, p, a):
        j = self.grid.level_of(a)
        return j, self.grid.levels[j].index_of(p)

    def _new_front(self, wave, x, t):
        self._fid += 1
        f = Front(float(x), float(t), float(wave.speed), wave.kind,
                  (wave.left_level, wave.left_index), (wave.right_level, wave.right_index), self._fid)
        self.log.open(f, self.grid, self.interval)
        return f

    def _solve(self, left, right, has_a):
        (jl, kl), (jr, kr) = left, right
        try:
            if has_a or jl != jr:
                return solve_interface(self.grid, jl, jr, kl, kr)
            return solve_scalar(self.grid, jl, kl, kr)
        except UnsolvableRiemannError as exc:
            raise RunError(f"t={self.t}: {exc}", self.dump()) from None

    def _fan_fronts(self, left, right, x, t, has_a):
        fan = self._solve(left, right, has_a)
        sp = fan.speeds
        if any(s1 > s2 + 1e-13 for s1, s2 in zip(sp[:-1], sp[1:])):
            raise RunError(f"t={t}, x={x}: fan speeds out of order {sp}", self.dump())
        return [self._new_front(w, x, t) for w in fan]

    def _link(self, fronts):
        for f1, f2 in zip(fronts[:-1], fronts[1:]):
            f1.next, f2.prev = f2, f1

    def _init_fronts(self):
        pts = sorted(set(self.p0.breakpoints.tolist()) | set(self.a.breakpoints.tolist()))
        a_jumps = set(self.a.breakpoints.tolist())
        fronts = []
        for x in pts:
            left = self._state(self.p0.left_value(x), self.a.left_value(x))
            right = self._state(self.p0.at(x), self.a.at(x))
            fronts += self._fan_fronts(left, right, x, 0.0, x in a_jumps)
        self._link(fronts)
        self.head = fronts[0] if fronts else None
        self.far_left = self._state(self.p0.values[0], self.a.values[0])
        for f1, f2 in zip(fronts[:-1], fronts[1:]):
            self._push(f1, f2, 0.0)

    # -- monitors

    def fronts(self):
        f = self.head
        while f is not None:
            yield f
            f = f.next

    def front_weight(self, f: Front) -> float:
        (jl, kl), (jr, kr) = f.left, f.right
        psl, psr = self._psi[jl][kl], self._psi[jr][kr]
        if f.kind == "p":
            return abs(psr - psl)
        da = abs(self.grid.levels[jr].a - self.grid.levels[jl].a) * self.grid.g
        if self.temple_rule == "literal":
            return 4.0 * da if psr > psl else 2.0 * da
        return 4.0 * da if psr < psl else 2.0 * da

    def temple(self) -> float:
        return float(sum(self.front_weight(f) for f in self.fronts()))

    def glimm(self, kind="sample", inclusive=False) -> MonitorSample:
        V = remaining_variation(self.g, self.t, self.horizon, inclusive)
        Q = self.T * V
        return MonitorSample(self.t, self.T, Q, self.T + self.C * Q, self.C, kind, self.interval)

    def _monitor(self, kind, inclusive=False):
        m = self.glimm(kind, inclusive)
        self.log.monitors.append(m)
        return m

    def max_abs_state(self) -> float:
        lev = self.grid.levels
        j, k = self.far_left
        out = abs(lev[j].p[k])
        for f in self.fronts():
            out = max(out, abs(lev[f.right[0]].p[f.right[1]]))
        return float(out)

    def states(self):
        """(p, a) between fronts, left to right, starting with the far-left state."""
        lev = self.grid.levels
        j, k = self.far_left
        out = [(lev[j].p[k], lev[j].a)]
        for f in self.fronts():
            j, k = f.right
            out.append((lev[j].p[k], lev[j].a))
        return out

    # -- events

    def _push(self, f1: Front, f2: Front, t: float):
        if f1.speed <= f2.speed:
            return
        gap = max(f2.pos(t) - f1.pos(t), 0.0)
        tc = t + gap / (f1.speed - f2.speed)
        heapq.heappush(self.heap, (tc, f1.fid, f2.fid, f1, f2))

    def next_event(self):
        """Earliest of (collision, g-jump, horizon) as a tuple (time, kind, payload)."""
        while self.heap:
            tc, _, _, f1, f2 = self.heap[0]
            if f1.alive and f2.alive and f1.next is f2:
                break
            heapq.heappop(self.heap)
        t_g = self.g_jumps[0][0] if self.g_jumps else math.inf
        stop = min(t_g, self.horizon)
        if self.heap and self.heap[0][0] <= stop:
            tc, _, _, f1, f2 = self.heap[0]
            return tc, "collide", (f1, f2)
        if t_g <= self.horizon:
            return t_g, "g-jump", self.g_jumps[0][1]
        return self.horizon, "horizon", None

    def step(self):
        tc, kind, payload = self.next_event()
        if kind == "collide":
            self._collide(tc, *payload)
        elif kind == "g-jump":
            self.advance_to(tc)
            self.apply_g_jump(payload)
        else:
            self.t = tc
        return kind

    def _collide(self, tc, f1, f2):
        heapq.heappop(self.heap)
        self.n_events += 1
        if self.n_events > self.fuse:
            raise RunError(f"event fuse of {self.fuse} exceeded at t={tc}", self.dump())
        self.t = max(self.t, tc)
        t = self.t
        x = f1.pos(t)
        first, last = f1, f2
        while first.prev is not None and abs(first.prev.pos(t) - x) <= POS_TOL:
            first = first.prev
        while last.next is not None and abs(last.next.pos(t) - x) <= POS_TOL:
            last = last.next
        cluster = []
        f = first
        while True:
            cluster.append(f)
            if f is last:
                break
            f = f.next
        a_fronts = [c for c in cluster if c.kind == "a"]
        if len(a_fronts) > 1:
            raise RunError(f"t={t}: cluster at x={x} holds {len(a_fronts)} coefficient fronts", self.dump())
        anchor = a_fronts[0].x0 if a_fronts else x
        before = self.T
        w_out = sum(self.front_weight(c) for c in cluster)
        new = self._fan_fronts(first.left, last.right, anchor, t, bool(a_fronts))
        self._splice(first, last, new, t)
        self.T = before - w_out + sum(self.front_weight(c) for c in new)
        m = self._monitor("collide")
        self.log.events.append(EventRecord(t, "collide", anchor, len(cluster), len(new), m.T, m.Q, m.G))

    def _splice(self, first, last, new, t):
        prev, nxt = first.prev, last.next
        f = first
        while True:
            f.alive = False
            self.log.close(f, t)
            if f is last:
                break
            f = f.next
        chain = ([prev] if prev else []) + new + ([nxt] if nxt else [])
        self._link(chain)
        if chain:
            chain[-1].next = None if nxt is None else chain[-1].next
        if prev is None:
            self.head = chain[0] if chain else None
            if self.head is not None:
                self.head.prev = None
        elif not new and nxt is None:
            prev.next = None
        for f1, f2 in zip(chain[:-1], chain[1:]):
            self._push(f1, f2, t)

    def advance_to(self, t_stop: float):
        """Process every collision strictly before ``t_stop`` (or up to it) and move time there."""
        while True:
            tc, kind, payload = self.next_event()
            if kind == "collide" and tc <= t_stop:
                self._collide(tc, *payload)
            else:
                break
        self.t = max(self.t, t_stop)

    def regrid_values(self):
        return [p for p, _ in self.states()]

    def regrid_cap(self, g_new: float):
        st = self.states()
        P, capped = state_cap(self.model, [p for p, _ in st], [a for _, a in st], g_new, max(self.a.values))
        return max(P, max(abs(p) for p, _ in st)), capped

    def apply_g_jump(self, g_new: float, new_grid=None, P_new=None):
        """Restart at the current time with g = g_new: regrid, re-project and re-solve."""
        tg = self.t
        self.T = self.temple()
        before = self._monitor("g-before", inclusive=True)
        states = self.states()
        capped = False
        if new_grid is None:
            P_new, capped = self.regrid_cap(g_new)
            new_grid = gridmod.regrid_for_g(self.grid, g_new, [p for p, _ in states], max(P_new, self.P))
        self.P = new_grid.P
        old_fronts = list(self.fronts())
        groups = []
        for f in old_fronts:
            if groups and abs(f.pos(tg) - groups[-1][0]) <= POS_TOL:
                groups[-1][1].append(f)
            else:
                groups.append((f.pos(tg), [f]))
        lev = self.grid.levels
        phys = lambda st: (lev[st[0]].p[st[1]], lev[st[0]].a)
        resolved = []
        for x, grp in groups:
            anchor = next((c.x0 for c in grp if c.kind == "a"), x)
            resolved.append((anchor, phys(grp[0].left), phys(grp[-1].right), any(c.kind == "a" for c in grp)))
        far = phys(self.far_left)
        for f in old_fronts:
            f.alive = False
            self.log.close(f, tg)
        self.grid = new_grid
        self.log.grids.append((tg, new_grid))
        self._psi = self._psi_arrays()
        self.interval += 1
        self.g_jumps.pop(0)
        self.far_left = self._state(*far)
        fronts = []
        for x, left, right, has_a in resolved:
            fronts += self._fan_fronts(self._state(*left), self._state(*right), x, tg, has_a)
        self.head = fronts[0] if fronts else None
        if self.head is not None:
            self.head.prev = None
            fronts[-1].next = None
        self._link(fronts)
        self.heap = []
        for f1, f2 in zip(fronts[:-1], fronts[1:]):
            self._push(f1, f2, tg)
        self.n_events += 1
        self.T = self.temple()
        after = self._monitor("g-after")
        self.log.caps.append((tg, self.P, self.max_abs_state(), capped))
        if capped:
            self.log.notes.append(f"t={tg}: no preimage for the state cap, capped at the peak")
        self.log.events.append(EventRecord(tg, "g-jump", math.nan, len(old_fronts), len(fronts),
                                           after.T, after.Q, after.G))
        return before, after

    def run(self) -> SolutionLog:
        while True:
            kind = self.step()
            if kind == "horizon":
                break
        self.finish()
        return self.log

    def finish(self):
        self.t = self.horizon
        self.T = self.temple()
        self._monitor("final")

    def dump(self) -> str:
        lines = [f"# t={self.t!r} interval={self.interval} g={self.grid.g!r} P={self.P!r} fronts:",
                 "# fid kind x0 t0 speed left right"]
        for f in self.fronts():
            lines.append(f"{f.fid} {f.kind} {f.x0!r} {f.t0!r} {f.speed!r} {f.left} {f.right}")
        return "\n".join(lines)


def track(model, p0, a, g, delta, horizon, **kw) -> SolutionLog:
    return Tracker(model, p0, a, g, delta, horizon, **kw).run()


def run_coupled(trackers: Sequence[Tracker]):
    """Advance several trackers that share one grid, regridding them jointly at g-jumps."""
    base = trackers[0]
    for tr in trackers[1:]:
        if tr.grid is not base.grid or tr.horizon != base.horizon:
            raise InputError("coupled trackers need a shared grid and horizon")
    while base.g_jumps:
        tg, g_new = base.g_jumps[0]
        for tr in trackers:
            tr.advance_to(tg)
        values, caps = [], [base.P]
        for tr in trackers:
            values += tr.regrid_values()
            caps.append(tr.regrid_cap(g_new)[0])
        new_grid = gridmod.regrid_for_g(base.grid, g_new, values, max(caps))
        for tr in trackers:
            tr.apply_g_jump(g_new, new_grid)
    for tr in trackers:
        tr.advance_to(tr.horizon)
        tr.finish()
    return [tr.log for tr in trackers]


def shared_grid(model, delta, p0s, a: PiecewiseConstantFn, g: PiecewiseConstantFn):
    """Grid and cap covering several initial data with the same coefficients."""
    g0 = g.at(0.0)
    P = 1e-12
    values = []
    for p0 in p0s:
        pv, av = _paired_values(p0, a)
        P = max(P, state_cap(model, pv, av, g0, max(a.values))[0], float(np.max(np.abs(p0.values))))
        values += p0.distinct_values()
    return gridmod.build(model, delta, a.distinct_values(), g0, values, P), P
