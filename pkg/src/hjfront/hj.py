"""Hamilton-Jacobi reconstruction from a tracked conservation-law solution.

If p solves p_t + H(p, a, g)_x = 0 then

    u(x, t) = u(x0, 0) - int_0^t H(p(x0, s), a(x0), g(s)) ds + int_{x0}^x p(z, t) dz

solves u_t + H(u_x, a, g) = 0.  Both integrals are exact for the
piecewise-constant front-tracking solution.
"""

from __future__ import annotations

import math

import numpy as np

from hjfront import grid as gridmod
from hjfront.errors import InputError
from hjfront.flux import HamiltonianModel
from hjfront.riemann import solve_interface, solve_scalar
from hjfront.tracker import POS_TOL, SolutionLog, state_cap


# -- Riemann data ------------------------------------------------------------------


class RiemannFan:
    """Self-similar solution p(x/t) of the interface Riemann problem at x = 0."""

    def __init__(self, model: HamiltonianModel, a_l, a_r, p_l, p_r, g=1.0, delta=0.05):
        self.model, self.a_l, self.a_r, self.g = model, float(a_l), float(a_r), float(g)
        P, _ = state_cap(model, [p_l, p_r], [a_l, a_r], g, max(a_l, a_r))
        P = max(P, abs(p_l), abs(p_r), 1e-12)
        gr = gridmod.build(model, delta, [a_l, a_r], g, [p_l, p_r], P)
        jl, jr = gr.level_of(a_l), gr.level_of(a_r)
        kl, kr = gr.levels[jl].index_of(p_l), gr.levels[jr].index_of(p_r)
        fan = solve_interface(gr, jl, jr, kl, kr) if jl != jr else solve_scalar(gr, jl, kl, kr)
        lev = gr.levels
        self.speeds = np.array(fan.speeds, dtype=float)
        self.kinds = [w.kind for w in fan]
        self.p = np.array([p_l] + [lev[w.right_level].p[w.right_index] for w in fan], dtype=float)
        self.a = np.array([a_l] + [lev[w.right_level].a for w in fan], dtype=float)
        # flux through x = 0
        k = int(np.searchsorted(self.speeds, 0.0, side="right"))
        self.H0 = model.eval(self.p[k], self.a[k], g)

    def state(self, xi: float, side: str = "+"):
        k = int(np.searchsorted(self.speeds, xi, side="right" if side == "+" else "left"))
        return float(self.p[k]), float(self.a[k])

    def integral(self, x: float, t: float) -> float:
        """int_0^x p(z, t) dz, exact."""
        if x < 0:
            return -self._integral_neg(-x, t)
        pos = self.speeds * t
        pts = np.concatenate([[0.0], pos[(pos > 0) & (pos < x)], [x]])
        mids = 0.5 * (pts[:-1] + pts[1:])
        vals = np.array([self.state(m / t)[0] for m in mids])
        return float(np.sum(vals * np.diff(pts)))

    def _integral_neg(self, y, t):
        pos = self.speeds * t
        pts = np.concatenate([[-y], pos[(pos > -y) & (pos < 0)], [0.0]])
        mids = 0.5 * (pts[:-1] + pts[1:])
        vals = np.array([self.state(m / t)[0] for m in mids])
        return float(np.sum(vals * np.diff(pts)))


def riemann_hj(model, a_l, a_r, p_l, p_r, u0, x, t, g=1.0, delta=0.05, side=None) -> float:
    """u(x, t) = u0 + x p(x, t) - t H(p(x, t), a(x)) for kinked-affine data with an a-jump at 0."""
    if not t > 0:
        raise InputError(f"t must be positive, got {t}")
    fan = RiemannFan(model, a_l, a_r, p_l, p_r, g, delta)
    if side is None:
        side = "-" if x <= 0 else "+"
    p, a = fan.state(x / t, side)
    if x == 0:
        a = a_l if side == "-" else a_r
    return u0 + x * p - t * model.eval(p, a, g)


def riemann_hj_integral(model, a_l, a_r, p_l, p_r, u0, x, t, g=1.0, delta=0.05) -> float:
    """u(x, t) = u0 - t H0 + int_0^x p(z, t) dz with H0 the flux through the interface."""
    if not t > 0:
        raise InputError(f"t must be positive, got {t}")
    fan = RiemannFan(model, a_l, a_r, p_l, p_r, g, delta)
    return u0 - t * fan.H0 + fan.integral(x, t)


# -- reconstruction from a log ---------------------------------------------------


class HJSolution:
    """u^delta evaluated from a solution log and the reference value u(x_ref, 0)."""

    def __init__(self, log: SolutionLog, u_ref: float | None = None, x_ref: float | None = None):
        self.log = log
        self.u_ref = log.u_ref if u_ref is None else float(u_ref)
        self.x_ref = log.x_ref if x_ref is None else float(x_ref)
        pieces = log.flux_trace(self.x_ref, log.horizon)
        self._tb = np.array([0.0] + [tb for _, tb, _ in pieces])
        self._cum = np.concatenate([[0.0], np.cumsum([(tb - ta) * h for ta, tb, h in pieces])])
        self._h = np.array([h for _, _, h in pieces] or [0.0])

    def flux_integral(self, t: float) -> float:
        """int_0^t of the flux through x_ref; linear in t between trace breakpoints."""
        k = int(np.searchsorted(self._tb, t, side="right")) - 1
        k = min(max(k, 0), len(self._h) - 1)
        return float(self._cum[k] + (t - self._tb[k]) * self._h[k])

    def antiderivative(self, t: float, xs):
        """int_{x_ref}^x p(z, t) dz for every x in xs (exact)."""
        prof = self.log.profile(t)
        X, R = prof["x"], prof["p_r"]
        xs = np.atleast_1d(np.asarray(xs, dtype=float))
        L = self.log.far_left[0]

        def cum(x):
            if len(X) == 0:
                return L * x
            C = np.concatenate([[0.0], np.cumsum(R[:-1] * np.diff(X))])
            k = np.searchsorted(X, x, side="right")
            out = np.where(k == 0, L * (x - X[0]), 0.0)
            kk = np.maximum(k - 1, 0)
            return np.where(k == 0, out, C[kk] + R[kk] * (x - X[kk]))

        return cum(xs) - cum(np.array([self.x_ref]))[0]

    def u(self, x, t):
        xs = np.atleast_1d(np.asarray(x, dtype=float))
        vals = self.u_ref - self.flux_integral(t) + self.antiderivative(t, xs)
        return vals if np.ndim(x) else float(vals[0])

    def snapshot(self, t: float, xs):
        return self.u(np.asarray(xs, dtype=float), t)

    def kinks(self, t: float):
        return self.log.profile(t)["x"]


def reconstruct(log: SolutionLog, u_ref: float, x: float, t: float) -> float:
    return HJSolution(log, u_ref).u(x, t)


def gradient_check(log: SolutionLog, t: float, xs, u_ref: float = 0.0, h: float = 1e-5) -> float:
    """Max |central difference of u^delta - p^delta| over xs."""
    sol = HJSolution(log, u_ref)
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    if len(xs) == 0:
        return 0.0
    fd = (sol.u(xs + h, t) - sol.u(xs - h, t)) / (2 * h)
    return float(np.max(np.abs(fd - log.sample(t, xs))))


def away_from_fronts(log: SolutionLog, t: float, xs, margin: float = 1e-6):
    xs = np.asarray(xs, dtype=float)
    fx = log.profile(t)["x"]
    if len(fx) == 0:
        return xs
    d = np.min(np.abs(xs[:, None] - fx[None, :]), axis=1)
    return xs[d >= margin]


def frontwise_consistency(log: SolutionLog, u_ref: float = 0.0, window=None, max_segments=2000) -> float:
    """Max deviation between u^delta along fronts and the incremental affine formula.

    Along a front born at (x0, t0) and followed to (x1, t1),
    u(x1, t1) = u(x0, t0) + (x1 - x0) p - (t1 - t0) H(p, a, g) with p, a taken on
    either side; both sides are checked.
    """
    sol = HJSolution(log, u_ref)
    A = log.arrays
    worst = 0.0
    idx = np.arange(len(log))
    if len(idx) > max_segments:
        idx = np.linspace(0, len(log) - 1, max_segments).astype(int)
    for i in idx:
        t0 = A["t0"][i]
        t1 = min(A["t_end"][i], log.horizon)
        if not t1 > t0:
            continue
        x0 = A["x0"][i]
        x1 = x0 + A["speed"][i] * (t1 - t0)
        if window is not None and not (window[0] <= min(x0, x1) and max(x0, x1) <= window[1]):
            continue
        u0 = sol.u(x0, t0)
        u1 = sol.u(x1, t1)
        g = A["g"][i]
        for p, a in ((A["p_l"][i], A["a_l"][i]), (A["p_r"][i], A["a_r"][i])):
            pred = u0 + (x1 - x0) * p - (t1 - t0) * log.model.eval(p, a, g)
            worst = max(worst, abs(pred - u1))
    return worst


def continuity_check(log: SolutionLog, u_ref: float = 0.0, xs=None, eps: float = 1e-9) -> float:
    """Max jump of u^delta in time across every event time at the sample points xs."""
    sol = HJSolution(log, u_ref)
    if xs is None:
        lo, hi = log.a.domain
        xs = np.linspace(lo, hi, 41)
    xs = np.asarray(xs, dtype=float)
    times = sorted(set(float(t) for t in log.arrays["t0"]) | {e.time for e in log.events})
    worst = 0.0
    for te in times:
        if not (eps < te < log.horizon - eps):
            continue
        u_m = sol.u(xs, te - eps)
        u_p = sol.u(xs, te + eps)
        # an affine solution moves by at most |H| eps between the two instants
        slack = 2 * eps * (1.0 + max(abs(e) for e in log.arrays["H_l"].tolist() + log.arrays["H_r"].tolist()))
        worst = max(worst, float(np.max(np.abs(u_p - u_m))) - slack)
    return max(worst, 0.0)


def max_gap(sol_u: HJSolution, sol_v: HJSolution, t: float, extra=()) -> tuple:
    """(max |u - v|, max (u - v)) over the line, evaluated at every kink of either profile."""
    pts = np.concatenate([sol_u.kinks(t), sol_v.kinks(t), [sol_u.x_ref, sol_v.x_ref], list(extra)])
    if len(pts) == 0:
        pts = np.array([0.0])
    d = sol_u.u(pts, t) - sol_v.u(pts, t)
    return float(np.max(np.abs(d))), float(np.max(d))
