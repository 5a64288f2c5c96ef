"""Exact Riemann solvers on the piecewise-linear flux.

``solve_scalar`` handles a single coefficient level through the convex/concave
envelope of the node values.  ``solve_interface`` handles a coefficient jump:
it picks interface states (p'_l, p'_r) with equal flux and minimal jump
|p'_l - p'_r|, then resolves each side with the scalar solver.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from hjfront import kernels
from hjfront.errors import InputError, NoPreimageError, UnsolvableRiemannError
from hjfront.flux import HamiltonianModel
from hjfront.grid import FluxGrid, Level

FLUX_TOL = 1e-10


@dataclass(frozen=True)
class Wave:
    speed: float
    left_level: int
    left_index: int
    right_level: int
    right_index: int
    kind: str = "p"  # "p" or "a"


@dataclass
class WaveFan:
    waves: list = field(default_factory=list)
    tie: bool = False

    def __len__(self):
        return len(self.waves)

    def __iter__(self):
        return iter(self.waves)

    @property
    def speeds(self):
        return [w.speed for w in self.waves]

    def interface_states(self):
        """(level, index) pairs on each side of the a-wave, if present."""
        for w in self.waves:
            if w.kind == "a":
                return (w.left_level, w.left_index), (w.right_level, w.right_index)
        return None

    def dump(self, grid: FluxGrid) -> str:
        lines = ["# speed p_left p_right H_left H_right kind"]
        for w in self.waves:
            ll, rl = grid.levels[w.left_level], grid.levels[w.right_level]
            lines.append(f"{w.speed:.17g} {ll.p[w.left_index]:.17g} {rl.p[w.right_index]:.17g} "
                         f"{ll.H[w.left_index]:.17g} {rl.H[w.right_index]:.17g} {w.kind}")
        return "\n".join(lines) + "\n"


def _check_index(grid, j, k):
    if not (0 <= j < len(grid.levels)):
        raise InputError(f"level {j} not in grid")
    if not (0 <= k < len(grid.levels[j])):
        raise InputError(f"index {k} not on level {j}")


def scalar_fan(level: Level, j: int, kl: int, kr: int) -> list:
    """Waves of the scalar Riemann problem between nodes ``kl`` and ``kr`` of one level."""
    if kl == kr:
        return []
    p, H = level.p, level.H
    if kl < kr:
        sl = slice(kl, kr + 1)
        hull = [kl + i for i in kernels.hull_indices(p[sl], H[sl], False)]
    else:
        sl = slice(kr, kl + 1)
        hull = [kr + i for i in kernels.hull_indices(p[sl], H[sl], True)][::-1]
    waves = []
    for a, b in zip(hull[:-1], hull[1:]):
        s = (H[b] - H[a]) / (p[b] - p[a])
        waves.append(Wave(float(s), j, a, j, b, "p"))
    return waves


def solve_scalar(grid: FluxGrid, j: int, kl: int, kr: int) -> WaveFan:
    _check_index(grid, j, kl)
    _check_index(grid, j, kr)
    return WaveFan(scalar_fan(grid.levels[j], j, kl, kr))


def admissible_masks(lev_l: Level, kl: int, lev_r: Level, kr: int):
    """Case-table masks for (p'_l, p'_r), each extended by the no-wave state."""
    pl, pr = lev_l.p[kl], lev_r.p[kr]
    tol = 1e-12
    if pl <= 0:
        okl = lev_l.p >= -pl - tol
    else:
        okl = lev_l.p >= -tol
    if pr < 0:
        okr = lev_r.p <= tol
    else:
        okr = lev_r.p <= -pr + tol
    tl = np.zeros(len(lev_l), dtype=bool)
    tr = np.zeros(len(lev_r), dtype=bool)
    tl[kl] = tr[kr] = True
    return okl | tl, okr | tr, tl, tr


def interface_pair(lev_l: Level, kl: int, lev_r: Level, kr: int, tol=FLUX_TOL, impl=None):
    okl, okr, tl, tr = admissible_masks(lev_l, kl, lev_r, kr)
    i, j, tie = kernels.min_jump_pair(lev_l.p, lev_l.H, okl, tl, lev_l.order_by_flux,
                                      lev_r.p, lev_r.H, okr, tr, lev_r.order_by_flux, tol, impl=impl)
    if i < 0:
        raise UnsolvableRiemannError(
            f"no feasible interface pair: left flux range [{lev_l.H.min()}, {lev_l.H.max()}] "
            f"(a={lev_l.a}), right flux range [{lev_r.H.min()}, {lev_r.H.max()}] (a={lev_r.a})")
    return int(i), int(j), bool(tie)


def solve_interface(grid: FluxGrid, jl: int, jr: int, kl: int, kr: int) -> WaveFan:
    _check_index(grid, jl, kl)
    _check_index(grid, jr, kr)
    if jl == jr:
        return solve_scalar(grid, jl, kl, kr)
    lev_l, lev_r = grid.levels[jl], grid.levels[jr]
    i, j, tie = interface_pair(lev_l, kl, lev_r, kr)
    waves = scalar_fan(lev_l, jl, kl, i)
    waves.append(Wave(0.0, jl, i, jr, j, "a"))
    waves += scalar_fan(lev_r, jr, j, kr)
    return WaveFan(waves, tie)


def brute_force_pair(lev_l: Level, kl: int, lev_r: Level, kr: int, tol=FLUX_TOL):
    """O(n^2) reference search used as a test oracle."""
    okl, okr, tl, tr = admissible_masks(lev_l, kl, lev_r, kr)
    best, arg = None, (-1, -1)
    for i in range(len(lev_l)):
        if not okl[i]:
            continue
        for j in range(len(lev_r)):
            if not okr[j] or abs(lev_l.H[i] - lev_r.H[j]) > tol:
                continue
            key = (abs(lev_l.p[i] - lev_r.p[j]), -(int(tl[i]) + int(tr[j])), abs(lev_l.p[i]),
                   lev_l.p[i], abs(lev_r.p[j]))
            if best is None or _key_less(key, best):
                best, arg = key, (i, j)
    return arg


def _key_less(k1, k2, eps=1e-12):
    for x, y in zip(k1, k2):
        if x < y - eps:
            return True
        if x > y + eps:
            return False
    return False


# -- bounds ----------------------------------------------------------------------


class RiemannBounds(NamedTuple):
    lower: float
    upper: float
    coarse: float


def _g(model, h, a, g, branch):
    try:
        return model.inverse(h, a, g, branch)
    except NoPreimageError:
        return 0.0


def riemann_bounds(model: HamiltonianModel, p_l, p_r, a_l, a_r, g) -> RiemannBounds:
    """Interval containing every state of the interface Riemann solution, plus |p| bound."""
    hl, hr = model.eval(p_l, a_l, g), model.eval(p_r, a_r, g)
    lower = min(_g(model, hl, a_r, g, "-"), _g(model, hr, a_l, g, "-"), -abs(p_l), -abs(p_r))
    upper = max(_g(model, hl, a_r, g, "+"), _g(model, hr, a_l, g, "+"), abs(p_l), abs(p_r))
    coarse = _g(model, min(hl, hr), max(a_l, a_r), g, "+")
    return RiemannBounds(lower, upper, coarse)


# -- continuous interface state (used by the finite-difference oracle) -------------


def _mini_level(model, a, g, hs, extra):
    pts = {0.0: None}
    top = model.peak(a, g)
    for h in hs:
        if h <= top + 1e-14:
            q = model.inverse(min(h, top), a, g, "+")
            pts[q] = None
            pts[-q] = None
    for q in extra:
        pts[float(q)] = None
        pts[-float(q)] = None
    p = np.array(sorted(pts))
    H = np.array([model.eval(q, a, g) for q in p])
    return Level(float(a), top, np.zeros_like(p), p, H, True)


def interface_state(model: HamiltonianModel, a_l, a_r, g, u_l, u_r):
    """Interface states and flux of the minimal-jump solution for arbitrary states.

    The optimum is attained at fluxes generated by {0, u_l, u_r} on either
    level, so a grid holding exactly those images reproduces the continuous
    answer.  Returns (p'_l, p'_r, flux).
    """
    hs = [model.peak(a_l, g), model.peak(a_r, g), model.eval(u_l, a_l, g), model.eval(u_r, a_r, g)]
    lev_l = _mini_level(model, a_l, g, hs, [u_l])
    lev_r = _mini_level(model, a_r, g, hs, [u_r])
    kl = lev_l.index_of(u_l)
    kr = lev_r.index_of(u_r)
    i, j, _ = interface_pair(lev_l, kl, lev_r, kr, tol=1e-9)
    return float(lev_l.p[i]), float(lev_r.p[j]), float(lev_l.H[i])


def supply_demand_flux(model: HamiltonianModel, a_l, a_r, g, u_l, u_r):
    """Flux through a coefficient jump as min(left supply, right demand)."""
    send = model.eval(u_l, a_l, g) if u_l <= 0 else model.peak(a_l, g)
    recv = model.eval(u_r, a_r, g) if u_r >= 0 else model.peak(a_r, g)
    return min(send, recv)
