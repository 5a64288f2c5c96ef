"""Singular mapping, the (z, alpha) transform and the discrete flux grid.

For fixed (a, g) the map ``z(p) = -sign(p) (H(p) - H(0))`` is odd and
increasing, and ``alpha(a) = H(0, a, g)``.  Along a stationary coefficient
jump the flux is conserved, so matching states satisfy
``alpha_l - |z_l| = alpha_r - |z_r|``.  The grid keeps, on every coefficient
level, the z-lattice {k*delta}, the transformed data values and the
cross-level images of all of these so that every such flux match lands on a
breakpoint.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from hjfront.errors import InputError, RangeError
from hjfront.flux import HamiltonianModel

MERGE_TOL = 1e-12


def z_transform(model: HamiltonianModel, p: float, a: float, g: float) -> float:
    if p == 0:
        model.check_coefficients(a, g)
        return 0.0
    return -math.copysign(1.0, p) * (model.eval(p, a, g) - model.peak(a, g))


def alpha(model: HamiltonianModel, a: float, g: float) -> float:
    return model.peak(a, g)


def psi(model: HamiltonianModel, p: float, a: float, g: float) -> float:
    """Temple singular mapping sign(p) (H(p) - H(0)) / H(0)."""
    top = model.peak(a, g)
    if p == 0:
        return 0.0
    return math.copysign(1.0, p) * (model.eval(p, a, g) - top) / top


def z_inverse(model: HamiltonianModel, z: float, a: float, g: float) -> float:
    if z == 0:
        return 0.0
    p = model.inverse(model.peak(a, g) - abs(z), a, g, "+")
    return math.copysign(p, z)


@dataclass(frozen=True, eq=False)
class Level:
    """Breakpoints of the piecewise-linear flux on one coefficient level."""

    a: float
    alpha: float
    z: np.ndarray
    p: np.ndarray
    H: np.ndarray
    active: bool
    model: object = field(default=None, repr=False)
    g: float = math.nan
    _order: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "_order", np.argsort(self.H, kind="stable"))

    def __len__(self):
        return len(self.p)

    @property
    def order_by_flux(self) -> np.ndarray:
        return self._order

    def index_of(self, p: float, tol: float = 1e-11) -> int:
        """Index of the breakpoint equal to ``p``; raises if ``p`` is not a node."""
        k = int(np.searchsorted(self.p, p))
        best = None
        for c in (k - 1, k):
            if 0 <= c < len(self.p) and abs(self.p[c] - p) <= tol * (1.0 + abs(p)):
                if best is None or abs(self.p[c] - p) < abs(self.p[best] - p):
                    best = c
        if best is None and self.model is not None:
            # states whose z merged into a neighbour (|p| ~ 1e-6 near the peak)
            zv = z_transform(self.model, p, self.a, self.g)
            c = self.project(zv)
            if abs(self.z[c] - zv) <= 2 * MERGE_TOL * (1.0 + abs(zv)):
                best = c
        if best is None:
            raise RangeError(f"p={p!r} is not a breakpoint of level a={self.a}")
        return best

    def project(self, zval: float) -> int:
        """Nearest breakpoint in z; ties go toward z = 0."""
        k = int(np.searchsorted(self.z, zval))
        cands = [c for c in (k - 1, k) if 0 <= c < len(self.z)]
        return min(cands, key=lambda c: (abs(self.z[c] - zval), abs(self.z[c])))


@dataclass(frozen=True, eq=False)
class FluxGrid:
    model: HamiltonianModel
    delta: float
    g: float
    P: float
    levels: tuple
    a_values: tuple
    data_values: tuple

    def level_of(self, a: float) -> int:
        for j, lev in enumerate(self.levels):
            if abs(lev.a - a) <= MERGE_TOL * (1 + abs(a)):
                return j
        al = alpha(self.model, a, self.g)
        for j, lev in enumerate(self.levels):
            if abs(lev.alpha - al) <= MERGE_TOL * (1 + abs(al)):
                return j
        raise RangeError(f"a={a} is not a level of the grid")

    @property
    def active_levels(self):
        return [j for j, lev in enumerate(self.levels) if lev.active]

    def breakpoint_count(self) -> int:
        return sum(len(lev) for lev in self.levels)

    def dump(self) -> str:
        lines = ["# level k z p H"]
        for j, lev in enumerate(self.levels):
            for k in range(len(lev)):
                lines.append(f"{j} {k} {lev.z[k]:.17g} {lev.p[k]:.17g} {lev.H[k]:.17g}")
        return "\n".join(lines) + "\n"


def _merge_sorted(values: np.ndarray, exact: np.ndarray):
    """Merge values closer than MERGE_TOL, keeping an exact p where one exists."""
    order = np.argsort(values, kind="stable")
    vs, ex = values[order], exact[order]
    if len(vs) == 0:
        return vs, ex
    start = np.concatenate([[True], np.diff(vs) > MERGE_TOL * (1.0 + np.abs(vs[1:]))])
    first = np.nonzero(start)[0]
    pos = np.where(np.isnan(ex), len(vs), np.arange(len(vs)))
    pick = np.minimum.reduceat(pos, first)
    pick = np.where(pick < len(vs), pick, first)
    return vs[pick], ex[pick]


def _unique(values):
    vs = np.sort(np.asarray(list(values), dtype=float))
    if len(vs) == 0:
        return []
    keep = np.concatenate([[True], np.diff(vs) > MERGE_TOL * (1.0 + np.abs(vs[1:]))])
    return vs[keep].tolist()


def _alpha_inverse(model, target, g, lo, hi):
    f = lambda a: model.peak(a, g) - target
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if f(mid) < 0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-15 * max(1.0, abs(hi)):
            break
    return 0.5 * (lo + hi)


def _make_level(model, a, al, g, zs, exact_p, active):
    zs, exact_p = np.asarray(zs, dtype=float), np.asarray(exact_p, dtype=float)
    # the peak is always an exact node and absorbs everything within the merge tolerance
    near0 = np.abs(zs) <= MERGE_TOL
    zs = np.where(near0, 0.0, zs)
    exact_p = np.where(near0, 0.0, exact_p)
    z, ex = _merge_sorted(zs, exact_p)
    top = model.peak(a, g)
    p = np.sign(z) * model.inverse_array(top - np.abs(z), a, g)
    p = np.where(np.isnan(ex), p, ex)
    H = model.eval_array(p, a, g)
    return Level(float(a), float(al), z, p, H, active, model, float(g))


def build(model: HamiltonianModel, delta: float, a_values: Sequence[float], g: float,
          p_values: Sequence[float], P: float) -> FluxGrid:
    """Construct the discrete flux grid for one value of g."""
    if not (delta > 0 and math.isfinite(delta)):
        raise InputError(f"delta must be positive, got {delta}")
    a_values = [float(a) for a in a_values]
    p_values = [float(p) for p in p_values]
    if not a_values or not p_values:
        raise InputError("a-values and p-data values must be non-empty")
    if not all(math.isfinite(v) for v in a_values + p_values):
        raise InputError("non-finite a or p value")
    if not (P > 0 and math.isfinite(P)):
        raise InputError(f"P must be positive, got {P}")
    if max(abs(p) for p in p_values) > P * (1 + 1e-12):
        raise InputError(f"P={P} does not cover the data (max |p| = {max(abs(p) for p in p_values)})")
    for a in a_values:
        model.check_coefficients(a, g)

    # active levels: one per distinct alpha among the data a-values
    act = {}
    for a in sorted(a_values):
        al = alpha(model, a, g)
        if not any(abs(al - k) <= MERGE_TOL * (1 + abs(al)) for k in act):
            act[al] = a
    active = sorted(act.items())
    al_min, al_max = active[0][0], active[-1][0]
    a_min, a_max = min(a_values), max(a_values)

    lattice_levels = []
    for i in range(math.ceil(al_min / delta - 1e-9), math.floor(al_max / delta + 1e-9) + 1):
        al = i * delta
        if any(abs(al - k) <= MERGE_TOL * (1 + abs(al)) for k, _ in active):
            continue
        if al < al_min or al > al_max:
            continue
        lattice_levels.append((al, _alpha_inverse(model, al, g, a_min, a_max)))

    data = _unique(p_values)
    data = _unique(data + [-p for p in data])

    def zcap(a):
        return z_transform(model, P, a, g)

    def lattice(zP):
        n = math.floor(zP / delta + 1e-9)
        pts = [k * delta for k in range(-n, n + 1)]
        return [z for z in pts if abs(z) <= zP * (1 + 1e-12)]

    # shared flux values over active levels
    S = []
    for al, a in active:
        zP = zcap(a)
        S.extend(al - abs(z) for z in lattice(zP))
        S.append(al - zP)
        S.extend(model.eval(p, a, g) for p in data)
    S = _unique(S)

    levels = []
    S_arr = np.asarray(S)
    for al, a in active:
        zP = zcap(a)
        d = al - S_arr
        d = np.maximum(d[(d >= -MERGE_TOL) & (d <= zP * (1 + 1e-12) + MERGE_TOL)], 0.0)
        zs = [d, -d, [z_transform(model, p, a, g) for p in data], [zP, -zP]]
        ex = [np.full(2 * len(d), math.nan), data, [P, -P]]
        levels.append(_make_level(model, a, al, g, np.concatenate(zs), np.concatenate(ex), True))
    for al, a in lattice_levels:
        zP = zcap(a)
        zs = lattice(zP)
        ex = [math.nan] * len(zs)
        for p in data + [P, -P]:
            zs.append(z_transform(model, p, a, g))
            ex.append(p)
        levels.append(_make_level(model, a, al, g, zs, ex, False))
    levels.sort(key=lambda lev: lev.alpha)
    return FluxGrid(model, float(delta), float(g), float(P), tuple(levels),
                    tuple(sorted(set(a_values))), tuple(data))


def regrid_for_g(grid: FluxGrid, g_new: float, current_values: Sequence[float],
                 P: float | None = None) -> FluxGrid:
    """Rebuild for a new g, keeping every previous data value and current state as nodes."""
    P = max(grid.P, P) if P is not None else grid.P
    values = list(grid.data_values) + [float(v) for v in current_values]
    return build(grid.model, grid.delta, grid.a_values, g_new, values, P)


def flux_interp(grid: FluxGrid, j: int, p: float) -> float:
    """Piecewise-linear interpolant H^delta on level ``j``."""
    lev = grid.levels[j]
    if p < lev.p[0] - 1e-12 or p > lev.p[-1] + 1e-12:
        raise RangeError(f"p={p} outside level range [{lev.p[0]}, {lev.p[-1]}]")
    k = int(np.searchsorted(lev.p, p))
    if k < len(lev.p) and lev.p[k] == p:
        return float(lev.H[k])
    k = min(max(k, 1), len(lev.p) - 1)
    p0, p1 = lev.p[k - 1], lev.p[k]
    h0, h1 = lev.H[k - 1], lev.H[k]
    return float(h0 + (p - p0) * (h1 - h0) / (p1 - p0))
