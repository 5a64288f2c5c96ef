"""Hamiltonian flux families H(p, a, g), their local inverses and assumption checks.

A model is an even, unimodal function of p with its maximum at p = 0,
non-decreasing in both coefficients a and g.  Two families are built in:

``offset_eikonal``
    H = a + g - sqrt(1 + p^2), globally Lipschitz in p.
``quadratic_cap``
    H = a*g - p^2, only admissible on a guarded range |p| <= p_guard.

Arbitrary families can be wrapped with :func:`custom`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from hjfront.errors import DomainError, InputError, NoPreimageError, RangeError

BOX_TOL = 1e-12
BISECTION_TOL = 1e-12
FD_STEP = 1e-6


def _eikonal_flux(p, a, g):
    return a + g - np.sqrt(1.0 + p * p)


def _eikonal_dp(p, a, g):
    return -p / np.sqrt(1.0 + p * p)


def _eikonal_dpp(p, a, g):
    return -1.0 / (1.0 + p * p) ** 1.5


def _eikonal_inverse(h, a, g):
    s = a + g - h
    return np.sqrt(np.maximum(s * s - 1.0, 0.0))


def _cap_flux(p, a, g):
    return a * g - p * p


def _cap_dp(p, a, g):
    return -2.0 * p


def _cap_dpp(p, a, g):
    return -2.0 + 0.0 * p


def _cap_inverse(h, a, g):
    return np.sqrt(np.maximum(a * g - h, 0.0))


@dataclass(frozen=True)
class HamiltonianModel:
    """Immutable flux model with an admissible coefficient box.

    ``flux`` must accept numpy arrays.  ``dp``/``dpp``/``inverse`` are optional
    closed forms; missing derivatives fall back to central differences and a
    missing inverse falls back to bisection.
    """

    family: str
    flux: Callable
    a_box: tuple[float, float]
    g_box: tuple[float, float]
    p_guard: Optional[float] = None
    params: tuple = ()
    dp: Optional[Callable] = field(default=None, compare=False)
    dpp: Optional[Callable] = field(default=None, compare=False)
    closed_inverse: Optional[Callable] = field(default=None, compare=False)

    def __post_init__(self):
        for name in ("a_box", "g_box"):
            lo, hi = getattr(self, name)
            if not (math.isfinite(lo) and math.isfinite(hi)) or lo > hi:
                raise InputError(f"{name} must be a finite interval, got {(lo, hi)}")
        if self.p_guard is not None and not self.p_guard > 0:
            raise InputError(f"p_guard must be positive, got {self.p_guard}")

    # -- checks --------------------------------------------------------------

    def check_coefficients(self, a, g):
        if not (math.isfinite(a) and math.isfinite(g)):
            raise InputError(f"non-finite coefficient (a={a}, g={g})")
        a_lo, a_hi = self.a_box
        g_lo, g_hi = self.g_box
        if a < a_lo - BOX_TOL or a > a_hi + BOX_TOL:
            raise DomainError(f"a={a} outside coefficient box {self.a_box}")
        if g < g_lo - BOX_TOL or g > g_hi + BOX_TOL:
            raise DomainError(f"g={g} outside coefficient box {self.g_box}")

    def _check_p(self, p):
        if not math.isfinite(p):
            raise InputError(f"non-finite p={p}")
        if self.p_guard is not None and abs(p) > self.p_guard * (1 + 1e-12) + BOX_TOL:
            raise RangeError(f"|p|={abs(p)} exceeds p_guard={self.p_guard}")

    # -- evaluation ------------------------------------------------------------

    def eval(self, p: float, a: float, g: float) -> float:
        """H(p, a, g)."""
        self.check_coefficients(a, g)
        self._check_p(p)
        return float(self.flux(float(p), float(a), float(g)))

    def eval_array(self, p, a, g):
        """Vectorised H without per-element checks."""
        return self.flux(np.asarray(p, dtype=float), np.asarray(a, dtype=float),
                         np.asarray(g, dtype=float))

    def peak(self, a: float, g: float) -> float:
        """H(0, a, g), the maximum over p."""
        return self.eval(0.0, a, g)

    def hp(self, p, a, g):
        self.check_coefficients(a, g)
        if self.dp is not None:
            return float(self.dp(float(p), float(a), float(g)))
        h = FD_STEP
        return (self.flux(p + h, a, g) - self.flux(p - h, a, g)) / (2 * h)

    def hpp(self, p, a, g):
        self.check_coefficients(a, g)
        if self.dpp is not None:
            return float(self.dpp(float(p), float(a), float(g)))
        h = FD_STEP * 100  # second differences need a larger step
        return (self.flux(p + h, a, g) - 2 * self.flux(p, a, g) + self.flux(p - h, a, g)) / (h * h)

    def inverse(self, h: float, a: float, g: float, branch: str = "+") -> float:
        """Local inverse G+/G-: the p >= 0 (or its negation) with H(p, a, g) = h."""
        if branch not in ("+", "-", "plus", "minus"):
            raise InputError(f"branch must be '+' or '-', got {branch!r}")
        if not math.isfinite(h):
            raise InputError(f"non-finite flux value h={h}")
        top = self.peak(a, g)
        scale = 1.0 + abs(top)
        if h > top + 1e-12 * scale:
            raise NoPreimageError(f"h={h} above peak H(0, {a}, {g})={top}")
        if h >= top:
            p = 0.0
        elif self.closed_inverse is not None:
            p = float(self.closed_inverse(h, a, g))
            if self.p_guard is not None and p > self.p_guard * (1 + 1e-12):
                raise RangeError(f"h={h} below H(p_guard, {a}, {g})")
        else:
            p = self._bisect(h, a, g)
        return p if branch in ("+", "plus") else -p

    def inverse_array(self, h, a: float, g: float):
        """Vectorised G+ for flux values at or below the peak (clipped to the peak)."""
        h = np.minimum(np.asarray(h, dtype=float), self.peak(a, g))
        if self.closed_inverse is not None:
            return np.asarray(self.closed_inverse(h, a, g), dtype=float) * np.ones_like(h)
        lo = np.zeros_like(h)
        hi = np.full_like(h, self.p_guard if self.p_guard is not None else 1.0)
        if self.p_guard is None:
            while np.any(self.flux(hi, a, g) > h):
                hi = np.where(self.flux(hi, a, g) > h, 2 * hi, hi)
                if np.max(hi) > 1e12:
                    raise RangeError("no preimage below |p| = 1e12")
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            up = self.flux(mid, a, g) > h
            lo = np.where(up, mid, lo)
            hi = np.where(up, hi, mid)
            if np.all(hi - lo <= BISECTION_TOL * np.maximum(1.0, hi)):
                break
        return 0.5 * (lo + hi)

    def _bisect(self, h, a, g):
        lo = 0.0
        if self.p_guard is not None:
            hi = self.p_guard
            if self.flux(hi, a, g) > h:
                raise RangeError(f"h={h} below H(p_guard, {a}, {g})")
        else:
            hi = 1.0
            while self.flux(hi, a, g) > h:
                hi *= 2.0
                if hi > 1e12:
                    raise RangeError(f"no preimage of h={h} below |p| = 1e12")
        while hi - lo > BISECTION_TOL * max(1.0, hi):
            mid = 0.5 * (lo + hi)
            if self.flux(mid, a, g) > h:
                lo = mid
            else:
                hi = mid
        return 0.5 * (lo + hi)

    def with_boxes(self, a_box=None, g_box=None) -> "HamiltonianModel":
        from dataclasses import replace

        return replace(self, a_box=tuple(a_box or self.a_box), g_box=tuple(g_box or self.g_box))


def offset_eikonal(a_box=(1.0, 2.0), g_box=(1.0, 2.0), p_guard=None) -> HamiltonianModel:
    return HamiltonianModel("offset_eikonal", _eikonal_flux, tuple(a_box), tuple(g_box),
                            p_guard, (), _eikonal_dp, _eikonal_dpp, _eikonal_inverse)


def quadratic_cap(a_box=(1.0, 2.0), g_box=(1.0, 2.0), p_guard=2.0) -> HamiltonianModel:
    return HamiltonianModel("quadratic_cap", _cap_flux, tuple(a_box), tuple(g_box),
                            p_guard, (), _cap_dp, _cap_dpp, _cap_inverse)


def custom(name, flux, a_box, g_box, p_guard=None, dp=None, dpp=None, inverse=None,
           params=()) -> HamiltonianModel:
    """Wrap a user flux ``flux(p, a, g)``; it must broadcast over numpy arrays."""
    return HamiltonianModel(name, flux, tuple(a_box), tuple(g_box), p_guard, tuple(params),
                            dp, dpp, inverse)


FAMILIES = {"offset_eikonal": offset_eikonal, "quadratic_cap": quadratic_cap}


# -- assumption validation -----------------------------------------------------


@dataclass
class AssumptionReport:
    """Outcome of :func:`validate`: flags, failure witnesses and constant estimates."""

    flags: dict
    witnesses: dict
    constants: dict
    p_range: tuple
    restricted: bool

    @property
    def passed(self) -> bool:
        return all(self.flags.values())

    def failures(self):
        return [k for k, ok in self.flags.items() if not ok]


def _lipschitz_p(model, ps, As, Gs):
    H = model.eval_array(ps[None, None, :], As[:, None, None], Gs[None, :, None])
    dq = np.abs(np.diff(H, axis=2)) / np.diff(ps)[None, None, :]
    idx = np.unravel_index(np.argmax(dq), dq.shape)
    return float(dq[idx]), (float(ps[idx[2]]), float(As[idx[0]]), float(Gs[idx[1]]))


def _lipschitz_coeff(model, ps, As, Gs):
    H = model.eval_array(ps[None, None, :], As[:, None, None], Gs[None, :, None])
    w = 1.0 + np.abs(ps)[None, None, :]
    best, wit = 0.0, None
    if len(As) > 1:
        da = np.abs(np.diff(H, axis=0)) / (np.diff(As)[:, None, None] * w)
        i = np.unravel_index(np.argmax(da), da.shape)
        best, wit = float(da[i]), (float(ps[i[2]]), float(As[i[0]]), float(Gs[i[1]]))
    if len(Gs) > 1:
        dg = np.abs(np.diff(H, axis=1)) / (np.diff(Gs)[None, :, None] * w)
        i = np.unravel_index(np.argmax(dg), dg.shape)
        if dg[i] > best:
            best, wit = float(dg[i]), (float(ps[i[2]]), float(As[i[0]]), float(Gs[i[1]]))
    return best, wit


def validate(model: HamiltonianModel, n: int = 21, p_range: Optional[float] = None,
             growth_factor: float = 1.25) -> AssumptionReport:
    """Sample the coefficient box and p-range and check the structural assumptions.

    Failures are reported, never raised.  Global Lipschitz bounds are judged by
    comparing the estimate on [-R, R] with the one on [-2R, 2R]; a guarded model
    is only judged on its guarded range.
    """
    if n < 2:
        raise InputError("sample count per axis must be >= 2")
    restricted = model.p_guard is not None
    R = float(model.p_guard if restricted else (p_range or 10.0))
    As = np.linspace(*model.a_box, n) if model.a_box[1] > model.a_box[0] else np.array([model.a_box[0]])
    Gs = np.linspace(*model.g_box, n) if model.g_box[1] > model.g_box[0] else np.array([model.g_box[0]])
    n_p = max(4 * n + 1, 41)
    ps = np.linspace(-R, R, n_p)
    flags, wit, const = {}, {}, {}

    def record(name, ok, witnesses=()):
        flags[name] = bool(ok)
        wit[name] = [] if ok else list(witnesses)

    with np.errstate(all="ignore"):
        # Psi needs H(0, a, g) != 0; the artifact requires it positive.
        peaks = model.eval_array(0.0 * As[:, None], As[:, None], Gs[None, :])
        i = np.unravel_index(np.argmin(peaks), peaks.shape)
        record("psi_defined", peaks[i] > 0, [(0.0, float(As[i[0]]), float(Gs[i[1]]))])

        lp, wlp = _lipschitz_p(model, ps, As, Gs)
        lc, wlc = _lipschitz_coeff(model, ps, As, Gs)
        const["lipschitz_p"], const["lipschitz_coeff"] = lp, lc
        if restricted:
            record("flux_lipschitz", math.isfinite(lp), [wlp])
            record("coeff_lipschitz", math.isfinite(lc), [wlc])
        else:
            ps2 = np.linspace(-2 * R, 2 * R, 2 * n_p - 1)
            lp2, wlp2 = _lipschitz_p(model, ps2, As, Gs)
            lc2, wlc2 = _lipschitz_coeff(model, ps2, As, Gs)
            record("flux_lipschitz", math.isfinite(lp2) and lp2 <= growth_factor * lp, [wlp2])
            record("coeff_lipschitz", math.isfinite(lc2) and lc2 <= growth_factor * max(lc, 1e-300),
                   [wlc2])

        H = model.eval_array(ps[None, None, :], As[:, None, None], Gs[None, :, None])
        bad = []
        if len(As) > 1:
            d = np.diff(H, axis=0)
            for k in zip(*np.nonzero(d < -1e-12)):
                bad.append((float(ps[k[2]]), float(As[k[0]]), float(Gs[k[1]])))
        if len(Gs) > 1:
            d = np.diff(H, axis=1)
            for k in zip(*np.nonzero(d < -1e-12)):
                bad.append((float(ps[k[2]]), float(As[k[0]]), float(Gs[k[1]])))
        record("monotone_coefficients", not bad, bad[:10])

        h = 1e-4
        Hp = model.eval_array(h, As[:, None], Gs[None, :])
        Hm = model.eval_array(-h, As[:, None], Gs[None, :])
        slope0 = (Hp - Hm) / (2 * h)
        curv0 = (Hp - 2 * peaks + Hm) / (h * h)
        bad = [(0.0, float(As[i]), float(Gs[j])) for i, j in zip(*np.nonzero(
            (np.abs(slope0) > 1e-6) | ~(curv0 < -1e-8)))]
        record("peak_curvature", not bad, bad[:10])

        pos = ps[ps > 0]
        Hpos = model.eval_array(pos[None, None, :], As[:, None, None], Gs[None, :, None])
        Hneg = model.eval_array(-pos[None, None, :], As[:, None, None], Gs[None, :, None])
        odd = np.abs(Hpos - Hneg) > 1e-12 * (1.0 + np.abs(Hpos))
        Hfull = np.concatenate([peaks[:, :, None], Hpos], axis=2)
        nonmono = np.diff(Hfull, axis=2) >= 0
        bad = [(float(pos[k[2]]), float(As[k[0]]), float(Gs[k[1]])) for k in zip(*np.nonzero(odd | nonmono))]
        record("even_unimodal", not bad, bad[:10])

        # secant slope over [R/2, R] estimates lim |H|/p without the constant offset
        top = model.eval_array(R, As[:, None], Gs[None, :])
        mid = model.eval_array(R / 2, As[:, None], Gs[None, :])
        ratio = np.abs(top - mid) / (R / 2)
        i = np.unravel_index(np.argmin(ratio), ratio.shape)
        const["growth"] = float(ratio[i])
        record("growth", ratio[i] > 1e-3, [(R, float(As[i[0]]), float(Gs[i[1]]))])

        # curvature bounds near the peak, slope bounds away from it
        pp = pos
        curv = np.array([[[abs(model.hpp(p, a, g)) for p in pp] for g in Gs] for a in As])
        slope = np.array([[[abs(model.hp(p, a, g)) for p in pp] for g in Gs] for a in As])
        c_peak = np.min(np.abs(curv0))
        keep = np.all(curv >= 0.5 * c_peak, axis=(0, 1))
        P = float(pp[keep][-1]) if keep[0] and keep.any() else float(pp[0])
        inner = pp <= P
        outer = pp >= P
        const["P"] = P
        const["c0"] = float(min(curv[:, :, inner].min(), slope[:, :, outer].min()))
        const["C0"] = float(max(curv[:, :, inner].max(), slope[:, :, outer].max()))

    return AssumptionReport(flags, wit, const, (-R, R), restricted)
