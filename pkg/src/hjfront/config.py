"""Run configuration: YAML schema, validation with field paths, built-in presets.

A configuration is a mapping::

    model:
      family: offset_eikonal        # or quadratic_cap
      a_box: [1.0, 2.0]
      g_box: [1.0, 2.0]
      p_guard: null
    a: {jumps: [0.0], pieces: ["1.0", "1.5"]}   # expression in x
    g: 1.0                                      # expression in t
    u0: "0"                                     # or p0 (slopes) with optional u_ref
    domain: [-2.0, 2.0]
    horizon: 1.0
    delta: 0.05
    h: 0.05                                     # coefficient mesh, defaults to delta
    snapshots: [0.5, 1.0]

plus the optional sections ``temple``, ``riemann``, ``convergence`` and
``verify`` documented in ``DEFAULTS``.  Unknown keys are rejected.
"""

from __future__ import annotations

import copy
import math
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from hjfront import flux
from hjfront.coeffs import PiecewiseConstantFn, PiecewiseSpec, discretize, slopes_from_potential
from hjfront.errors import ConfigError, HJFrontError

SUITES = ("entropy", "weak", "interface-viscosity", "contraction", "comparison", "monitors",
          "interaction-estimate")

DEFAULTS = {
    "model": {"family": "offset_eikonal", "a_box": [1.0, 2.0], "g_box": [1.0, 2.0], "p_guard": None},
    "a": 1.0,
    "g": 1.0,
    "u0": None,
    "p0": None,
    "u_ref": 0.0,
    "domain": [-1.0, 1.0],
    "horizon": 1.0,
    "delta": 0.05,
    "h": None,
    "x_ref": None,
    "snapshots": None,
    "samples": 401,
    "seed": 0,
    "glimm_c": None,
    "temple": {"rule": "flipped", "scale": "relative"},
    "riemann": {"a_l": 1.0, "a_r": 1.5, "p_l": 0.0, "p_r": 0.0, "g": 1.0, "t": 1.0, "samples": 201},
    "convergence": {"deltas": [0.2, 0.1, 0.05, 0.025], "fd_dx": 1e-3, "fd_cfl": 0.5},
    "verify": {
        "suites": list(SUITES),
        "test_functions": 8,
        "pairs": 20,
        "deltas": None,
        "interaction_samples": 1000,
        "forged": None,
    },
}

PRESETS = {
    "constant": {
        "a": 1.5, "g": 1.0, "u0": "0.3 * x", "domain": [-1.0, 1.0], "horizon": 1.0, "delta": 0.1,
    },
    "interface": {
        "a": {"jumps": [0.0], "pieces": ["1.0", "1.5"]}, "g": 1.0, "u0": "0",
        "domain": [-2.0, 2.0], "horizon": 1.0, "delta": 0.05,
    },
    "stationary_shock": {
        "a": 1.0, "g": 1.0, "u0": {"jumps": [0.0], "pieces": ["-x", "x"]},
        "domain": [-2.0, 2.0], "horizon": 1.0, "delta": 0.05,
    },
    "rarefaction": {
        "a": 1.0, "g": 1.0, "u0": {"jumps": [0.0], "pieces": ["x", "-x"]},
        "domain": [-2.0, 2.0], "horizon": 1.0, "delta": 0.05,
    },
    "smooth": {
        "a": "1.5 + 0.25 * sin(pi * x)", "g": {"jumps": [0.25], "pieces": ["1.0", "1.2"]},
        "u0": "0", "domain": [-1.0, 1.0], "horizon": 0.5, "delta": 0.1,
    },
}


def _merge(base, over):
    out = copy.deepcopy(base)
    for k, v in over.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _merge(out[k], v)
        else:
            out[k] = copy.deepcopy(v)
    return out


def _check_keys(obj, allowed, path):
    if not isinstance(obj, dict):
        raise ConfigError(path, f"expected a mapping, got {type(obj).__name__}")
    for k in obj:
        if k not in allowed:
            raise ConfigError(f"{path}.{k}" if path else str(k), "unknown key")


def _real(v, path, positive=False, allow_none=False):
    if v is None and allow_none:
        return None
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(path, f"expected a number, got {v!r}")
    v = float(v)
    if not math.isfinite(v):
        raise ConfigError(path, f"must be finite, got {v}")
    if positive and not v > 0:
        raise ConfigError(path, f"must be positive, got {v}")
    return v


def _int(v, path, minimum=None):
    if isinstance(v, bool) or not isinstance(v, int):
        raise ConfigError(path, f"expected an integer, got {v!r}")
    if minimum is not None and v < minimum:
        raise ConfigError(path, f"must be at least {minimum}, got {v}")
    return v


def _interval(v, path):
    if not isinstance(v, (list, tuple)) or len(v) != 2:
        raise ConfigError(path, f"expected [lo, hi], got {v!r}")
    lo, hi = _real(v[0], f"{path}[0]"), _real(v[1], f"{path}[1]")
    if not lo < hi:
        raise ConfigError(path, f"need lo < hi, got {v!r}")
    return lo, hi


def _reals(v, path, positive=False):
    if not isinstance(v, (list, tuple)):
        raise ConfigError(path, f"expected a list, got {v!r}")
    return [_real(x, f"{path}[{i}]", positive) for i, x in enumerate(v)]


def _spec(v, path, var):
    try:
        return PiecewiseSpec.from_config(v, var)
    except (HJFrontError, KeyError, TypeError) as exc:
        raise ConfigError(path, str(exc)) from None


@dataclass
class RunConfig:
    model: flux.HamiltonianModel
    a_spec: PiecewiseSpec
    g_spec: PiecewiseSpec
    u0_spec: PiecewiseSpec | None
    p0_spec: PiecewiseSpec | None
    u_ref: float
    domain: tuple
    horizon: float
    delta: float
    h: float
    x_ref: float | None
    snapshots: list
    samples: int
    seed: int
    glimm_c: float | None
    temple_rule: str
    temple_scale: str
    riemann: dict
    convergence: dict
    verify: dict
    raw: dict = field(repr=False, default_factory=dict)

    # -- discretisation

    def coefficients(self, delta: float | None = None):
        """(p0, a, g, x_ref, u_ref) discretised with mesh ``h`` (scaled with ``delta``)."""
        h = self.h if delta is None else self.h * delta / self.delta
        a = discretize(self.a_spec, self.domain, h)
        g = discretize(self.g_spec, (0.0, self.horizon), h)
        x_ref = self.reference_point(a)
        if self.u0_spec is not None:
            p0, u_ref = slopes_from_potential(self.u0_spec, self.domain, h, x_ref)
        else:
            p0, u_ref = discretize(self.p0_spec, self.domain, h, [x_ref]), self.u_ref
        return p0, a, g, x_ref, u_ref

    def reference_point(self, a: PiecewiseConstantFn) -> float:
        if self.x_ref is not None:
            return self.x_ref
        lo, hi = self.domain
        if lo <= 0.0 <= hi:
            return 0.0
        if len(a.breakpoints):
            return float(a.breakpoints[0])
        return 0.5 * (lo + hi)

    def with_delta(self, delta: float) -> "RunConfig":
        out = copy.copy(self)
        out.h = self.h * delta / self.delta
        out.delta = float(delta)
        return out


def parse(raw: dict) -> RunConfig:
    """Validate a configuration mapping (already merged with a preset if any)."""
    if raw is None:
        raw = {}
    _check_keys(raw, set(DEFAULTS) | {"preset"}, "")
    if "preset" in raw:
        name = raw["preset"]
        if name not in PRESETS:
            raise ConfigError("preset", f"unknown preset {name!r}; choose from {sorted(PRESETS)}")
        raw = _merge(PRESETS[name], {k: v for k, v in raw.items() if k != "preset"})
    cfg = _merge(DEFAULTS, raw)

    m = cfg["model"]
    _check_keys(m, set(DEFAULTS["model"]), "model")
    if m["family"] not in flux.FAMILIES:
        raise ConfigError("model.family", f"unknown family {m['family']!r}; choose from {sorted(flux.FAMILIES)}")
    a_box = _interval(m["a_box"], "model.a_box")
    g_box = _interval(m["g_box"], "model.g_box")
    kw = {"a_box": a_box, "g_box": g_box}
    if m["p_guard"] is not None:
        kw["p_guard"] = _real(m["p_guard"], "model.p_guard", positive=True)
    try:
        model = flux.FAMILIES[m["family"]](**kw)
    except HJFrontError as exc:
        raise ConfigError("model", str(exc)) from None

    domain = _interval(cfg["domain"], "domain")
    horizon = _real(cfg["horizon"], "horizon", positive=True)
    delta = _real(cfg["delta"], "delta", positive=True)
    h = delta if cfg["h"] is None else _real(cfg["h"], "h", positive=True)
    x_ref = _real(cfg["x_ref"], "x_ref", allow_none=True)
    if x_ref is not None and not domain[0] <= x_ref <= domain[1]:
        raise ConfigError("x_ref", f"{x_ref} lies outside the domain {list(domain)}")

    a_spec = _spec(cfg["a"], "a", "x")
    g_spec = _spec(cfg["g"], "g", "t")
    for b in a_spec.jumps:
        if not domain[0] < b < domain[1]:
            raise ConfigError("a.jumps", f"jump {b} lies outside the domain {list(domain)}")
    for b in g_spec.jumps:
        if not 0.0 < b < horizon:
            raise ConfigError("g.jumps", f"jump {b} lies outside (0, {horizon})")
    if (cfg["u0"] is None) == (cfg["p0"] is None):
        raise ConfigError("u0", "give exactly one of u0 (potential) or p0 (slopes)")
    u0_spec = _spec(cfg["u0"], "u0", "x") if cfg["u0"] is not None else None
    p0_spec = _spec(cfg["p0"], "p0", "x") if cfg["p0"] is not None else None
    u_ref = _real(cfg["u_ref"], "u_ref")

    snaps = [horizon] if cfg["snapshots"] is None else _reals(cfg["snapshots"], "snapshots")
    for i, t in enumerate(snaps):
        if not 0.0 <= t <= horizon:
            raise ConfigError(f"snapshots[{i}]", f"time {t} outside [0, {horizon}]")
    samples = _int(cfg["samples"], "samples", 2)
    seed = _int(cfg["seed"], "seed", 0)
    glimm_c = _real(cfg["glimm_c"], "glimm_c", positive=True, allow_none=True)

    tp = cfg["temple"]
    _check_keys(tp, set(DEFAULTS["temple"]), "temple")
    if tp["rule"] not in ("flipped", "literal"):
        raise ConfigError("temple.rule", f"expected flipped or literal, got {tp['rule']!r}")
    if tp["scale"] not in ("relative", "absolute"):
        raise ConfigError("temple.scale", f"expected relative or absolute, got {tp['scale']!r}")

    rp = cfg["riemann"]
    _check_keys(rp, set(DEFAULTS["riemann"]), "riemann")
    riemann = {k: _real(rp[k], f"riemann.{k}") for k in ("a_l", "a_r", "p_l", "p_r")}
    riemann["g"] = _real(rp["g"], "riemann.g")
    riemann["t"] = _real(rp["t"], "riemann.t", positive=True)
    riemann["samples"] = _int(rp["samples"], "riemann.samples", 2)

    cp = cfg["convergence"]
    _check_keys(cp, set(DEFAULTS["convergence"]), "convergence")
    deltas = _reals(cp["deltas"], "convergence.deltas", positive=True)
    if len(deltas) < 2 or any(d2 >= d1 for d1, d2 in zip(deltas[:-1], deltas[1:])):
        raise ConfigError("convergence.deltas", "need at least two strictly decreasing values")
    fd_dx = _real(cp["fd_dx"], "convergence.fd_dx", positive=True, allow_none=True)
    fd_cfl = _real(cp["fd_cfl"], "convergence.fd_cfl", positive=True)
    if fd_cfl > 1:
        raise ConfigError("convergence.fd_cfl", f"CFL number must not exceed 1, got {fd_cfl}")

    vp = cfg["verify"]
    _check_keys(vp, set(DEFAULTS["verify"]), "verify")
    suites = vp["suites"]
    if not isinstance(suites, list):
        raise ConfigError("verify.suites", f"expected a list, got {suites!r}")
    for i, s in enumerate(suites):
        if s not in SUITES:
            raise ConfigError(f"verify.suites[{i}]", f"unknown suite {s!r}; choose from {list(SUITES)}")
    vdeltas = [delta, delta / 2, delta / 4] if vp["deltas"] is None else _reals(vp["deltas"], "verify.deltas", True)
    forged = vp["forged"]
    if forged is not None:
        _check_keys(forged, {"p_l", "p_r", "a", "g", "x"}, "verify.forged")
        forged = {k: _real(forged.get(k, d), f"verify.forged.{k}")
                  for k, d in (("p_l", 1.0), ("p_r", -1.0), ("a", a_box[0]), ("g", g_box[0]), ("x", 0.0))}
    verify = {
        "suites": list(suites),
        "test_functions": _int(vp["test_functions"], "verify.test_functions", 1),
        "pairs": _int(vp["pairs"], "verify.pairs", 1),
        "deltas": vdeltas,
        "interaction_samples": _int(vp["interaction_samples"], "verify.interaction_samples", 1),
        "forged": forged,
    }
    return RunConfig(model, a_spec, g_spec, u0_spec, p0_spec, u_ref, domain, horizon, delta, h, x_ref,
                     snaps, samples, seed, glimm_c, tp["rule"], tp["scale"], riemann,
                     {"deltas": deltas, "fd_dx": fd_dx, "fd_cfl": fd_cfl}, verify, raw)


def load(source: str | None, overrides: dict | None = None) -> RunConfig:
    """Load from a YAML path or ``builtin:<preset>``; ``overrides`` are applied on top."""
    if source is None:
        raw = {"preset": "interface"}
    elif source.startswith("builtin:"):
        raw = {"preset": source[len("builtin:"):]}
    else:
        path = Path(source)
        try:
            text = path.read_text()
        except OSError as exc:
            raise ConfigError("", f"cannot read {source}: {exc.strerror}") from None
        try:
            raw = yaml.safe_load(text)
        except yaml.YAMLError as exc:
            raise ConfigError("", f"{source} is not valid YAML: {exc}") from None
        if raw is None:
            raw = {}
    if not isinstance(raw, dict):
        raise ConfigError("", "top level must be a mapping")
    if overrides:
        raw = _merge(raw, overrides)
    return parse(raw)
