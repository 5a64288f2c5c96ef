"""Piecewise-constant approximations of the coefficients and initial data.

Coefficients are described by closed-form expressions with explicit jump
lists.  The expression grammar is a small arithmetic subset of Python:

* numbers, the variable (``x`` for space, ``t`` for time), ``pi`` and ``e``
* ``+ - * / **`` and unary minus
* ``sin cos tan exp log sqrt abs tanh sinh cosh arctan sign minimum maximum``

A piecewise description is a list of breakpoints b_1 < ... < b_m and m + 1
expressions, the k-th valid on (b_k, b_{k+1}).
"""

from __future__ import annotations

import ast
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from hjfront.errors import ExpressionError, InputError

_FUNCS = {
    "sin": np.sin, "cos": np.cos, "tan": np.tan, "exp": np.exp, "log": np.log,
    "sqrt": np.sqrt, "abs": np.abs, "tanh": np.tanh, "sinh": np.sinh, "cosh": np.cosh,
    "arctan": np.arctan, "sign": np.sign, "minimum": np.minimum, "maximum": np.maximum,
}
_CONSTS = {"pi": math.pi, "e": math.e}
_BINOPS = {ast.Add: np.add, ast.Sub: np.subtract, ast.Mult: np.multiply,
           ast.Div: np.divide, ast.Pow: np.power}


class Expression:
    """A parsed, whitelisted arithmetic expression in one variable."""

    def __init__(self, source, var="x"):
        if isinstance(source, (int, float)):
            source = repr(float(source))
        self.source = str(source)
        self.var = var
        try:
            tree = ast.parse(self.source, mode="eval")
        except SyntaxError as exc:
            raise ExpressionError(f"cannot parse {self.source!r}: {exc.msg}") from None
        self._check(tree.body)
        self._tree = tree.body

    def _check(self, node):
        if isinstance(node, ast.Constant):
            if not isinstance(node.value, (int, float)) or isinstance(node.value, bool):
                raise ExpressionError(f"unsupported literal {node.value!r} in {self.source!r}")
        elif isinstance(node, ast.Name):
            if node.id != self.var and node.id not in _CONSTS:
                raise ExpressionError(f"unknown name {node.id!r} in {self.source!r}")
        elif isinstance(node, ast.BinOp):
            if type(node.op) not in _BINOPS:
                raise ExpressionError(f"unsupported operator in {self.source!r}")
            self._check(node.left)
            self._check(node.right)
        elif isinstance(node, ast.UnaryOp):
            if not isinstance(node.op, (ast.USub, ast.UAdd)):
                raise ExpressionError(f"unsupported unary operator in {self.source!r}")
            self._check(node.operand)
        elif isinstance(node, ast.Call):
            if not isinstance(node.func, ast.Name) or node.func.id not in _FUNCS or node.keywords:
                raise ExpressionError(f"unsupported call in {self.source!r}")
            for arg in node.args:
                self._check(arg)
        else:
            raise ExpressionError(f"unsupported syntax {type(node).__name__} in {self.source!r}")

    def _eval(self, node, x):
        if isinstance(node, ast.Constant):
            return float(node.value)
        if isinstance(node, ast.Name):
            return x if node.id == self.var else _CONSTS[node.id]
        if isinstance(node, ast.BinOp):
            return _BINOPS[type(node.op)](self._eval(node.left, x), self._eval(node.right, x))
        if isinstance(node, ast.UnaryOp):
            v = self._eval(node.operand, x)
            return -v if isinstance(node.op, ast.USub) else v
        return _FUNCS[node.func.id](*[self._eval(a, x) for a in node.args])

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        with np.errstate(all="ignore"):
            out = self._eval(self._tree, x) + 0.0 * x
        if not np.all(np.isfinite(out)):
            raise ExpressionError(f"{self.source!r} is not finite on the requested points")
        return out

    def __repr__(self):
        return f"Expression({self.source!r})"


@dataclass
class PiecewiseSpec:
    """Closed-form description: expressions separated by declared jumps."""

    jumps: tuple
    pieces: tuple

    @classmethod
    def from_config(cls, obj, var="x"):
        if isinstance(obj, (int, float, str)):
            return cls((), (Expression(obj, var),))
        if isinstance(obj, dict):
            jumps = tuple(float(b) for b in obj.get("jumps", ()))
            pieces = obj.get("pieces")
            if pieces is None:
                pieces = [obj["expr"]] if "expr" in obj else []
            if len(pieces) != len(jumps) + 1:
                raise ExpressionError(f"{len(jumps)} jumps need {len(jumps) + 1} pieces, got {len(pieces)}")
            return cls(jumps, tuple(Expression(p, var) for p in pieces))
        raise ExpressionError(f"cannot interpret coefficient description {obj!r}")

    def __post_init__(self):
        if any(b >= c for b, c in zip(self.jumps[:-1], self.jumps[1:])):
            raise ExpressionError("jump points must be strictly increasing")
        if len(self.pieces) != len(self.jumps) + 1:
            raise ExpressionError("piece count must be jump count + 1")

    def piece_index(self, x):
        return np.searchsorted(np.asarray(self.jumps), x, side="right")

    def __call__(self, x):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        idx = self.piece_index(x)
        out = np.empty_like(x)
        for k, expr in enumerate(self.pieces):
            m = idx == k
            if m.any():
                out[m] = expr(x[m])
        return out

    def one_sided(self, x, side):
        k = int(self.piece_index(x)) - (1 if side == "-" and x in self.jumps else 0)
        return float(self.pieces[k](x))


@dataclass(frozen=True, eq=False)
class PiecewiseConstantFn:
    """Right-continuous step function, constant beyond its first/last breakpoint."""

    breakpoints: np.ndarray
    values: np.ndarray
    domain: tuple

    def __post_init__(self):
        b = np.asarray(self.breakpoints, dtype=float)
        v = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "breakpoints", b)
        object.__setattr__(self, "values", v)
        if len(v) != len(b) + 1:
            raise InputError("value count must equal breakpoint count + 1")
        if np.any(np.diff(b) <= 0):
            raise InputError("breakpoints must be strictly increasing")
        if not np.all(np.isfinite(v)):
            raise InputError("values must be finite")

    @classmethod
    def constant(cls, value, domain=(0.0, 1.0)):
        return cls(np.array([]), np.array([float(value)]), tuple(domain))

    @classmethod
    def steps(cls, breakpoints, values, domain=None):
        b = [float(x) for x in breakpoints]
        if domain is None:
            domain = (b[0] - 1.0, b[-1] + 1.0) if b else (0.0, 1.0)
        return cls(np.array(b), np.array([float(v) for v in values]), tuple(domain))

    def __call__(self, x):
        idx = np.searchsorted(self.breakpoints, x, side="right")
        return self.values[idx]

    def at(self, x: float) -> float:
        return float(self.values[int(np.searchsorted(self.breakpoints, x, side="right"))])

    def left_value(self, x: float) -> float:
        return float(self.values[int(np.searchsorted(self.breakpoints, x, side="left"))])

    def total_variation(self, lo=-math.inf, hi=math.inf) -> float:
        m = (self.breakpoints > lo) & (self.breakpoints < hi)
        d = np.abs(np.diff(self.values))
        return float(d[m].sum())

    def jumps(self):
        return [(float(b), float(self.values[k]), float(self.values[k + 1]))
                for k, b in enumerate(self.breakpoints)]

    def distinct_values(self):
        return sorted(set(float(v) for v in self.values))

    def l1_distance(self, other: "PiecewiseConstantFn", lo: float, hi: float) -> float:
        pts = np.unique(np.concatenate([[lo, hi], self.breakpoints, other.breakpoints]))
        pts = pts[(pts >= lo) & (pts <= hi)]
        mids = 0.5 * (pts[:-1] + pts[1:])
        return float(np.sum(np.abs(self(mids) - other(mids)) * np.diff(pts)))


def _mesh(domain, h, extra=()):
    lo, hi = map(float, domain)
    if not (h > 0 and math.isfinite(h)):
        raise InputError(f"mesh width must be positive, got {h}")
    if not lo < hi:
        raise InputError(f"empty domain {domain}")
    n = max(1, int(math.ceil((hi - lo) / h - 1e-9)))
    mesh = lo + (hi - lo) * np.arange(n + 1) / n
    extra = np.array(sorted({float(x) for x in extra if lo < x < hi}))
    if len(extra):
        # declared points are kept exactly; mesh nodes within rounding of them are dropped
        near = np.min(np.abs(mesh[:, None] - extra[None, :]), axis=1) <= 1e-12 * (1 + np.abs(mesh))
        near[[0, -1]] = False
        mesh = mesh[~near]
    nodes = np.unique(np.concatenate([mesh, extra]))
    keep = np.concatenate([[True], np.diff(nodes) > 1e-12 * (1 + np.abs(nodes[1:]))])
    return nodes[keep]


def _compress(nodes, vals, domain):
    bps, out = [], [vals[0]]
    for x, v in zip(nodes[1:-1], vals[1:]):
        # differences at rounding level (e.g. slopes of an affine potential) are not jumps
        if abs(v - out[-1]) > 1e-12 * (1.0 + abs(v)):
            bps.append(x)
            out.append(v)
    return PiecewiseConstantFn(np.array(bps), np.array(out), tuple(domain))


def discretize(spec: PiecewiseSpec, domain: Sequence[float], h: float,
               extra_nodes: Sequence[float] = ()) -> PiecewiseConstantFn:
    """Midpoint samples on a uniform mesh of width ~h with every declared jump as a node."""
    nodes = _mesh(domain, h, list(spec.jumps) + list(extra_nodes))
    mids = 0.5 * (nodes[:-1] + nodes[1:])
    vals = spec(mids)
    fn = _compress(nodes, vals, domain)
    ref = _fine_variation(spec, nodes)
    if fn.total_variation() > ref + 1e-12 * (1 + ref):
        raise ExpressionError(f"discretisation increased the variation ({fn.total_variation()} > {ref})")
    return fn


def _fine_variation(spec: PiecewiseSpec, nodes, sub=16):
    """Variation of ``spec`` on a refinement containing all midpoints and one-sided jump limits."""
    total = 0.0
    prev = None
    for a, b in zip(nodes[:-1], nodes[1:]):
        s = a + (b - a) * np.linspace(0.0, 1.0, 2 * sub + 1)[1:-1]
        v = spec(s)
        k = int(spec.piece_index(0.5 * (a + b)))
        ends = spec.pieces[k](np.array([a, b]))
        seq = np.concatenate([[ends[0]], v, [ends[1]]])
        total += float(np.sum(np.abs(np.diff(seq))))
        if prev is not None:
            total += abs(seq[0] - prev)
        prev = seq[-1]
    return total


def variation_of(spec: PiecewiseSpec, domain, n=20001) -> float:
    """Dense-sampling estimate of the variation of a piecewise description on ``domain``."""
    return _fine_variation(spec, _mesh(domain, (domain[1] - domain[0]) / 200, spec.jumps), sub=n // 400 + 1)


def slopes_from_potential(u0: PiecewiseSpec, domain, h, x_ref=0.0):
    """Forward-difference slopes of u0 sampled on the mesh (x_ref inserted as a node).

    Returns (p0, u0(x_ref)).  The potential must be continuous; declared jumps
    of ``u0`` are treated as kinks.
    """
    nodes = _mesh(domain, h, list(u0.jumps) + [x_ref])
    u = np.array([u0.one_sided(x, "+") for x in nodes])
    p = np.diff(u) / np.diff(nodes)
    lo, hi = domain
    ref = float(u0.one_sided(min(max(x_ref, lo), hi), "+"))
    return _compress(nodes, p, domain), ref
