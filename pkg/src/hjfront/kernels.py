"""Kernel backend selection.

The compiled extension is used when it was built; otherwise the pure-Python
module is loaded.  ``HJFRONT_PURE_PYTHON=1`` forces the fallback.
"""

import os

import numpy as np

from hjfront import _pykernels

if os.environ.get("HJFRONT_PURE_PYTHON", "") not in ("", "0"):
    _impl = _pykernels
else:
    try:
        from hjfront import _kernels as _impl
    except ImportError:  # extension not built
        _impl = _pykernels

BACKEND = "compiled" if _impl is not _pykernels else "python"


def backends():
    """Available kernel modules keyed by name."""
    out = {"python": _pykernels}
    try:
        from hjfront import _kernels

        out["compiled"] = _kernels
    except ImportError:
        pass
    return out


def hull_indices(x, y, upper, impl=None):
    impl = impl or _impl
    return impl.hull_indices(np.ascontiguousarray(x, dtype=float),
                             np.ascontiguousarray(y, dtype=float), bool(upper))


def min_jump_pair(pl, hl, okl, tl, order_l, pr, hr, okr, tr, order_r, tol, impl=None):
    impl = impl or _impl
    f = lambda v: np.ascontiguousarray(v, dtype=float)
    b = lambda v: np.ascontiguousarray(v, dtype=np.uint8)
    o = lambda v: np.ascontiguousarray(v, dtype=np.intp)
    return impl.min_jump_pair(f(pl), f(hl), b(okl), b(tl), o(order_l),
                              f(pr), f(hr), b(okr), b(tr), o(order_r), float(tol))


def godunov_fluxes(u, H, alpha, iface, impl=None):
    impl = impl or _impl
    f = lambda v: np.ascontiguousarray(v, dtype=float)
    return impl.godunov_fluxes(f(u), f(H), f(alpha), f(iface))


def conservative_update(u, F, dt_dx, impl=None):
    impl = impl or _impl
    return impl.conservative_update(np.ascontiguousarray(u, dtype=float),
                                    np.ascontiguousarray(F, dtype=float), float(dt_dx))
