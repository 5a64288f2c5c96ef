"""Pure-Python reference implementations of the hot kernels.

These mirror ``_kernels.pyx`` line for line; :mod:`hjfront.kernels` picks the
compiled module when it is importable.
"""

import math

import numpy as np

COLLINEAR_EPS = 1e-13
JUMP_TIE = 1e-12


def hull_indices(x, y, upper):
    """Vertices of the lower convex (or upper concave) envelope of sorted points."""
    n = len(x)
    hull = []
    for k in range(n):
        while len(hull) >= 2:
            o, a = hull[-2], hull[-1]
            d1x, d1y = x[a] - x[o], y[a] - y[o]
            d2x, d2y = x[k] - x[o], y[k] - y[o]
            cross = d1x * d2y - d1y * d2x
            tol = COLLINEAR_EPS * (abs(d1x * d2y) + abs(d1y * d2x))
            if (not upper and cross <= tol) or (upper and cross >= -tol):
                hull.pop()
            else:
                break
        hull.append(k)
    return hull


def _better(jump, triv, pl, pr, best):
    # best = (jump, triv, |pl|, pl, |pr|); returns (is_better, is_tie)
    bj, bt, bal, bpl, bapr = best
    if jump < bj - JUMP_TIE:
        return True, False
    if jump > bj + JUMP_TIE:
        return False, False
    if triv != bt:
        return triv > bt, True
    if abs(abs(pl) - bal) > JUMP_TIE:
        return abs(pl) < bal, True
    if abs(pl - bpl) > JUMP_TIE:
        return pl < bpl, True
    return abs(pr) < bapr, True


def min_jump_pair(pl, hl, okl, tl, order_l, pr, hr, okr, tr, order_r, tol):
    """Minimal |pl[i] - pr[j]| over admissible pairs with |hl[i] - hr[j]| <= tol.

    ``order_l``/``order_r`` sort each level by flux value; ``tl``/``tr`` flag the
    trivial (no-wave) candidates preferred on ties.  Returns (i, j, tie) with
    i = j = -1 when no pair is feasible.
    """
    nl, nr = len(order_l), len(order_r)
    bi = bj = -1
    best = (math.inf, -1, math.inf, math.inf, math.inf)
    tie = False
    start = 0
    for a in range(nl):
        i = order_l[a]
        h = hl[i]
        while start < nr and hr[order_r[start]] < h - tol:
            start += 1
        if not okl[i]:
            continue
        b = start
        while b < nr and hr[order_r[b]] <= h + tol:
            j = order_r[b]
            b += 1
            if not okr[j]:
                continue
            jump = abs(pl[i] - pr[j])
            triv = int(tl[i]) + int(tr[j])
            better, is_tie = _better(jump, triv, pl[i], pr[j], best)
            if is_tie:
                tie = True
            if better:
                if not is_tie:
                    tie = False
                best = (jump, triv, abs(pl[i]), pl[i], abs(pr[j]))
                bi, bj = i, j
    return bi, bj, tie


def godunov_fluxes(u, H, alpha, iface):
    """Face fluxes of the Godunov scheme for a flux unimodal with peak at 0."""
    n = len(u)
    F = np.empty(n + 1)
    F[0] = H[0]
    F[n] = H[n - 1]
    for i in range(n - 1):
        f = iface[i]
        if not math.isnan(f):
            F[i + 1] = f
            continue
        ul, ur = u[i], u[i + 1]
        if ul <= ur:
            F[i + 1] = min(H[i], H[i + 1])
        elif ur <= 0.0 <= ul:
            F[i + 1] = alpha[i]
        else:
            F[i + 1] = max(H[i], H[i + 1])
    return F


def conservative_update(u, F, dt_dx):
    n = len(u)
    out = np.empty(n)
    for i in range(n):
        out[i] = u[i] - dt_dx * (F[i + 1] - F[i])
    return out
