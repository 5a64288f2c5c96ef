"""Reference answers computed without the package's solvers."""

import math

import numpy as np


def eik_H(p, a, g):
    return a + g - math.sqrt(1 + p * p)


def eik_Gplus(h, a, g):
    return math.sqrt((a + g - h) ** 2 - 1)


def interface_scan(a_l, a_r, p_l, p_r, g=1.0, n=200001, R=3.0):
    """Minimal-jump interface pair for the offset eikonal flux by a 1-D scan over p'_l.

    The admissible sets follow the case table: p'_l >= -p_l (p_l <= 0) or >= 0,
    p'_r <= 0 (p_r < 0) or <= -p_r; the no-wave states are always allowed.
    """
    best = None
    cands_l = np.concatenate([np.linspace(-R, R, n), [p_l]])
    for ql in cands_l:
        okl = ql == p_l or (ql >= -p_l if p_l <= 0 else ql >= 0)
        if not okl:
            continue
        h = eik_H(ql, a_l, g)
        s = a_r + g - h
        if s < 1:
            continue
        m = math.sqrt(s * s - 1)
        for qr in (m, -m):
            okr = abs(qr - p_r) < 1e-12 or (qr <= 1e-12 if p_r < 0 else qr <= -p_r + 1e-12)
            if okr and (best is None or abs(ql - qr) < best[0]):
                best = (abs(ql - qr), ql, qr)
    return best[1], best[2]


def hull_fan(p, H, kl, kr):
    """Chord speeds of the convex (kl < kr) or concave (kl > kr) envelope, brute force O(n^3)."""
    if kl == kr:
        return []
    lo, hi = min(kl, kr), max(kl, kr)
    upper = kl > kr
    idx = list(range(lo, hi + 1))
    edges = []
    i = lo
    while i < hi:
        # farthest j such that every node between sits on the correct side of the chord
        for j in range(hi, i, -1):
            s = (H[j] - H[i]) / (p[j] - p[i])
            ok = True
            for k in range(i + 1, j):
                c = H[i] + s * (p[k] - p[i])
                if (upper and H[k] > c + 1e-13) or (not upper and H[k] < c - 1e-13):
                    ok = False
                    break
            if ok:
                edges.append(s)
                i = j
                break
    return edges if not upper else edges[::-1]
