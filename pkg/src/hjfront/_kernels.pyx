# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels; see ``_pykernels.py`` for the reference versions."""

import numpy as np
cimport numpy as cnp
from libc.math cimport fabs, isnan, INFINITY

cdef double COLLINEAR_EPS = 1e-13
cdef double JUMP_TIE = 1e-12


def hull_indices(double[::1] x, double[::1] y, bint upper):
    cdef Py_ssize_t n = x.shape[0], k, o, a, m = 0
    cdef double d1x, d1y, d2x, d2y, cross, tol
    cdef cnp.intp_t[::1] hull = np.empty(n, dtype=np.intp)
    for k in range(n):
        while m >= 2:
            o = hull[m - 2]
            a = hull[m - 1]
            d1x = x[a] - x[o]
            d1y = y[a] - y[o]
            d2x = x[k] - x[o]
            d2y = y[k] - y[o]
            cross = d1x * d2y - d1y * d2x
            tol = COLLINEAR_EPS * (fabs(d1x * d2y) + fabs(d1y * d2x))
            if (not upper and cross <= tol) or (upper and cross >= -tol):
                m -= 1
            else:
                break
        hull[m] = k
        m += 1
    return [hull[k] for k in range(m)]


cdef inline int _better(double jump, int triv, double pl, double pr,
                        double bj, int bt, double bal, double bpl, double bapr,
                        bint *is_tie):
    is_tie[0] = False
    if jump < bj - JUMP_TIE:
        return 1
    if jump > bj + JUMP_TIE:
        return 0
    is_tie[0] = True
    if triv != bt:
        return triv > bt
    if fabs(fabs(pl) - bal) > JUMP_TIE:
        return fabs(pl) < bal
    if fabs(pl - bpl) > JUMP_TIE:
        return pl < bpl
    return fabs(pr) < bapr


def min_jump_pair(double[::1] pl, double[::1] hl, cnp.uint8_t[::1] okl, cnp.uint8_t[::1] tl,
                  cnp.intp_t[::1] order_l,
                  double[::1] pr, double[::1] hr, cnp.uint8_t[::1] okr, cnp.uint8_t[::1] tr,
                  cnp.intp_t[::1] order_r, double tol):
    cdef Py_ssize_t nl = order_l.shape[0], nr = order_r.shape[0]
    cdef Py_ssize_t a, b, i, j, start = 0, bi = -1, bjx = -1
    cdef double h, jump, bj = INFINITY, bal = INFINITY, bpl = INFINITY, bapr = INFINITY
    cdef int bt = -1, triv
    cdef bint tie = False, is_tie, better
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
            jump = fabs(pl[i] - pr[j])
            triv = tl[i] + tr[j]
            better = _better(jump, triv, pl[i], pr[j], bj, bt, bal, bpl, bapr, &is_tie)
            if is_tie:
                tie = True
            if better:
                if not is_tie:
                    tie = False
                bj = jump
                bt = triv
                bal = fabs(pl[i])
                bpl = pl[i]
                bapr = fabs(pr[j])
                bi = i
                bjx = j
    return bi, bjx, bool(tie)


def godunov_fluxes(double[::1] u, double[::1] H, double[::1] alpha, double[::1] iface):
    cdef Py_ssize_t n = u.shape[0], i
    cdef double ul, ur, f
    out = np.empty(n + 1)
    cdef double[::1] F = out
    F[0] = H[0]
    F[n] = H[n - 1]
    for i in range(n - 1):
        f = iface[i]
        if not isnan(f):
            F[i + 1] = f
            continue
        ul = u[i]
        ur = u[i + 1]
        if ul <= ur:
            F[i + 1] = H[i] if H[i] < H[i + 1] else H[i + 1]
        elif ur <= 0.0 <= ul:
            F[i + 1] = alpha[i]
        else:
            F[i + 1] = H[i] if H[i] > H[i + 1] else H[i + 1]
    return out


def conservative_update(double[::1] u, double[::1] F, double dt_dx):
    cdef Py_ssize_t n = u.shape[0], i
    res = np.empty(n)
    cdef double[::1] out = res
    for i in range(n):
        out[i] = u[i] - dt_dx * (F[i + 1] - F[i])
    return res
