"""Numba implementations of the per-pixel kernels.

Every function here has a numpy twin in ``_numpy.py`` with the same
signature.  Pixels are processed independently, so ``prange`` partitioning
does not change any output bit.
"""
import math

import numpy as np
from numba import njit, prange

# status codes shared with the numpy twin
OK = 0
DEGENERATE = 1

SQRT2 = math.sqrt(2.0)


@njit(cache=True)
def box_sum(a, half):
    """Clipped-window sums of ``a`` (H, W, F), separable, ascending order."""
    H, W, F = a.shape
    rows = np.zeros_like(a)
    for i in range(H):
        for j in range(W):
            j0 = max(0, j - half)
            j1 = min(W, j + half + 1)
            for f in range(F):
                acc = a[i, j0, f] * 0
                for jj in range(j0, j1):
                    acc += a[i, jj, f]
                rows[i, j, f] = acc
    out = np.zeros_like(a)
    for i in range(H):
        i0 = max(0, i - half)
        i1 = min(H, i + half + 1)
        for j in range(W):
            for f in range(F):
                acc = rows[i0, j, f] * 0
                for ii in range(i0, i1):
                    acc += rows[ii, j, f]
                out[i, j, f] = acc
    return out


@njit(cache=True)
def _yamaguchi_pixel(c11, c22, c33, c12, c13, c23, out):
    trace = c11 + c22 + c33
    if not trace > 0.0:
        out[0] = 0.0
        out[1] = 0.0
        out[2] = 0.0
        out[3] = 0.0
        return
    ph = SQRT2 * abs((c12 + c23).imag)

    # co-pol ratio branch: -1 (VV/HH < -2 dB), 0 (within +-2 dB), +1
    if c11 <= 0.0 and c33 <= 0.0:
        branch = 0
    elif c11 <= 0.0:
        branch = 1
    elif c33 <= 0.0:
        branch = -1
    else:
        db = 10.0 * math.log10(c33 / c11)
        if db < -2.0:
            branch = -1
        elif db > 2.0:
            branch = 1
        else:
            branch = 0
    if branch == 0:
        pv = 4.0 * (c22 - 0.5 * ph)
        va, vb, vc = 3.0 / 8.0, 3.0 / 8.0, 1.0 / 8.0
    elif branch < 0:
        pv = 3.75 * (c22 - 0.5 * ph)
        va, vb, vc = 8.0 / 15.0, 3.0 / 15.0, 2.0 / 15.0
    else:
        pv = 3.75 * (c22 - 0.5 * ph)
        va, vb, vc = 3.0 / 15.0, 8.0 / 15.0, 2.0 / 15.0

    a = c11 - va * pv - 0.25 * ph
    b = c33 - vb * pv - 0.25 * ph
    c = c13 - vc * pv + 0.25 * ph
    det = a * b - (c.real * c.real + c.imag * c.imag)
    tiny = 1e-15 * trace
    if c.real >= 0.0:
        # surface dominant, alpha = -1
        den = a + b + 2.0 * c.real
        fd = det / den if den > tiny else 0.0
        pd = 2.0 * fd
        ps = a + b - pd
    else:
        # double bounce dominant, beta = 1
        den = a + b - 2.0 * c.real
        fs = det / den if den > tiny else 0.0
        ps = 2.0 * fs
        pd = a + b - ps

    if ps < 0.0:
        pv += ps
        ps = 0.0
    if pd < 0.0:
        pv += pd
        pd = 0.0
    if pv < 0.0:
        pv = 0.0
        rest = ps + pd + ph
        scale = trace / rest
        ps *= scale
        pd *= scale
        ph *= scale
    out[0] = ps
    out[1] = pd
    out[2] = pv
    out[3] = ph


@njit(cache=True, parallel=True)
def yamaguchi4(c):
    n = c.shape[0]
    out = np.empty((n, 4))
    for p in prange(n):
        _yamaguchi_pixel(
            c[p, 0, 0].real, c[p, 1, 1].real, c[p, 2, 2].real,
            c[p, 0, 1], c[p, 0, 2], c[p, 1, 2], out[p],
        )
    return out


@njit(cache=True)
def _dop_at(K, x, y, z):
    g0 = K[0, 0] + K[0, 1] * x + K[0, 2] * y + K[0, 3] * z
    if not g0 > 0.0:
        return -1.0
    g1 = K[1, 0] + K[1, 1] * x + K[1, 2] * y + K[1, 3] * z
    g2 = K[2, 0] + K[2, 1] * x + K[2, 2] * y + K[2, 3] * z
    g3 = K[3, 0] + K[3, 1] * x + K[3, 2] * y + K[3, 3] * z
    d = math.sqrt(g1 * g1 + g2 * g2 + g3 * g3) / g0
    return d if d < 1.0 else 1.0


@njit(cache=True)
def _tangent_basis(s0, e1, e2):
    ax = abs(s0[0])
    ay = abs(s0[1])
    az = abs(s0[2])
    # reference axis least aligned with s0
    if ax <= ay and ax <= az:
        r0, r1, r2 = 1.0, 0.0, 0.0
    elif ay <= az:
        r0, r1, r2 = 0.0, 1.0, 0.0
    else:
        r0, r1, r2 = 0.0, 0.0, 1.0
    u0 = s0[1] * r2 - s0[2] * r1
    u1 = s0[2] * r0 - s0[0] * r2
    u2 = s0[0] * r1 - s0[1] * r0
    nu = math.sqrt(u0 * u0 + u1 * u1 + u2 * u2)
    e1[0] = u0 / nu
    e1[1] = u1 / nu
    e1[2] = u2 / nu
    e2[0] = s0[1] * e1[2] - s0[2] * e1[1]
    e2[1] = s0[2] * e1[0] - s0[0] * e1[2]
    e2[2] = s0[0] * e1[1] - s0[1] * e1[0]


@njit(cache=True)
def _objective(K, s0, e1, e2, u, v, sign, pt):
    x = s0[0] + u * e1[0] + v * e2[0]
    y = s0[1] + u * e1[1] + v * e2[1]
    z = s0[2] + u * e1[2] + v * e2[2]
    n = math.sqrt(x * x + y * y + z * z)
    pt[0] = x / n
    pt[1] = y / n
    pt[2] = z / n
    d = _dop_at(K, pt[0], pt[1], pt[2])
    if d < 0.0:
        return np.inf
    return sign * d


@njit(cache=True)
def _nelder_mead(K, s0, sign, step, maxit, ftol, xtol, best_pt):
    """Minimize sign*DoP on the sphere around s0; returns the best value."""
    e1 = np.empty(3)
    e2 = np.empty(3)
    pt = np.empty(3)
    _tangent_basis(s0, e1, e2)
    P = np.zeros((3, 2))
    P[1, 0] = step
    P[2, 1] = step
    F = np.empty(3)
    for k in range(3):
        F[k] = _objective(K, s0, e1, e2, P[k, 0], P[k, 1], sign, pt)
    for _ in range(maxit):
        # sort the three vertices by value
        for i in range(1, 3):
            j = i
            while j > 0 and F[j] < F[j - 1]:
                F[j], F[j - 1] = F[j - 1], F[j]
                t0 = P[j, 0]
                t1 = P[j, 1]
                P[j, 0] = P[j - 1, 0]
                P[j, 1] = P[j - 1, 1]
                P[j - 1, 0] = t0
                P[j - 1, 1] = t1
                j -= 1
        size = max(abs(P[1, 0] - P[0, 0]) + abs(P[1, 1] - P[0, 1]),
                   abs(P[2, 0] - P[0, 0]) + abs(P[2, 1] - P[0, 1]))
        if F[2] - F[0] <= ftol and size <= xtol:
            break
        cu = 0.5 * (P[0, 0] + P[1, 0])
        cv = 0.5 * (P[0, 1] + P[1, 1])
        ru = 2.0 * cu - P[2, 0]
        rv = 2.0 * cv - P[2, 1]
        fr = _objective(K, s0, e1, e2, ru, rv, sign, pt)
        if fr < F[0]:
            eu = 3.0 * cu - 2.0 * P[2, 0]
            ev = 3.0 * cv - 2.0 * P[2, 1]
            fe = _objective(K, s0, e1, e2, eu, ev, sign, pt)
            if fe < fr:
                P[2, 0] = eu
                P[2, 1] = ev
                F[2] = fe
            else:
                P[2, 0] = ru
                P[2, 1] = rv
                F[2] = fr
            continue
        if fr < F[1]:
            P[2, 0] = ru
            P[2, 1] = rv
            F[2] = fr
            continue
        if fr < F[2]:
            ku = cu + 0.5 * (ru - cu)
            kv = cv + 0.5 * (rv - cv)
            fk = _objective(K, s0, e1, e2, ku, kv, sign, pt)
            accept = fk <= fr
        else:
            ku = cu + 0.5 * (P[2, 0] - cu)
            kv = cv + 0.5 * (P[2, 1] - cv)
            fk = _objective(K, s0, e1, e2, ku, kv, sign, pt)
            accept = fk < F[2]
        if accept:
            P[2, 0] = ku
            P[2, 1] = kv
            F[2] = fk
            continue
        for k in range(1, 3):
            P[k, 0] = P[0, 0] + 0.5 * (P[k, 0] - P[0, 0])
            P[k, 1] = P[0, 1] + 0.5 * (P[k, 1] - P[0, 1])
            F[k] = _objective(K, s0, e1, e2, P[k, 0], P[k, 1], sign, pt)
    ib = 0
    for k in range(1, 3):
        if F[k] < F[ib]:
            ib = k
    _objective(K, s0, e1, e2, P[ib, 0], P[ib, 1], sign, best_pt)
    return F[ib]


@njit(cache=True)
def _insert(vals, idx, v, i):
    # keep the n smallest values in ascending order
    n = vals.shape[0]
    if v >= vals[n - 1]:
        return
    j = n - 1
    while j > 0 and vals[j - 1] > v:
        vals[j] = vals[j - 1]
        idx[j] = idx[j - 1]
        j -= 1
    vals[j] = v
    idx[j] = i


@njit(cache=True)
def _extrema_pixel(K, lat, n_seeds, step, maxit, ftol, xtol, res, smin, smax):
    m = lat.shape[0]
    d2 = np.empty(m)
    g0min = np.inf
    # vectorizable pass: squared DoP at every lattice point
    for i in range(m):
        x = lat[i, 0]
        y = lat[i, 1]
        z = lat[i, 2]
        g0 = K[0, 0] + K[0, 1] * x + K[0, 2] * y + K[0, 3] * z
        g1 = K[1, 0] + K[1, 1] * x + K[1, 2] * y + K[1, 3] * z
        g2 = K[2, 0] + K[2, 1] * x + K[2, 2] * y + K[2, 3] * z
        g3 = K[3, 0] + K[3, 1] * x + K[3, 2] * y + K[3, 3] * z
        g0min = min(g0min, g0)
        d2[i] = (g1 * g1 + g2 * g2 + g3 * g3) / (g0 * g0)
    if not g0min > 0.0:
        return DEGENERATE
    lo = np.full(n_seeds, np.inf)
    lo_i = np.zeros(n_seeds, dtype=np.int64)
    hi = np.full(n_seeds, np.inf)
    hi_i = np.zeros(n_seeds, dtype=np.int64)
    for i in range(m):
        _insert(lo, lo_i, d2[i], i)
        _insert(hi, hi_i, -d2[i], i)
    for q in range(n_seeds):
        lo[q] = min(math.sqrt(lo[q]), 1.0)
        hi[q] = -min(math.sqrt(-hi[q]), 1.0)
    pt = np.empty(3)
    best_lo = lo[0]
    best_hi = hi[0]
    for k in range(3):
        smin[k] = lat[lo_i[0], k]
        smax[k] = lat[hi_i[0], k]
    for q in range(n_seeds):
        f = _nelder_mead(K, lat[lo_i[q]], 1.0, step, maxit, ftol, xtol, pt)
        if f < best_lo:
            best_lo = f
            smin[0] = pt[0]
            smin[1] = pt[1]
            smin[2] = pt[2]
        f = _nelder_mead(K, lat[hi_i[q]], -1.0, step, maxit, ftol, xtol, pt)
        if f < best_hi:
            best_hi = f
            smax[0] = pt[0]
            smax[1] = pt[1]
            smax[2] = pt[2]
    res[0] = best_lo
    res[1] = -best_hi
    return OK


@njit(cache=True, parallel=True)
def dop_extrema(K, lat, n_seeds, step, maxit, ftol, xtol):
    n = K.shape[0]
    res = np.zeros((n, 2))
    smin = np.zeros((n, 3))
    smax = np.zeros((n, 3))
    status = np.zeros(n, dtype=np.int8)
    for p in prange(n):
        status[p] = _extrema_pixel(K[p], lat, n_seeds, step, maxit, ftol,
                                   xtol, res[p], smin[p], smax[p])
    return res[:, 0].copy(), res[:, 1].copy(), smin, smax, status
