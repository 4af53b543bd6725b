"""Vectorized numpy twins of the numba kernels.

Same signatures and the same algorithms; Nelder-Mead runs all problems in
lockstep with per-problem activity masks.
"""
import numpy as np

OK = 0
DEGENERATE = 1

SQRT2 = np.sqrt(2.0)

_SCAN_CHUNK = 512


def box_sum(a, half):
    H, W, F = a.shape
    pad = np.zeros((H, W + 2 * half, F), dtype=a.dtype)
    pad[:, half:half + W] = a
    rows = np.zeros_like(a)
    for d in range(2 * half + 1):
        rows += pad[:, d:d + W]
    pad = np.zeros((H + 2 * half, W, F), dtype=a.dtype)
    pad[half:half + H] = rows
    out = np.zeros_like(a)
    for d in range(2 * half + 1):
        out += pad[d:d + H]
    return out


def yamaguchi4(c):
    c11 = c[:, 0, 0].real.copy()
    c22 = c[:, 1, 1].real.copy()
    c33 = c[:, 2, 2].real.copy()
    c12 = c[:, 0, 1]
    c13 = c[:, 0, 2]
    c23 = c[:, 1, 2]
    trace = c11 + c22 + c33
    ph = SQRT2 * np.abs((c12 + c23).imag)

    with np.errstate(divide="ignore", invalid="ignore"):
        db = 10.0 * np.log10(c33 / c11)
    branch = np.where(db < -2.0, -1, np.where(db > 2.0, 1, 0))
    branch = np.where((c11 <= 0) & (c33 <= 0), 0, branch)
    branch = np.where((c11 <= 0) & (c33 > 0), 1, branch)
    branch = np.where((c11 > 0) & (c33 <= 0), -1, branch)

    mid = branch == 0
    pv = np.where(mid, 4.0 * (c22 - 0.5 * ph), 3.75 * (c22 - 0.5 * ph))
    va = np.where(mid, 3.0 / 8.0, np.where(branch < 0, 8.0 / 15.0, 3.0 / 15.0))
    vb = np.where(mid, 3.0 / 8.0, np.where(branch < 0, 3.0 / 15.0, 8.0 / 15.0))
    vc = np.where(mid, 1.0 / 8.0, 2.0 / 15.0)

    a = c11 - va * pv - 0.25 * ph
    b = c33 - vb * pv - 0.25 * ph
    cc = c13 - vc * pv + 0.25 * ph
    det = a * b - (cc.real * cc.real + cc.imag * cc.imag)
    tiny = 1e-15 * trace
    surf = cc.real >= 0.0
    den = np.where(surf, a + b + 2.0 * cc.real, a + b - 2.0 * cc.real)
    with np.errstate(divide="ignore", invalid="ignore"):
        f = np.where(den > tiny, det / den, 0.0)
    pd = np.where(surf, 2.0 * f, a + b - 2.0 * f)
    ps = np.where(surf, a + b - 2.0 * f, 2.0 * f)

    neg = ps < 0.0
    pv = np.where(neg, pv + ps, pv)
    ps = np.where(neg, 0.0, ps)
    neg = pd < 0.0
    pv = np.where(neg, pv + pd, pv)
    pd = np.where(neg, 0.0, pd)
    neg = pv < 0.0
    with np.errstate(divide="ignore", invalid="ignore"):
        scale = np.where(neg, trace / (ps + pd + ph), 1.0)
    ps = ps * scale
    pd = pd * scale
    ph = ph * scale
    pv = np.where(neg, 0.0, pv)

    out = np.stack([ps, pd, pv, ph], axis=1)
    out[~(trace > 0.0)] = 0.0
    return out


def _dop_points(K, pts):
    """DoP of K (B,4,4) at points (B,3); -1 where the intensity is <= 0."""
    x, y, z = pts[:, 0], pts[:, 1], pts[:, 2]
    g = [K[:, r, 0] + K[:, r, 1] * x + K[:, r, 2] * y + K[:, r, 3] * z
         for r in range(4)]
    with np.errstate(divide="ignore", invalid="ignore"):
        d = np.sqrt(g[1] * g[1] + g[2] * g[2] + g[3] * g[3]) / g[0]
    d = np.minimum(d, 1.0)
    return np.where(g[0] > 0.0, d, -1.0)


def _tangent_basis(s0):
    a = np.abs(s0)
    ref = np.zeros_like(s0)
    ix = (a[:, 0] <= a[:, 1]) & (a[:, 0] <= a[:, 2])
    iy = ~ix & (a[:, 1] <= a[:, 2])
    iz = ~ix & ~iy
    ref[ix, 0] = 1.0
    ref[iy, 1] = 1.0
    ref[iz, 2] = 1.0
    u = np.cross(s0, ref)
    e1 = u / np.linalg.norm(u, axis=1, keepdims=True)
    e2 = np.cross(s0, e1)
    return e1, e2


class _Batch:
    def __init__(self, K, s0, sign):
        self.K = K
        self.s0 = s0
        self.sign = sign
        self.e1, self.e2 = _tangent_basis(s0)

    def objective(self, idx, u, v):
        p = self.s0[idx] + u[:, None] * self.e1[idx] + v[:, None] * self.e2[idx]
        p = p / np.sqrt((p * p).sum(axis=1, keepdims=True))
        d = _dop_points(self.K[idx], p)
        f = np.where(d < 0.0, np.inf, self.sign[idx] * d)
        return f, p


def _nelder_mead(batch, step, maxit, ftol, xtol):
    B = batch.s0.shape[0]
    P = np.zeros((B, 3, 2))
    P[:, 1, 0] = step
    P[:, 2, 1] = step
    F = np.empty((B, 3))
    allidx = np.arange(B)
    for k in range(3):
        F[:, k], _ = batch.objective(allidx, P[:, k, 0], P[:, k, 1])
    active = np.ones(B, dtype=bool)
    for _ in range(maxit):
        idx = np.nonzero(active)[0]
        if idx.size == 0:
            break
        order = np.argsort(F[idx], axis=1, kind="stable")
        F[idx] = np.take_along_axis(F[idx], order, axis=1)
        P[idx] = np.take_along_axis(P[idx], order[:, :, None], axis=1)
        Pi = P[idx]
        Fi = F[idx]
        size = np.maximum(np.abs(Pi[:, 1] - Pi[:, 0]).sum(axis=1),
                          np.abs(Pi[:, 2] - Pi[:, 0]).sum(axis=1))
        conv = (Fi[:, 2] - Fi[:, 0] <= ftol) & (size <= xtol)
        active[idx[conv]] = False
        keep = ~conv
        idx = idx[keep]
        if idx.size == 0:
            break
        Pi = Pi[keep]
        Fi = Fi[keep]

        c = 0.5 * (Pi[:, 0] + Pi[:, 1])
        r = 2.0 * c - Pi[:, 2]
        fr, _ = batch.objective(idx, r[:, 0], r[:, 1])
        newP = Pi[:, 2].copy()
        newF = Fi[:, 2].copy()
        shrink = np.zeros(idx.size, dtype=bool)

        exp_ = fr < Fi[:, 0]
        if exp_.any():
            e = 3.0 * c[exp_] - 2.0 * Pi[exp_, 2]
            fe, _ = batch.objective(idx[exp_], e[:, 0], e[:, 1])
            take_e = fe < fr[exp_]
            newP[exp_] = np.where(take_e[:, None], e, r[exp_])
            newF[exp_] = np.where(take_e, fe, fr[exp_])
        refl = ~exp_ & (fr < Fi[:, 1])
        newP[refl] = r[refl]
        newF[refl] = fr[refl]

        outside = ~exp_ & ~refl & (fr < Fi[:, 2])
        inside = ~exp_ & ~refl & ~outside
        for sel, outer in ((outside, True), (inside, False)):
            if not sel.any():
                continue
            cs = c[sel]
            if outer:
                k = cs + 0.5 * (r[sel] - cs)
            else:
                k = cs + 0.5 * (Pi[sel, 2] - cs)
            fk, _ = batch.objective(idx[sel], k[:, 0], k[:, 1])
            acc = fk <= fr[sel] if outer else fk < Fi[sel, 2]
            sub = np.nonzero(sel)[0]
            newP[sub[acc]] = k[acc]
            newF[sub[acc]] = fk[acc]
            shrink[sub[~acc]] = True

        P[idx, 2] = newP
        F[idx, 2] = newF
        if shrink.any():
            si = idx[shrink]
            for k in (1, 2):
                P[si, k] = P[si, 0] + 0.5 * (P[si, k] - P[si, 0])
                F[si, k], _ = batch.objective(si, P[si, k, 0], P[si, k, 1])
    ib = np.argmin(F, axis=1)
    Pb = P[allidx, ib]
    fb, pts = batch.objective(allidx, Pb[:, 0], Pb[:, 1])
    return fb, pts


def _scan(K, lat):
    n = K.shape[0]
    m = lat.shape[0]
    dop = np.empty((n, m))
    for lo in range(0, n, _SCAN_CHUNK):
        hi = min(n, lo + _SCAN_CHUNK)
        Kc = K[lo:hi]
        g = Kc[:, :, :1] + Kc[:, :, 1:] @ lat.T  # (c, 4, m)
        with np.errstate(divide="ignore", invalid="ignore"):
            d = np.sqrt((g[:, 1:] ** 2).sum(axis=1)) / g[:, 0]
        d = np.minimum(d, 1.0)
        dop[lo:hi] = np.where(g[:, 0] > 0.0, d, -1.0)
    return dop


def dop_extrema(K, lat, n_seeds, step, maxit, ftol, xtol):
    n = K.shape[0]
    dmin = np.zeros(n)
    dmax = np.zeros(n)
    smin = np.zeros((n, 3))
    smax = np.zeros((n, 3))
    status = np.zeros(n, dtype=np.int8)
    if n == 0:
        return dmin, dmax, smin, smax, status
    dop = _scan(K, lat)
    bad = (dop < 0.0).any(axis=1)
    status[bad] = DEGENERATE
    good = np.nonzero(~bad)[0]
    if good.size == 0:
        return dmin, dmax, smin, smax, status
    dop = dop[good]
    lo_i = np.argsort(dop, axis=1, kind="stable")[:, :n_seeds]
    hi_i = np.argsort(-dop, axis=1, kind="stable")[:, :n_seeds]

    g = good.size
    rows = np.arange(g)
    for sign, seeds, dest_v, dest_s in ((1.0, lo_i, dmin, smin),
                                        (-1.0, hi_i, dmax, smax)):
        best = sign * dop[rows, seeds[:, 0]]
        best_s = lat[seeds[:, 0]].copy()
        s0 = lat[seeds.T.ravel()]  # seed-major order
        Kb = np.tile(K[good], (n_seeds, 1, 1))
        batch = _Batch(Kb, s0, np.full(s0.shape[0], sign))
        fb, pts = _nelder_mead(batch, step, maxit, ftol, xtol)
        fb = fb.reshape(n_seeds, g)
        pts = pts.reshape(n_seeds, g, 3)
        for q in range(n_seeds):
            better = fb[q] < best
            best = np.where(better, fb[q], best)
            best_s[better] = pts[q, better]
        dest_v[good] = sign * best
        dest_s[good] = best_s
    return dmin, dmax, smin, smax, status
