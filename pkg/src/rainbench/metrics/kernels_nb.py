"""Numba-jitted implementations of the hot metric kernels.

Default backend (see backend.py). Loop-level twins of kernels_np: same
signatures, same math. Compiled artifacts are cached on disk, so only the
first call in a fresh environment pays the JIT cost.
"""

from __future__ import annotations

import numpy as np
from numba import njit

BACKEND_NAME = "numba"


@njit(cache=True)
def ssim_mean(a, b, kernel, c1, c2):  # pragma: no cover - exercised via dispatch
    h, w = a.shape
    k = kernel.size
    ww = w - k + 1
    hh = h - k + 1
    ra = np.empty((h, ww))
    rb = np.empty((h, ww))
    raa = np.empty((h, ww))
    rbb = np.empty((h, ww))
    rab = np.empty((h, ww))
    for i in range(h):
        for j in range(ww):
            sa = 0.0
            sb = 0.0
            saa = 0.0
            sbb = 0.0
            sab = 0.0
            for t in range(k):
                kv = kernel[t]
                av = a[i, j + t]
                bv = b[i, j + t]
                sa += kv * av
                sb += kv * bv
                saa += kv * av * av
                sbb += kv * bv * bv
                sab += kv * av * bv
            ra[i, j] = sa
            rb[i, j] = sb
            raa[i, j] = saa
            rbb[i, j] = sbb
            rab[i, j] = sab
    total = 0.0
    for i in range(hh):
        for j in range(ww):
            mu_a = 0.0
            mu_b = 0.0
            e_aa = 0.0
            e_bb = 0.0
            e_ab = 0.0
            for t in range(k):
                kv = kernel[t]
                mu_a += kv * ra[i + t, j]
                mu_b += kv * rb[i + t, j]
                e_aa += kv * raa[i + t, j]
                e_bb += kv * rbb[i + t, j]
                e_ab += kv * rab[i + t, j]
            var_a = e_aa - mu_a * mu_a
            var_b = e_bb - mu_b * mu_b
            cov = e_ab - mu_a * mu_b
            num = (2.0 * mu_a * mu_b + c1) * (2.0 * cov + c2)
            den = (mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2)
            total += num / den
    return total / (hh * ww)


@njit(cache=True)
def _dct8(block, dct_mat, out):  # pragma: no cover
    # out = dct_mat @ block @ dct_mat.T
    tmp = np.empty((8, 8))
    for i in range(8):
        for j in range(8):
            s = 0.0
            for t in range(8):
                s += dct_mat[i, t] * block[t, j]
            tmp[i, j] = s
    for i in range(8):
        for j in range(8):
            s = 0.0
            for t in range(8):
                s += tmp[i, t] * dct_mat[j, t]
            out[i, j] = s


@njit(cache=True)
def _deviation_energy(block, y0, y1, x0, x1):  # pragma: no cover
    n = (y1 - y0) * (x1 - x0)
    mean = 0.0
    for i in range(y0, y1):
        for j in range(x0, x1):
            mean += block[i, j]
    mean /= n
    ss = 0.0
    for i in range(y0, y1):
        for j in range(x0, x1):
            d = block[i, j] - mean
            ss += d * d
    return ss * (n / (n - 1))


@njit(cache=True)
def hvs_accumulate(ref, dist, dct_mat, csf, mask_w, normalizer):  # pragma: no cover
    by = ref.shape[0] // 8
    bx = ref.shape[1] // 8
    rdct = np.empty((8, 8))
    ddct = np.empty((8, 8))
    rblock = np.empty((8, 8))
    dblock = np.empty((8, 8))
    masked = 0.0
    plain = 0.0
    for y in range(by):
        for x in range(bx):
            for i in range(8):
                for j in range(8):
                    rblock[i, j] = ref[y * 8 + i, x * 8 + j]
                    dblock[i, j] = dist[y * 8 + i, x * 8 + j]
            _dct8(rblock, dct_mat, rdct)
            _dct8(dblock, dct_mat, ddct)

            ac_energy = 0.0
            for i in range(8):
                for j in range(8):
                    if i != 0 or j != 0:
                        ac_energy += rdct[i, j] * rdct[i, j] * mask_w[i, j]
            whole = _deviation_energy(rblock, 0, 8, 0, 8)
            if whole != 0.0:
                activity = (
                    _deviation_energy(rblock, 0, 4, 0, 4)
                    + _deviation_energy(rblock, 0, 4, 4, 8)
                    + _deviation_energy(rblock, 4, 8, 4, 8)
                    + _deviation_energy(rblock, 4, 8, 0, 4)
                ) / whole
            else:
                activity = 0.0
            mask = np.sqrt(ac_energy * activity) / normalizer

            for i in range(8):
                for j in range(8):
                    u = abs(rdct[i, j] - ddct[i, j])
                    cu = u * csf[i, j]
                    plain += cu * cu
                    if i != 0 or j != 0:
                        u = max(u - mask / mask_w[i, j], 0.0)
                    mu = u * csf[i, j]
                    masked += mu * mu
    return masked, plain, by * bx * 64
