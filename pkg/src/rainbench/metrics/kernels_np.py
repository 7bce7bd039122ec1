"""Pure-numpy implementations of the hot metric kernels.

Fallback backend used when numba is unavailable or when
RAINBENCH_KERNELS=numpy is set. Must stay behaviourally interchangeable with
kernels_nb: same signatures, same math, same accumulation semantics.
"""

from __future__ import annotations

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

BACKEND_NAME = "numpy"


def _filter_valid(img: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    """Separable valid-mode correlation with a symmetric 1-D kernel."""
    rows = sliding_window_view(img, kernel.size, axis=1) @ kernel
    return sliding_window_view(rows, kernel.size, axis=0) @ kernel


def ssim_mean(a: np.ndarray, b: np.ndarray, kernel: np.ndarray, c1: float, c2: float) -> float:
    """Mean SSIM over all valid window positions.

    Local moments are Gaussian-weighted (kernel must sum to 1); variances use
    the weighted-moment form E[x^2] - E[x]^2, matching the original SSIM
    reference code.
    """
    mu_a = _filter_valid(a, kernel)
    mu_b = _filter_valid(b, kernel)
    e_aa = _filter_valid(a * a, kernel)
    e_bb = _filter_valid(b * b, kernel)
    e_ab = _filter_valid(a * b, kernel)
    var_a = e_aa - mu_a * mu_a
    var_b = e_bb - mu_b * mu_b
    cov = e_ab - mu_a * mu_b
    num = (2.0 * mu_a * mu_b + c1) * (2.0 * cov + c2)
    den = (mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2)
    return float(np.mean(num / den))


def _deviation_energy(blocks: np.ndarray) -> np.ndarray:
    """Per-block sample variance times element count, over the last two axes."""
    n = blocks.shape[-1] * blocks.shape[-2]
    mean = blocks.mean(axis=(-2, -1), keepdims=True)
    ss = ((blocks - mean) ** 2).sum(axis=(-2, -1))
    return ss * (n / (n - 1))


def hvs_accumulate(
    ref: np.ndarray,
    dist: np.ndarray,
    dct_mat: np.ndarray,
    csf: np.ndarray,
    mask_w: np.ndarray,
    normalizer: float,
) -> tuple[float, float, int]:
    """CSF-weighted squared DCT-difference sums over non-overlapping 8x8 tiles.

    Returns (masked_sum, plain_sum, coefficient_count): `plain_sum` weights
    every squared coefficient difference by the CSF; `masked_sum` first
    shrinks each AC difference by the reference block's contrast-masking
    threshold (floored at zero). Inputs are cropped to whole blocks.
    """
    by, bx = ref.shape[0] // 8, ref.shape[1] // 8
    ref = ref[: by * 8, : bx * 8]
    dist = dist[: by * 8, : bx * 8]
    rblk = ref.reshape(by, 8, bx, 8).transpose(0, 2, 1, 3)
    dblk = dist.reshape(by, 8, bx, 8).transpose(0, 2, 1, 3)

    rdct = np.einsum("ij,abjk,lk->abil", dct_mat, rblk, dct_mat)
    ddct = np.einsum("ij,abjk,lk->abil", dct_mat, dblk, dct_mat)
    diff = np.abs(rdct - ddct)
    plain = np.sum((diff * csf) ** 2)

    # Masking energy: masking-weighted AC energy of the reference block,
    # scaled by the ratio of quadrant deviation energy to whole-block
    # deviation energy (low ratio = smooth structure = weak masking).
    ac_energy = np.sum(rdct * rdct * mask_w, axis=(2, 3)) - rdct[:, :, 0, 0] ** 2 * mask_w[0, 0]
    whole = _deviation_energy(rblk)
    quads = (
        _deviation_energy(rblk[:, :, :4, :4])
        + _deviation_energy(rblk[:, :, :4, 4:])
        + _deviation_energy(rblk[:, :, 4:, 4:])
        + _deviation_energy(rblk[:, :, 4:, :4])
    )
    activity = np.where(whole != 0.0, quads / np.where(whole != 0.0, whole, 1.0), 0.0)
    mask = np.sqrt(ac_energy * activity) / normalizer

    thr = mask[:, :, None, None] / mask_w[None, None, :, :]
    reduced = np.maximum(diff - thr, 0.0)
    reduced[:, :, 0, 0] = diff[:, :, 0, 0]  # DC is never masked
    masked = np.sum((reduced * csf) ** 2)
    return float(masked), float(plain), by * bx * 64
