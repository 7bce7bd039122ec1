"""Full-reference image quality metrics: MSE, PSNR, SSIM, PSNR-HVS(-M).

All operations take single-channel :class:`~rainbench.imaging.ImageBuffer`
inputs (convert with ``to_luma`` first) and are pure functions. Zero-error
decibel scores are capped at ``DB_CAP`` (100.0 dB) so aggregates stay finite.

SSIM follows Wang et al. 2004 with the original defaults (11x11 Gaussian,
sigma 1.5, K1=0.01, K2=0.03, L=255) and valid-only window placement.
PSNR-HVS-M follows Ponomarenko et al. 2007: CSF-weighted squared differences
of blockwise 8x8 DCT coefficients, with AC differences first reduced by a
contrast-masking threshold derived from the reference image's blocks (the
first argument is the reference).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import DimensionMismatch, ImageTooSmall
from ..imaging import ImageBuffer
from .backend import active, get_backend, kernel_backend
from .tables import DEFAULT_HVS_TABLES, HvsTables

__all__ = [
    "DB_CAP",
    "DctBlock",
    "HvsTables",
    "DEFAULT_HVS_TABLES",
    "QualityScore",
    "SsimParams",
    "dct8x8",
    "idct8x8",
    "kernel_backend",
    "get_backend",
    "mse",
    "psnr",
    "psnr_hvs_m",
    "ssim",
]

# Reported instead of +inf when the error term is exactly zero.
DB_CAP = 100.0

_PEAK_SQ = 255.0 * 255.0


@dataclass(frozen=True)
class SsimParams:
    window_size: int = 11
    gaussian_sigma: float = 1.5
    k1: float = 0.01
    k2: float = 0.03
    dynamic_range: int = 255

    def __post_init__(self):
        if self.window_size < 3 or self.window_size % 2 == 0:
            raise ValueError(f"window_size must be odd and >= 3, got {self.window_size}")
        if self.gaussian_sigma <= 0:
            raise ValueError("gaussian_sigma must be positive")
        if self.k1 <= 0 or self.k2 <= 0:
            raise ValueError("k1 and k2 must be positive")

    @property
    def c1(self) -> float:
        return (self.k1 * self.dynamic_range) ** 2

    @property
    def c2(self) -> float:
        return (self.k2 * self.dynamic_range) ** 2

    def kernel(self) -> np.ndarray:
        """Normalized 1-D Gaussian; the 2-D window is its outer product."""
        offsets = np.arange(self.window_size, dtype=np.float64) - (self.window_size - 1) / 2.0
        k = np.exp(-(offsets**2) / (2.0 * self.gaussian_sigma**2))
        return k / k.sum()


@dataclass(frozen=True)
class QualityScore:
    """Scores for one (reference, candidate) pair."""

    ssim: float
    psnr_hvs_m: float
    psnr_hvs: float
    psnr: float
    mse: float

    def __post_init__(self):
        if self.psnr_hvs_m < self.psnr_hvs - 1e-9:
            raise ValueError(
                f"psnr_hvs_m ({self.psnr_hvs_m}) below psnr_hvs ({self.psnr_hvs}); masking can only raise the score"
            )


@dataclass(frozen=True)
class DctBlock:
    """Orthonormal type-II 2-D DCT coefficients of one 8x8 pixel block."""

    coefficients: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.coefficients, dtype=np.float64)
        if arr.shape != (8, 8):
            raise ValueError(f"coefficients must be 8x8, got {arr.shape}")
        object.__setattr__(self, "coefficients", arr)


def _dct_matrix() -> np.ndarray:
    n = np.arange(8)
    mat = np.cos((2 * n[None, :] + 1) * n[:, None] * np.pi / 16.0)
    mat[0, :] *= math.sqrt(1.0 / 8.0)
    mat[1:, :] *= 0.5
    return mat


_DCT_MAT = _dct_matrix()


def _luma_plane(img: ImageBuffer, op: str) -> np.ndarray:
    if img.channels != 1:
        raise DimensionMismatch(f"{op} expects single-channel images; convert with to_luma first")
    return img.to_array().astype(np.float64)


def _check_same_size(a: ImageBuffer, b: ImageBuffer, op: str) -> None:
    if (a.width, a.height) != (b.width, b.height):
        raise DimensionMismatch(
            f"{op}: images differ in size: {a.width}x{a.height} vs {b.width}x{b.height}"
        )


def mse(a: ImageBuffer, b: ImageBuffer) -> float:
    """Mean squared error; the accumulation is exact integer arithmetic."""
    _check_same_size(a, b, "mse")
    if a.channels != 1 or b.channels != 1:
        raise DimensionMismatch("mse expects single-channel images")
    da = a.to_array().astype(np.int64)
    db = b.to_array().astype(np.int64)
    total = int(((da - db) ** 2).sum())
    return total / (a.width * a.height)


def psnr(a: ImageBuffer, b: ImageBuffer) -> float:
    """10*log10(255^2 / MSE) in dB, capped at DB_CAP for identical images."""
    return _to_db(mse(a, b))


def ssim(a: ImageBuffer, b: ImageBuffer, params: SsimParams | None = None) -> float:
    """Mean SSIM over valid window positions; 1.0 iff inputs are identical."""
    p = params or SsimParams()
    _check_same_size(a, b, "ssim")
    pa = _luma_plane(a, "ssim")
    pb = _luma_plane(b, "ssim")
    if a.width < p.window_size or a.height < p.window_size:
        raise ImageTooSmall(
            f"ssim needs at least {p.window_size}x{p.window_size} pixels, got {a.width}x{a.height}"
        )
    return float(active().ssim_mean(pa, pb, p.kernel(), p.c1, p.c2))


def dct8x8(block) -> DctBlock:
    """Orthonormal type-II 2-D DCT of an 8x8 pixel block (64 samples)."""
    arr = np.asarray(block, dtype=np.float64)
    if arr.size != 64:
        raise ValueError(f"dct8x8 expects 64 samples, got {arr.size}")
    arr = arr.reshape(8, 8)
    return DctBlock(coefficients=_DCT_MAT @ arr @ _DCT_MAT.T)


def idct8x8(block: DctBlock) -> np.ndarray:
    """Inverse of dct8x8 (the transform is orthonormal)."""
    return _DCT_MAT.T @ block.coefficients @ _DCT_MAT


def psnr_hvs_m(
    a: ImageBuffer, b: ImageBuffer, tables: HvsTables | None = None
) -> tuple[float, float]:
    """(PSNR-HVS-M, PSNR-HVS) in dB; `a` is the reference image.

    Both images are cropped to whole 8x8 tiles (bottom/right remainder
    dropped). PSNR-HVS-M discounts AC-coefficient differences hidden by the
    reference blocks' contrast masking, so it is always >= PSNR-HVS.
    """
    t = tables or DEFAULT_HVS_TABLES
    _check_same_size(a, b, "psnr_hvs_m")
    pa = _luma_plane(a, "psnr_hvs_m")
    pb = _luma_plane(b, "psnr_hvs_m")
    if a.width < 8 or a.height < 8:
        raise ImageTooSmall(f"psnr_hvs_m needs at least 8x8 pixels, got {a.width}x{a.height}")
    masked_sum, plain_sum, count = active().hvs_accumulate(
        pa,
        pb,
        _DCT_MAT,
        np.asarray(t.csf_weights, dtype=np.float64),
        np.asarray(t.masking_weights, dtype=np.float64),
        float(t.masking_normalizer),
    )
    return _to_db(masked_sum / count), _to_db(plain_sum / count)


def _to_db(err: float) -> float:
    if err <= 0.0:
        return DB_CAP
    return min(10.0 * math.log10(_PEAK_SQ / err), DB_CAP)
