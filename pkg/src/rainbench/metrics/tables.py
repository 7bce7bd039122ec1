"""Constant tables for the PSNR-HVS / PSNR-HVS-M metrics.

The 8x8 contrast-sensitivity weights and between-coefficient masking weights
are transcribed from the metric authors' reference implementation
(Ponomarenko et al., "On between-coefficient contrast masking of DCT basis
functions", VPQM 2007, and the accompanying psnrhvsm.m). They are fixed at
build time and checksummed so an accidental edit fails fast instead of
silently skewing every score.
"""

from __future__ import annotations

import hashlib
import struct
from dataclasses import dataclass, field

import numpy as np

# DCT-frequency contrast sensitivity weights (low frequencies top-left).
CSF_WEIGHTS = np.array(
    [
        [1.608443, 2.339554, 2.573509, 1.608443, 1.072295, 0.643377, 0.504610, 0.421887],
        [2.144591, 2.144591, 1.838221, 1.354478, 0.989811, 0.443708, 0.428918, 0.467911],
        [1.838221, 1.979622, 1.608443, 1.072295, 0.643377, 0.451493, 0.372972, 0.459555],
        [1.838221, 1.513829, 1.169777, 0.887417, 0.504610, 0.295806, 0.321689, 0.415082],
        [1.429727, 1.169777, 0.695543, 0.459555, 0.378457, 0.236102, 0.249855, 0.334222],
        [1.072295, 0.735288, 0.467911, 0.402111, 0.317717, 0.247453, 0.227744, 0.279729],
        [0.525206, 0.402111, 0.329937, 0.295806, 0.249855, 0.212687, 0.214459, 0.254803],
        [0.357432, 0.279729, 0.270896, 0.262603, 0.229778, 0.257351, 0.249855, 0.259950],
    ],
    dtype=np.float64,
)

# Between-coefficient contrast masking weights.
MASKING_WEIGHTS = np.array(
    [
        [0.390625, 0.826446, 1.000000, 0.390625, 0.173611, 0.062500, 0.038447, 0.026874],
        [0.694444, 0.694444, 0.510204, 0.277008, 0.147929, 0.029727, 0.027778, 0.033058],
        [0.510204, 0.591716, 0.390625, 0.173611, 0.062500, 0.030779, 0.021004, 0.031888],
        [0.510204, 0.346021, 0.206612, 0.118906, 0.038447, 0.013212, 0.015625, 0.026015],
        [0.308642, 0.206612, 0.073046, 0.031888, 0.021626, 0.008417, 0.009426, 0.016866],
        [0.173611, 0.081633, 0.033058, 0.024414, 0.015242, 0.009246, 0.007831, 0.011815],
        [0.041649, 0.024414, 0.016437, 0.013212, 0.009426, 0.006830, 0.006944, 0.009803],
        [0.019290, 0.011815, 0.011080, 0.010412, 0.007972, 0.010000, 0.009426, 0.010203],
    ],
    dtype=np.float64,
)

# Masking energy is divided by this after the square root (the 1/32 factor
# of the reference implementation).
MASKING_NORMALIZER = 32.0

# SHA-256 over the little-endian float64 bytes of both tables plus the
# normalizer; recomputed at import.
TABLES_SHA256 = "a104e10b4c09532f3dae41ab9f2ca8e86e840cc68465b06985abda26b48de1ab"


def _digest(csf: np.ndarray, masking: np.ndarray, normalizer: float) -> str:
    payload = (
        csf.astype("<f8").tobytes()
        + masking.astype("<f8").tobytes()
        + struct.pack("<d", normalizer)
    )
    return hashlib.sha256(payload).hexdigest()


@dataclass(frozen=True)
class HvsTables:
    """CSF and masking weight grids plus the masking normalizer."""

    csf_weights: np.ndarray = field(default_factory=lambda: CSF_WEIGHTS.copy())
    masking_weights: np.ndarray = field(default_factory=lambda: MASKING_WEIGHTS.copy())
    masking_normalizer: float = MASKING_NORMALIZER

    def __post_init__(self):
        for name, grid in (("csf_weights", self.csf_weights), ("masking_weights", self.masking_weights)):
            arr = np.asarray(grid, dtype=np.float64)
            if arr.shape != (8, 8):
                raise ValueError(f"{name} must be 8x8, got {arr.shape}")
            if not np.all(arr > 0):
                raise ValueError(f"{name} entries must be strictly positive")
        if self.masking_normalizer <= 0:
            raise ValueError("masking_normalizer must be positive")

    def checksum(self) -> str:
        return _digest(
            np.asarray(self.csf_weights), np.asarray(self.masking_weights), self.masking_normalizer
        )


def verify_tables() -> None:
    """Fail hard if the built-in constants were tampered with."""
    actual = _digest(CSF_WEIGHTS, MASKING_WEIGHTS, MASKING_NORMALIZER)
    if actual != TABLES_SHA256:
        raise RuntimeError(
            f"HVS constant tables fail their checksum: expected {TABLES_SHA256}, got {actual}"
        )


verify_tables()

DEFAULT_HVS_TABLES = HvsTables()
