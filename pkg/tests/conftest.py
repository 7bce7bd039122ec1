import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from rainbench.imaging import ImageBuffer
from rainbench.rng import SplitMix64


def det_array(seed: int, width: int, height: int, channels: int = 1) -> np.ndarray:
    """Deterministic pseudo-random uint8 pixels from the package's own PRNG,
    so frozen expected values can never drift with a numpy upgrade."""
    gen = SplitMix64(seed)
    flat = np.array(
        [gen.below(256) for _ in range(width * height * channels)], dtype=np.uint8
    )
    shape = (height, width) if channels == 1 else (height, width, channels)
    return flat.reshape(shape)


def det_image(seed: int, width: int, height: int, channels: int = 1) -> ImageBuffer:
    return ImageBuffer.from_array(det_array(seed, width, height, channels))


def noisy_variant(img: ImageBuffer, seed: int, amplitude: int) -> ImageBuffer:
    """img plus uniform integer noise in [-amplitude, amplitude]."""
    gen = SplitMix64(seed)
    arr = img.to_array().astype(np.int64)
    noise = np.array(
        [gen.below(2 * amplitude + 1) - amplitude for _ in range(arr.size)], dtype=np.int64
    ).reshape(arr.shape)
    return ImageBuffer.from_array(np.clip(arr + noise, 0, 255).astype(np.uint8))


@pytest.fixture(scope="session")
def warm_kernels():
    """Compile/load the jitted kernels once so timed tests measure the
    algorithm, not the JIT."""
    from rainbench.metrics import psnr_hvs_m, ssim

    a = det_image(1, 16, 16)
    b = det_image(2, 16, 16)
    ssim(a, b)
    psnr_hvs_m(a, b)
    return True
