"""Image buffers and codecs.

All pixel data in the package lives in :class:`ImageBuffer`: an immutable,
row-major, interleaved 8-bit raster with 1 (grayscale) or 3 (RGB) channels.
PNG is the only write format (lossless round-trip is part of the contract);
JPEG is read-only. Alpha and high-bit-depth inputs are rejected rather than
silently converted.
"""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import DimensionMismatch, MalformedStream, UnsupportedFormat

_PNG_MAGIC = b"\x89PNG\r\n\x1a\n"
_JPEG_MAGIC = b"\xff\xd8\xff"

# BT.601 luma weights; the reference implementations of both quality metrics
# operate on this single intensity plane.
_LUMA_WEIGHTS = (0.299, 0.587, 0.114)


# Pixel format tags, always consistent with ImageBuffer.channels.
GRAYSCALE = "grayscale"
RGB = "rgb"


@dataclass(frozen=True)
class ImageBuffer:
    """Decoded raster: width x height, 1 or 3 channels, 8-bit samples."""

    width: int
    height: int
    channels: int
    samples: bytes

    @property
    def pixel_format(self) -> str:
        return GRAYSCALE if self.channels == 1 else RGB

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ValueError(f"dimensions must be >= 1, got {self.width}x{self.height}")
        if self.channels not in (1, 3):
            raise ValueError(f"channels must be 1 or 3, got {self.channels}")
        expected = self.width * self.height * self.channels
        if len(self.samples) != expected:
            raise ValueError(
                f"samples length {len(self.samples)} != width*height*channels = {expected}"
            )

    @classmethod
    def from_array(cls, arr: np.ndarray) -> "ImageBuffer":
        """Build from a (H, W) or (H, W, C) uint8-compatible array."""
        a = np.asarray(arr)
        if a.ndim == 2:
            a = a[:, :, None]
        if a.ndim != 3:
            raise ValueError(f"expected 2-D or 3-D array, got shape {a.shape}")
        h, w, c = a.shape
        return cls(width=w, height=h, channels=c, samples=a.astype(np.uint8).tobytes())

    def to_array(self) -> np.ndarray:
        """(H, W) for grayscale, (H, W, 3) for RGB; always a fresh uint8 array."""
        a = np.frombuffer(self.samples, dtype=np.uint8).reshape(
            self.height, self.width, self.channels
        )
        return a[:, :, 0].copy() if self.channels == 1 else a.copy()


def decode_image(data: bytes, hint: str = "auto") -> ImageBuffer:
    """Decode a PNG or JPEG byte stream.

    `hint` restricts the accepted container: "png", "jpeg", or "auto".
    Raises MalformedStream for truncated/corrupt input, UnsupportedFormat for
    anything that is not an 8-bit gray/RGB PNG or JPEG.
    """
    if hint not in ("png", "jpeg", "auto"):
        raise ValueError(f"unknown format hint {hint!r}")
    if len(data) < 8:
        raise MalformedStream(f"input of {len(data)} bytes is not a valid image stream")
    if data.startswith(_PNG_MAGIC):
        detected = "png"
    elif data.startswith(_JPEG_MAGIC):
        detected = "jpeg"
    else:
        raise UnsupportedFormat("stream is neither PNG nor JPEG")
    if hint != "auto" and hint != detected:
        raise UnsupportedFormat(f"expected {hint} stream, found {detected}")

    try:
        with Image.open(io.BytesIO(data)) as im:
            im.load()
            mode = im.mode
            if mode in ("RGBA", "LA", "PA") or (mode == "P" and "transparency" in im.info):
                raise UnsupportedFormat(
                    f"alpha channel not supported (mode {mode}); flatten the image first"
                )
            if mode == "P":
                im = im.convert("RGB")
            elif mode not in ("L", "RGB"):
                raise UnsupportedFormat(f"unsupported pixel mode {mode}; expected 8-bit L or RGB")
            return ImageBuffer.from_array(np.asarray(im))
    except UnsupportedFormat:
        raise
    except (UnidentifiedImageError, OSError, SyntaxError, ValueError) as exc:
        raise MalformedStream(f"corrupt or truncated {detected} stream: {exc}") from exc


def encode_image(img: ImageBuffer, format: str = "png") -> bytes:
    """Encode to PNG. Decoding the result reproduces `img` bit-exactly."""
    if format != "png":
        raise ValueError(f"unsupported write format {format!r}; only png is lossless")
    arr = img.to_array()
    pil = Image.fromarray(arr, mode="L" if img.channels == 1 else "RGB")
    out = io.BytesIO()
    pil.save(out, format="PNG")
    return out.getvalue()


def to_luma(img: ImageBuffer) -> ImageBuffer:
    """Collapse RGB to a single intensity plane.

    Y = 0.299 R + 0.587 G + 0.114 B, rounded half-up, clamped to [0, 255].
    Grayscale input is returned unchanged.
    """
    if img.channels == 1:
        return img
    rgb = img.to_array().astype(np.float64)
    y = rgb[:, :, 0] * _LUMA_WEIGHTS[0] + rgb[:, :, 1] * _LUMA_WEIGHTS[1] + rgb[:, :, 2] * _LUMA_WEIGHTS[2]
    y = np.clip(np.floor(y + 0.5), 0.0, 255.0).astype(np.uint8)
    return ImageBuffer.from_array(y)


def require_same_shape(a: ImageBuffer, b: ImageBuffer) -> None:
    if (a.width, a.height) != (b.width, b.height):
        raise DimensionMismatch(
            f"images differ in size: {a.width}x{a.height} vs {b.width}x{b.height}"
        )
    if a.channels != b.channels:
        raise DimensionMismatch(f"images differ in channels: {a.channels} vs {b.channels}")
