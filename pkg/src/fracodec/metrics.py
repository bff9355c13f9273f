"""Image quality metrics."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .image import GrayImage


@dataclass(frozen=True)
class QualityReport:
    psnr: float  # dB, math.inf for identical images
    mse: float
    bpp: float
    compression_ratio_payload: float
    compression_ratio_total: float
    encode_time_s: float
    decode_time_s: float


def mse(original: GrayImage, decoded: GrayImage) -> float:
    """Mean squared pixel error."""
    if (original.width, original.height) != (decoded.width, decoded.height):
        raise ValueError("images must have identical dimensions")
    diff = original.pixels.astype(np.int64) - decoded.pixels.astype(np.int64)
    return float((diff * diff).sum()) / diff.size


def psnr(original: GrayImage, decoded: GrayImage) -> float:
    """Peak signal-to-noise ratio in dB against an 8-bit peak of 255.

    Returns ``math.inf`` when the images are identical.
    """
    err = mse(original, decoded)
    if err == 0.0:
        return math.inf
    return 10.0 * math.log10(255.0 * 255.0 / err)
