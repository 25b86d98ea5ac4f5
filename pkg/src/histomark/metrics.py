"""Image quality and detection metrics."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .imagekit import GrayImage

__all__ = ["QualityReport", "psnr", "ber", "normalized_correlation", "capacity"]


@dataclass(frozen=True)
class QualityReport:
    mse: float            # squared gray levels
    psnr_db: float        # +inf when the images are identical
    max_abs_diff: float   # gray levels
    mean_shift: float     # |mean(a) - mean(b)|, gray levels


def psnr(a: GrayImage, b: GrayImage) -> QualityReport:
    """Peak signal-to-noise ratio, 10*log10(MAX^2 / MSE)."""
    if a.pixels.shape != b.pixels.shape or a.bit_depth != b.bit_depth:
        raise ValueError("images must share dimensions and bit depth")
    diff = a.pixels - b.pixels
    mse = float(np.mean(diff * diff))
    peak = float(a.max_value)
    psnr_db = math.inf if mse == 0.0 else 10.0 * math.log10(peak * peak / mse)
    return QualityReport(
        mse=mse,
        psnr_db=psnr_db,
        max_abs_diff=float(np.max(np.abs(diff))),
        mean_shift=abs(float(np.mean(diff))),
    )


def ber(decoded, expected) -> float:
    """Bit error rate: hamming distance over length."""
    d = np.fromiter((int(b) for b in decoded), dtype=np.int64)
    e = np.fromiter((int(b) for b in expected), dtype=np.int64)
    if d.size != e.size:
        raise ValueError("bit sequences must have equal length")
    if d.size == 0:
        raise ValueError("bit sequences must be non-empty")
    return float(np.mean(d != e))


def normalized_correlation(decoded, expected) -> float:
    """Dot product of the +-1-mapped sequences over their length.

    Ranges over [-1, 1] and equals 1 - 2*ber.
    """
    d = np.fromiter((int(b) for b in decoded), dtype=np.int64)
    e = np.fromiter((int(b) for b in expected), dtype=np.int64)
    if d.size != e.size:
        raise ValueError("bit sequences must have equal length")
    if d.size == 0:
        raise ValueError("bit sequences must be non-empty")
    return float(np.dot(2 * d - 1, 2 * e - 1) / d.size)


def capacity(q: float, p: float, m: float, g: int) -> int:
    """Embeddable payload bits: floor(2*p*q / (m*g)).

    ``q`` is the low-plane mean, ``p`` the range factor, ``m`` the bin
    width, ``g`` the bins per group. ``p`` may be 1 for the full-range
    theoretical maximum.
    """
    if not q > 0:
        raise ValueError("q must be positive")
    if not 0.0 < p <= 1.0:
        raise ValueError("p must lie in (0, 1]")
    if not m > 0:
        raise ValueError("m must be positive")
    if not (isinstance(g, (int, np.integer)) and g >= 1):
        raise ValueError("g must be an integer >= 1")
    return math.floor(2.0 * p * q / (m * g))
