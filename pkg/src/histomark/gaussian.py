"""Isotropic Gaussian low-pass filtering and low/high-frequency split.

The kernel is the circular 2-D Gaussian sampled on the integer grid out to
radius ceil(3*sigma) and renormalized to unit sum. Filtering runs as two
1-D passes (the sampled kernel factorizes exactly); borders are handled by
mirroring the plane edge-inclusively, which also makes the filter preserve
the plane mean exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.ndimage import convolve1d

__all__ = ["GaussianKernel", "make_kernel", "kernel_profile", "filter_plane", "decompose", "DEFAULT_SIGMA"]

DEFAULT_SIGMA = 1.0


@dataclass(frozen=True)
class GaussianKernel:
    sigma: float
    radius: int
    weights: np.ndarray  # (2r+1, 2r+1), nonnegative, sums to 1


def make_kernel(sigma: float = DEFAULT_SIGMA) -> GaussianKernel:
    """Sample the circular Gaussian at integer offsets and normalize."""
    _check_sigma(sigma)
    radius = math.ceil(3.0 * sigma)
    t = np.arange(-radius, radius + 1, dtype=np.float64)
    xx, yy = np.meshgrid(t, t)
    g = np.exp(-(xx * xx + yy * yy) / (2.0 * sigma * sigma)) / (2.0 * math.pi * sigma * sigma)
    return GaussianKernel(sigma=float(sigma), radius=radius, weights=g / g.sum())


def kernel_profile(sigma: float = DEFAULT_SIGMA) -> np.ndarray:
    """Normalized 1-D factor of the separable kernel."""
    _check_sigma(sigma)
    radius = math.ceil(3.0 * sigma)
    t = np.arange(-radius, radius + 1, dtype=np.float64)
    g = np.exp(-(t * t) / (2.0 * sigma * sigma))
    return g / g.sum()


def filter_plane(image, sigma: float = DEFAULT_SIGMA) -> np.ndarray:
    """Low-pass a GrayImage or plane; output has the input's shape."""
    arr = np.asarray(getattr(image, "pixels", image), dtype=np.float64)
    k = kernel_profile(sigma)
    out = convolve1d(arr, k, axis=0, mode="reflect")
    return convolve1d(out, k, axis=1, mode="reflect")


def decompose(image, sigma: float = DEFAULT_SIGMA):
    """Split into (low, high) with low + high reconstructing the input."""
    arr = np.asarray(getattr(image, "pixels", image), dtype=np.float64)
    low = filter_plane(arr, sigma)
    return low, arr - low


def _check_sigma(sigma) -> None:
    if not sigma > 0:
        raise ValueError("sigma must be positive")
