"""Mean-referenced value histograms over the embedding range.

The range spans [(1-lam)*mean, (1+lam)*mean) and is tiled by equal-width
half-open bins; values at or beyond the upper boundary count as
out-of-range. Bins pair up into groups of two consecutive bins, each group
carrying one payload bit through its population ratio.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "HistogramSpec",
    "Histogram",
    "compute_mean",
    "build_histogram",
    "bin_plane",
    "bin_counts",
    "group_ratio",
]


@dataclass(frozen=True)
class HistogramSpec:
    """Placement of ``bin_count`` equal bins of ``bin_width`` from (1-lam)*mean."""

    mean: float
    lam: float
    bin_width: float
    bin_count: int

    def __post_init__(self):
        if not self.mean > 0:
            raise ValueError("reference mean must be positive")
        if not 0.0 < self.lam < 1.0:
            raise ValueError("lam must lie in (0, 1)")
        if not self.bin_width > 0:
            raise ValueError("bin width must be positive")
        if self.bin_count < 2:
            raise ValueError("degenerate range: fewer than 2 bins")

    @property
    def lo(self) -> float:
        return (1.0 - self.lam) * self.mean

    @property
    def hi(self) -> float:
        return self.lo + self.bin_count * self.bin_width

    @classmethod
    def derive(cls, mean: float, lam: float, bin_width: float) -> "HistogramSpec":
        """Fix the bin count from the range width: floor(2*lam*mean / bin_width)."""
        if not mean > 0:
            raise ValueError("reference mean must be positive")
        if not 0.0 < lam < 1.0:
            raise ValueError("lam must lie in (0, 1)")
        if not bin_width > 0:
            raise ValueError("bin width must be positive")
        count = math.floor(2.0 * lam * mean / bin_width)
        return cls(mean=float(mean), lam=float(lam), bin_width=float(bin_width), bin_count=count)

    def scaled_to(self, new_mean: float) -> "HistogramSpec":
        """Re-anchor at another mean, keeping the bin count.

        The bin width scales with the mean so the bins tile the new range
        exactly; this is what makes decoding invariant when every pixel
        value is multiplied by a constant.
        """
        if not new_mean > 0:
            raise ValueError("reference mean must be positive")
        width = 2.0 * self.lam * new_mean / self.bin_count
        return HistogramSpec(
            mean=float(new_mean), lam=self.lam, bin_width=width, bin_count=self.bin_count
        )


@dataclass(frozen=True)
class Histogram:
    """Counts plus, for each bin, the flat pixel positions that fell in it."""

    spec: HistogramSpec
    counts: np.ndarray
    members: tuple
    out_of_range: int

    def group(self, group_index: int):
        """Populations (a, b) of the two bins of 1-based group ``group_index``."""
        half = self.spec.bin_count // 2
        if not 1 <= group_index <= half:
            raise IndexError(f"group index {group_index} outside 1..{half}")
        a = int(self.counts[2 * group_index - 2])
        b = int(self.counts[2 * group_index - 1])
        return a, b


def compute_mean(plane) -> float:
    """Arithmetic mean of all plane values in full float64 precision."""
    arr = np.asarray(plane, dtype=np.float64)
    if arr.size == 0:
        raise ValueError("cannot take the mean of an empty plane")
    return float(arr.mean())


def bin_counts(plane, spec: HistogramSpec) -> np.ndarray:
    """Counts only (no membership lists); the fast path for decoding."""
    flat = np.asarray(plane, dtype=np.float64).ravel()
    idx = np.floor((flat - spec.lo) / spec.bin_width)
    ok = (idx >= 0) & (idx < spec.bin_count)
    return np.bincount(idx[ok].astype(np.int64), minlength=spec.bin_count)


def bin_plane(plane, spec: HistogramSpec) -> Histogram:
    """Bin a plane against a fixed spec, recording member positions."""
    flat = np.asarray(plane, dtype=np.float64).ravel()
    idx = np.floor((flat - spec.lo) / spec.bin_width)
    ok = (idx >= 0) & (idx < spec.bin_count)
    inside = idx[ok].astype(np.int64)
    counts = np.bincount(inside, minlength=spec.bin_count)
    positions = np.nonzero(ok)[0]
    order = np.argsort(inside, kind="stable")
    splits = np.split(positions[order], np.cumsum(counts)[:-1])
    return Histogram(
        spec=spec,
        counts=counts,
        members=tuple(splits),
        out_of_range=int(flat.size - positions.size),
    )


def build_histogram(plane, lam: float, bin_width: float) -> Histogram:
    """Derive the spec from the plane's own mean, then bin it."""
    spec = HistogramSpec.derive(compute_mean(plane), lam, bin_width)
    return bin_plane(plane, spec)


def group_ratio(hist: Histogram, group_index: int):
    """Read the (a, b) populations of a bin group; pure accessor."""
    return hist.group(group_index)
