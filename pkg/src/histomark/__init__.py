"""Blind grayscale image watermarking in the histogram of the low band.

A key-derived bit sequence is written into the population ratios of paired
value-histogram bins of the Gaussian-filtered low-frequency plane, and read
back without the original image. Because the histogram ignores pixel
positions, detection survives geometric rearrangement; because it is
referenced to the plane mean, it survives value rescaling.
"""

from .attacks import AttackSpec, AttackSpecError, apply_attack, attack_suite_default, parse_attack
from .codec import (
    CapacityError,
    DegenerateGroupError,
    DetectionReport,
    EmbedParams,
    EmbedResult,
    EmbedSidecar,
    SelfCheckError,
    SidecarVersionError,
    compensation_error,
    decode_plane,
    detect_blind,
    embed,
    extract,
    move_count,
)
from .gaussian import GaussianKernel, decompose, filter_plane, make_kernel
from .histogram import (
    Histogram,
    HistogramSpec,
    bin_counts,
    bin_plane,
    build_histogram,
    compute_mean,
    group_ratio,
)
from .imagekit import GrayImage, load_image, resample_bilinear, sample_bilinear, save_image
from .keystream import MAX_PN_BITS, BitSequence, WatermarkKey, aes128_encrypt_block, derive_pn
from .metrics import QualityReport, ber, capacity, normalized_correlation, psnr

__version__ = "1.0.0"

__all__ = [
    "AttackSpec",
    "AttackSpecError",
    "BitSequence",
    "CapacityError",
    "DegenerateGroupError",
    "DetectionReport",
    "EmbedParams",
    "EmbedResult",
    "EmbedSidecar",
    "GaussianKernel",
    "GrayImage",
    "Histogram",
    "HistogramSpec",
    "MAX_PN_BITS",
    "QualityReport",
    "SelfCheckError",
    "SidecarVersionError",
    "WatermarkKey",
    "aes128_encrypt_block",
    "apply_attack",
    "attack_suite_default",
    "ber",
    "bin_counts",
    "bin_plane",
    "build_histogram",
    "capacity",
    "compensation_error",
    "compute_mean",
    "decode_plane",
    "decompose",
    "derive_pn",
    "detect_blind",
    "embed",
    "extract",
    "filter_plane",
    "group_ratio",
    "load_image",
    "make_kernel",
    "move_count",
    "normalized_correlation",
    "parse_attack",
    "psnr",
    "resample_bilinear",
    "sample_bilinear",
    "save_image",
]
