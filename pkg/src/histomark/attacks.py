"""Deterministic attack simulators for robustness benchmarking.

Every attack returns an image on the original canvas (edge fill or center
crop) so that extraction never needs spatial registration. Randomized
attacks (noise, bending) are driven by the spec's seed and are bit-stable
across runs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .imagekit import GrayImage, resample_bilinear

__all__ = ["AttackSpec", "AttackSpecError", "apply_attack", "attack_suite_default", "parse_attack"]


class AttackSpecError(ValueError):
    """Unknown attack kind or magnitude outside its legal range."""


_MAGNITUDE_RANGES = {
    "rotate": (-360.0, 360.0),          # degrees
    "scale": (0.1, 4.0),                # resize factor
    "translate": (-1024.0, 1024.0),     # pixels, both axes
    "shear_xy": (-0.5, 0.5),            # shear coefficient, both axes
    "crop": (0.0, 0.5),                 # fraction of area removed as a border
    "gaussian_noise": (0.0, 64.0),      # noise standard deviation, gray levels
    "luminance_scale": (0.05, 4.0),     # pixel value factor
    "random_bend": (0.0, 16.0),         # peak displacement, pixels
}


@dataclass(frozen=True)
class AttackSpec:
    kind: str
    magnitude: float
    seed: int = 0

    def __post_init__(self):
        if self.kind not in _MAGNITUDE_RANGES:
            raise AttackSpecError(f"unknown attack kind {self.kind!r}")
        lo, hi = _MAGNITUDE_RANGES[self.kind]
        if not lo <= self.magnitude <= hi:
            raise AttackSpecError(
                f"{self.kind} magnitude {self.magnitude} outside [{lo}, {hi}]"
            )

    @property
    def label(self) -> str:
        return f"{self.kind}:{self.magnitude:g}"


def parse_attack(text: str) -> AttackSpec:
    """Parse ``kind:magnitude[:seed]``."""
    parts = text.split(":")
    if len(parts) not in (2, 3):
        raise AttackSpecError(f"attack spec {text!r} is not kind:magnitude[:seed]")
    kind = parts[0]
    try:
        magnitude = float(parts[1])
        seed = int(parts[2]) if len(parts) == 3 else 0
    except ValueError as exc:
        raise AttackSpecError(f"attack spec {text!r} has a malformed number") from exc
    return AttackSpec(kind=kind, magnitude=magnitude, seed=seed)


def attack_suite_default() -> list:
    """The canonical 21-entry benchmark grid."""
    specs = []
    for m in (1.0, 5.0, 10.0):
        specs.append(AttackSpec("rotate", m))
    for m in (0.8, 0.9, 1.1, 1.25):
        specs.append(AttackSpec("scale", m))
    for m in (5.0, 10.0):
        specs.append(AttackSpec("translate", m))
    for m in (0.05, 0.1):
        specs.append(AttackSpec("shear_xy", m))
    for m in (0.05, 0.1, 0.2):
        specs.append(AttackSpec("crop", m))
    for i, m in enumerate((2.0, 5.0, 10.0)):
        specs.append(AttackSpec("gaussian_noise", m, seed=101 + i))
    for m in (0.9, 1.1):
        specs.append(AttackSpec("luminance_scale", m))
    for i, m in enumerate((1.0, 2.0)):
        specs.append(AttackSpec("random_bend", m, seed=201 + i))
    return specs


def apply_attack(img: GrayImage, spec: AttackSpec) -> GrayImage:
    """Run one attack; the output keeps the input's canvas and bit depth."""
    return _ATTACKS[spec.kind](img, spec)


# ---------------------------------------------------------------------------
# individual attacks


def _finish(img: GrayImage, plane: np.ndarray) -> GrayImage:
    return GrayImage(np.clip(np.rint(plane), 0.0, float(img.max_value)), img.bit_depth)


def _out_grid(height: int, width: int):
    yy, xx = np.meshgrid(
        np.arange(height, dtype=np.float64),
        np.arange(width, dtype=np.float64),
        indexing="ij",
    )
    return xx, yy


def _rotate(img: GrayImage, spec: AttackSpec) -> GrayImage:
    theta = math.radians(spec.magnitude)
    c, s = math.cos(theta), math.sin(theta)
    cx, cy = (img.width - 1) / 2.0, (img.height - 1) / 2.0
    xx, yy = _out_grid(img.height, img.width)
    u, v = xx - cx, yy - cy
    # inverse map: rotate output coordinates by -theta
    sx = c * u + s * v + cx
    sy = -s * u + c * v + cy
    return _finish(img, resample_bilinear(img.pixels, sx, sy))


def _scale(img: GrayImage, spec: AttackSpec) -> GrayImage:
    factor = spec.magnitude
    new_w = max(1, round(factor * img.width))
    new_h = max(1, round(factor * img.height))
    rx, ry = new_w / img.width, new_h / img.height
    xx, yy = _out_grid(new_h, new_w)
    scaled = resample_bilinear(img.pixels, (xx + 0.5) / rx - 0.5, (yy + 0.5) / ry - 0.5)

    # restore the original canvas: center-crop larger axes, edge-pad smaller
    plane = scaled
    if new_h >= img.height:
        y0 = (new_h - img.height) // 2
        plane = plane[y0 : y0 + img.height, :]
    if new_w >= img.width:
        x0 = (new_w - img.width) // 2
        plane = plane[:, x0 : x0 + img.width]
    pad_y = img.height - plane.shape[0]
    pad_x = img.width - plane.shape[1]
    if pad_y > 0 or pad_x > 0:
        plane = np.pad(
            plane,
            ((pad_y // 2, pad_y - pad_y // 2), (pad_x // 2, pad_x - pad_x // 2)),
            mode="edge",
        )
    return _finish(img, plane)


def _translate(img: GrayImage, spec: AttackSpec) -> GrayImage:
    shift = int(round(spec.magnitude))
    xx, yy = _out_grid(img.height, img.width)
    return _finish(img, resample_bilinear(img.pixels, xx - shift, yy - shift))


def _shear_xy(img: GrayImage, spec: AttackSpec) -> GrayImage:
    k = spec.magnitude
    det = 1.0 - k * k
    cx, cy = (img.width - 1) / 2.0, (img.height - 1) / 2.0
    xx, yy = _out_grid(img.height, img.width)
    u, v = xx - cx, yy - cy
    sx = (u - k * v) / det + cx
    sy = (v - k * u) / det + cy
    return _finish(img, resample_bilinear(img.pixels, sx, sy))


def _crop(img: GrayImage, spec: AttackSpec) -> GrayImage:
    keep = math.sqrt(1.0 - spec.magnitude)
    kw = max(1, round(keep * img.width))
    kh = max(1, round(keep * img.height))
    x0 = (img.width - kw) // 2
    y0 = (img.height - kh) // 2
    core = img.pixels[y0 : y0 + kh, x0 : x0 + kw]
    plane = np.pad(
        core,
        ((y0, img.height - kh - y0), (x0, img.width - kw - x0)),
        mode="edge",
    )
    return _finish(img, plane)


def _gaussian_noise(img: GrayImage, spec: AttackSpec) -> GrayImage:
    rng = np.random.default_rng(spec.seed)
    noise = rng.normal(0.0, spec.magnitude, img.pixels.shape)
    return _finish(img, img.pixels + noise)


def _luminance_scale(img: GrayImage, spec: AttackSpec) -> GrayImage:
    return _finish(img, img.pixels * spec.magnitude)


def _random_bend(img: GrayImage, spec: AttackSpec) -> GrayImage:
    if spec.magnitude == 0.0:
        return _finish(img, img.pixels.copy())
    rng = np.random.default_rng(spec.seed)
    xx, yy = _out_grid(img.height, img.width)
    dx = np.zeros_like(xx)
    dy = np.zeros_like(yy)
    # a few low-frequency sinusoid products make a smooth displacement field
    for _ in range(3):
        fx, fy = rng.uniform(1.0, 3.0, size=2)
        px, py = rng.uniform(0.0, 2.0 * math.pi, size=2)
        amp = rng.uniform(0.5, 1.0)
        dx += amp * np.sin(2.0 * math.pi * fy * yy / img.height + py) * np.cos(
            2.0 * math.pi * fx * xx / img.width + px
        )
        fx, fy = rng.uniform(1.0, 3.0, size=2)
        px, py = rng.uniform(0.0, 2.0 * math.pi, size=2)
        amp = rng.uniform(0.5, 1.0)
        dy += amp * np.sin(2.0 * math.pi * fx * xx / img.width + px) * np.cos(
            2.0 * math.pi * fy * yy / img.height + py
        )
    peak = float(np.max(np.hypot(dx, dy)))
    gain = spec.magnitude / peak
    return _finish(img, resample_bilinear(img.pixels, xx + dx * gain, yy + dy * gain))


_ATTACKS = {
    "rotate": _rotate,
    "scale": _scale,
    "translate": _translate,
    "shear_xy": _shear_xy,
    "crop": _crop,
    "gaussian_noise": _gaussian_noise,
    "luminance_scale": _luminance_scale,
    "random_bend": _random_bend,
}
