"""Grayscale image container, PGM/PNG file I/O, and bilinear resampling.

Everything downstream works on 2-D float64 planes. A ``GrayImage`` wraps a
plane whose values are meant to be integer gray levels in the nominal range
of its bit depth; filter outputs and other intermediates are plain numpy
arrays (real-valued, possibly negative) of the same shape.

PGM (binary P5) is the canonical interchange format because it round-trips
bit-exactly; PNG is accepted as convenience input (8-bit gray or RGB, the
latter collapsed to luma at the door).
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

__all__ = [
    "GrayImage",
    "load_image",
    "save_image",
    "sample_bilinear",
    "resample_bilinear",
    "luma_from_rgb",
]

# ITU-R BT.601 luma weights
_LUMA_WEIGHTS = (0.299, 0.587, 0.114)

_PNG_MAGIC = b"\x89PNG\r\n\x1a\n"


@dataclass(frozen=True)
class GrayImage:
    """Single-channel image; ``pixels`` has shape (height, width), float64."""

    pixels: np.ndarray
    bit_depth: int = 8

    def __post_init__(self):
        px = np.asarray(self.pixels, dtype=np.float64)
        if px.ndim != 2 or px.size == 0:
            raise ValueError("pixels must be a non-empty 2-D array")
        if self.bit_depth not in (8, 16):
            raise ValueError(f"unsupported bit depth {self.bit_depth}")
        object.__setattr__(self, "pixels", px)

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def max_value(self) -> int:
        return (1 << self.bit_depth) - 1


def luma_from_rgb(rgb: np.ndarray) -> np.ndarray:
    """Collapse an (h, w, 3) array to gray using BT.601 weights, rounded."""
    arr = np.asarray(rgb, dtype=np.float64)
    y = (
        _LUMA_WEIGHTS[0] * arr[..., 0]
        + _LUMA_WEIGHTS[1] * arr[..., 1]
        + _LUMA_WEIGHTS[2] * arr[..., 2]
    )
    return np.rint(y)


def load_image(path, format: str | None = None) -> GrayImage:
    """Read a PGM (P5) or PNG file as a GrayImage.

    ``format`` forces the parser ("pgm" or "png"); by default the file
    signature decides. RGB PNGs are converted to luma.
    """
    data = Path(path).read_bytes()
    fmt = format or _sniff_format(data)
    if fmt == "pgm":
        return _decode_pgm(data)
    if fmt == "png":
        return _decode_png(data)
    raise ValueError(f"unsupported format {fmt!r}")


def save_image(img: GrayImage, path, format: str | None = None) -> None:
    """Write a GrayImage to disk; load(save(x)) is bit-exact.

    Pixels must already be integer-valued and inside [0, 2^D - 1].
    """
    px = img.pixels
    if not np.all(np.isfinite(px)) or np.any(px != np.rint(px)):
        raise ValueError("pixels must be integer-valued before saving")
    if px.min() < 0 or px.max() > img.max_value:
        raise ValueError("pixel value out of range for the image bit depth")

    path = Path(path)
    fmt = format or _format_from_suffix(path)
    if fmt == "pgm":
        path.write_bytes(_encode_pgm(img))
    elif fmt == "png":
        if img.bit_depth != 8:
            raise ValueError("16-bit PNG writing is not supported")
        Image.fromarray(px.astype(np.uint8), mode="L").save(path, format="PNG")
    else:
        raise ValueError(f"unsupported format {fmt!r}")


def resample_bilinear(plane, xs, ys) -> np.ndarray:
    """Bilinear lookup of (xs, ys) coordinates; out-of-bounds clamp to the edge.

    ``xs`` indexes columns and ``ys`` rows. Shapes broadcast; lattice
    coordinates reproduce grid values exactly.
    """
    arr = np.asarray(plane, dtype=np.float64)
    h, w = arr.shape
    x = np.clip(np.asarray(xs, dtype=np.float64), 0.0, float(w - 1))
    y = np.clip(np.asarray(ys, dtype=np.float64), 0.0, float(h - 1))
    x0 = np.floor(x).astype(np.intp)
    y0 = np.floor(y).astype(np.intp)
    x1 = np.minimum(x0 + 1, w - 1)
    y1 = np.minimum(y0 + 1, h - 1)
    fx = x - x0
    fy = y - y0
    top = arr[y0, x0] * (1.0 - fx) + arr[y0, x1] * fx
    bottom = arr[y1, x0] * (1.0 - fx) + arr[y1, x1] * fx
    return top * (1.0 - fy) + bottom * fy


def sample_bilinear(plane, x: float, y: float) -> float:
    """Scalar form of :func:`resample_bilinear`."""
    return float(resample_bilinear(plane, x, y))


# ---------------------------------------------------------------------------
# format plumbing


def _sniff_format(data: bytes) -> str:
    if data[:2] == b"P5":
        return "pgm"
    if data[: len(_PNG_MAGIC)] == _PNG_MAGIC:
        return "png"
    raise ValueError("unrecognized image format (expected PGM P5 or PNG)")


def _format_from_suffix(path: Path) -> str:
    suffix = path.suffix.lower().lstrip(".")
    if suffix in ("pgm", "png"):
        return suffix
    raise ValueError(f"cannot infer image format from suffix {path.suffix!r}")


def _decode_pgm(data: bytes) -> GrayImage:
    tokens, payload_start = _pgm_header_tokens(data)
    if tokens[0] != b"P5":
        raise ValueError("not a binary PGM (P5) file")
    try:
        width, height, maxval = (int(t) for t in tokens[1:])
    except ValueError as exc:
        raise ValueError("malformed PGM header") from exc
    if width <= 0 or height <= 0:
        raise ValueError("malformed PGM header: non-positive dimensions")
    if not 0 < maxval < 65536:
        raise ValueError(f"unsupported PGM maxval {maxval}")

    depth = 8 if maxval < 256 else 16
    dtype = np.dtype(">u2") if depth == 16 else np.dtype("u1")
    expected = width * height * dtype.itemsize
    payload = data[payload_start:]
    if len(payload) != expected:
        raise ValueError(
            f"PGM payload is {len(payload)} bytes, expected {expected}"
        )
    px = np.frombuffer(payload, dtype=dtype).reshape(height, width)
    return GrayImage(px.astype(np.float64), bit_depth=depth)


def _pgm_header_tokens(data: bytes):
    """Return the four header tokens and the payload offset.

    Whitespace separates tokens; '#' comments run to end of line and are
    legal anywhere in the header. Exactly one whitespace byte follows maxval.
    """
    tokens = []
    i = 0
    while len(tokens) < 4:
        if i >= len(data):
            raise ValueError("truncated PGM header")
        c = data[i : i + 1]
        if c == b"#":
            nl = data.find(b"\n", i)
            if nl < 0:
                raise ValueError("truncated PGM header")
            i = nl + 1
        elif c.isspace():
            i += 1
        else:
            j = i
            while j < len(data) and not data[j : j + 1].isspace() and data[j : j + 1] != b"#":
                j += 1
            tokens.append(data[i:j])
            i = j
    if i >= len(data) or not data[i : i + 1].isspace():
        raise ValueError("malformed PGM header")
    return tokens, i + 1


def _encode_pgm(img: GrayImage) -> bytes:
    header = f"P5\n{img.width} {img.height}\n{img.max_value}\n".encode("ascii")
    dtype = np.dtype(">u2") if img.bit_depth == 16 else np.dtype("u1")
    return header + img.pixels.astype(dtype).tobytes()


def _decode_png(data: bytes) -> GrayImage:
    try:
        im = Image.open(io.BytesIO(data))
        im.load()
    except Exception as exc:
        raise ValueError(f"malformed PNG: {exc}") from exc

    if im.mode == "L":
        px = np.asarray(im, dtype=np.float64)
    elif im.mode == "RGB":
        px = luma_from_rgb(np.asarray(im))
    elif im.mode in ("I", "I;16", "I;16B", "I;16L"):
        raise ValueError("PNG bit depths other than 8 are not supported")
    else:
        raise ValueError(f"unsupported PNG mode {im.mode!r} (need L or RGB)")
    return GrayImage(px, bit_depth=8)
