"""Pixel-domain image handling: binary PGM/PPM I/O, level shift, color conversion."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

MIN_DIM = 8


class PnmError(ValueError):
    """Malformed or unsupported PGM/PPM data."""


@dataclass(frozen=True)
class PixelImage:
    """8-bit image; samples shaped (height, width, components), row-major.

    colorspace is "gray" for 1 component, "rgb" or "ycbcr" for 3.
    """

    samples: np.ndarray
    colorspace: str

    def __post_init__(self):
        if self.samples.ndim != 3:
            raise ValueError("samples must be (height, width, components)")
        if self.samples.dtype != np.uint8:
            raise ValueError("samples must be uint8")
        h, w, c = self.samples.shape
        if h < MIN_DIM or w < MIN_DIM:
            raise ValueError(f"image too small: {w}x{h}, need at least {MIN_DIM}x{MIN_DIM}")
        expected = {"gray": 1, "rgb": 3, "ycbcr": 3}.get(self.colorspace)
        if expected is None:
            raise ValueError(f"unknown colorspace {self.colorspace!r}")
        if c != expected:
            raise ValueError(f"{self.colorspace} image must have {expected} components, got {c}")

    @property
    def width(self) -> int:
        return self.samples.shape[1]

    @property
    def height(self) -> int:
        return self.samples.shape[0]

    @property
    def components(self) -> int:
        return self.samples.shape[2]


def _parse_pnm_header(data: bytes) -> tuple[bytes, int, int, int, int]:
    """Return (magic, width, height, maxval, payload offset).

    Tokens are whitespace separated; '#' comments run to end of line and may
    appear anywhere in the header. Exactly one whitespace byte separates the
    maxval token from the binary payload.
    """
    if len(data) < 2 or data[:1] != b"P":
        raise PnmError("malformed header: not a PNM file")
    magic = data[:2]
    pos = 2
    values = []
    while len(values) < 3:
        while pos < len(data) and data[pos : pos + 1].isspace():
            pos += 1
        if pos < len(data) and data[pos] == ord("#"):
            eol = data.find(b"\n", pos)
            if eol == -1:
                raise PnmError("malformed header: unterminated comment")
            pos = eol + 1
            continue
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace():
            pos += 1
        token = data[start:pos]
        if not token or not token.isdigit():
            raise PnmError("malformed header: expected integer field")
        values.append(int(token))
    if pos >= len(data) or not data[pos : pos + 1].isspace():
        raise PnmError("malformed header: missing whitespace before payload")
    return magic, values[0], values[1], values[2], pos + 1


def load_pixel_image(data: bytes) -> PixelImage:
    """Decode a binary PGM (P5) or PPM (P6) file with 8-bit samples."""
    magic, width, height, maxval, offset = _parse_pnm_header(data)
    if magic == b"P5":
        channels, colorspace = 1, "gray"
    elif magic == b"P6":
        channels, colorspace = 3, "rgb"
    else:
        raise PnmError(f"malformed header: unsupported magic {magic!r}")
    if maxval != 255:
        raise PnmError(f"unsupported maxval {maxval}, only 255 is supported")
    need = width * height * channels
    payload = data[offset : offset + need]
    if len(payload) < need:
        raise PnmError(f"truncated payload: expected {need} bytes, got {len(payload)}")
    samples = np.frombuffer(payload, dtype=np.uint8).reshape(height, width, channels)
    return PixelImage(samples=samples.copy(), colorspace=colorspace)


def load_pixel_image_file(path) -> PixelImage:
    return load_pixel_image(Path(path).read_bytes())


def save_pixel_image(image: PixelImage, path) -> None:
    """Write a PixelImage as binary PGM (gray) or PPM (rgb)."""
    if image.colorspace == "gray":
        magic = b"P5"
    elif image.colorspace == "rgb":
        magic = b"P6"
    else:
        raise PnmError(f"cannot write {image.colorspace} data as PNM")
    header = b"%s\n%d %d\n255\n" % (magic, image.width, image.height)
    Path(path).write_bytes(header + image.samples.tobytes())


def level_shift(image: PixelImage) -> np.ndarray:
    """Subtract 128 from every sample; result is float64 in [-128, 127]."""
    return image.samples.astype(np.float64) - 128.0


def rgb_to_ycbcr(image: PixelImage) -> PixelImage:
    """Convert an RGB image to full-range BT.601 YCbCr, rounded and clamped.

    The expressions are evaluated in this fixed order so the uint8
    quantization is reproducible; rounding is half up, matching the
    fixed-point convention of common JPEG encoders.
    """
    if image.colorspace != "rgb":
        raise ValueError(f"expected rgb input, got {image.colorspace}")
    r = image.samples[:, :, 0].astype(np.float64)
    g = image.samples[:, :, 1].astype(np.float64)
    b = image.samples[:, :, 2].astype(np.float64)
    y = 0.299 * r + 0.587 * g + 0.114 * b
    cb = 128.0 - 0.168736 * r - 0.331264 * g + 0.5 * b
    cr = 128.0 + 0.5 * r - 0.418688 * g - 0.081312 * b
    ycc = np.stack([y, cb, cr], axis=2)
    ycc = np.clip(np.floor(ycc + 0.5), 0, 255).astype(np.uint8)
    return PixelImage(samples=ycc, colorspace="ycbcr")
