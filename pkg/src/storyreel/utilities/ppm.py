"""Uncompressed portable pixmap (P6) codec and color derivation.

The mock image stack works entirely in this format so every pixel is
inspectable by tests. Colors derive from 64-bit FNV-1a hashes: the low three
bytes of ``hash(text)`` become (r, g, b).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from storyreel.errors import SchemaError
from storyreel.rag.embedding import fnv1a64_text

Color = tuple[int, int, int]


@dataclass
class Raster:
    width: int
    height: int
    pixels: np.ndarray  # shape (height, width, 3), uint8

    def copy(self) -> "Raster":
        return Raster(self.width, self.height, self.pixels.copy())


def new_raster(width: int, height: int, color: Color) -> Raster:
    pixels = np.empty((height, width, 3), dtype=np.uint8)
    pixels[:, :] = color
    return Raster(width, height, pixels)


def encode_ppm(raster: Raster) -> bytes:
    header = f"P6\n{raster.width} {raster.height}\n255\n".encode("ascii")
    return header + raster.pixels.tobytes()


def decode_ppm(data: bytes) -> Raster:
    if not data.startswith(b"P6"):
        raise SchemaError("not a P6 portable pixmap")
    parts = data.split(b"\n", 3)
    if len(parts) < 4:
        raise SchemaError("truncated pixmap header")
    try:
        width, height = (int(v) for v in parts[1].split())
        maxval = int(parts[2])
    except ValueError as exc:
        raise SchemaError(f"bad pixmap header: {exc}") from exc
    if maxval != 255:
        raise SchemaError(f"unsupported maxval {maxval}")
    body = parts[3]
    expected = width * height * 3
    if len(body) != expected:
        raise SchemaError(f"pixmap body is {len(body)} bytes, expected {expected}")
    pixels = np.frombuffer(body, dtype=np.uint8).reshape(height, width, 3).copy()
    return Raster(width, height, pixels)


def color_from_text(text: str) -> Color:
    h = fnv1a64_text(text)
    return ((h >> 16) & 0xFF, (h >> 8) & 0xFF, h & 0xFF)


def flip_color(color: Color) -> Color:
    return (255 - color[0], 255 - color[1], 255 - color[2])


def pixel_rect(x: float, y: float, w: float, h: float, width: int, height: int) -> tuple[int, int, int, int]:
    """Normalized box to pixel rect: floor the origin, ceil the extent.

    For any valid box (x + w <= 1, y + h <= 1) the rect stays inside the
    raster because floor(a) + ceil(b) <= N whenever a + b <= N.
    """
    import math

    return (
        math.floor(x * width),
        math.floor(y * height),
        math.ceil(w * width),
        math.ceil(h * height),
    )


def fill_rect(raster: Raster, rect: tuple[int, int, int, int], color: Color) -> None:
    px, py, pw, ph = rect
    raster.pixels[py : py + ph, px : px + pw] = color


def bounding_rect_of_color(raster: Raster, colors: set[Color]) -> tuple[int, int, int, int] | None:
    """Tight pixel bounding rect of all pixels whose color is in ``colors``."""
    arrays = [np.all(raster.pixels == np.array(c, dtype=np.uint8), axis=2) for c in colors]
    mask = arrays[0]
    for extra in arrays[1:]:
        mask |= extra
    ys, xs = np.nonzero(mask)
    if len(xs) == 0:
        return None
    return (int(xs.min()), int(ys.min()), int(xs.max() - xs.min() + 1), int(ys.max() - ys.min() + 1))
