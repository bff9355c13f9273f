"""Grayscale raster primitives: image type, block views, 2x2 decimation,
the eight square isometries, and PGM file I/O.

Rounding conventions here are part of the compressed format and must not
change between encoder and decoder: decimation is the 2x2 arithmetic mean
with floor rounding, and all other luminance rounding in the codec is IEEE
round-half-to-even.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

ISOMETRY_COUNT = 8
ISOMETRY_NAMES = (
    "identity",
    "rot90",
    "rot180",
    "rot270",
    "mirror",
    "mirror_rot90",
    "mirror_rot180",
    "mirror_rot270",
)

# Valid range/domain block sides (range blocks 2..16, domains up to 32).
BLOCK_SIDES = (2, 4, 8, 16, 32)


class PgmError(Exception):
    """Base class for PGM file defects."""


class PgmHeaderError(PgmError):
    """The file does not start with a well-formed P2/P5 PGM header."""


class PgmMaxvalError(PgmError):
    """The PGM maxval is not 255 (only 8-bit images are supported)."""


class PgmTruncatedError(PgmError):
    """The pixel payload is shorter than width * height."""


@dataclass(frozen=True, eq=False)
class GrayImage:
    """An owned, immutable 8-bit grayscale raster.

    ``pixels`` is a read-only ``uint8`` array of shape ``(height, width)``.
    """

    pixels: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.pixels)
        if a.ndim != 2:
            raise ValueError("pixels must be a 2-D array")
        if a.dtype != np.uint8:
            if not np.issubdtype(a.dtype, np.integer):
                raise ValueError("pixel values must be integers")
            if a.size and (a.min() < 0 or a.max() > 255):
                raise ValueError("pixel values must lie in [0, 255]")
        a = np.ascontiguousarray(a, dtype=np.uint8).copy()
        a.flags.writeable = False
        object.__setattr__(self, "pixels", a)

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @classmethod
    def full(cls, width: int, height: int, value: int) -> "GrayImage":
        return cls(np.full((height, width), value, dtype=np.uint8))

    def __eq__(self, other) -> bool:
        if not isinstance(other, GrayImage):
            return NotImplemented
        return self.pixels.shape == other.pixels.shape and bool(
            np.array_equal(self.pixels, other.pixels)
        )

    def __repr__(self) -> str:
        return f"GrayImage({self.width}x{self.height})"


@dataclass(frozen=True)
class BlockView:
    """A square window into a GrayImage: origin ``(x, y)`` plus ``side``."""

    x: int
    y: int
    side: int

    def __post_init__(self):
        if self.side not in BLOCK_SIDES:
            raise ValueError(f"side must be one of {BLOCK_SIDES}, got {self.side}")
        if self.x < 0 or self.y < 0:
            raise ValueError("block origin must be non-negative")


def view_pixels(image: GrayImage, view: BlockView) -> np.ndarray:
    """Return the (read-only) pixel window selected by ``view``."""
    if view.x + view.side > image.width or view.y + view.side > image.height:
        raise ValueError(f"{view} does not fit inside {image!r}")
    return image.pixels[view.y : view.y + view.side, view.x : view.x + view.side]


def decimate_tile(tile: np.ndarray) -> np.ndarray:
    """Downsample an integer tile of even side by 2x2 mean with floor rounding.

    Accepts batches: the last two axes are reduced, leading axes pass through.
    """
    t = np.asarray(tile)
    if t.shape[-1] % 2 or t.shape[-2] % 2:
        raise ValueError("tile sides must be even")
    s = (
        t[..., 0::2, 0::2].astype(np.int32)
        + t[..., 0::2, 1::2]
        + t[..., 1::2, 0::2]
        + t[..., 1::2, 1::2]
    )
    return (s // 4).astype(np.uint8)


def decimate(image: GrayImage, view: BlockView) -> np.ndarray:
    """Decimate the image block ``view`` to a (side/2, side/2) tile."""
    if view.side < 4:
        raise ValueError("decimation needs side >= 4")
    return decimate_tile(view_pixels(image, view))


def apply_isometry(tile: np.ndarray, iso: int) -> np.ndarray:
    """Apply isometry ``iso`` (0..7) to a square tile.

    Indices 0-3 are clockwise rotations by 0/90/180/270 degrees; indices 4-7
    mirror (left-right flip) the corresponding rotation. This assignment is
    part of the compressed format. Batches are handled on the last two axes.
    """
    if not 0 <= iso < ISOMETRY_COUNT:
        raise ValueError(f"isometry index must be 0..7, got {iso}")
    t = np.asarray(tile)
    if t.shape[-1] != t.shape[-2]:
        raise ValueError("tile must be square")
    r = np.rot90(t, k=-(iso & 3), axes=(-2, -1))
    if iso >= 4:
        r = np.flip(r, axis=-1)
    return np.ascontiguousarray(r)


def _build_compose_table() -> np.ndarray:
    marker = np.arange(16, dtype=np.int32).reshape(4, 4)
    images = [apply_isometry(marker, i) for i in range(ISOMETRY_COUNT)]
    table = np.empty((ISOMETRY_COUNT, ISOMETRY_COUNT), dtype=np.int8)
    for a in range(ISOMETRY_COUNT):
        for b in range(ISOMETRY_COUNT):
            ab = apply_isometry(images[a], b)
            matches = [c for c, img in enumerate(images) if np.array_equal(ab, img)]
            assert len(matches) == 1
            table[a, b] = matches[0]
    return table


_COMPOSE: np.ndarray | None = None


def compose_isometries(a: int, b: int) -> int:
    """Index of the isometry equal to applying ``a`` first, then ``b``."""
    global _COMPOSE
    if _COMPOSE is None:
        _COMPOSE = _build_compose_table()
    if not (0 <= a < ISOMETRY_COUNT and 0 <= b < ISOMETRY_COUNT):
        raise ValueError("isometry indices must be 0..7")
    return int(_COMPOSE[a, b])


def _next_token(data: bytes, pos: int) -> tuple[bytes, int]:
    """Next whitespace-delimited header token, skipping '#' comments."""
    n = len(data)
    while pos < n:
        c = data[pos : pos + 1]
        if c == b"#":
            while pos < n and data[pos : pos + 1] != b"\n":
                pos += 1
        elif c.isspace():
            pos += 1
        else:
            break
    start = pos
    while pos < n and not data[pos : pos + 1].isspace() and data[pos : pos + 1] != b"#":
        pos += 1
    if start == pos:
        raise PgmHeaderError("unexpected end of header")
    return data[start:pos], pos


def _header_int(data: bytes, pos: int, what: str) -> tuple[int, int]:
    token, pos = _next_token(data, pos)
    if not token.isdigit():
        raise PgmHeaderError(f"{what} is not a number: {token!r}")
    return int(token), pos


def load_pgm(path) -> GrayImage:
    """Load a binary (P5) or ASCII (P2) PGM file with maxval 255."""
    data = Path(path).read_bytes()
    magic = data[:2]
    if magic not in (b"P5", b"P2"):
        raise PgmHeaderError(f"not a P2/P5 PGM file (magic {magic!r})")
    width, pos = _header_int(data, 2, "width")
    height, pos = _header_int(data, pos, "height")
    maxval, pos = _header_int(data, pos, "maxval")
    if width < 1 or height < 1:
        raise PgmHeaderError(f"bad dimensions {width}x{height}")
    if maxval != 255:
        raise PgmMaxvalError(f"unsupported maxval {maxval} (only 255)")
    count = width * height
    if magic == b"P5":
        # Exactly one whitespace byte separates maxval from the raster.
        if pos >= len(data) or not data[pos : pos + 1].isspace():
            raise PgmHeaderError("missing whitespace after maxval")
        raw = data[pos + 1 : pos + 1 + count]
        if len(raw) < count:
            raise PgmTruncatedError(f"expected {count} pixel bytes, found {len(raw)}")
        pixels = np.frombuffer(raw, dtype=np.uint8).reshape(height, width)
    else:
        values = data[pos:].split()
        if len(values) < count:
            raise PgmTruncatedError(f"expected {count} pixel values, found {len(values)}")
        try:
            arr = np.array([int(v) for v in values[:count]], dtype=np.int64)
        except ValueError as exc:
            raise PgmHeaderError(f"non-numeric pixel data: {exc}") from None
        if arr.min() < 0 or arr.max() > maxval:
            raise PgmHeaderError("pixel value outside [0, maxval]")
        pixels = arr.astype(np.uint8).reshape(height, width)
    return GrayImage(pixels)


def save_pgm(image: GrayImage, path) -> None:
    """Write a binary (P5) PGM file; round-trips bit-exactly via load_pgm."""
    header = f"P5\n{image.width} {image.height}\n255\n".encode("ascii")
    Path(path).write_bytes(header + image.pixels.tobytes())


def center_crop(image: GrayImage, multiple: int = 16) -> GrayImage:
    """Center-crop to the largest rectangle whose sides are multiples of
    ``multiple``. Raises ValueError if the image is smaller than that."""
    w = (image.width // multiple) * multiple
    h = (image.height // multiple) * multiple
    if w == 0 or h == 0:
        raise ValueError(f"image smaller than {multiple}x{multiple}")
    x0 = (image.width - w) // 2
    y0 = (image.height - h) // 2
    return GrayImage(image.pixels[y0 : y0 + h, x0 : x0 + w])
