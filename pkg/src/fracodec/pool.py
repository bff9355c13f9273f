"""Entropy-ranked, truncated domain pools.

For each of the four quadtree levels, domain candidates are the 2Bx2B blocks
on a lattice with a per-level stride. Candidates are ranked by the entropy of
their 256-bin gray-level histogram (natural log) and only the ``pool_cap``
highest-entropy blocks are kept, ties resolved in raster order. Each survivor
carries its decimated BxB tile plus the first/second moments the matcher
needs, so pool construction happens once per encode.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .image import GrayImage, decimate_tile

LEVEL_RANGE_SIDES = (16, 8, 4, 2)
LEVEL_DOMAIN_SIDES = (32, 16, 8, 4)
LEVEL_COUNT = 4
DEFAULT_STRIDES = (8, 4, 2, 2)

_ENTROPY_CHUNK = 4096


class PoolConfigError(Exception):
    """Pool parameters cannot produce a non-empty pool for this image."""


@dataclass(frozen=True)
class PoolParams:
    """Domain pool configuration: shared cap, per-level strides, optional
    per-level cap overrides."""

    pool_cap: int
    strides: tuple[int, int, int, int] = DEFAULT_STRIDES
    level_caps: tuple[int, int, int, int] | None = None

    def __post_init__(self):
        if self.pool_cap < 1:
            raise ValueError("pool_cap must be >= 1")
        if len(self.strides) != LEVEL_COUNT or any(s < 1 for s in self.strides):
            raise ValueError("strides must be 4 positive integers")
        if self.level_caps is not None:
            if len(self.level_caps) != LEVEL_COUNT or any(c < 1 for c in self.level_caps):
                raise ValueError("level_caps must be 4 positive integers")
        object.__setattr__(self, "strides", tuple(int(s) for s in self.strides))
        if self.level_caps is not None:
            object.__setattr__(self, "level_caps", tuple(int(c) for c in self.level_caps))

    def cap(self, level: int) -> int:
        if self.level_caps is not None:
            return self.level_caps[level - 1]
        return self.pool_cap


@dataclass(frozen=True, eq=False)
class DomainEntry:
    """One retained domain block: source origin, entropy rank key, and the
    precomputed decimated tile with its moments."""

    x: int
    y: int
    entropy: float
    tile: np.ndarray  # decimated BxB uint8
    mean: float  # mean of the decimated tile (exact integer sum / n)
    centered_norm_sq: float  # sum((tile - mean)^2)


@dataclass(frozen=True, eq=False)
class DomainPool:
    """Per-level lists of DomainEntry, entropy-descending, raster tie order."""

    params: PoolParams
    width: int
    height: int
    levels: tuple[tuple[DomainEntry, ...], ...]

    def entries(self, level: int) -> tuple[DomainEntry, ...]:
        return self.levels[level - 1]

    def coords(self, level: int) -> tuple[tuple[int, int], ...]:
        return tuple((e.x, e.y) for e in self.entries(level))


def _entropy_from_counts(counts: np.ndarray, n: int) -> np.ndarray:
    """Entropy rows (nats) from [rows, 256] histogram counts over n pixels."""
    p = counts / n
    terms = p * np.log(np.where(counts > 0, p, 1.0))
    return -terms.sum(axis=1)


def block_entropy(tile) -> float:
    """Entropy (nats) of the 256-bin gray-level histogram of a tile."""
    a = np.asarray(tile)
    if a.size == 0:
        raise ValueError("tile must be non-empty")
    counts = np.bincount(a.astype(np.int64).ravel(), minlength=256)
    if counts.shape[0] != 256:
        raise ValueError("pixel values must lie in [0, 255]")
    return float(_entropy_from_counts(counts.reshape(1, 256), a.size)[0])


def candidate_count(image_size, domain_side: int, stride: int) -> int:
    """Number of lattice placements of a ``domain_side`` square at ``stride``.

    ``image_size`` is a single side for square images or ``(width, height)``.
    """
    if isinstance(image_size, (tuple, list)):
        w, h = image_size
    else:
        w = h = image_size
    if domain_side > w or domain_side > h:
        return 0
    return ((w - domain_side) // stride + 1) * ((h - domain_side) // stride + 1)


def _grid_entropies(pixels: np.ndarray, side: int, stride: int):
    """Origins (raster order) and entropies of all side x side lattice blocks."""
    win = sliding_window_view(pixels, (side, side))[::stride, ::stride]
    ny, nx = win.shape[:2]
    flat = win.reshape(ny * nx, side * side)
    n = side * side
    ent = np.empty(ny * nx)
    for lo in range(0, flat.shape[0], _ENTROPY_CHUNK):
        part = flat[lo : lo + _ENTROPY_CHUNK]
        rows = part.shape[0]
        comb = (np.arange(rows, dtype=np.int64)[:, None] << 8) | part
        counts = np.bincount(comb.ravel(), minlength=rows * 256).reshape(rows, 256)
        ent[lo : lo + rows] = _entropy_from_counts(counts, n)
    ys = np.repeat(np.arange(ny) * stride, nx)
    xs = np.tile(np.arange(nx) * stride, ny)
    return xs, ys, ent


def _make_entry(pixels: np.ndarray, x: int, y: int, side: int, entropy: float) -> DomainEntry:
    tile = decimate_tile(pixels[y : y + side, x : x + side])
    flat = tile.astype(np.int64).ravel()
    n = flat.size
    s1 = int(flat.sum())
    s2 = int((flat * flat).sum())
    mean = s1 / n
    return DomainEntry(
        x=int(x),
        y=int(y),
        entropy=float(entropy),
        tile=tile,
        mean=mean,
        centered_norm_sq=s2 - s1 * s1 / n,
    )


def build_pool(image: GrayImage, params: PoolParams) -> DomainPool:
    """Rank all lattice domain blocks by entropy and keep the top cap per level.

    Entropy is computed on the raw 2Bx2B pixels; the stable descending sort
    keeps raster order among exact ties. Deterministic for fixed inputs.
    """
    levels = []
    for li in range(LEVEL_COUNT):
        side = LEVEL_DOMAIN_SIDES[li]
        stride = params.strides[li]
        if side > image.width or side > image.height:
            raise PoolConfigError(
                f"level {li + 1} domain side {side} exceeds image "
                f"{image.width}x{image.height}"
            )
        xs, ys, ent = _grid_entropies(image.pixels, side, stride)
        order = np.argsort(-ent, kind="stable")[: params.cap(li + 1)]
        entries = tuple(
            _make_entry(image.pixels, xs[i], ys[i], side, ent[i]) for i in order
        )
        levels.append(entries)
    return DomainPool(
        params=params, width=image.width, height=image.height, levels=tuple(levels)
    )
