"""Benchmark harness: pool-size sweeps, mode comparisons, and histograms of
the least-squares contrast slope.

All cells run serially in-process so the encode/decode timings of different
rows are comparable; only the time columns vary between identical runs.
"""

from __future__ import annotations

import csv
import time
from dataclasses import dataclass, replace

import numpy as np

from .codec import EncoderConfig, decode, encode, run_quadtree, _gather_tiles
from .image import GrayImage, apply_isometry
from .metrics import psnr
from .pool import LEVEL_RANGE_SIDES, PoolParams, build_pool

CSV_COLUMNS = (
    "pool_size",
    "mode",
    "comp_ratio_payload",
    "comp_ratio_total",
    "encode_time_s",
    "decode_time_s",
    "psnr_db",
)

S_BIN_WIDTH = 0.05
S_BIN_EDGES = np.round(np.arange(-0.5, 1.5 + S_BIN_WIDTH / 2, S_BIN_WIDTH), 10)

_SCAN_CHUNK = 4096


def _with_pool_cap(config: EncoderConfig, dn: int) -> EncoderConfig:
    pool = PoolParams(pool_cap=dn, strides=config.pool.strides)
    return replace(config, pool=pool)


def _quality_row(image: GrayImage, config: EncoderConfig, dn: int) -> dict:
    stream, report = encode(image, _with_pool_cap(config, dn))
    t0 = time.perf_counter()
    decoded = decode(stream)
    decode_time = time.perf_counter() - t0
    return {
        "pool_size": dn,
        "mode": config.policy.mode,
        "comp_ratio_payload": round(report.comp_ratio_payload, 4),
        "comp_ratio_total": round(report.comp_ratio_total, 4),
        "encode_time_s": round(report.encode_time_s, 4),
        "decode_time_s": round(decode_time, 4),
        "psnr_db": round(psnr(image, decoded), 4),
    }


def sweep(image: GrayImage, pool_sizes, config: EncoderConfig) -> list[dict]:
    """One encode+decode per pool size at fixed thresholds."""
    return [_quality_row(image, config, int(dn)) for dn in pool_sizes]


def bench_compare(
    image: GrayImage,
    pool_sizes,
    baseline_config: EncoderConfig,
    proposed_config: EncoderConfig,
) -> list[dict]:
    """Paired baseline/proposed rows per pool size under shared pool params."""
    if baseline_config.pool.strides != proposed_config.pool.strides:
        raise ValueError("both configs must share pool strides")
    rows = []
    for dn in pool_sizes:
        rows.append(_quality_row(image, baseline_config, int(dn)))
        rows.append(_quality_row(image, proposed_config, int(dn)))
    return rows


def write_csv(path, rows, columns=CSV_COLUMNS) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(columns))
        writer.writeheader()
        for row in rows:
            writer.writerow(row)


@dataclass(frozen=True, eq=False)
class SHistogram:
    """Per-level histograms of the winning least-squares slope.

    ``raw_counts`` bins the unconstrained slope clipped into [-0.5, 1.5];
    ``clamped_counts`` bins the same values clamped to [0, 1]. Rows are
    levels 1..4 and always sum to the number of blocks coded at that level.
    """

    pool_size: int
    bin_edges: np.ndarray
    raw_counts: np.ndarray  # int64 [4, bins]
    clamped_counts: np.ndarray
    coded_blocks: tuple[int, int, int, int]
    raw_means: tuple
    clamped_means: tuple


def _level_basis(entries):
    """Centered isometry variants and their squared norms for one level."""
    tiles = np.stack([e.tile for e in entries]).astype(np.float64)
    means = np.array([e.mean for e in entries])
    centered = tiles - means[:, None, None]
    variants = np.stack([apply_isometry(centered, iso) for iso in range(8)], axis=1)
    e, _, b, _ = variants.shape
    flat = variants.reshape(e * 8, b * b)
    norms = np.repeat(np.array([en.centered_norm_sq for en in entries]), 8)
    return flat, norms


def _real_s_matches(tiles: np.ndarray, basis, norms):
    """Per tile: minimal projection SSD and the slope of the winning variant."""
    m, n = tiles.shape
    t = tiles.astype(np.float64)
    rm = tiles.astype(np.int64).sum(axis=1) / n
    rc = t - rm[:, None]
    rnorm = (rc * rc).sum(axis=1)
    flat_dom = norms == 0.0
    safe = np.where(flat_dom, 1.0, norms)
    best_err = np.empty(m)
    best_s = np.empty(m)
    for lo in range(0, m, _SCAN_CHUNK):
        hi = min(m, lo + _SCAN_CHUNK)
        cross = basis @ rc[lo:hi].T  # [E*8, chunk]
        gain = np.where(flat_dom[:, None], 0.0, cross * cross / safe[:, None])
        errs = np.maximum(rnorm[lo:hi][None, :] - gain, 0.0)
        pick = errs.argmin(axis=0)
        cols = np.arange(hi - lo)
        best_err[lo:hi] = errs[pick, cols]
        best_s[lo:hi] = np.where(
            flat_dom[pick], 0.0, cross[pick, cols] / safe[pick]
        )
    return best_err, best_s


def s_histogram(image: GrayImage, config: EncoderConfig) -> SHistogram:
    """Run the quadtree with an exhaustive real-valued slope search and
    histogram the winning slope of every coded block, per level.

    The candidate scan picks, for each (domain, isometry), the unconstrained
    least-squares slope; constant domains contribute slope 0. Thresholds act
    on the real-valued projection error.
    """
    pool = build_pool(image, config.pool)
    bases: dict[int, tuple] = {}
    s_by_level: dict[int, np.ndarray] = {}

    def match_level(level: int, origins):
        if level not in bases:
            bases[level] = _level_basis(pool.entries(level))
        basis, norms = bases[level]
        tiles = _gather_tiles(image.pixels, origins, LEVEL_RANGE_SIDES[level - 1])
        errs, slopes = _real_s_matches(tiles, basis, norms)
        s_by_level[level] = slopes
        return errs

    leaves = run_quadtree(image.width, image.height, config.thresholds, match_level)
    coded: dict[int, list[float]] = {1: [], 2: [], 3: [], 4: []}
    for level, _x, _y, j in leaves:
        coded[level].append(float(s_by_level[level][j]))

    raw_counts = np.zeros((4, len(S_BIN_EDGES) - 1), dtype=np.int64)
    clamped_counts = np.zeros_like(raw_counts)
    raw_means = []
    clamped_means = []
    for level in (1, 2, 3, 4):
        values = np.array(coded[level])
        if values.size:
            raw_counts[level - 1] = np.histogram(
                np.clip(values, S_BIN_EDGES[0], S_BIN_EDGES[-1]), bins=S_BIN_EDGES
            )[0]
            clamped_counts[level - 1] = np.histogram(
                np.clip(values, 0.0, 1.0), bins=S_BIN_EDGES
            )[0]
            raw_means.append(float(values.mean()))
            clamped_means.append(float(np.clip(values, 0.0, 1.0).mean()))
        else:
            raw_means.append(None)
            clamped_means.append(None)
    return SHistogram(
        pool_size=config.pool.pool_cap,
        bin_edges=S_BIN_EDGES.copy(),
        raw_counts=raw_counts,
        clamped_counts=clamped_counts,
        coded_blocks=tuple(len(coded[level]) for level in (1, 2, 3, 4)),
        raw_means=tuple(raw_means),
        clamped_means=tuple(clamped_means),
    )


def shist_rows(hist: SHistogram) -> list[dict]:
    """Flatten an SHistogram into CSV rows."""
    rows = []
    for level in (1, 2, 3, 4):
        for b in range(hist.raw_counts.shape[1]):
            rows.append(
                {
                    "pool_size": hist.pool_size,
                    "level": level,
                    "bin_low": round(float(hist.bin_edges[b]), 4),
                    "bin_high": round(float(hist.bin_edges[b + 1]), 4),
                    "raw_count": int(hist.raw_counts[level - 1, b]),
                    "clamped_count": int(hist.clamped_counts[level - 1, b]),
                }
            )
    return rows


SHIST_COLUMNS = ("pool_size", "level", "bin_low", "bin_high", "raw_count", "clamped_count")
