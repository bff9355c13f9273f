"""Four-step quadtree encoder and the iterative attractor decoder.

The encoder partitions the image into 16x16 range blocks, matches each block
against the entropy-ranked domain pool, and splits blocks whose best RMS
error exceeds the step threshold into four quadrants, down to 2x2 blocks
which always code. Matching is batched per level so the compiled scan kernel
sees one large call per level instead of one per block.

The decoder starts from a constant-128 image and repeatedly applies the full
collage map until the per-pixel change reaches the tolerance or the iteration
budget runs out. Both sides quantize identically: reconstruction is
clip(rint(s*(d - dmean)) + O) in proposed mode and clip(rint(s*d) + O) in
baseline mode, with d the decimated, isometry-applied domain tile.
"""

from __future__ import annotations

import time
from contextlib import contextmanager
from dataclasses import dataclass, field

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .image import GrayImage, apply_isometry, decimate_tile
from .matcher import PROPOSED, SPolicy, build_candidate_set, result_from_index, scan_tiles
from .pool import LEVEL_RANGE_SIDES, PoolParams, build_pool
from .stream import CompressedStream, MatchRecord, header_bytes, iter_leaves

TOP_SIDE = 16


@dataclass(frozen=True)
class EncoderConfig:
    pool: PoolParams
    policy: SPolicy = field(default_factory=SPolicy)
    thresholds: tuple[float, float, float] = (8.0, 8.0, 8.0)
    threads: int | None = None

    def __post_init__(self):
        if len(self.thresholds) != 3 or any(t <= 0 for t in self.thresholds):
            raise ValueError("thresholds must be 3 positive RMS values")
        object.__setattr__(self, "thresholds", tuple(float(t) for t in self.thresholds))


@dataclass
class EncodeReport:
    width: int
    height: int
    mode: str
    pool_cap: int
    pool_sizes: tuple[int, int, int, int]
    strides: tuple[int, int, int, int]
    thresholds: tuple[float, float, float]
    step_blocks: tuple[int, int, int, int]
    record_count: int
    collage_ssd: int
    payload_bits: int
    header_bytes: int
    file_bytes: int
    bpp_payload: float
    bpp_total: float
    comp_ratio_payload: float
    comp_ratio_total: float
    pool_time_s: float
    encode_time_s: float

    def to_lines(self) -> list[str]:
        out = []
        for key, value in (
            ("width", self.width),
            ("height", self.height),
            ("mode", self.mode),
            ("pool_cap", self.pool_cap),
            ("pool_sizes", ",".join(str(v) for v in self.pool_sizes)),
            ("strides", ",".join(str(v) for v in self.strides)),
            ("thresholds", ",".join(f"{t:g}" for t in self.thresholds)),
            ("step1_blocks", self.step_blocks[0]),
            ("step2_blocks", self.step_blocks[1]),
            ("step3_blocks", self.step_blocks[2]),
            ("step4_blocks", self.step_blocks[3]),
            ("records", self.record_count),
            ("collage_ssd", self.collage_ssd),
            ("payload_bits", self.payload_bits),
            ("header_bytes", self.header_bytes),
            ("file_bytes", self.file_bytes),
            ("bpp_payload", f"{self.bpp_payload:.6f}"),
            ("bpp_total", f"{self.bpp_total:.6f}"),
            ("comp_ratio_payload", f"{self.comp_ratio_payload:.4f}"),
            ("comp_ratio_total", f"{self.comp_ratio_total:.4f}"),
            ("pool_time_s", f"{self.pool_time_s:.3f}"),
            ("encode_time_s", f"{self.encode_time_s:.3f}"),
        ):
            out.append(f"{key}={value}")
        return out


@contextmanager
def thread_limit(threads: int | None):
    """Clamp the kernel worker count for the duration of the block."""
    if threads is None:
        yield
        return
    import numba

    previous = numba.get_num_threads()
    numba.set_num_threads(max(1, min(int(threads), numba.config.NUMBA_NUM_THREADS)))
    try:
        yield
    finally:
        numba.set_num_threads(previous)


def run_quadtree(width: int, height: int, thresholds, match_level):
    """Drive the four-step split and return leaves in depth-first order.

    ``match_level(level, origins)`` returns the best SSD per origin; a block
    splits when its SSD exceeds thresholds[level-1]^2 * pixel_count (levels
    1-3; level 4 always codes). Yields tuples ``(level, x, y, j)`` where j
    indexes the level's origin batch.
    """
    tops = [(x, y) for y in range(0, height, TOP_SIDE) for x in range(0, width, TOP_SIDE)]
    origins_by_level = {1: tops}
    is_split: dict[tuple[int, int, int], bool] = {}
    batch_index: dict[tuple[int, int, int], int] = {}
    for level in (1, 2, 3, 4):
        origins = origins_by_level.get(level)
        if not origins:
            continue
        errs = match_level(level, origins)
        side = LEVEL_RANGE_SIDES[level - 1]
        limit = thresholds[level - 1] ** 2 * side * side if level < 4 else None
        children = []
        for j, (x, y) in enumerate(origins):
            batch_index[(level, x, y)] = j
            if level == 4 or errs[j] <= limit:
                is_split[(level, x, y)] = False
            else:
                is_split[(level, x, y)] = True
                h = side // 2
                children += [(x, y), (x + h, y), (x, y + h), (x + h, y + h)]
        if children:
            origins_by_level[level + 1] = children

    leaves: list[tuple[int, int, int, int]] = []

    def walk(level: int, x: int, y: int) -> None:
        if is_split[(level, x, y)]:
            h = LEVEL_RANGE_SIDES[level - 1] // 2
            walk(level + 1, x, y)
            walk(level + 1, x + h, y)
            walk(level + 1, x, y + h)
            walk(level + 1, x + h, y + h)
        else:
            leaves.append((level, x, y, batch_index[(level, x, y)]))

    for x, y in tops:
        walk(1, x, y)
    covered = sum(LEVEL_RANGE_SIDES[lv - 1] ** 2 for lv, _, _, _ in leaves)
    assert covered == width * height, "leaf footprints must tile the image"
    return leaves


def _gather_tiles(pixels: np.ndarray, origins, side: int) -> np.ndarray:
    win = sliding_window_view(pixels, (side, side))
    xs = np.fromiter((o[0] for o in origins), dtype=np.int64, count=len(origins))
    ys = np.fromiter((o[1] for o in origins), dtype=np.int64, count=len(origins))
    return win[ys, xs].reshape(len(origins), side * side)


def encode(image: GrayImage, config: EncoderConfig) -> tuple[CompressedStream, EncodeReport]:
    """Compress an image whose dimensions are multiples of 16."""
    if image.width % 16 or image.height % 16:
        raise ValueError(
            f"dimensions not multiple of 16: {image.width}x{image.height}"
        )
    t_start = time.perf_counter()
    pool = build_pool(image, config.pool)
    pool_time = time.perf_counter() - t_start

    policy = config.policy
    candidate_sets: dict[int, object] = {}
    scans: dict[int, tuple] = {}

    def match_level(level: int, origins):
        cs = candidate_sets.get(level)
        if cs is None:
            cs = build_candidate_set(pool, level, policy)
            candidate_sets[level] = cs
        tiles = _gather_tiles(image.pixels, origins, LEVEL_RANGE_SIDES[level - 1])
        errs, idxs, rmeans = scan_tiles(tiles, cs)
        scans[level] = (errs, idxs, rmeans)
        return errs

    with thread_limit(config.threads):
        leaves = run_quadtree(image.width, image.height, config.thresholds, match_level)

    records = []
    collage_ssd = 0
    step_blocks = [0, 0, 0, 0]
    for level, _x, _y, j in leaves:
        errs, idxs, rmeans = scans[level]
        res = result_from_index(
            candidate_sets[level], float(rmeans[j]), int(errs[j]), int(idxs[j])
        )
        records.append(
            MatchRecord(
                step=level,
                offset=res.offset,
                isometry=res.isometry,
                domain_address=res.domain_index,
                s_index=res.s_index,
            )
        )
        collage_ssd += res.error
        step_blocks[level - 1] += 1

    stream = CompressedStream(
        width=image.width,
        height=image.height,
        mode=policy.mode,
        strides=pool.params.strides,
        s_sets=tuple(policy.s_set(level) for level in (1, 2, 3, 4)),
        pools=tuple(pool.coords(level) for level in (1, 2, 3, 4)),
        records=tuple(records),
    )
    encode_time = time.perf_counter() - t_start

    pixels = image.width * image.height
    payload_bits = stream.payload_bits()
    head = header_bytes(stream)
    file_bytes = head + (payload_bits + 7) // 8
    report = EncodeReport(
        width=image.width,
        height=image.height,
        mode=policy.mode,
        pool_cap=config.pool.pool_cap,
        pool_sizes=tuple(len(pool.entries(level)) for level in (1, 2, 3, 4)),
        strides=pool.params.strides,
        thresholds=config.thresholds,
        step_blocks=tuple(step_blocks),
        record_count=len(records),
        collage_ssd=collage_ssd,
        payload_bits=payload_bits,
        header_bytes=head,
        file_bytes=file_bytes,
        bpp_payload=payload_bits / pixels,
        bpp_total=file_bytes * 8 / pixels,
        comp_ratio_payload=pixels * 8 / payload_bits,
        comp_ratio_total=pixels / file_bytes,
        pool_time_s=pool_time,
        encode_time_s=encode_time,
    )
    return stream, report


@dataclass(eq=False)
class _LevelPlan:
    dom_side: int
    dom_x: np.ndarray
    dom_y: np.ndarray
    iso_groups: list
    svals: np.ndarray
    offs: np.ndarray
    scatter: np.ndarray
    n: int


def _build_plans(stream: CompressedStream) -> list[_LevelPlan]:
    by_level: dict[int, list] = {1: [], 2: [], 3: [], 4: []}
    for rec, x, y, side in iter_leaves(stream):
        by_level[rec.step].append((rec, x, y))
    plans = []
    for level in (1, 2, 3, 4):
        rows = by_level[level]
        if not rows:
            continue
        b = LEVEL_RANGE_SIDES[level - 1]
        coords = stream.pools[level - 1]
        s_set = stream.s_sets[level - 1]
        m = len(rows)
        dom_x = np.empty(m, np.int64)
        dom_y = np.empty(m, np.int64)
        isos = np.empty(m, np.int64)
        svals = np.empty(m, np.float64)
        offs = np.empty(m, np.int32)
        rng_x = np.empty(m, np.int64)
        rng_y = np.empty(m, np.int64)
        for i, (rec, x, y) in enumerate(rows):
            dom_x[i], dom_y[i] = coords[rec.domain_address]
            isos[i] = rec.isometry
            svals[i] = s_set[rec.s_index]
            offs[i] = rec.offset
            rng_x[i], rng_y[i] = x, y
        span = np.arange(b, dtype=np.int64)
        scatter = (
            (rng_y[:, None, None] + span[None, :, None]) * stream.width
            + rng_x[:, None, None]
            + span[None, None, :]
        ).ravel()
        iso_groups = [
            (iso, np.nonzero(isos == iso)[0]) for iso in range(8) if (isos == iso).any()
        ]
        plans.append(
            _LevelPlan(
                dom_side=2 * b,
                dom_x=dom_x,
                dom_y=dom_y,
                iso_groups=iso_groups,
                svals=svals,
                offs=offs,
                scatter=scatter,
                n=b * b,
            )
        )
    return plans


def _collage_pass(cur: np.ndarray, plans: list[_LevelPlan], proposed: bool) -> np.ndarray:
    out = np.empty_like(cur)
    for plan in plans:
        win = sliding_window_view(cur, (plan.dom_side, plan.dom_side))
        dec = decimate_tile(win[plan.dom_y, plan.dom_x])
        tiles = np.empty_like(dec)
        for iso, idx in plan.iso_groups:
            tiles[idx] = apply_isometry(dec[idx], iso)
        if proposed:
            m = tiles.shape[0]
            means = tiles.reshape(m, -1).astype(np.int64).sum(axis=1) / plan.n
            q = np.rint(plan.svals[:, None, None] * (tiles - means[:, None, None]))
        else:
            q = np.rint(plan.svals[:, None, None] * tiles.astype(np.float64))
        v = q.astype(np.int32) + plan.offs[:, None, None]
        np.clip(v, 0, 255, out=v)
        out.flat[plan.scatter] = v.ravel()
    return out


def decode_trace(
    stream: CompressedStream, iterations: int = 15, tolerance: int = 0
) -> tuple[GrayImage, list[int]]:
    """Decode and also return the max per-pixel change of every pass."""
    if iterations < 1:
        raise ValueError("iterations must be >= 1")
    if tolerance < 0:
        raise ValueError("tolerance must be >= 0")
    plans = _build_plans(stream)
    proposed = stream.mode == PROPOSED
    cur = np.full((stream.height, stream.width), 128, dtype=np.uint8)
    deltas: list[int] = []
    for _ in range(iterations):
        new = _collage_pass(cur, plans, proposed)
        delta = int(np.abs(new.astype(np.int16) - cur.astype(np.int16)).max())
        cur = new
        deltas.append(delta)
        if delta <= tolerance:
            break
    return GrayImage(cur), deltas


def decode(stream: CompressedStream, iterations: int = 15, tolerance: int = 0) -> GrayImage:
    """Iterate the collage map from a constant-128 start image."""
    return decode_trace(stream, iterations, tolerance)[0]
