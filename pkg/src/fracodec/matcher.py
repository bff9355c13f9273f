"""Range-to-domain matching.

Two search modes share one scan:

* baseline -- every candidate (domain, isometry) is tried with each member of
  a 10-value contrast set; the offset is the quantized least-squares value.
* proposed -- the contrast factor comes from a small fixed per-level set
  (one value at level 1, two at levels 2-4) and the stored offset is the
  rounded range mean, so no offset search happens at all.

All candidate errors are exact integer SSDs of the clamped, rounded
reconstruction the decoder will produce, so ties are exact and the selected
candidate is the lexicographically-first minimum over
(domain index, isometry, s index).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._scan import scan_candidates
from .image import apply_isometry
from .pool import DomainPool, LEVEL_RANGE_SIDES

BASELINE = "baseline"
PROPOSED = "proposed"

DEFAULT_BASELINE_SET = (0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0)
DEFAULT_PROPOSED_SETS = ((0.1,), (0.2, 0.4), (0.3, 0.8), (0.5, 0.9))


class EmptyPoolError(Exception):
    """The domain pool has no entries at the requested level."""


class DomainFlatError(Exception):
    """The domain tile is constant, so the least-squares slope is undefined."""


@dataclass(frozen=True)
class SPolicy:
    """Contrast-factor search policy: which s values each level may use."""

    mode: str = PROPOSED
    baseline_set: tuple[float, ...] = DEFAULT_BASELINE_SET
    proposed_sets: tuple[tuple[float, ...], ...] = DEFAULT_PROPOSED_SETS

    def __post_init__(self):
        if self.mode not in (BASELINE, PROPOSED):
            raise ValueError(f"mode must be {BASELINE!r} or {PROPOSED!r}")
        object.__setattr__(self, "baseline_set", tuple(float(s) for s in self.baseline_set))
        object.__setattr__(
            self, "proposed_sets", tuple(tuple(float(s) for s in ss) for ss in self.proposed_sets)
        )
        if not self.baseline_set:
            raise ValueError("baseline_set must be non-empty")
        for s in self.baseline_set + tuple(v for ss in self.proposed_sets for v in ss):
            if not 0.0 <= s <= 1.0:
                raise ValueError(f"s values must lie in [0, 1], got {s}")
        if len(self.proposed_sets) != 4:
            raise ValueError("proposed_sets needs one set per level")
        if len(self.proposed_sets[0]) != 1 or any(len(ss) != 2 for ss in self.proposed_sets[1:]):
            raise ValueError("proposed sets must have 1 value at level 1 and 2 at levels 2-4")

    def s_set(self, level: int) -> tuple[float, ...]:
        if self.mode == BASELINE:
            return self.baseline_set
        return self.proposed_sets[level - 1]


@dataclass(frozen=True)
class MatchResult:
    """Winning candidate for one range block."""

    domain_index: int
    isometry: int
    s_index: int
    offset: int  # the 8-bit O field as stored in the stream
    error: int  # integer SSD of the quantized reconstruction


def collage_error(range_tile, domain_tile, s: float, offset: float) -> int:
    """SSD between the range tile and clip(round(s*d + offset)) per pixel."""
    r = np.asarray(range_tile, dtype=np.int64)
    d = np.asarray(domain_tile, dtype=np.float64)
    if r.shape != d.shape:
        raise ValueError("tiles must have identical shapes")
    recon = np.clip(np.rint(s * d + offset), 0, 255).astype(np.int64)
    diff = recon - r
    return int((diff * diff).sum())


def optimal_s(range_tile, domain_tile) -> float:
    """Unconstrained least-squares contrast slope of range against domain.

    Raises DomainFlatError when the domain tile is constant.
    """
    r = np.asarray(range_tile, dtype=np.float64).ravel()
    d = np.asarray(domain_tile, dtype=np.float64).ravel()
    if r.shape != d.shape:
        raise ValueError("tiles must have identical shapes")
    dc = d - d.sum() / d.size
    denom = float(dc @ dc)
    if denom == 0.0:
        raise DomainFlatError("constant domain tile")
    rc = r - r.sum() / r.size
    return float(rc @ dc) / denom


def optimal_o(range_mean: float, domain_mean: float, s: float) -> float:
    """Least-squares offset for a given slope: range mean - s * domain mean."""
    return range_mean - s * domain_mean


@dataclass(frozen=True, eq=False)
class CandidateSet:
    """Precomputed per-level scan inputs for one pool and policy."""

    q: np.ndarray  # int16 [E*8*S, n]
    dmeans: np.ndarray  # float64 [E]
    svals: np.ndarray  # float64 [S]
    baseline: bool
    side: int

    @property
    def entry_count(self) -> int:
        return self.dmeans.shape[0]


def build_candidate_set(pool: DomainPool, level: int, policy: SPolicy) -> CandidateSet:
    """Quantize every (entry, isometry, s) reconstruction basis for a level."""
    entries = pool.entries(level)
    if not entries:
        raise EmptyPoolError(f"no domain entries at level {level}")
    s_set = policy.s_set(level)
    side = LEVEL_RANGE_SIDES[level - 1]
    n = side * side
    E, S = len(entries), len(s_set)
    baseline = policy.mode == BASELINE

    tiles = np.stack([e.tile for e in entries]).astype(np.float64)  # [E, B, B]
    if not baseline:
        means = np.array([e.mean for e in entries])
        tiles = tiles - means[:, None, None]
    svals = np.array(s_set, dtype=np.float64)
    # bases[e, si] = rint(s * tile) before isometries, int16 fits +-255
    bases = np.rint(svals[None, :, None, None] * tiles[:, None, :, :]).astype(np.int16)
    q = np.empty((E, 8, S, n), dtype=np.int16)
    for iso in range(8):
        q[:, iso, :, :] = apply_isometry(bases, iso).reshape(E, S, n)
    return CandidateSet(
        q=np.ascontiguousarray(q.reshape(E * 8 * S, n)),
        dmeans=np.array([e.mean for e in entries]),
        svals=svals,
        baseline=baseline,
        side=side,
    )


def scan_tiles(tiles: np.ndarray, cs: CandidateSet):
    """Best candidate per flattened range tile.

    Returns (errors, flat candidate indices, exact range means).
    """
    m, n = tiles.shape
    if n != cs.side * cs.side:
        raise ValueError("tile size does not match candidate set level")
    ranges = np.ascontiguousarray(tiles, dtype=np.int16)
    rmeans = ranges.astype(np.int64).sum(axis=1) / n
    out_err = np.empty(m, dtype=np.int64)
    out_idx = np.empty(m, dtype=np.int64)
    scan_candidates(ranges, rmeans, cs.q, cs.dmeans, cs.svals, cs.baseline, out_err, out_idx)
    return out_err, out_idx, rmeans


def result_from_index(cs: CandidateSet, rmean: float, err: int, idx: int) -> MatchResult:
    """Decode a flat candidate index into a MatchResult with its stored offset."""
    S = cs.svals.shape[0]
    e, rem = divmod(int(idx), 8 * S)
    iso, si = divmod(rem, S)
    if cs.baseline:
        o = int(np.rint(rmean - cs.svals[si] * cs.dmeans[e]))
        o = min(255, max(0, o))
    else:
        o = int(np.rint(rmean))
    return MatchResult(domain_index=e, isometry=iso, s_index=si, offset=o, error=int(err))


def best_match(range_tile, level: int, pool: DomainPool, policy: SPolicy) -> MatchResult:
    """Exhaustively match one range tile against the level's domain pool."""
    cs = build_candidate_set(pool, level, policy)
    flat = np.asarray(range_tile, dtype=np.int16).reshape(1, -1)
    err, idx, rmeans = scan_tiles(flat, cs)
    return result_from_index(cs, float(rmeans[0]), int(err[0]), int(idx[0]))
