"""Grayscale fractal image codec.

Quadtree range partitioning over an entropy-ranked, truncated domain pool,
with two contrast-search modes (an exhaustive 10-value baseline and fixed
per-level values with mean offsets), a bit-exact stream format, an iterative
attractor decoder, and a benchmark harness.
"""

from .bench import SHistogram, bench_compare, s_histogram, sweep
from .codec import EncodeReport, EncoderConfig, decode, decode_trace, encode
from .image import (
    BlockView,
    GrayImage,
    PgmError,
    apply_isometry,
    center_crop,
    compose_isometries,
    decimate,
    decimate_tile,
    load_pgm,
    save_pgm,
)
from .matcher import (
    BASELINE,
    PROPOSED,
    DomainFlatError,
    EmptyPoolError,
    MatchResult,
    SPolicy,
    best_match,
    collage_error,
    optimal_o,
    optimal_s,
)
from .metrics import QualityReport, mse, psnr
from .pool import (
    DomainEntry,
    DomainPool,
    PoolConfigError,
    PoolParams,
    block_entropy,
    build_pool,
    candidate_count,
)
from .stream import (
    CompressedStream,
    MatchRecord,
    StreamError,
    deserialize,
    serialize,
)

__version__ = "0.1.0"

__all__ = [
    "BASELINE",
    "PROPOSED",
    "BlockView",
    "CompressedStream",
    "DomainEntry",
    "DomainFlatError",
    "DomainPool",
    "EmptyPoolError",
    "EncodeReport",
    "EncoderConfig",
    "GrayImage",
    "MatchRecord",
    "MatchResult",
    "PgmError",
    "PoolConfigError",
    "PoolParams",
    "QualityReport",
    "SHistogram",
    "SPolicy",
    "StreamError",
    "apply_isometry",
    "bench_compare",
    "best_match",
    "block_entropy",
    "build_pool",
    "candidate_count",
    "center_crop",
    "collage_error",
    "compose_isometries",
    "decimate",
    "decimate_tile",
    "decode",
    "decode_trace",
    "deserialize",
    "encode",
    "load_pgm",
    "mse",
    "optimal_o",
    "optimal_s",
    "psnr",
    "s_histogram",
    "save_pgm",
    "serialize",
    "sweep",
]
