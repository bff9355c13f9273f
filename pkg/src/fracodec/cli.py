"""Command-line front end.

Subcommands: encode, decode, inspect, sweep, shist, bench. Settings resolve
in three layers: built-in defaults, then the --config key=value file, then
explicit flags. Reports are printed as machine-parseable key=value lines.

Exit codes: 0 success, 1 usage error, 2 data error (malformed image or
stream, bad configuration), 3 I/O error.
"""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

from .bench import (
    CSV_COLUMNS,
    SHIST_COLUMNS,
    bench_compare,
    s_histogram,
    shist_rows,
    sweep,
    write_csv,
)
from .codec import EncoderConfig, decode_trace, encode
from .image import PgmError, center_crop, load_pgm, save_pgm
from .matcher import BASELINE, PROPOSED, SPolicy
from .metrics import psnr
from .pool import PoolConfigError, PoolParams
from .stream import StreamError, deserialize, header_bytes, serialize

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_IO = 3

DEFAULTS = {
    "mode": PROPOSED,
    "dn": 256,
    "thresholds": "8,8,8",
    "strides": "8,4,2,2",
    "iterations": 15,
    "tolerance": 0,
    "threads": None,
    "crop": False,
    "dn_list": "32,64,144,256",
}


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _parse_floats(text: str, count: int, what: str) -> tuple[float, ...]:
    parts = [p for p in str(text).split(",") if p != ""]
    if len(parts) != count:
        raise ValueError(f"{what} needs {count} comma-separated values")
    return tuple(float(p) for p in parts)


def _parse_ints(text: str, what: str, count: int | None = None) -> tuple[int, ...]:
    parts = [p for p in str(text).split(",") if p != ""]
    if count is not None and len(parts) != count:
        raise ValueError(f"{what} needs {count} comma-separated values")
    if not parts:
        raise ValueError(f"{what} must be non-empty")
    return tuple(int(p) for p in parts)


def read_config_file(path) -> dict:
    """Parse a flat key=value settings file ('#' starts a comment)."""
    settings = {}
    for raw in Path(path).read_text().splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"config line is not key=value: {raw!r}")
        key, value = line.split("=", 1)
        settings[key.strip()] = value.strip()
    return settings


def resolve_settings(args: argparse.Namespace) -> dict:
    """Defaults < config file < explicit CLI flags."""
    settings = dict(DEFAULTS)
    if getattr(args, "config", None):
        file_settings = read_config_file(args.config)
        unknown = set(file_settings) - set(DEFAULTS)
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        settings.update(file_settings)
    for key in DEFAULTS:
        value = getattr(args, key, None)
        if value is not None and value is not False:
            settings[key] = value
    mode = str(settings["mode"])
    if mode not in (BASELINE, PROPOSED):
        raise ValueError(f"mode must be {BASELINE} or {PROPOSED}, got {mode!r}")
    settings["mode"] = mode
    settings["dn"] = int(settings["dn"])
    settings["iterations"] = int(settings["iterations"])
    settings["tolerance"] = int(settings["tolerance"])
    if settings["threads"] is not None:
        settings["threads"] = int(settings["threads"])
    settings["crop"] = str(settings["crop"]).lower() in ("1", "true", "yes")
    settings["thresholds"] = _parse_floats(settings["thresholds"], 3, "thresholds")
    settings["strides"] = _parse_ints(settings["strides"], "strides", 4)
    settings["dn_list"] = _parse_ints(settings["dn_list"], "dn-list")
    return settings


def encoder_config(settings: dict, mode: str | None = None) -> EncoderConfig:
    return EncoderConfig(
        pool=PoolParams(pool_cap=settings["dn"], strides=settings["strides"]),
        policy=SPolicy(mode=mode or settings["mode"]),
        thresholds=settings["thresholds"],
        threads=settings["threads"],
    )


def _load_input(path, crop: bool):
    image = load_pgm(path)
    if image.width % 16 or image.height % 16:
        if not crop:
            raise ValueError(
                f"dimensions not multiple of 16: {image.width}x{image.height} "
                "(use --crop to center-crop)"
            )
        image = center_crop(image)
    return image


def cmd_encode(args) -> int:
    settings = resolve_settings(args)
    image = _load_input(args.input, settings["crop"])
    stream, report = encode(image, encoder_config(settings))
    Path(args.output).write_bytes(serialize(stream))
    for line in report.to_lines():
        print(line)
    return EXIT_OK


def cmd_decode(args) -> int:
    settings = resolve_settings(args)
    stream = deserialize(Path(args.input).read_bytes())
    t0 = time.perf_counter()
    image, deltas = decode_trace(stream, settings["iterations"], settings["tolerance"])
    decode_time = time.perf_counter() - t0
    save_pgm(image, args.output)
    print(f"width={image.width}")
    print(f"height={image.height}")
    print(f"iterations={len(deltas)}")
    print(f"final_delta={deltas[-1]}")
    print(f"decode_time_s={decode_time:.3f}")
    return EXIT_OK


def cmd_inspect(args) -> int:
    stream = deserialize(Path(args.input).read_bytes())
    counts = stream.step_counts()
    payload_bits = stream.payload_bits()
    head = header_bytes(stream)
    pixels = stream.width * stream.height
    print(f"width={stream.width}")
    print(f"height={stream.height}")
    print(f"mode={stream.mode}")
    for level in (1, 2, 3, 4):
        print(f"level{level}_pool={len(stream.pools[level - 1])}")
        print(f"level{level}_stride={stream.strides[level - 1]}")
        print(f"level{level}_address_bits={stream.address_bits(level)}")
        print(f"level{level}_s_bits={stream.s_bits(level)}")
        print(f"level{level}_s_set=" + ",".join(f"{s:g}" for s in stream.s_sets[level - 1]))
    for level in (1, 2, 3, 4):
        print(f"step{level}_records={counts[level - 1]}")
    print(f"records={len(stream.records)}")
    print(f"payload_bits={payload_bits}")
    print(f"header_bytes={head}")
    print(f"bpp_payload={payload_bits / pixels:.6f}")
    print(f"bpp_total={(head * 8 + payload_bits) / pixels:.6f}")
    return EXIT_OK


def _corpus_paths(corpus_dir) -> list[Path]:
    paths = sorted(Path(corpus_dir).glob("*.pgm"))
    if not paths:
        raise ValueError(f"no .pgm files in {corpus_dir}")
    return paths


def _run_corpus(args, runner) -> int:
    settings = resolve_settings(args)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    failures = 0
    for path in _corpus_paths(args.corpus):
        try:
            image = _load_input(path, settings["crop"])
            runner(path.stem, image, settings, out_dir)
        except (PgmError, StreamError, PoolConfigError, ValueError) as exc:
            failures += 1
            print(f"error file={path.name} message={exc}", file=sys.stderr)
    return EXIT_DATA if failures else EXIT_OK


def cmd_sweep(args) -> int:
    def run(stem, image, settings, out_dir):
        rows = sweep(image, settings["dn_list"], encoder_config(settings))
        out = out_dir / f"sweep_{stem}.csv"
        write_csv(out, rows)
        print(f"wrote={out}")

    return _run_corpus(args, run)


def cmd_shist(args) -> int:
    def run(stem, image, settings, out_dir):
        all_rows = []
        for dn in settings["dn_list"]:
            cfg = EncoderConfig(
                pool=PoolParams(pool_cap=int(dn), strides=settings["strides"]),
                policy=SPolicy(mode=BASELINE),
                thresholds=settings["thresholds"],
            )
            all_rows.extend(shist_rows(s_histogram(image, cfg)))
        out = out_dir / f"shist_{stem}.csv"
        write_csv(out, all_rows, columns=SHIST_COLUMNS)
        print(f"wrote={out}")

    return _run_corpus(args, run)


def cmd_bench(args) -> int:
    def run(stem, image, settings, out_dir):
        rows = bench_compare(
            image,
            settings["dn_list"],
            encoder_config(settings, mode=BASELINE),
            encoder_config(settings, mode=PROPOSED),
        )
        out = out_dir / f"bench_{stem}.csv"
        write_csv(out, rows)
        print(f"wrote={out}")

    return _run_corpus(args, run)


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--mode", choices=(BASELINE, PROPOSED), help="search mode (default proposed)")
    parser.add_argument("--dn", type=int, help="domain pool size per level (default 256)")
    parser.add_argument("--thresholds", help="T1,T2,T3 RMS split thresholds (default 8,8,8)")
    parser.add_argument("--strides", help="per-level domain lattice strides (default 8,4,2,2)")
    parser.add_argument("--iterations", type=int, help="decoder iteration cap (default 15)")
    parser.add_argument("--tolerance", type=int, help="decoder stop tolerance (default 0)")
    parser.add_argument("--threads", type=int, help="worker threads (default: hardware)")
    parser.add_argument("--crop", action="store_true", default=None,
                        help="center-crop inputs to a multiple of 16")
    parser.add_argument("--config", help="key=value settings file")


def build_parser() -> _Parser:
    parser = _Parser(prog="fracodec", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("encode", help="compress a PGM image")
    p.add_argument("input")
    p.add_argument("output")
    _add_common(p)
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("decode", help="decompress to a PGM image")
    p.add_argument("input")
    p.add_argument("output")
    _add_common(p)
    p.set_defaults(func=cmd_decode)

    p = sub.add_parser("inspect", help="dump a compressed file's structure")
    p.add_argument("input")
    p.set_defaults(func=cmd_inspect)

    for name, func, help_text in (
        ("sweep", cmd_sweep, "rate/quality/time versus pool size"),
        ("shist", cmd_shist, "histograms of the winning contrast slope"),
        ("bench", cmd_bench, "baseline versus proposed comparison table"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("corpus", help="directory of .pgm files")
        p.add_argument("--out", default=".", help="output directory for CSV files")
        p.add_argument("--dn-list", dest="dn_list", help="comma-separated pool sizes")
        _add_common(p)
        p.set_defaults(func=func)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except (PgmError, StreamError, PoolConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
