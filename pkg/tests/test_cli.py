import subprocess
import sys

import numpy as np
import pytest

import fracodec as fc
from fracodec.cli import main

from conftest import tiled_noise_image


def _parse_report(text: str) -> dict:
    out = {}
    for line in text.strip().splitlines():
        key, _, value = line.partition("=")
        out[key] = value
    return out


@pytest.fixture()
def sample_pgm(tmp_path, rng):
    path = tmp_path / "sample.pgm"
    fc.save_pgm(tiled_noise_image(rng), path)
    return path


def _cli(capsys, *argv) -> tuple[int, dict, str]:
    code = main([str(a) for a in argv])
    captured = capsys.readouterr()
    return code, _parse_report(captured.out), captured.err


def test_encode_decode_roundtrip(tmp_path, sample_pgm, capsys):
    frak = tmp_path / "out.frak"
    back = tmp_path / "back.pgm"
    code, report, _ = _cli(capsys, "encode", sample_pgm, frak, "--dn", "8")
    assert code == 0
    assert int(report["records"]) >= 16
    assert float(report["comp_ratio_payload"]) > 1.0

    code, report, _ = _cli(capsys, "decode", frak, back)
    assert code == 0
    assert int(report["iterations"]) <= 15
    assert int(report["final_delta"]) == 0
    decoded = fc.load_pgm(back)
    assert (decoded.width, decoded.height) == (64, 64)


def test_decode_twice_is_identical(tmp_path, sample_pgm, capsys):
    frak = tmp_path / "out.frak"
    assert _cli(capsys, "encode", sample_pgm, frak, "--dn", "8")[0] == 0
    out1 = tmp_path / "a.pgm"
    out2 = tmp_path / "b.pgm"
    assert _cli(capsys, "decode", frak, out1)[0] == 0
    assert _cli(capsys, "decode", frak, out2)[0] == 0
    assert out1.read_bytes() == out2.read_bytes()


def test_inspect_reports_structure(tmp_path, sample_pgm, capsys):
    frak = tmp_path / "out.frak"
    _cli(capsys, "encode", sample_pgm, frak, "--dn", "64")
    code, report, _ = _cli(capsys, "inspect", frak)
    assert code == 0
    # address width follows the actual pool length; the 64x64 input caps
    # level 1 at its 25 candidates while level 4 reaches the full 64
    for level in (1, 2, 3, 4):
        pool_len = int(report[f"level{level}_pool"])
        assert int(report[f"level{level}_address_bits"]) == (pool_len - 1).bit_length()
    assert report["level4_pool"] == "64"
    assert report["level4_address_bits"] == "6"
    counts = [int(report[f"step{i}_records"]) for i in (1, 2, 3, 4)]
    assert sum(counts) == int(report["records"])
    covered = sum(c * s * s for c, s in zip(counts, (16, 8, 4, 2)))
    assert covered == 64 * 64


def test_flat_image_report(tmp_path, capsys):
    path = tmp_path / "flat.pgm"
    fc.save_pgm(fc.GrayImage.full(64, 64, 128), path)
    frak = tmp_path / "flat.frak"
    code, report, _ = _cli(capsys, "encode", path, frak, "--dn", "4")
    assert code == 0
    assert report["step1_blocks"] == "16"
    assert report["step2_blocks"] == report["step3_blocks"] == report["step4_blocks"] == "0"


def test_bad_dimensions_without_crop(tmp_path, capsys):
    path = tmp_path / "odd.pgm"
    fc.save_pgm(fc.GrayImage.full(72, 64, 10), path)
    code, _, err = _cli(capsys, "encode", path, tmp_path / "x.frak")
    assert code == 2
    assert "not multiple of 16" in err


def test_crop_flag_accepts_odd_dimensions(tmp_path, capsys):
    path = tmp_path / "odd.pgm"
    fc.save_pgm(fc.GrayImage.full(72, 64, 10), path)
    frak = tmp_path / "x.frak"
    code, report, _ = _cli(capsys, "encode", path, frak, "--crop", "--dn", "4")
    assert code == 0
    assert report["width"] == "64"


def test_corrupt_stream_is_data_error(tmp_path, capsys):
    bad = tmp_path / "bad.frak"
    bad.write_bytes(b"NOPE" + bytes(64))
    code, _, err = _cli(capsys, "decode", bad, tmp_path / "y.pgm")
    assert code == 2
    assert "magic" in err


def test_missing_input_is_io_error(tmp_path, capsys):
    code, _, _ = _cli(capsys, "encode", tmp_path / "none.pgm", tmp_path / "x.frak")
    assert code == 3


def test_usage_error_exit_code(capsys):
    assert main(["transmogrify"]) == 1


def test_help_documents_flags(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["encode", "--help"])
    assert exc.value.code == 0
    text = capsys.readouterr().out
    for flag in ("--mode", "--dn", "--thresholds", "--strides", "--iterations",
                 "--tolerance", "--threads", "--crop", "--config"):
        assert flag in text


def test_config_file_and_flag_precedence(tmp_path, sample_pgm, capsys):
    cfg = tmp_path / "settings.cfg"
    cfg.write_text("dn=4\nmode=baseline\n# comment\nthresholds=6,6,6\n")
    frak = tmp_path / "out.frak"
    code, report, _ = _cli(
        capsys, "encode", sample_pgm, frak, "--config", cfg, "--dn", "8"
    )
    assert code == 0
    assert report["mode"] == "baseline"  # from config file
    assert report["pool_cap"] == "8"  # flag overrides config
    assert report["thresholds"] == "6,6,6"


def test_config_file_rejects_unknown_keys(tmp_path, sample_pgm, capsys):
    cfg = tmp_path / "settings.cfg"
    cfg.write_text("dn=4\nwarp_speed=9\n")
    code, _, err = _cli(capsys, "encode", sample_pgm, tmp_path / "x.frak", "--config", cfg)
    assert code == 2
    assert "warp_speed" in err


def test_sweep_writes_csv(tmp_path, sample_pgm, capsys):
    corpus = tmp_path / "corpus"
    corpus.mkdir()
    fc.save_pgm(fc.load_pgm(sample_pgm), corpus / "one.pgm")
    out = tmp_path / "results"
    code, report, _ = _cli(
        capsys, "sweep", corpus, "--out", out, "--dn-list", "4,8"
    )
    assert code == 0
    lines = (out / "sweep_one.csv").read_text().strip().splitlines()
    assert len(lines) == 3  # header + 2 pool sizes


def test_bench_writes_paired_rows(tmp_path, sample_pgm, capsys):
    corpus = tmp_path / "corpus"
    corpus.mkdir()
    fc.save_pgm(fc.load_pgm(sample_pgm), corpus / "one.pgm")
    out = tmp_path / "results"
    code, _, _ = _cli(capsys, "bench", corpus, "--out", out, "--dn-list", "4")
    assert code == 0
    lines = (out / "bench_one.csv").read_text().strip().splitlines()
    assert len(lines) == 3  # header + baseline + proposed


def test_shist_writes_csv(tmp_path, sample_pgm, capsys):
    corpus = tmp_path / "corpus"
    corpus.mkdir()
    fc.save_pgm(fc.load_pgm(sample_pgm), corpus / "one.pgm")
    out = tmp_path / "results"
    code, _, _ = _cli(capsys, "shist", corpus, "--out", out, "--dn-list", "4")
    assert code == 0
    header = (out / "shist_one.csv").read_text().splitlines()[0]
    assert header.split(",") == [
        "pool_size", "level", "bin_low", "bin_high", "raw_count", "clamped_count"
    ]


def test_empty_corpus_is_error(tmp_path, capsys):
    corpus = tmp_path / "corpus"
    corpus.mkdir()
    code, _, _ = _cli(capsys, "sweep", corpus, "--out", tmp_path)
    assert code == 2


def test_console_entry_point(tmp_path, sample_pgm):
    frak = tmp_path / "out.frak"
    proc = subprocess.run(
        [sys.executable, "-m", "fracodec.cli", "encode", str(sample_pgm), str(frak),
         "--dn", "4"],
        capture_output=True,
        text=True,
        timeout=300,
    )
    assert proc.returncode == 0, proc.stderr
    assert frak.exists()
