import csv

import numpy as np
import pytest

import fracodec as fc
from fracodec.bench import CSV_COLUMNS, SHIST_COLUMNS, shist_rows, write_csv

from conftest import tiled_noise_image


def _config(dn=8, mode=fc.PROPOSED):
    return fc.EncoderConfig(pool=fc.PoolParams(pool_cap=dn), policy=fc.SPolicy(mode=mode))


def test_sweep_emits_one_row_per_pool_size(rng):
    image = tiled_noise_image(rng)
    rows = fc.sweep(image, [4, 8], _config())
    assert [r["pool_size"] for r in rows] == [4, 8]
    assert all(set(r) == set(CSV_COLUMNS) for r in rows)


def test_sweep_handles_degenerate_pool(rng):
    image = tiled_noise_image(rng)
    rows = fc.sweep(image, [1], _config())
    assert len(rows) == 1
    assert np.isfinite(rows[0]["psnr_db"])


def test_sweep_is_deterministic_modulo_time(rng):
    image = tiled_noise_image(rng)
    a = fc.sweep(image, [4], _config())
    b = fc.sweep(image, [4], _config())
    keys = [k for k in CSV_COLUMNS if not k.endswith("_time_s")]
    assert [{k: r[k] for k in keys} for r in a] == [{k: r[k] for k in keys} for r in b]


def test_bench_compare_pairs_rows(rng):
    image = tiled_noise_image(rng)
    rows = fc.bench_compare(image, [4], _config(mode=fc.BASELINE), _config(mode=fc.PROPOSED))
    assert [r["mode"] for r in rows] == ["baseline", "proposed"]
    assert rows[0]["pool_size"] == rows[1]["pool_size"] == 4


def test_bench_compare_rejects_mismatched_strides(rng):
    image = tiled_noise_image(rng)
    base = _config(mode=fc.BASELINE)
    other = fc.EncoderConfig(
        pool=fc.PoolParams(pool_cap=8, strides=(16, 8, 4, 2)), policy=fc.SPolicy()
    )
    with pytest.raises(ValueError):
        fc.bench_compare(image, [4], base, other)


def test_csv_writer_emits_exact_header(tmp_path, rng):
    image = tiled_noise_image(rng)
    rows = fc.sweep(image, [4], _config())
    out = tmp_path / "rows.csv"
    write_csv(out, rows)
    with open(out, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        assert header == list(CSV_COLUMNS)
        assert len(list(reader)) == 1


def test_s_histogram_constant_image_masses_at_zero():
    image = fc.GrayImage.full(64, 64, 90)
    hist = fc.s_histogram(image, _config())
    assert hist.coded_blocks == (16, 0, 0, 0)
    level1 = hist.raw_counts[0]
    zero_bin = int(np.searchsorted(hist.bin_edges, 0.0, side="right")) - 1
    assert level1[zero_bin] == 16
    assert level1.sum() == 16


def test_s_histogram_totals_match_coded_blocks(rng):
    image = tiled_noise_image(rng, size=64, cell=4, noise=10.0)
    hist = fc.s_histogram(image, _config(dn=16))
    for level in (1, 2, 3, 4):
        assert hist.raw_counts[level - 1].sum() == hist.coded_blocks[level - 1]
        assert hist.clamped_counts[level - 1].sum() == hist.coded_blocks[level - 1]


def test_s_histogram_clamped_mass_is_inside_unit_interval(rng):
    image = tiled_noise_image(rng, size=64, cell=4, noise=10.0)
    hist = fc.s_histogram(image, _config(dn=16))
    edges = hist.bin_edges
    outside = (edges[1:] <= 0.0) | (edges[:-1] >= 1.0 + 1e-12)
    assert hist.clamped_counts[:, outside].sum() == 0


def test_shist_rows_structure(rng):
    image = fc.GrayImage.full(64, 64, 90)
    rows = shist_rows(fc.s_histogram(image, _config()))
    assert len(rows) == 4 * (len(fc.s_histogram(image, _config()).bin_edges) - 1)
    assert all(set(r) == set(SHIST_COLUMNS) for r in rows)
    assert sum(r["raw_count"] for r in rows if r["level"] == 1) == 16
