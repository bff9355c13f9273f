#!/usr/bin/env python3
"""Generate the 512x512 grayscale test fixtures.

The canonical photographic test images are not redistributable, so the test
suite ships synthetic stand-ins tuned to exercise the codec the same way: a
portrait-like image (mostly smooth with limited detail), a moderate-detail
scene, a fur-like high-frequency texture, and a piecewise-smooth image with a
hard-edged silhouette.

Anatomy shared by all four images:

* Ramp strip (top-left): two wrapped diagonal ramp bands inside a flat
  apron, a steep one (slope 16,56) and a gentle one (slope 4,14). Their raw
  histograms out-rank all other content, so the entropy-ranked domain pools
  draw exclusively from the strip at every level and every tested pool size.
  The steep band repeats every few pixels and saturates the deep-level
  pools; the gentle band's wrap period is incommensurate with the lattice,
  so its windows form ~200 genuinely distinct patterns and the level-2 pool
  covers them progressively as the cap grows. Block matches inside the
  strip either hit an exact half-contrast copy (steep band, the level-4
  contrast 0.5 maps its decimated tiles onto itself with integer margins)
  or climb toward steeper content, so decoding settles to an exact fixed
  point in a few passes and everything else reads only settled pixels.

* Echo patches: rectangles tiled with contrast-scaled copies of strip
  domain tiles, using scale factors from the per-level contrast sets.
  Steep-band echoes (always matchable) supply cheap exactly-codable mass
  that sets the rate/quality operating point; gentle-band echoes only code
  shallowly once the pool covers their source window, adding to the
  pool-size trend the sweeps measure.

* Posterized canvas: multi-scale filtered noise quantized to 8-level steps
  with sharp detail clipped, giving plateaus and contours while capping the
  gray-level diversity of any neighborhood so texture never out-ranks the
  strip in the pools.

Regenerating requires scipy (not a package dependency). Outputs are
deterministic for a given seed and are committed under tests/fixtures/.

Usage:
    python tools/make_fixtures.py [--out tests/fixtures] [--probe]
"""

import argparse
import sys
from pathlib import Path

import numpy as np
from scipy.ndimage import gaussian_filter

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

import fracodec as fc
from fracodec.image import decimate_tile

SIZE = 512
APRON = 16
CORE_W = 88
# quiet band (near-flat, pool presence via dither), steep keystone, gentle
# phase-graded band
BANDS = (((0.5, 1.5), 40), ((16, 56), 24), ((4, 14), 232))
QUIET, STEEP, GENTLE = 0, 1, 2
WRAP = 224.0
CORE_H = sum(rows for _, rows in BANDS)
STRIP_W = CORE_W + 2 * APRON
STRIP_H = CORE_H + 2 * APRON
CANVAS_STEP = 8.0


def _unit(field):
    return (field - field.mean()) / (field.std() + 1e-12)


def _gate(rng, sigma, lo, width):
    e = _unit(gaussian_filter(rng.standard_normal((SIZE, SIZE)), sigma))
    return np.clip((e - lo) / width, 0.0, 1.0)


def _band_values(index):
    (a, b), rows = BANDS[index]
    cy, cx = np.mgrid[0:rows, 0:CORE_W]
    t = a * cx + b * cy
    if index == STEEP:
        # sawtooth; the wrap periods are multiples of the block lattice, so
        # no 2x2 leaf ever straddles a cliff
        return (t % WRAP) + 16.0
    if index == QUIET:
        return 120.0 + t
    # gentle band: triangle wave, cliff-free; descending segments are the
    # mirror isometries of ascending ones
    return np.abs((t % (2 * WRAP)) - WRAP) + 16.0


def _gentle_dither():
    """Zero-sum 2x2-cell dither whose amplitude fades down the gentle band.

    Decimation cancels it exactly, so domain tiles and matching are
    untouched; it only raises the raw histogram entropy of upper rows so the
    pool admits the band's window phases in top-down row order, spreading
    the phase coverage (hence the rate/quality gains) evenly across pool
    sizes instead of in one late burst.
    """
    rows = BANDS[GENTLE][1]
    rng = np.random.default_rng(90210)
    d = np.zeros((rows, CORE_W))
    for cy in range(rows // 2):
        amp = 6.0 * max(0.0, 1.0 - (2 * cy) / (0.9 * rows))
        if amp < 0.5:
            break
        for cx in range(CORE_W // 2):
            p = amp * float(rng.random())
            q = amp * float(rng.random())
            s1 = 1.0 if rng.random() < 0.5 else -1.0
            s2 = 1.0 if rng.random() < 0.5 else -1.0
            d[2 * cy, 2 * cx], d[2 * cy, 2 * cx + 1] = s1 * p, s2 * q
            d[2 * cy + 1, 2 * cx], d[2 * cy + 1, 2 * cx + 1] = -s1 * p, -s2 * q
    return np.rint(d)


def _quiet_dither():
    """Zero-sum dither from a five-value set for the near-flat band.

    It vanishes under decimation, so the band's domain tiles stay almost
    flat and give smooth range blocks a reconstruction without ramp texture.
    The values are chosen so 16x16 windows out-rank the gentle band (the
    band must be in every pool) while 4x4 windows stay clearly below the
    steep band's saturated level-4 entries.
    """
    rows = BANDS[QUIET][1]
    rng = np.random.default_rng(31337)
    values = (0.0, 7.0, 13.0)
    d = np.zeros((rows, CORE_W))
    for cy in range(rows // 2):
        for cx in range(CORE_W // 2):
            p = float(rng.choice(values))
            q = float(rng.choice(values))
            s1 = 1.0 if rng.random() < 0.5 else -1.0
            s2 = 1.0 if rng.random() < 0.5 else -1.0
            d[2 * cy, 2 * cx], d[2 * cy, 2 * cx + 1] = s1 * p, s2 * q
            d[2 * cy + 1, 2 * cx], d[2 * cy + 1, 2 * cx + 1] = -s1 * p, -s2 * q
    return d


def stamp_strip(img, mask):
    img[0:STRIP_H, 0:STRIP_W] = 128.0
    bands = [_band_values(i) for i in range(len(BANDS))]
    bands[QUIET] = np.clip(bands[QUIET] + _quiet_dither(), 0, 255)
    bands[GENTLE] = np.clip(bands[GENTLE] + _gentle_dither(), 0, 255)
    img[APRON : APRON + CORE_H, APRON : APRON + CORE_W] = np.vstack(bands)
    mask[0:STRIP_H, 0:STRIP_W] = True


def _half_field(index):
    """The band as level-2/3 domain tiles sample it (2x2 floor means)."""
    return decimate_tile(_band_values(index).astype(np.uint8)).astype(np.float64)


def paste_echoes(rng, img, mask, count, kappa, motif_side, size=32, steep=False,
                 v_band=None):
    """Rectangles tiled with a kappa-scaled window of a band's decimated
    field. kappa values from the per-level contrast sets make the blocks
    exactly codable at the level whose domain tile the motif copies; the
    gentle band's windows enter the pool progressively with the cap (its
    dither gradient orders them top-down, so ``v_band`` selects the pool
    sizes at which the echo starts matching), the steep band's immediately."""
    half = _half_field(STEEP if steep else GENTLE)
    hh, hw = half.shape
    v_lo, v_hi = v_band if v_band else (0, hh - motif_side)
    v_hi = min(v_hi, hh - motif_side)
    for _ in range(count):
        px = 16 * int(rng.integers((STRIP_W + 16) // 16, (SIZE - size) // 16 + 1))
        py = 16 * int(rng.integers(6, (SIZE - size) // 16 + 1))  # below the steep band
        u = 2 * int(rng.integers(0, (hw - motif_side) // 2 + 1))
        v = 2 * int(rng.integers(v_lo // 2, v_hi // 2 + 1))
        base = float(rng.integers(96, 160))
        win = half[v : v + motif_side, u : u + motif_side]
        cell = np.rint(kappa * (win - win.mean())) + base
        step = 8.0 if kappa >= 0.6 else 4.0
        cell = np.round(np.clip(cell, 8, 248) / step) * step
        reps = size // motif_side
        img[py : py + size, px : px + size] = np.tile(cell, (reps, reps))
        mask[py : py + size, px : px + size] = True


def layered_canvas(rng, mean, base, mid, fine, xfine, checker=None):
    field = np.zeros((SIZE, SIZE))
    for sigma, amp, gate in (base, mid):
        if amp:
            det = amp * _unit(gaussian_filter(rng.standard_normal((SIZE, SIZE)), sigma))
            if gate is not None:
                det = det * _gate(rng, *gate)
            field += det
    sharp = np.zeros((SIZE, SIZE))
    for sigma, amp, gate in (fine, xfine):
        if amp:
            det = amp * _unit(gaussian_filter(rng.standard_normal((SIZE, SIZE)), sigma))
            if gate is not None:
                det = det * _gate(rng, *gate)
            sharp += det
    if checker is not None:
        # pixel-scale alternating-sign texture: diagonal 2x2 patterns that no
        # monotone ramp cell reproduces under any isometry, so coding error
        # scales with the amplitude (the fur-like worst case)
        amp, gate = checker
        yy, xx = np.mgrid[0:SIZE, 0:SIZE]
        signs = 1.0 - 2.0 * ((xx + yy) & 1)
        mag = np.abs(_unit(gaussian_filter(rng.standard_normal((SIZE, SIZE)), 0.8)))
        sharp += amp * signs * mag * _gate(rng, *gate)
    field += np.clip(sharp, -56.0, 56.0)
    return np.round(np.clip(mean + field, 8, 248) / CANVAS_STEP) * CANVAS_STEP


FIXTURES = {
    "lena": dict(
        seed=71021,
        mean=120.0,
        base=(26.0, 10.0, None),
        mid=(5.0, 7.0, (40.0, 0.3, 1.1)),
        fine=(1.2, 11.0, (30.0, 1.6, 0.7)),
        xfine=(0.65, 8.0, (24.0, 1.9, 0.6)),
        checker=(15.0, (24.0, 1.3, 0.7)),
        echoes=((30, 0.3, 4), (22, 0.4, 8), (12, 0.2, 8)),
    ),
    "boat": dict(
        seed=71002,
        mean=120.0,
        base=(24.0, 11.0, None),
        mid=(4.5, 8.0, (38.0, 0.2, 1.0)),
        fine=(1.2, 13.0, (28.0, 1.5, 0.6)),
        xfine=(0.6, 9.0, (24.0, 1.8, 0.5)),
        checker=(27.0, (24.0, 1.15, 0.25)),
        echoes=((28, 0.3, 4), (20, 0.4, 8), (8, 0.2, 8)),
    ),
    "baboon": dict(
        seed=71003,
        mean=124.0,
        base=(18.0, 8.0, None),
        mid=(4.0, 9.0, (34.0, 0.55, 0.75)),
        fine=(1.0, 10.0, (30.0, 0.7, 0.6)),
        xfine=(0.55, 0.0, None),
        checker=(64.0, (26.0, 0.80, 0.05)),
        echoes=((12, 0.3, 4), (30, 0.8, 4)),
    ),
}


def _apply_echoes(rng, img, mask, recipes):
    # motifs copy the domain tile of the level their kappa belongs to:
    # 8x8 tiles for level 2 (kappa 0.2/0.4), 4x4 for level 3 (0.3/0.8),
    # 2x2 for level 4 (0.5/0.9). Levels 2-3 pools hold the gentle band,
    # level 4 the steep band. Sources come from the band rows whose pool
    # rank sits in the middle of the swept cap range.
    for count, kappa, motif_side in recipes:
        paste_echoes(rng, img, mask, count, kappa, motif_side,
                     steep=(motif_side == 2), v_band=(4, 18))


def make_textured(name):
    p = FIXTURES[name]
    rng = np.random.default_rng(p["seed"])
    img = layered_canvas(rng, p["mean"], p["base"], p["mid"], p["fine"], p["xfine"],
                         p["checker"])
    mask = np.zeros((SIZE, SIZE), dtype=bool)
    _apply_echoes(rng, img, mask, p["echoes"])
    stamp_strip(img, mask)
    return fc.GrayImage(np.clip(img, 0, 255).astype(np.uint8)), mask


def make_f16(seed=71004):
    rng = np.random.default_rng(seed)
    yy, xx = np.mgrid[0:SIZE, 0:SIZE] / SIZE
    sky = 196.0 - 44.0 * yy + 4.5 * _unit(
        gaussian_filter(rng.standard_normal((SIZE, SIZE)), 48.0)
    )

    def bar(cx, cy, angle, half_w, half_l):
        ca, sa = np.cos(angle), np.sin(angle)
        u = (xx - cx) * ca + (yy - cy) * sa
        v = -(xx - cx) * sa + (yy - cy) * ca
        return (np.abs(u) < half_l) & (np.abs(v) < half_w)

    silhouette = (
        bar(0.60, 0.55, 0.28, 0.050, 0.28)
        | bar(0.58, 0.57, 1.32, 0.036, 0.20)
        | bar(0.46, 0.47, 0.95, 0.020, 0.10)
    )
    detail = 6.5 * _unit(gaussian_filter(rng.standard_normal((SIZE, SIZE)), 2.5))
    detail += np.clip(
        4.0 * _unit(gaussian_filter(rng.standard_normal((SIZE, SIZE)), 0.9)), -56, 56
    )
    plane = 122.0 + 11.0 * _unit(
        gaussian_filter(rng.standard_normal((SIZE, SIZE)), 8.0)
    ) + detail
    img = np.where(silhouette, plane, sky)
    g = np.mgrid[0:SIZE, 0:SIZE]
    signs = 1.0 - 2.0 * ((g[0] + g[1]) & 1)
    mag = np.abs(_unit(gaussian_filter(rng.standard_normal((SIZE, SIZE)), 0.8)))
    img = img + np.clip(11.0 * signs * mag * _gate(rng, 24.0, 1.5, 0.2), -56, 56)
    img = np.round(np.clip(img, 8, 248) / CANVAS_STEP) * CANVAS_STEP
    mask = np.zeros((SIZE, SIZE), dtype=bool)
    _apply_echoes(rng, img, mask, ((28, 0.3, 4), (22, 0.4, 8), (10, 0.2, 8)))
    stamp_strip(img, mask)
    return fc.GrayImage(np.clip(img, 0, 255).astype(np.uint8)), mask


def build(name):
    if name == "f16":
        return make_f16()
    return make_textured(name)


NAMES = ("lena", "boat", "baboon", "f16")


def probe(name, image, mask):
    for dn in (32, 64, 144, 256):
        stream, rep = fc.encode(image, fc.EncoderConfig(pool=fc.PoolParams(pool_cap=dn)))
        capture = all(
            bool(mask[y : y + side, x : x + side].all())
            for level, side in zip((1, 2, 3, 4), (32, 16, 8, 4))
            for (x, y) in stream.pools[level - 1]
        )
        decoded, deltas = fc.decode_trace(stream)
        print(
            f"  {name:8s} dn={dn:3d} capture={capture} psnr={fc.psnr(image, decoded):6.2f} "
            f"ratio={rep.comp_ratio_payload:6.2f} steps={rep.step_blocks} "
            f"iters={len(deltas):2d} final={deltas[-1]}"
        )


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out", default="tests/fixtures")
    parser.add_argument("--probe", action="store_true")
    args = parser.parse_args(argv)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for name in NAMES:
        image, mask = build(name)
        fc.save_pgm(image, out / f"{name}.pgm")
        print(f"wrote {out / f'{name}.pgm'}")
        if args.probe:
            probe(name, image, mask)


if __name__ == "__main__":
    main()
