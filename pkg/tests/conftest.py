import numpy as np
import pytest

from pathlib import Path

import fracodec as fc

FIXTURE_DIR = Path(__file__).parent / "fixtures"
FIXTURE_NAMES = ("lena", "boat", "baboon", "f16")

# Split thresholds frozen for the acceptance suite (RMS gray levels per
# pixel, shared by both search modes and all fixture images).
FROZEN_THRESHOLDS = (8.0, 8.0, 8.0)


def tiled_noise_image(rng, size=64, cell=8, noise=4.0) -> fc.GrayImage:
    """Blocky random image with mild noise: compressible but not trivial."""
    base = rng.integers(30, 226, (size // cell, size // cell)).astype(np.float64)
    img = np.kron(base, np.ones((cell, cell)))
    img += rng.normal(0.0, noise, img.shape)
    return fc.GrayImage(np.clip(img, 0, 255).astype(np.uint8))


@pytest.fixture(scope="session")
def fixture_images():
    images = {}
    for name in FIXTURE_NAMES:
        path = FIXTURE_DIR / f"{name}.pgm"
        if not path.exists():
            pytest.fail(f"missing test asset {path}; run tools/make_fixtures.py")
        images[name] = fc.load_pgm(path)
    return images


@pytest.fixture(scope="session", autouse=True)
def warm_kernels():
    """Compile the scan kernel before any timed test runs."""
    rng = np.random.default_rng(7)
    image = tiled_noise_image(rng, size=32, cell=4)
    for mode in (fc.BASELINE, fc.PROPOSED):
        cfg = fc.EncoderConfig(
            pool=fc.PoolParams(pool_cap=4), policy=fc.SPolicy(mode=mode)
        )
        stream, _ = fc.encode(image, cfg)
        fc.decode(stream, iterations=2)


@pytest.fixture()
def rng():
    return np.random.default_rng(1234)
