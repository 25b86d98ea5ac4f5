"""Shared fixtures: a seeded synthetic 512x512 desk corpus and fixed keys.

The corpus images are smooth multi-octave noise fields with per-image
flavor (gradient, blob, waves, dark spot) so their low-band histograms are
broad and every embedding bin is populated, like natural photographs.
"""

import numpy as np
import pytest
from scipy.ndimage import zoom

from histomark import EmbedParams, GrayImage, WatermarkKey, embed

CORPUS_SEEDS = (11, 12, 13, 14, 15)

TEST_KEY_HEX = "000102030405060708090a0b0c0d0e0f"
TEST_NONCE = bytes(8)


def synth_image(seed: int, size: int = 512) -> GrayImage:
    rng = np.random.default_rng(seed)
    acc = np.zeros((size, size))
    for res, amp in ((4, 1.0), (16, 0.55), (64, 0.3)):
        grid = rng.standard_normal((res, res))
        acc += amp * zoom(grid, size / res, order=3)[:size, :size]
    kind = seed % 5
    yy, xx = np.meshgrid(np.linspace(-1, 1, size), np.linspace(-1, 1, size), indexing="ij")
    if kind == 1:
        acc += 0.8 * (xx + 0.3 * yy)
    elif kind == 2:
        acc += 0.7 * np.exp(-(xx**2 + yy**2) / 0.4)
    elif kind == 3:
        acc += 0.5 * np.sin(3 * np.pi * xx) * np.sin(2 * np.pi * yy)
    elif kind == 4:
        acc -= 0.6 * np.exp(-((xx - 0.4) ** 2 + (yy + 0.3) ** 2) / 0.2)
    acc = (acc - acc.mean()) / acc.std()
    return GrayImage(np.clip(np.rint(132.0 + 44.0 * acc), 0, 255))


@pytest.fixture(scope="session")
def corpus():
    return [synth_image(s) for s in CORPUS_SEEDS]


@pytest.fixture(scope="session")
def small_image():
    return synth_image(21, size=128)


@pytest.fixture(scope="session")
def test_key():
    return WatermarkKey(bytes.fromhex(TEST_KEY_HEX), TEST_NONCE)


@pytest.fixture(scope="session")
def default_params():
    return EmbedParams()


@pytest.fixture(scope="session")
def corpus_embeds(corpus, test_key, default_params):
    """Embed every corpus image once with the defaults; reused across tests."""
    return [embed(img, test_key, default_params) for img in corpus]
