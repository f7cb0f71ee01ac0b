"""Shared fixtures: random generators, synthetic datasets, and the
constructed-peak tuning fixture.
"""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np
import pytest
from scipy.ndimage import gaussian_filter

from haarpsi.image import encode_image

DATA_DIR = Path(__file__).parent / "data"
NATURAL_IMAGE = DATA_DIR / "natural_128.png"


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def quantize8(arr) -> np.ndarray:
    """Round to the 8-bit grid so arrays survive PNG round trips exactly."""
    return np.clip(np.rint(arr), 0, 255).astype(float)


def write_manifest(path, rows, header=("reference_path", "distorted_path", "mos", "database", "distortion")):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)
    return Path(path)


def textured_plane(rng, size=24, smooth=1.0) -> np.ndarray:
    base = gaussian_filter(rng.uniform(0, 255, (size, size)), smooth)
    lo, span = base.min(), np.ptp(base) + 1e-9
    return 30.0 + (base - lo) / span * 195.0


def distorted_variant(rng, base, mode, strength) -> np.ndarray:
    """One of eight distortion families at a given strength."""
    if mode == 0:
        return base + rng.normal(0, 10 * strength, base.shape)
    if mode == 1:
        return gaussian_filter(base, 0.9 * strength)
    if mode == 2:
        return 128 + (base - 128) * (1 - 0.25 * strength) + rng.normal(0, 2, base.shape)
    if mode == 3:
        step = 8 * strength
        return np.round(base / step) * step
    if mode == 4:
        return base + (base - gaussian_filter(base, 1.2)) * strength + rng.normal(0, 3, base.shape)
    if mode == 5:
        out = base.copy()
        r0, c0 = rng.integers(0, base.shape[0] - 8, 2)
        out[r0:r0 + 8, c0:c0 + 8] += rng.normal(0, 35 * strength, (8, 8))
        return out
    if mode == 6:
        return 255 * (base / 255) ** (1 + 0.4 * strength) + rng.normal(0, 2, base.shape)
    yy, xx = np.mgrid[0:base.shape[0], 0:base.shape[1]]
    return base + 12 * strength * np.sin(xx * rng.uniform(0.4, 1.2) + yy * rng.uniform(0.2, 0.8))


def synthetic_pairs(seed, count, size=24) -> list[tuple[np.ndarray, np.ndarray]]:
    """Diverse 8-bit-quantized (reference, distorted) pairs."""
    rng = np.random.default_rng(seed)
    pairs = []
    for k in range(count):
        base = textured_plane(rng, size, rng.uniform(0.6, 1.6))
        dist = distorted_variant(rng, base, k % 8, rng.uniform(0.5, 1.5))
        pairs.append((quantize8(base), quantize8(dist)))
    return pairs


@pytest.fixture(scope="session")
def pair_dataset(tmp_path_factory):
    """A small on-disk dataset: image pairs plus a manifest with mos values
    that decrease with distortion strength (two distortion labels)."""
    root = tmp_path_factory.mktemp("dataset")
    rng = np.random.default_rng(42)
    rows = []
    for k in range(10):
        base = quantize8(textured_plane(rng, 32))
        sigma = 4.0 + 6.0 * k
        if k % 2 == 0:
            dist = quantize8(base + rng.normal(0, sigma, base.shape))
            label = "noise"
        else:
            dist = quantize8(gaussian_filter(base, 0.3 + 0.12 * k))
            label = "blur"
        ref_path = root / f"ref_{k}.png"
        dist_path = root / f"dist_{k}.png"
        encode_image(ref_path, base)
        encode_image(dist_path, dist)
        rows.append([str(ref_path), str(dist_path), f"{100 - 7 * k:.6f}", "synthdb", label])
    manifest = write_manifest(root / "manifest.csv", rows)
    return {"root": root, "manifest": manifest, "rows": rows}


# Tuning fixture: mos equals the metric's own scores at the grid node
# (c=30, alpha=4.0); the pair set is chosen such that every other grid node
# flips at least one rank, making that node the unique surface maximum.
TUNER_FIXTURE_SEED = 1
TUNER_FIXTURE_PAIRS = 20
TUNER_FIXTURE_OPTIMUM = (30, 4.0)


@pytest.fixture(scope="session")
def tuner_fixture(tmp_path_factory):
    from haarpsi.filters import cached_filterbank
    from haarpsi.image import mean_pool_2x2
    from haarpsi.metric import gray_channel_responses, score_channels

    root = tmp_path_factory.mktemp("tuner_fixture")
    bank = cached_filterbank("haar", 3)
    c_opt, alpha_opt = TUNER_FIXTURE_OPTIMUM
    rows = []
    for k, (base, dist) in enumerate(synthetic_pairs(TUNER_FIXTURE_SEED, TUNER_FIXTURE_PAIRS)):
        ref_path = root / f"ref_{k}.png"
        dist_path = root / f"dist_{k}.png"
        encode_image(ref_path, base)
        encode_image(dist_path, dist)
        channels = gray_channel_responses(mean_pool_2x2(base), mean_pool_2x2(dist), bank)
        mos = score_channels(channels, float(c_opt), alpha_opt).score
        rows.append([str(ref_path), str(dist_path), f"{mos:.17g}", "peakdb", ""])
    manifest = write_manifest(root / "manifest.csv", rows)
    return {"manifest": manifest, "optimum": TUNER_FIXTURE_OPTIMUM}
