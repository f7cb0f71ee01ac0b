"""The HaarPSI perceptual similarity index and the PSNR baseline.

Both input images are halved in resolution (2x2 block means) before any
filtering. Local similarity maps come from the magnitudes of the two
finest-scale wavelet responses per orientation, passed through a logistic
nonlinearity; weight maps are third-scale response magnitudes combined by
per-pixel maximum. The pooled weighted average is mapped back through the
inverse logistic and squared, which spreads scores over [0, 1] without
changing their rank order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .filters import FilterBank, cached_filterbank, convolve2d_same, get_wavelet
from .image import as_color, as_plane, encode_image, mean_pool_2x2, rgb_to_yiq

#: 2x2 mean filter applied to the chroma planes of the color variant.
CHROMA_MEAN_FILTER = np.full((2, 2), 0.25)


@dataclass(frozen=True)
class MetricParams:
    """Configuration of one similarity-index instance.

    `c` stabilizes the scalar similarity ratio (intensity-squared units,
    calibrated against the 8-bit range); `alpha` is the logistic steepness.
    """

    c: float = 30.0
    alpha: float = 4.2
    wavelet: str = "haar"

    def __post_init__(self):
        if not (self.c > 0):
            raise ValueError(f"c must be positive, got {self.c}")
        if not (self.alpha > 0):
            raise ValueError(f"alpha must be positive, got {self.alpha}")
        get_wavelet(self.wavelet)


@dataclass
class ScoreResult:
    """Scalar similarity in [0, 1] plus optional per-pixel maps."""

    score: float
    degenerate_weights: bool = False
    similarity_maps: list[np.ndarray] | None = None
    weight_maps: list[np.ndarray] | None = None


@dataclass(frozen=True)
class ChannelResponses:
    """Per-channel inputs to pooling: band magnitude pairs and a weight map.

    `band_pairs` holds (reference, distorted) response-magnitude arrays for
    the similarity bands; `weight` is the already-combined weight map. These
    depend only on the images and the wavelet, not on (c, alpha), so they
    can be cached when scanning parameters.
    """

    band_pairs: tuple[tuple[np.ndarray, np.ndarray], ...]
    weight: np.ndarray


def scalar_similarity(a, b, c):
    """Similarity (2ab + c) / (a^2 + b^2 + c) of nonnegative magnitudes.

    Accepts scalars or arrays. Lies in (0, 1] and equals 1 exactly when
    a == b.
    """
    return (2.0 * a * b + c) / (a * a + b * b + c)


def logistic(x, alpha):
    """Logistic function 1 / (1 + exp(-alpha * x))."""
    return 1.0 / (1.0 + np.exp(-alpha * x))


def logistic_inverse(y, alpha):
    """Inverse of `logistic`; defined for y strictly inside (0, 1)."""
    arr = np.asarray(y, dtype=np.float64)
    if np.any(arr <= 0.0) or np.any(arr >= 1.0):
        raise ValueError("logistic_inverse requires values strictly inside (0, 1)")
    out = np.log(arr / (1.0 - arr)) / alpha
    return float(out) if np.isscalar(y) or arr.ndim == 0 else out


def _magnitude(plane: np.ndarray, taps: np.ndarray) -> np.ndarray:
    return np.abs(convolve2d_same(plane, taps))


def local_similarity_map(f1, f2, orientation: int, bank: FilterBank,
                         params: MetricParams = MetricParams()) -> np.ndarray:
    """Logistic-mapped mean similarity of the two finest-scale responses.

    `orientation` selects the filters: 1 responds to horizontal structure,
    2 to vertical. Inputs are planes at working (already halved) resolution.
    """
    p1, p2 = as_plane(f1), as_plane(f2)
    if p1.shape != p2.shape:
        raise ValueError(f"dimension mismatch: {p1.shape} vs {p2.shape}")
    if bank.levels < 2:
        raise ValueError("filter bank needs at least 2 scales")
    taps = _orientation_filters(bank, orientation)
    acc = None
    for j in (0, 1):
        s = scalar_similarity(_magnitude(p1, taps[j]), _magnitude(p2, taps[j]), params.c)
        acc = s if acc is None else acc + s
    return logistic(0.5 * acc, params.alpha)


def weight_map(f, orientation: int, bank: FilterBank) -> np.ndarray:
    """Third-scale response magnitude used to weight local similarities."""
    plane = as_plane(f)
    if bank.levels < 3:
        raise ValueError("filter bank needs at least 3 scales")
    return _magnitude(plane, _orientation_filters(bank, orientation)[2])


def _orientation_filters(bank: FilterBank, orientation: int):
    if orientation == 1:
        return bank.horizontal
    if orientation == 2:
        return bank.vertical
    raise ValueError(f"orientation must be 1 or 2, got {orientation}")


def gray_channel_responses(f1, f2, bank: FilterBank) -> list[ChannelResponses]:
    """Response magnitudes and weights for a pair of working-size planes."""
    channels = []
    for taps in (bank.horizontal, bank.vertical):
        pairs = tuple((_magnitude(f1, taps[j]), _magnitude(f2, taps[j])) for j in (0, 1))
        weight = np.maximum(_magnitude(f1, taps[2]), _magnitude(f2, taps[2]))
        channels.append(ChannelResponses(pairs, weight))
    return channels


def color_channel_responses(rgb1, rgb2, bank: FilterBank) -> list[ChannelResponses]:
    """Channels for a color pair: two luminance orientations plus chroma."""
    y1, i1, q1 = rgb_to_yiq(rgb1)
    y2, i2, q2 = rgb_to_yiq(rgb2)
    y1, y2 = mean_pool_2x2(y1), mean_pool_2x2(y2)
    i1, i2 = mean_pool_2x2(i1), mean_pool_2x2(i2)
    q1, q2 = mean_pool_2x2(q1), mean_pool_2x2(q2)

    channels = gray_channel_responses(y1, y2, bank)
    chroma_pairs = (
        (_magnitude(i1, CHROMA_MEAN_FILTER), _magnitude(i2, CHROMA_MEAN_FILTER)),
        (_magnitude(q1, CHROMA_MEAN_FILTER), _magnitude(q2, CHROMA_MEAN_FILTER)),
    )
    chroma_weight = 0.5 * (channels[0].weight + channels[1].weight)
    channels.append(ChannelResponses(chroma_pairs, chroma_weight))
    return channels


def score_channels(channels: list[ChannelResponses], c: float, alpha: float,
                   want_maps: bool = False) -> ScoreResult:
    """Pool prepared channel responses into the final similarity score.

    If every weight is zero (no third-scale structure in either image) the
    weighted average degenerates to 0/0; the unweighted mean of the local
    similarities is used instead and the result is flagged.
    """
    hs_maps = []
    numerator = 0.0
    denominator = 0.0
    for channel in channels:
        acc = None
        for a, b in channel.band_pairs:
            s = scalar_similarity(a, b, c)
            acc = s if acc is None else acc + s
        hs = logistic(0.5 * acc, alpha)
        hs_maps.append(hs)
        numerator += float(np.sum(hs * channel.weight))
        denominator += float(np.sum(channel.weight))

    degenerate = denominator == 0.0
    if degenerate:
        pooled = float(np.mean(np.concatenate([hs.ravel() for hs in hs_maps])))
    else:
        pooled = numerator / denominator
    score = logistic_inverse(pooled, alpha) ** 2
    score = min(max(score, 0.0), 1.0)

    result = ScoreResult(score=score, degenerate_weights=degenerate)
    if want_maps:
        result.similarity_maps = hs_maps
        result.weight_maps = [channel.weight for channel in channels]
    return result


def haarpsi_gray(f1, f2, params: MetricParams = MetricParams(),
                 want_maps: bool = False) -> ScoreResult:
    """Similarity of two raw grayscale images (resolution halving included).

    Inputs must share dimensions of at least 2x2; pass decoded images
    directly, not pre-halved ones.
    """
    p1, p2 = as_plane(f1), as_plane(f2)
    if p1.shape != p2.shape:
        raise ValueError(f"dimension mismatch: {p1.shape} vs {p2.shape}")
    bank = cached_filterbank(params.wavelet, 3)
    channels = gray_channel_responses(mean_pool_2x2(p1), mean_pool_2x2(p2), bank)
    return score_channels(channels, params.c, params.alpha, want_maps)


def haarpsi_color(f1, f2, params: MetricParams = MetricParams(),
                  want_maps: bool = False) -> ScoreResult:
    """Similarity of two raw RGB images via luminance and chroma channels."""
    c1, c2 = as_color(f1), as_color(f2)
    if c1.shape != c2.shape:
        raise ValueError(f"dimension mismatch: {c1.shape} vs {c2.shape}")
    bank = cached_filterbank(params.wavelet, 3)
    channels = color_channel_responses(c1, c2, bank)
    return score_channels(channels, params.c, params.alpha, want_maps)


def psnr(f1, f2, peak: float = 255.0) -> float:
    """Peak signal-to-noise ratio in dB; returns inf for identical inputs."""
    p1, p2 = as_plane(f1), as_plane(f2)
    if p1.shape != p2.shape:
        raise ValueError(f"dimension mismatch: {p1.shape} vs {p2.shape}")
    diff = p1 - p2
    mse = float(np.mean(diff * diff))
    if mse == 0.0:
        return math.inf
    return 10.0 * math.log10(peak * peak / mse)


def dump_maps(result: ScoreResult, directory) -> list[Path]:
    """Write similarity/weight maps as normalized 8-bit grayscale images.

    Each map is min-max normalized on its own; the bounds used are recorded
    in a `map_bounds.txt` sidecar so the raw scale can be recovered.
    """
    if result.similarity_maps is None or result.weight_maps is None:
        raise ValueError("score was computed without maps; pass want_maps=True")
    out_dir = Path(directory)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    bounds_lines = []
    named = [(f"hs_{k + 1}", m) for k, m in enumerate(result.similarity_maps)]
    named += [(f"w_{k + 1}", m) for k, m in enumerate(result.weight_maps)]
    for name, arr in named:
        lo, hi = float(np.min(arr)), float(np.max(arr))
        scale = 255.0 / (hi - lo) if hi > lo else 0.0
        path = out_dir / f"{name}.png"
        encode_image(path, (arr - lo) * scale)
        written.append(path)
        bounds_lines.append(f"{name} {lo:.12g} {hi:.12g}")
    bounds = out_dir / "map_bounds.txt"
    bounds.write_text("\n".join(bounds_lines) + "\n")
    written.append(bounds)
    return written
