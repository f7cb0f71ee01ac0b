"""Wavelet filter cascades, orientation-selective 2D filters, and convolution.

Multi-scale 1D filters are built by repeatedly convolving the base scaling
filter with the dyadically upsampled previous stage. The 2D filters are
outer products of the 1D pairs: the "horizontal" filter varies along rows
with the wavelet taps (it responds to horizontal structure), and the
"vertical" filter is its transpose.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.polynomial import chebyshev, polynomial
from scipy import signal


@dataclass(frozen=True)
class WaveletPair:
    """1D scaling (lowpass) and wavelet (highpass) filter taps."""

    name: str
    lowpass: np.ndarray
    highpass: np.ndarray
    orthogonal: bool = True


def _quadrature_highpass(lowpass: np.ndarray) -> np.ndarray:
    # g[n] = (-1)^(n+1) h[L-1-n]; for Haar this yields [-1, 1]/sqrt(2)
    length = len(lowpass)
    signs = np.array([(-1.0) ** (n + 1) for n in range(length)])
    return signs * lowpass[::-1]


def _haar_lowpass() -> np.ndarray:
    return np.array([1.0, 1.0]) / np.sqrt(2.0)


def _db2_lowpass() -> np.ndarray:
    s = np.sqrt(3.0)
    return np.array([1.0 + s, 3.0 + s, 3.0 - s, 1.0 - s]) / (4.0 * np.sqrt(2.0))


# Standard published double-precision tap tables.
_DB4_LOWPASS = np.array([
    0.23037781330885523, 0.7148465705525415, 0.6308807679295904,
    -0.02798376941698385, -0.18703481171888114, 0.030841381835986965,
    0.032883011666982945, -0.010597401784997278,
])

_SYM4_LOWPASS = np.array([
    0.03222310060404270, -0.012603967262037833, -0.09921954357684722,
    0.29785779560527736, 0.8037387518059161, 0.49761866763201545,
    -0.02963552764599851, -0.07576571478927333,
])

_COIF1_LOWPASS = np.array([
    -0.0727326195128539, 0.3378976624578092, 0.8525720202122554,
    0.38486484686420286, -0.0727326195128539, -0.01565572813546454,
])


def _symmetric_taps(cos_poly: np.ndarray) -> np.ndarray:
    # Convert a polynomial in cos(w) into symmetric filter taps via the
    # Chebyshev basis: sum a_n T_n(cos w) = a_0 + sum a_n cos(n w).
    cheb = chebyshev.poly2cheb(cos_poly)
    half = len(cheb) - 1
    taps = np.zeros(2 * half + 1)
    taps[half] = cheb[0]
    for n in range(1, half + 1):
        taps[half - n] = cheb[n] / 2.0
        taps[half + n] = cheb[n] / 2.0
    return taps


def _cdf97_analysis_pair() -> tuple[np.ndarray, np.ndarray]:
    """Derive the 9-tap/7-tap biorthogonal analysis filters.

    Both lowpass filters of the family carry four zeros at the Nyquist
    frequency; the remaining cubic factor of the maxflat half-band
    polynomial is split into its real root (7-tap side) and complex pair
    (9-tap side). Filters are normalized to DC gain sqrt(2), which gives
    the analysis highpass a Nyquist gain of sqrt(2) as well, matching the
    orthogonal filters used elsewhere.
    """
    roots = np.roots([20.0, 10.0, 4.0, 1.0])
    real_root = float(roots[np.abs(roots.imag) < 1e-9].real[0])
    pair = roots[np.abs(roots.imag) >= 1e-9]
    re_r = float(pair[0].real)
    abs2 = float((pair[0] * pair[1]).real)

    u = np.array([0.5, -0.5])   # (1 - cos w) / 2
    v = np.array([0.5, 0.5])    # (1 + cos w) / 2
    v2 = polynomial.polymul(v, v)
    sqrt2 = np.sqrt(2.0)

    quad = polynomial.polyadd(polynomial.polymul(u, u), -2.0 * re_r * u)
    quad = polynomial.polyadd(quad, np.array([abs2]))
    analysis_low = _symmetric_taps(sqrt2 / abs2 * polynomial.polymul(v2, quad))

    lin = polynomial.polyadd(u, np.array([-real_root]))
    synthesis_low = _symmetric_taps(sqrt2 / (-real_root) * polynomial.polymul(v2, lin))
    signs = np.array([(-1.0) ** (n + 1) for n in range(len(synthesis_low))])
    analysis_high = signs * synthesis_low
    return analysis_low, analysis_high


def _build_registry() -> dict[str, WaveletPair]:
    registry = {}
    for name, low in [
        ("haar", _haar_lowpass()),
        ("daub2", _db2_lowpass()),
        ("daub4", _DB4_LOWPASS),
        ("sym4", _SYM4_LOWPASS),
        ("coif1", _COIF1_LOWPASS),
    ]:
        registry[name] = WaveletPair(name, low, _quadrature_highpass(low))
    cdf_low, cdf_high = _cdf97_analysis_pair()
    registry["cdf"] = WaveletPair("cdf", cdf_low, cdf_high, orthogonal=False)
    return registry


WAVELETS = _build_registry()


def get_wavelet(name: str) -> WaveletPair:
    """Look up a wavelet by id, raising ValueError for unknown names."""
    try:
        return WAVELETS[name]
    except KeyError:
        known = ", ".join(sorted(WAVELETS))
        raise ValueError(f"unknown wavelet {name!r} (known: {known})") from None


def _upsample2(taps: np.ndarray) -> np.ndarray:
    # Insert a zero after every coefficient, dropping the trailing zero.
    out = np.zeros(2 * len(taps) - 1)
    out[::2] = taps
    return out


def cascade_1d(wavelet: WaveletPair, level: int) -> tuple[np.ndarray, np.ndarray]:
    """Return the (lowpass, highpass) taps at the given cascade level.

    Level 1 returns the base taps; each further level convolves the base
    lowpass with the upsampled previous stage. Haar taps at level j have
    length 2^j.
    """
    if level < 1:
        raise ValueError(f"cascade level must be >= 1, got {level}")
    low = wavelet.lowpass
    h, g = wavelet.lowpass, wavelet.highpass
    for _ in range(level - 1):
        h = np.convolve(low, _upsample2(h))
        g = np.convolve(low, _upsample2(g))
    return h, g


@dataclass(frozen=True)
class FilterBank:
    """Per-scale 2D filters for both orientations."""

    wavelet: str
    levels: int
    horizontal: tuple[np.ndarray, ...]
    vertical: tuple[np.ndarray, ...]


def build_filterbank(wavelet: str | WaveletPair, levels: int = 3) -> FilterBank:
    """Build the 2D filter bank with `levels` scales for one wavelet."""
    if levels < 1:
        raise ValueError(f"levels must be >= 1, got {levels}")
    pair = get_wavelet(wavelet) if isinstance(wavelet, str) else wavelet
    horizontal = []
    vertical = []
    for j in range(1, levels + 1):
        h, g = cascade_1d(pair, j)
        horizontal.append(np.outer(g, h))
        vertical.append(np.outer(h, g))
    return FilterBank(pair.name, levels, tuple(horizontal), tuple(vertical))


@lru_cache(maxsize=None)
def cached_filterbank(wavelet: str, levels: int = 3) -> FilterBank:
    """Shared immutable filter bank, built once per (wavelet, levels)."""
    return build_filterbank(wavelet, levels)


def convolve2d_same(image, taps) -> np.ndarray:
    """Zero-padded 2D convolution returning an output the size of the input.

    This is true convolution (the filter is flipped). The output is aligned
    so that the filter tap at index floor(size/2) per axis sits on the
    output pixel; for odd sizes that is the geometric center.
    """
    img = np.asarray(image, dtype=np.float64)
    filt = np.asarray(taps, dtype=np.float64)
    if img.ndim != 2 or img.size == 0:
        raise ValueError(f"expected a non-empty 2D image, got shape {img.shape}")
    if filt.ndim != 2 or filt.size == 0:
        raise ValueError(f"expected a non-empty 2D filter, got shape {filt.shape}")
    full = signal.convolve(img, filt, mode="full", method="auto")
    r0 = filt.shape[0] // 2
    c0 = filt.shape[1] // 2
    return full[r0:r0 + img.shape[0], c0:c0 + img.shape[1]]
