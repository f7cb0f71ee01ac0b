"""Rank and linear correlation coefficients plus the significance test
used when comparing two metrics' correlations on the same sample set.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import rankdata


class UndefinedCorrelationError(ValueError):
    """Raised when a correlation is undefined (constant input, ties only)."""


def _paired(scores, mos, min_n: int = 2) -> tuple[np.ndarray, np.ndarray]:
    x = np.asarray(scores, dtype=np.float64).ravel()
    y = np.asarray(mos, dtype=np.float64).ravel()
    if x.shape != y.shape:
        raise ValueError(f"sample vectors differ in length: {x.size} vs {y.size}")
    if x.size < min_n:
        raise ValueError(f"need at least {min_n} samples, got {x.size}")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise ValueError("samples must be finite")
    return x, y


def pearson(scores, mos) -> float:
    """Product-moment correlation of two equal-length sample vectors."""
    x, y = _paired(scores, mos)
    xc = x - np.mean(x)
    yc = y - np.mean(y)
    denom = math.sqrt(float(np.sum(xc * xc)) * float(np.sum(yc * yc)))
    if denom == 0.0:
        raise UndefinedCorrelationError("zero variance in at least one vector")
    return float(np.sum(xc * yc)) / denom


def spearman(scores, mos) -> float:
    """Rank-order correlation: Pearson of average-rank vectors."""
    x, y = _paired(scores, mos)
    if np.all(x == x[0]) or np.all(y == y[0]):
        raise UndefinedCorrelationError("constant vector has no rank order")
    return pearson(rankdata(x, method="average"), rankdata(y, method="average"))


def _tied_pair_count(v: np.ndarray) -> int:
    _, counts = np.unique(v, return_counts=True)
    return int(np.sum(counts * (counts - 1) // 2))


def kendall_tau(scores, mos) -> float:
    """Tie-corrected (tau-b) Kendall rank correlation.

    Counts concordant minus discordant pairs by full pairwise comparison
    (quadratic in the sample count, fine up to a few thousand samples).
    """
    x, y = _paired(scores, mos)
    n = x.size
    sx = np.sign(x[:, None] - x[None, :]).astype(np.int8)
    sy = np.sign(y[:, None] - y[None, :]).astype(np.int8)
    con_minus_dis = int(np.sum(sx * sy, dtype=np.int64)) // 2
    total = n * (n - 1) // 2
    tied_x = _tied_pair_count(x)
    tied_y = _tied_pair_count(y)
    denom_sq = (total - tied_x) * (total - tied_y)
    if denom_sq == 0:
        raise UndefinedCorrelationError("all pairs tied; tau-b undefined")
    return con_minus_dis / math.sqrt(denom_sq)


@dataclass(frozen=True)
class SignificanceResult:
    z_stat: float
    significant_05: bool


#: Two-tailed 5% critical value of the standard normal.
Z_CRITICAL_05 = 1.959964


def significance(r1: float, r2: float, n: int) -> SignificanceResult:
    """Test whether two correlations measured on n samples differ.

    Both coefficients are Fisher z-transformed; the difference is scaled by
    the approximate standard deviation sqrt(2 * 1.06 / (n - 3)) and compared
    two-tailed at the 5% level.
    """
    if not (abs(r1) < 1.0 and abs(r2) < 1.0):
        raise ValueError("correlations must lie strictly inside (-1, 1)")
    if n <= 3:
        raise ValueError(f"need more than 3 samples, got {n}")
    z1 = math.atanh(r1)
    z2 = math.atanh(r2)
    sd = math.sqrt(2.0 * 1.06 / (n - 3))
    z_stat = (z1 - z2) / sd
    return SignificanceResult(z_stat=z_stat, significant_05=abs(z_stat) > Z_CRITICAL_05)
