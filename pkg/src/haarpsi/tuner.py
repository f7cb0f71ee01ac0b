"""Two-stage parameter selection: coarse grid search over (c, alpha)
followed by Nelder-Mead refinement, maximizing the mean rank correlation
with opinion scores over randomly drawn database subsets.

The wavelet responses feeding the similarity index do not depend on
(c, alpha), so each subset pair's response magnitudes are computed once and
re-pooled per candidate point. Scores are identical to the full pipeline's
because pooling goes through the same code path.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .harness import ManifestEntry, load_manifest, _decode_cached, _to_gray
from .image import mean_pool_2x2
from .filters import cached_filterbank
from .metric import (
    color_channel_responses,
    gray_channel_responses,
    score_channels,
)
from .stats import UndefinedCorrelationError, spearman


class TuningError(RuntimeError):
    """Raised when the tuning procedure cannot produce a result."""

    def __init__(self, message: str, trace=None):
        super().__init__(message)
        self.trace = trace or []


@dataclass
class TuneConfig:
    """Configuration of one tuning run.

    `manifests` may hold manifest file paths or pre-loaded entry lists,
    one per database. Subsets of floor(subset_fraction * n) rows are drawn
    once per run, without replacement, from a generator seeded with `seed`.
    """

    manifests: list
    c_range: tuple[float, float] = (5.0, 100.0)
    alpha_range: tuple[float, float] = (2.0, 8.0)
    c_step: float = 5.0
    alpha_step: float = 0.5
    subset_fraction: float = 0.25
    seed: int = 0
    color: bool = False
    wavelet: str = "haar"
    max_iters: int = 200
    tol: float = 1e-9
    cache_responses: bool = True

    def validate(self):
        if not self.manifests:
            raise ValueError("at least one database manifest is required")
        if not (self.c_range[0] <= self.c_range[1]) or not (self.alpha_range[0] <= self.alpha_range[1]):
            raise ValueError("parameter ranges must be non-empty")
        if self.c_step <= 0 or self.alpha_step <= 0:
            raise ValueError("grid steps must be positive")
        if not (0.0 < self.subset_fraction <= 1.0):
            raise ValueError("subset_fraction must lie in (0, 1]")


@dataclass
class TuneSubset:
    """One database's sampled rows, ready for repeated scoring."""

    database: str
    mos: np.ndarray
    pairs: list
    cached: bool
    color: bool
    wavelet: str

    def scores(self, c: float, alpha: float) -> np.ndarray:
        out = np.empty(len(self.pairs))
        if self.cached:
            for idx, channels in enumerate(self.pairs):
                out[idx] = score_channels(channels, c, alpha).score
            return out
        bank = cached_filterbank(self.wavelet, 3)
        for idx, (ref_path, dist_path) in enumerate(self.pairs):
            ref = _decode_cached(ref_path)
            dist = _decode_cached(dist_path)
            if self.color:
                channels = color_channel_responses(ref, dist, bank)
            else:
                channels = gray_channel_responses(
                    mean_pool_2x2(_to_gray(ref)), mean_pool_2x2(_to_gray(dist)), bank)
            out[idx] = score_channels(channels, c, alpha).score
        return out


def _load_entries(manifest) -> list[ManifestEntry]:
    if isinstance(manifest, (str, Path)):
        return load_manifest(manifest)
    return list(manifest)


def prepare_subsets(cfg: TuneConfig) -> list[TuneSubset]:
    """Draw each database's subset and precompute its pair responses."""
    cfg.validate()
    rng = np.random.default_rng(cfg.seed)
    bank = cached_filterbank(cfg.wavelet, 3)
    subsets = []
    for manifest in cfg.manifests:
        entries = _load_entries(manifest)
        count = math.floor(cfg.subset_fraction * len(entries))
        if count < 4:
            raise TuningError(
                f"subset of {count} rows is too small (database of {len(entries)} rows, "
                f"fraction {cfg.subset_fraction})")
        chosen = np.sort(rng.choice(len(entries), size=count, replace=False))
        rows = [entries[i] for i in chosen]
        pairs = []
        for entry in rows:
            if cfg.cache_responses:
                ref = _decode_cached(entry.reference_path)
                dist = _decode_cached(entry.distorted_path)
                if cfg.color:
                    pairs.append(color_channel_responses(ref, dist, bank))
                else:
                    pairs.append(gray_channel_responses(
                        mean_pool_2x2(_to_gray(ref)), mean_pool_2x2(_to_gray(dist)), bank))
            else:
                pairs.append((entry.reference_path, entry.distorted_path))
        database = rows[0].database if rows else ""
        subsets.append(TuneSubset(
            database=database, mos=np.array([e.mos for e in rows]),
            pairs=pairs, cached=cfg.cache_responses, color=cfg.color, wavelet=cfg.wavelet))
    return subsets


def objective(c: float, alpha: float, subsets: list[TuneSubset]) -> float:
    """Mean over subsets of the rank correlation between scores and mos."""
    if not (c > 0 and alpha > 0):
        raise ValueError("c and alpha must be positive")
    total = 0.0
    for subset in subsets:
        total += spearman(subset.scores(c, alpha), subset.mos)
    return total / len(subsets)


def _grid_values(lo: float, hi: float, step: float) -> list[float]:
    count = int(math.floor((hi - lo) / step + 1e-9)) + 1
    return [lo + step * i for i in range(count)]


def grid_search(objective_fn, c_values, alpha_values, trace=None):
    """Evaluate every grid node; return the argmax and the full surface.

    Nodes where the objective is undefined hold NaN in the surface. Ties
    keep the first node in row-major (c outer, alpha inner) order.
    """
    surface = []
    best = None
    for c in c_values:
        row = []
        for alpha in alpha_values:
            try:
                value = objective_fn(c, alpha)
            except UndefinedCorrelationError:
                value = math.nan
            if trace is not None:
                trace.append((c, alpha, value))
            row.append(value)
            if not math.isnan(value) and (best is None or value > best[2]):
                best = (c, alpha, value)
        surface.append(row)
    if best is None:
        raise TuningError("objective undefined at every grid node", trace)
    return best[0], best[1], surface


def nelder_mead(start, objective_fn, steps, bounds=None, max_iters=200,
                tol=1e-9, trace=None):
    """2D Nelder-Mead maximization with standard coefficients.

    Reflection 1.0, expansion 2.0, contraction 0.5, shrink 0.5. The initial
    simplex is `start` plus one step along each axis. Points are clamped to
    `bounds` at evaluation time. Iteration stops when the simplex's
    objective spread is positive but below `tol` (an exactly flat simplex
    keeps probing), or at `max_iters`.
    """
    lo = (bounds[0][0], bounds[1][0]) if bounds else (-math.inf, -math.inf)
    hi = (bounds[0][1], bounds[1][1]) if bounds else (math.inf, math.inf)

    def clamp(pt):
        return (min(max(pt[0], lo[0]), hi[0]), min(max(pt[1], lo[1]), hi[1]))

    def evaluate(pt):
        cp = clamp(pt)
        value = objective_fn(cp[0], cp[1])
        if not math.isfinite(value):
            raise TuningError(f"non-finite objective at {cp}", trace)
        if trace is not None:
            trace.append((cp[0], cp[1], value))
        return value

    points = [tuple(start),
              (start[0] + steps[0], start[1]),
              (start[0], start[1] + steps[1])]
    values = [evaluate(p) for p in points]

    for _ in range(max_iters):
        order = sorted(range(3), key=lambda i: -values[i])
        points = [points[i] for i in order]
        values = [values[i] for i in order]
        spread = values[0] - values[2]
        if 0.0 < spread < tol:
            break

        centroid = ((points[0][0] + points[1][0]) / 2.0,
                    (points[0][1] + points[1][1]) / 2.0)
        direction = (centroid[0] - points[2][0], centroid[1] - points[2][1])
        reflected = (centroid[0] + direction[0], centroid[1] + direction[1])
        f_reflected = evaluate(reflected)

        if f_reflected > values[0]:
            expanded = (centroid[0] + 2.0 * direction[0], centroid[1] + 2.0 * direction[1])
            f_expanded = evaluate(expanded)
            if f_expanded > f_reflected:
                points[2], values[2] = expanded, f_expanded
            else:
                points[2], values[2] = reflected, f_reflected
        elif f_reflected > values[1]:
            points[2], values[2] = reflected, f_reflected
        else:
            if f_reflected > values[2]:
                contracted = (centroid[0] + 0.5 * direction[0], centroid[1] + 0.5 * direction[1])
                f_contracted = evaluate(contracted)
                accept = f_contracted >= f_reflected
            else:
                contracted = (centroid[0] - 0.5 * direction[0], centroid[1] - 0.5 * direction[1])
                f_contracted = evaluate(contracted)
                accept = f_contracted > values[2]
            if accept:
                points[2], values[2] = contracted, f_contracted
            else:
                for i in (1, 2):
                    points[i] = (points[0][0] + 0.5 * (points[i][0] - points[0][0]),
                                 points[0][1] + 0.5 * (points[i][1] - points[0][1]))
                    values[i] = evaluate(points[i])

    best = max(range(3), key=lambda i: (values[i], -i))
    return clamp(points[best]), values[best]


def _round_half_up(x: float) -> float:
    return math.floor(x + 0.5)


@dataclass
class TuneResult:
    c_grid_best: float
    alpha_grid_best: float
    grid_value: float
    c_refined: float
    alpha_refined: float
    refined_value: float
    c_final: int
    alpha_final: float
    objective_trace: list = field(default_factory=list)
    surface: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "c_grid_best": self.c_grid_best,
            "alpha_grid_best": self.alpha_grid_best,
            "grid_value": self.grid_value,
            "c_refined": self.c_refined,
            "alpha_refined": self.alpha_refined,
            "refined_value": self.refined_value,
            "c_final": self.c_final,
            "alpha_final": self.alpha_final,
            "objective_trace": [list(t) for t in self.objective_trace],
            "surface": self.surface,
        }

    def write_json(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n")


def tune(cfg: TuneConfig) -> TuneResult:
    """Run the full two-stage selection and apply the rounding rules.

    The refined c is rounded to the nearest integer and alpha to the
    nearest tenth (half away from zero). Identical configs and seeds give
    identical results, traces included.
    """
    subsets = prepare_subsets(cfg)
    trace: list = []
    objective_fn = lambda c, alpha: objective(c, alpha, subsets)

    c_values = _grid_values(*cfg.c_range, cfg.c_step)
    alpha_values = _grid_values(*cfg.alpha_range, cfg.alpha_step)
    c_best, alpha_best, surface = grid_search(objective_fn, c_values, alpha_values, trace)
    grid_value = surface[c_values.index(c_best)][alpha_values.index(alpha_best)]

    (c_refined, alpha_refined), refined_value = nelder_mead(
        (c_best, alpha_best), objective_fn, steps=(cfg.c_step, cfg.alpha_step),
        bounds=(cfg.c_range, cfg.alpha_range), max_iters=cfg.max_iters,
        tol=cfg.tol, trace=trace)

    return TuneResult(
        c_grid_best=c_best,
        alpha_grid_best=alpha_best,
        grid_value=grid_value,
        c_refined=c_refined,
        alpha_refined=alpha_refined,
        refined_value=refined_value,
        c_final=int(_round_half_up(c_refined)),
        alpha_final=_round_half_up(alpha_refined * 10.0) / 10.0,
        objective_trace=trace,
        surface={
            "c_values": c_values,
            "alpha_values": alpha_values,
            "mean_srocc": surface,
        },
    )
