"""Batch evaluation: CSV manifests, multi-metric scoring, and report building.

The manifest is the stable on-disk contract: a CSV with required columns
reference_path, distorted_path, mos, database and an optional distortion
column. Scoring is parallel across rows but output order always follows the
manifest, so results are byte-identical regardless of worker count.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path

import numpy as np

from .image import ImageDecodeError, decode_image, rgb_to_gray
from .metric import MetricParams, haarpsi_color, haarpsi_gray, psnr
from .stats import UndefinedCorrelationError, kendall_tau, pearson, significance, spearman

REQUIRED_COLUMNS = ("reference_path", "distorted_path", "mos", "database")
#: Minimum samples per reported correlation cell.
MIN_CELL_SAMPLES = 4

METRIC_KINDS = ("haarpsi", "haarpsic", "psnr")


class ManifestError(ValueError):
    """Raised for unusable manifest files (bad header or rejected rows)."""


@dataclass(frozen=True)
class ManifestEntry:
    reference_path: str
    distorted_path: str
    mos: float
    database: str
    distortion: str = ""


@dataclass(frozen=True)
class MetricSpec:
    """One metric column to compute: a kind plus its parameters."""

    name: str
    kind: str
    params: MetricParams = MetricParams()

    def __post_init__(self):
        if self.kind not in METRIC_KINDS:
            raise ValueError(f"unknown metric kind {self.kind!r} (known: {METRIC_KINDS})")


def metric_specs_from_names(names, params: MetricParams = MetricParams()) -> list[MetricSpec]:
    """Map CLI-style metric names onto specs sharing one parameter set."""
    specs = []
    for name in names:
        if name not in METRIC_KINDS:
            raise ValueError(f"unknown metric {name!r} (known: {METRIC_KINDS})")
        specs.append(MetricSpec(name=name, kind=name, params=params))
    return specs


@dataclass
class ScoreRow:
    entry: ManifestEntry
    scores: dict[str, float] = field(default_factory=dict)
    error: str = ""


def load_manifest(path) -> list[ManifestEntry]:
    """Parse a manifest CSV; unknown columns are ignored.

    Rows missing a required field or carrying an unparseable mos are
    rejected together with their 1-based data row numbers.
    """
    p = Path(path)
    with open(p, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise ManifestError(f"{p}: missing header row")
        missing = [col for col in REQUIRED_COLUMNS if col not in reader.fieldnames]
        if missing:
            raise ManifestError(f"{p}: missing required columns: {', '.join(missing)}")
        entries = []
        bad_rows = []
        for row_number, row in enumerate(reader, start=1):
            problems = [col for col in REQUIRED_COLUMNS if not (row.get(col) or "").strip()]
            mos = math.nan
            if "mos" not in problems:
                try:
                    mos = float(row["mos"])
                except ValueError:
                    problems.append("mos")
            if not problems and not math.isfinite(mos):
                problems.append("mos")
            if problems:
                bad_rows.append(f"row {row_number}: bad or missing {', '.join(problems)}")
                continue
            entries.append(ManifestEntry(
                reference_path=row["reference_path"].strip(),
                distorted_path=row["distorted_path"].strip(),
                mos=mos,
                database=row["database"].strip(),
                distortion=(row.get("distortion") or "").strip(),
            ))
    if bad_rows:
        raise ManifestError(f"{p}: rejected rows: " + "; ".join(bad_rows))
    return entries


@lru_cache(maxsize=64)
def _decode_cached(path: str) -> np.ndarray:
    # References repeat many times per manifest; a small cache avoids
    # re-decoding them for every distorted counterpart.
    return decode_image(path)


def _to_gray(img: np.ndarray) -> np.ndarray:
    return rgb_to_gray(img) if img.ndim == 3 else img


def _score_entry(entry: ManifestEntry, metrics: list[MetricSpec]) -> ScoreRow:
    row = ScoreRow(entry=entry)
    try:
        ref = _decode_cached(entry.reference_path)
        dist = decode_image(entry.distorted_path)
        for spec in metrics:
            if spec.kind == "haarpsi":
                value = haarpsi_gray(_to_gray(ref), _to_gray(dist), spec.params).score
            elif spec.kind == "haarpsic":
                if ref.ndim != 3 or dist.ndim != 3:
                    raise ValueError("haarpsic requires RGB inputs")
                value = haarpsi_color(ref, dist, spec.params).score
            else:
                value = psnr(_to_gray(ref), _to_gray(dist))
            row.scores[spec.name] = value
    except (ImageDecodeError, ValueError) as exc:
        row.scores = {}
        row.error = str(exc)
    return row


def score_manifest(entries: list[ManifestEntry], metrics: list[MetricSpec],
                   jobs: int = 1) -> list[ScoreRow]:
    """Score every manifest entry with every metric.

    Per-entry failures become row-level errors; the batch only aborts on
    manifest-wide problems. Output order matches the manifest regardless
    of `jobs`.
    """
    if jobs <= 1:
        return [_score_entry(entry, metrics) for entry in entries]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(lambda e: _score_entry(e, metrics), entries))


def _format_score(value: float) -> str:
    if math.isinf(value):
        return "inf"
    return f"{value:.6f}"


def write_scores_csv(rows: list[ScoreRow], metrics: list[MetricSpec], path) -> None:
    """Write scored rows as CSV: manifest columns, metric columns, error."""
    names = [spec.name for spec in metrics]
    with open(Path(path), "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(list(REQUIRED_COLUMNS) + ["distortion"] + names + ["error"])
        for row in rows:
            e = row.entry
            cells = [e.reference_path, e.distorted_path, f"{e.mos:.6f}", e.database, e.distortion]
            cells += [_format_score(row.scores[n]) if n in row.scores else "" for n in names]
            cells.append(row.error)
            writer.writerow(cells)


def read_scores_csv(path) -> tuple[list[ScoreRow], list[str]]:
    """Read a score CSV back; returns (rows, metric column names)."""
    with open(Path(path), newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise ManifestError(f"{path}: missing header row")
        fixed = set(REQUIRED_COLUMNS) | {"distortion", "error"}
        names = [col for col in reader.fieldnames if col not in fixed]
        rows = []
        for raw in reader:
            entry = ManifestEntry(
                reference_path=raw["reference_path"],
                distorted_path=raw["distorted_path"],
                mos=float(raw["mos"]),
                database=raw["database"],
                distortion=raw.get("distortion", "") or "",
            )
            scores = {n: float(raw[n]) for n in names if (raw.get(n) or "").strip() != ""}
            rows.append(ScoreRow(entry=entry, scores=scores, error=raw.get("error", "") or ""))
    return rows, names


def _correlation_cell(scores: list[float], mos: list[float]) -> dict | None:
    pairs = [(s, m) for s, m in zip(scores, mos) if math.isfinite(s)]
    if len(pairs) < MIN_CELL_SAMPLES:
        return None
    x = [p[0] for p in pairs]
    y = [p[1] for p in pairs]
    cell = {"n": len(pairs)}
    for key, fn in (("srocc", spearman), ("pearson", pearson), ("kendall", kendall_tau)):
        try:
            cell[key] = fn(x, y)
        except UndefinedCorrelationError:
            cell[key] = None
    return cell


def _significance_cell(cell: dict | None, base: dict | None, n: int) -> dict | None:
    if cell is None or base is None:
        return None
    r1, r2 = cell.get("srocc"), base.get("srocc")
    if r1 is None or r2 is None or not (abs(r1) < 1.0 and abs(r2) < 1.0) or n <= 3:
        return None
    verdict = significance(r1, r2, n)
    return {"z_stat": verdict.z_stat, "significant_05": verdict.significant_05}


def build_report(rows: list[ScoreRow], metric_names: list[str],
                 baseline: str | None = None, dmos_databases=()) -> dict:
    """Aggregate score rows into per-database / per-distortion correlations.

    Cells with fewer than four valid samples are omitted rather than
    fabricated. Significance verdicts compare each metric's rank
    correlation against `baseline` on the same cell, using the cell's
    sample count. `dmos_databases` only annotates score polarity (higher
    mos = worse); it does not change any numbers.
    """
    if baseline is not None and baseline not in metric_names:
        raise ValueError(f"baseline {baseline!r} is not among metrics {metric_names}")
    valid = [r for r in rows if not r.error]

    groups: dict[str, list[ScoreRow]] = {}
    subgroups: dict[str, dict[str, list[ScoreRow]]] = {}
    for row in valid:
        db = row.entry.database
        groups.setdefault(db, []).append(row)
        if row.entry.distortion:
            subgroups.setdefault(db, {}).setdefault(row.entry.distortion, []).append(row)

    def cells_for(group_rows):
        mos = [r.entry.mos for r in group_rows]
        out = {}
        for name in metric_names:
            scores = [r.scores.get(name, math.nan) for r in group_rows]
            out[name] = _correlation_cell(scores, mos)
        return out

    report = {
        "metrics": list(metric_names),
        "baseline": baseline,
        "per_database": {},
        "per_distortion": {},
        "significance": {"per_database": {}, "per_distortion": {}},
        "scatter": {},
    }
    for db in sorted(groups):
        group_rows = groups[db]
        cells = cells_for(group_rows)
        report["per_database"][db] = {
            "n": len(group_rows),
            "dmos": db in dmos_databases,
            "cells": cells,
        }
        if baseline is not None:
            report["significance"]["per_database"][db] = {
                name: _significance_cell(cells[name], cells[baseline], len(group_rows))
                for name in metric_names if name != baseline
            }
        report["scatter"][db] = {
            "mos": [r.entry.mos for r in group_rows],
            "distortion": [r.entry.distortion for r in group_rows],
            "scores": {
                name: [r.scores.get(name, math.nan) for r in group_rows]
                for name in metric_names
            },
        }
    for db in sorted(subgroups):
        report["per_distortion"][db] = {}
        if baseline is not None:
            report["significance"]["per_distortion"][db] = {}
        for distortion in sorted(subgroups[db]):
            group_rows = subgroups[db][distortion]
            cells = cells_for(group_rows)
            report["per_distortion"][db][distortion] = {"n": len(group_rows), "cells": cells}
            if baseline is not None:
                report["significance"]["per_distortion"][db][distortion] = {
                    name: _significance_cell(cells[name], cells[baseline], len(group_rows))
                    for name in metric_names if name != baseline
                }
    return report


def write_scatter_csvs(report: dict, directory) -> list[Path]:
    """Export each database's scatter block as a CSV for plotting."""
    out_dir = Path(directory)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for db, block in report["scatter"].items():
        path = out_dir / f"scatter_{db}.csv"
        names = list(block["scores"])
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["mos", "distortion"] + names)
            for idx in range(len(block["mos"])):
                row = [f"{block['mos'][idx]:.6f}", block["distortion"][idx]]
                row += [_format_score(block["scores"][n][idx]) for n in names]
                writer.writerow(row)
        written.append(path)
    return written
