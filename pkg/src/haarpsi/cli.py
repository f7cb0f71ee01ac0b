"""Command-line interface: score image pairs, batch-evaluate manifests,
build correlation reports, tune parameters, and inspect filter taps.

Exit codes: 0 on success, 1 on usage errors, 2 on data or processing
errors. Human-readable output goes to stdout, warnings to stderr, and
machine output to files.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import harness, tuner
from .filters import WAVELETS, cached_filterbank
from .image import ImageDecodeError, decode_image, rgb_to_gray
from .metric import MetricParams, dump_maps, haarpsi_color, haarpsi_gray
from .stats import UndefinedCorrelationError

JOBS_ENV_VAR = "HAARPSI_JOBS"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _default_jobs() -> int:
    try:
        return max(1, int(os.environ.get(JOBS_ENV_VAR, "1")))
    except ValueError:
        return 1


def _metric_params(args) -> MetricParams:
    if args.c <= 0:
        raise UsageError("--c must be positive")
    if args.alpha <= 0:
        raise UsageError("--alpha must be positive")
    if args.wavelet not in WAVELETS:
        raise UsageError(f"unknown wavelet {args.wavelet!r} (known: {', '.join(sorted(WAVELETS))})")
    return MetricParams(c=args.c, alpha=args.alpha, wavelet=args.wavelet)


def _add_param_flags(parser):
    parser.add_argument("--c", type=float, default=30.0,
                        help="similarity stabilization constant (default 30)")
    parser.add_argument("--alpha", type=float, default=4.2,
                        help="logistic steepness (default 4.2)")
    parser.add_argument("--wavelet", default="haar",
                        help="wavelet id (default haar)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="haarpsi", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("compare", help="score one reference/distorted pair")
    p.add_argument("reference")
    p.add_argument("distorted")
    p.add_argument("--color", action="store_true", help="use the color variant")
    _add_param_flags(p)
    p.add_argument("--dump-maps", metavar="DIR", help="write similarity/weight map images")
    p.add_argument("--json", action="store_true", help="print a JSON object instead of a number")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("batch", help="score every row of a manifest CSV")
    p.add_argument("manifest")
    p.add_argument("--metrics", default="haarpsi,psnr",
                   help="comma-separated metric list (haarpsi, haarpsic, psnr)")
    _add_param_flags(p)
    p.add_argument("--out", help="output CSV path (default: stdout)")
    p.add_argument("--jobs", type=int, default=None, help="parallel workers")
    p.set_defaults(func=cmd_batch)

    p = sub.add_parser("evaluate", help="correlation report against opinion scores")
    p.add_argument("manifest")
    p.add_argument("--metrics", default="haarpsi,psnr")
    _add_param_flags(p)
    p.add_argument("--baseline", help="metric to test significance against")
    p.add_argument("--report", required=True, help="output report JSON path")
    p.add_argument("--scatter", metavar="DIR", help="also write per-database scatter CSVs")
    p.add_argument("--dmos", default="", help="comma-separated databases whose mos is a DMOS")
    p.add_argument("--jobs", type=int, default=None)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("tune", help="two-stage (c, alpha) selection on manifest subsets")
    p.add_argument("manifests", nargs="+")
    p.add_argument("--subset-fraction", type=float, default=0.25)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--c-step", type=float, default=5.0)
    p.add_argument("--alpha-step", type=float, default=0.5)
    p.add_argument("--color", action="store_true", help="tune the color variant")
    p.add_argument("--wavelet", default="haar")
    p.add_argument("--out", required=True, help="output result JSON path")
    p.set_defaults(func=cmd_tune)

    p = sub.add_parser("filters", help="print 2D filter tap grids")
    p.add_argument("--wavelet", default="haar")
    p.add_argument("--scale", type=int, default=1)
    p.set_defaults(func=cmd_filters)

    return parser


def _load_pair(args):
    ref = decode_image(args.reference)
    dist = decode_image(args.distorted)
    if args.color:
        if ref.ndim != 3 or dist.ndim != 3:
            raise ValueError("--color requires two RGB inputs")
        return ref, dist
    if ref.ndim == 3:
        ref = rgb_to_gray(ref)
    if dist.ndim == 3:
        dist = rgb_to_gray(dist)
    return ref, dist


def cmd_compare(args) -> int:
    params = _metric_params(args)
    ref, dist = _load_pair(args)
    want_maps = args.dump_maps is not None
    if args.color:
        result = haarpsi_color(ref, dist, params, want_maps=want_maps)
    else:
        result = haarpsi_gray(ref, dist, params, want_maps=want_maps)
    if want_maps:
        dump_maps(result, args.dump_maps)
    if args.json:
        print(json.dumps({
            "score": result.score,
            "C": params.c,
            "alpha": params.alpha,
            "wavelet": params.wavelet,
            "color": args.color,
            "degenerate_weights": result.degenerate_weights,
        }))
    else:
        print(f"{result.score:.6f}")
    return 0


def _parse_metrics(args) -> list[harness.MetricSpec]:
    names = [n.strip() for n in args.metrics.split(",") if n.strip()]
    if not names:
        raise UsageError("--metrics must name at least one metric")
    try:
        return harness.metric_specs_from_names(names, _metric_params(args))
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def cmd_batch(args) -> int:
    metrics = _parse_metrics(args)
    entries = harness.load_manifest(args.manifest)
    if not entries:
        raise ValueError(f"{args.manifest}: no entries")
    jobs = args.jobs if args.jobs else _default_jobs()
    rows = harness.score_manifest(entries, metrics, jobs=jobs)
    if args.out:
        harness.write_scores_csv(rows, metrics, args.out)
    else:
        harness.write_scores_csv(rows, metrics, "/dev/stdout")
    return 0


def _warn_missing_cells(report) -> None:
    for db, block in report["per_database"].items():
        for name, cell in block["cells"].items():
            if cell is None:
                print(f"warning: {db}/{name}: fewer than {harness.MIN_CELL_SAMPLES} "
                      "valid samples, cell omitted", file=sys.stderr)
    for db, distortions in report["per_distortion"].items():
        for distortion, block in distortions.items():
            for name, cell in block["cells"].items():
                if cell is None:
                    print(f"warning: {db}/{distortion}/{name}: fewer than "
                          f"{harness.MIN_CELL_SAMPLES} valid samples, cell omitted",
                          file=sys.stderr)


def cmd_evaluate(args) -> int:
    metrics = _parse_metrics(args)
    names = [m.name for m in metrics]
    baseline = args.baseline
    if baseline is not None and baseline not in names:
        raise UsageError(f"--baseline {baseline!r} is not among the requested metrics")
    entries = harness.load_manifest(args.manifest)
    if not entries:
        raise ValueError(f"{args.manifest}: no entries")
    jobs = args.jobs if args.jobs else _default_jobs()
    rows = harness.score_manifest(entries, metrics, jobs=jobs)
    dmos = tuple(d.strip() for d in args.dmos.split(",") if d.strip())
    report = harness.build_report(rows, names, baseline=baseline, dmos_databases=dmos)
    _warn_missing_cells(report)
    Path(args.report).write_text(json.dumps(report, indent=2) + "\n")
    if args.scatter:
        harness.write_scatter_csvs(report, args.scatter)
    return 0


def cmd_tune(args) -> int:
    if args.subset_fraction <= 0 or args.subset_fraction > 1:
        raise UsageError("--subset-fraction must lie in (0, 1]")
    if args.c_step <= 0 or args.alpha_step <= 0:
        raise UsageError("grid steps must be positive")
    if args.wavelet not in WAVELETS:
        raise UsageError(f"unknown wavelet {args.wavelet!r}")
    cfg = tuner.TuneConfig(
        manifests=list(args.manifests),
        c_step=args.c_step,
        alpha_step=args.alpha_step,
        subset_fraction=args.subset_fraction,
        seed=args.seed,
        color=args.color,
        wavelet=args.wavelet,
    )
    result = tuner.tune(cfg)
    result.write_json(args.out)
    print(f"C={result.c_final} alpha={result.alpha_final}")

    # Rank correlations on the full databases at the selected parameters.
    params = MetricParams(c=float(result.c_final), alpha=result.alpha_final,
                          wavelet=args.wavelet)
    kind = "haarpsic" if args.color else "haarpsi"
    spec = harness.MetricSpec(name=kind, kind=kind, params=params)
    for manifest in args.manifests:
        entries = harness.load_manifest(manifest)
        rows = harness.score_manifest(entries, [spec], jobs=_default_jobs())
        report = harness.build_report(rows, [kind])
        for db, block in report["per_database"].items():
            cell = block["cells"][kind]
            srocc = cell["srocc"] if cell else float("nan")
            print(f"{db} srocc={srocc:.4f}")
    return 0


def cmd_filters(args) -> int:
    if args.wavelet not in WAVELETS:
        raise UsageError(f"unknown wavelet {args.wavelet!r} (known: {', '.join(sorted(WAVELETS))})")
    if not (1 <= args.scale <= 3):
        raise UsageError("--scale must lie between 1 and 3")
    bank = cached_filterbank(args.wavelet, 3)
    for label, grids in (("horizontal", bank.horizontal), ("vertical", bank.vertical)):
        grid = grids[args.scale - 1]
        print(f"{label} scale {args.scale} ({grid.shape[0]}x{grid.shape[1]}):")
        for row in grid:
            print(" ".join(f"{v:.12g}" for v in row))
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ImageDecodeError, harness.ManifestError, tuner.TuningError,
            UndefinedCorrelationError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
