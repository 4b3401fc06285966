"""Command-line interface: fit, bench, export, serve.

Exit codes: 0 success, 2 configuration errors, 3 data errors, 1 anything
else. All output files are written atomically. Log verbosity comes from the
DIVCLUST_LOG environment variable (DEBUG/INFO/WARNING/ERROR).
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from . import __version__
from .algorithms import AlgorithmConfig, fit
from .data import DataMatrix, atomic_write_text, load_matrix
from .errors import ConfigurationError, DataValidationError, DivclustError
from .linalg import KernelSpec
from .projections import ProjectionConfig
from .tree import ClusterTree

log = logging.getLogger("divclust")

EXIT_OK = 0
EXIT_INTERNAL = 1
EXIT_CONFIG = 2
EXIT_DATA = 3


def _configure_logging():
    level = os.environ.get("DIVCLUST_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="divclust",
        description="Divisive hierarchical clustering with editable split points",
    )
    parser.add_argument("--version", action="version", version=f"divclust {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    fit_p = sub.add_parser("fit", help="cluster a delimited file")
    fit_p.add_argument("--algorithm", required=True,
                       choices=["pddp", "depddp", "ipddp", "km_pddp", "bkm"])
    fit_p.add_argument("--input", required=True)
    fit_p.add_argument("--k", type=int, default=None,
                       help="cluster count (required for all but depddp)")
    fit_p.add_argument("--projection", choices=["pca", "kpca", "ica"], default="pca")
    fit_p.add_argument("--kernel", choices=["linear", "rbf", "polynomial", "sigmoid"],
                       default=None)
    fit_p.add_argument("--gamma", type=float, default=None)
    fit_p.add_argument("--degree", type=int, default=3)
    fit_p.add_argument("--coef0", type=float, default=1.0)
    fit_p.add_argument("--components", type=int, default=None, choices=[1, 2])
    fit_p.add_argument("--trim", type=float, default=0.1)
    fit_p.add_argument("--bandwidth-scale", type=float, default=1.25)
    fit_p.add_argument("--valley-quantile", type=float, default=0.1)
    fit_p.add_argument("--min-sample-split", type=int, default=5)
    fit_p.add_argument("--restarts", type=int, default=5)
    fit_p.add_argument("--seed", type=int, default=0)
    fit_p.add_argument("--delimiter", choices=["comma", "tab"], default="comma")
    fit_p.add_argument("--header", action="store_true")
    fit_p.add_argument("--label-column", type=int, default=None)
    fit_p.add_argument("--labels-out", default=None,
                       help="write labels here instead of stdout")
    fit_p.add_argument("--tree-out", default=None, help="write the tree JSON here")

    bench_p = sub.add_parser("bench", help="run the benchmark harness")
    bench_p.add_argument("--config", required=True, help="bench JSON description")
    bench_p.add_argument("--out", required=True, help="output directory")

    export_p = sub.add_parser("export", help="export artifacts from a fitted tree")
    export_p.add_argument("--tree", required=True)
    export_p.add_argument("--input", required=True)
    export_p.add_argument("--delimiter", choices=["comma", "tab"], default="comma")
    export_p.add_argument("--header", action="store_true")
    export_p.add_argument("--label-column", type=int, default=None)
    export_p.add_argument("--labels", default=None,
                          help="class-label file for the dendrogram color strip")
    export_p.add_argument("--dendrogram", default=None, help="output SVG path")
    export_p.add_argument("--views", default=None, help="output split-views JSON path")
    export_p.add_argument("--views-plot-dir", default=None,
                          help="directory for per-node matplotlib PNGs")

    serve_p = sub.add_parser("serve", help="run the interactive session server")
    serve_p.add_argument("--port", type=int, default=8000)
    serve_p.add_argument("--host", default="127.0.0.1")
    serve_p.add_argument("--data-dir", default=None,
                         help="directory of CSV datasets addressable by stem")
    serve_p.add_argument("--snapshot-dir", default=None,
                         help="persist (config + edit log) snapshots here")
    serve_p.add_argument("--ui-dir", default=None,
                         help="static frontend assets to serve at /")
    serve_p.add_argument("--upload-limit-mb", type=float, default=64.0)
    return parser


def _fit_config(args) -> AlgorithmConfig:
    if args.k is None and args.algorithm != "depddp":
        raise ConfigurationError(
            f"--k is required for {args.algorithm} (only depddp discovers k)"
        )
    kernel = None
    if args.kernel is not None:
        kernel = KernelSpec(
            name=args.kernel, gamma=args.gamma, degree=args.degree, coef0=args.coef0
        )
    elif args.projection == "kpca":
        kernel = KernelSpec(gamma=args.gamma, degree=args.degree, coef0=args.coef0)
    projection = ProjectionConfig(
        method=args.projection,
        kernel=kernel if args.projection == "kpca" else None,
        seed=args.seed if args.projection == "ica" else None,
        components=args.components,
    )
    return AlgorithmConfig(
        algorithm=args.algorithm,
        max_clusters=args.k,
        projection=projection,
        trim_fraction=args.trim,
        bandwidth_scale=args.bandwidth_scale,
        valley_quantile=args.valley_quantile,
        min_sample_split=args.min_sample_split,
        seed=args.seed,
        restarts=args.restarts,
    )


def cmd_fit(args) -> int:
    matrix = load_matrix(
        args.input,
        delimiter=args.delimiter,
        header=args.header,
        label_column=args.label_column,
    )
    config = _fit_config(args)
    tree, labels = fit(config, matrix)
    text = "\n".join(str(int(v)) for v in labels) + "\n"
    if args.labels_out:
        atomic_write_text(args.labels_out, text)
    else:
        sys.stdout.write(text)
    if args.tree_out:
        atomic_write_text(args.tree_out, json.dumps(tree.to_json()))
    log.info("fit %s: %d clusters over %d samples", args.algorithm,
             int(labels.max()) + 1, matrix.n)
    return EXIT_OK


def _load_bench_dataset(entry: dict) -> tuple[str, DataMatrix]:
    if "path" not in entry:
        raise ConfigurationError("bench dataset entries need a 'path'")
    matrix = load_matrix(
        entry["path"],
        delimiter=entry.get("delimiter", "comma"),
        header=bool(entry.get("header", False)),
        label_column=entry.get("label_column"),
        label_file=entry.get("label_file"),
    )
    name = entry.get("name") or Path(entry["path"]).stem
    return name, matrix


def cmd_bench(args) -> int:
    from .evaluation import bench
    from .viz import save_bench_figure

    spec = json.loads(Path(args.config).read_text())
    datasets = [_load_bench_dataset(e) for e in spec.get("datasets", [])]
    configs = [AlgorithmConfig.from_dict(c) for c in spec.get("algorithms", [])]
    report = bench(
        datasets,
        configs,
        repetitions=int(spec.get("repetitions", 1)),
        baseline_command=spec.get("baseline"),
        warmup=bool(spec.get("warmup", True)),
        parallel=bool(spec.get("parallel", False)),
    )
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    atomic_write_text(outdir / "report.json", report.to_json())
    atomic_write_text(outdir / "report.txt", report.to_text_table())
    atomic_write_text(outdir / "report.csv", report.to_csv())
    if report.rows:
        save_bench_figure(report, outdir / "report.png")
    log.info("bench: %d rows -> %s", len(report.rows), outdir)
    return EXIT_OK


def cmd_export(args) -> int:
    from .viz import (
        export_split_views,
        render_dendrogram_svg,
        save_split_view_figures,
        views_to_json,
    )

    doc = json.loads(Path(args.tree).read_text())
    matrix = load_matrix(
        args.input,
        delimiter=args.delimiter,
        header=args.header,
        label_column=args.label_column,
    )
    tree = ClusterTree.from_json(doc, data=matrix.values)
    class_labels = matrix.labels
    if args.labels:
        label_lines = [
            l for l in Path(args.labels).read_text().splitlines() if l.strip()
        ]
        from .data import _map_labels

        class_labels = _map_labels(label_lines)
    if args.dendrogram:
        svg = render_dendrogram_svg(tree.to_linkage(), class_labels=class_labels)
        atomic_write_text(args.dendrogram, svg)
    views_doc = None
    if args.views or args.views_plot_dir:
        views_doc = export_split_views(tree, matrix.values)
    if args.views:
        atomic_write_text(args.views, views_to_json(views_doc))
    if args.views_plot_dir:
        save_split_view_figures(views_doc, args.views_plot_dir)
    return EXIT_OK


def cmd_serve(args) -> int:
    import uvicorn

    from .server import create_app

    app = create_app(
        data_dir=args.data_dir,
        snapshot_dir=args.snapshot_dir,
        ui_dir=args.ui_dir,
        upload_limit_bytes=int(args.upload_limit_mb * 1024 * 1024),
    )
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return EXIT_OK


def main(argv=None) -> int:
    _configure_logging()
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "fit": cmd_fit,
        "bench": cmd_bench,
        "export": cmd_export,
        "serve": cmd_serve,
    }
    try:
        return handlers[args.command](args)
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DataValidationError, FileNotFoundError, json.JSONDecodeError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except DivclustError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
