"""Command line entry points: run, report, validate-data, serve."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .backends import build_backend
from .datasets import FEATURES, LAYOUTS, load_dataset, validate_dataset
from .errors import EyesegError
from .harness import SUMMARY_FILENAME, ExperimentConfig, run_experiment
from .reporting import emit_reports


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="eyeseg")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a benchmark sweep")
    run.add_argument("--config", type=Path, help="JSON experiment config")
    run.add_argument("--data", type=Path, help="dataset root (overrides config)")
    run.add_argument("--layout", choices=LAYOUTS, help="dataset layout")
    run.add_argument("--backend", help="backend name: oracle | mock | sam")
    run.add_argument("--checkpoint", help="checkpoint path for the sam backend")
    run.add_argument("--strategies", help="comma-separated names, e.g. BBOX,BBOX@0.05")
    run.add_argument("--features", help=f"comma-separated subset of {FEATURES}")
    run.add_argument("--seed", type=int, help="global seed")
    run.add_argument("--workers", type=int, help="parallel workers")
    run.add_argument("--out", type=Path, help="results directory")

    report = sub.add_parser("report", help="emit tables and plots from results")
    report.add_argument("--results", type=Path, required=True)
    report.add_argument(
        "--format",
        default="csv,json,png",
        help="comma-separated subset of csv,json,png",
    )
    report.add_argument("--out", type=Path, help="output directory (default: results/reports)")

    validate = sub.add_parser("validate-data", help="check a dataset tree")
    validate.add_argument("--root", type=Path, required=True)
    validate.add_argument("--layout", choices=LAYOUTS, required=True)
    validate.add_argument("--deep", action="store_true", help="decode every label map")

    serve = sub.add_parser("serve", help="start the annotation service")
    serve.add_argument("--backend", default="mock", help="oracle | mock | sam")
    serve.add_argument("--checkpoint", help="checkpoint path for the sam backend")
    serve.add_argument("--data", type=Path, help="dataset root to expose as items")
    serve.add_argument("--layout", choices=LAYOUTS, default="generic-folder")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8008)
    return parser


def _backend_spec(name: str | None, checkpoint: str | None) -> dict | None:
    if name is None:
        return None
    spec = {"name": name}
    if checkpoint:
        spec["checkpoint"] = checkpoint
    return spec


def _cmd_run(args) -> int:
    data = {}
    if args.config:
        data = json.loads(Path(args.config).read_text())
    if args.data:
        data.setdefault("dataset", {})["root"] = str(args.data)
    if args.layout:
        data.setdefault("dataset", {})["layout"] = args.layout
    spec = _backend_spec(args.backend, args.checkpoint)
    if spec:
        data["backend"] = spec
    if args.strategies:
        data["strategies"] = args.strategies.split(",")
    if args.features:
        data["features"] = args.features.split(",")
    if args.seed is not None:
        data["seed"] = args.seed
    if args.workers is not None:
        data["workers"] = args.workers
    if args.out:
        data["out_dir"] = str(args.out)

    try:
        config = ExperimentConfig.from_json_dict(data)
    except (KeyError, ValueError) as exc:
        print(f"invalid config: {exc}", file=sys.stderr)
        return 2

    out_dir = run_experiment(config)
    summary = json.loads((out_dir / SUMMARY_FILENAME).read_text())
    n_errors = summary.get("n_errors", 0)
    print(f"wrote {out_dir} ({summary['n_records']} records, {n_errors} errors)")
    return 1 if n_errors else 0


def _cmd_report(args) -> int:
    formats = tuple(f.strip() for f in args.format.split(",") if f.strip())
    unknown = set(formats) - {"csv", "json", "png"}
    if unknown:
        print(f"unknown formats: {sorted(unknown)}", file=sys.stderr)
        return 2
    written = emit_reports(args.results, out_dir=args.out, formats=formats)
    for path in written:
        print(path)
    return 0


def _cmd_validate(args) -> int:
    try:
        manifest = load_dataset(args.root, args.layout)
    except EyesegError as exc:
        print(f"INVALID: {exc}", file=sys.stderr)
        return 1
    problems = validate_dataset(manifest, deep=args.deep)
    if problems:
        for p in problems:
            print(f"INVALID: {p}", file=sys.stderr)
        return 1
    labeled = len(manifest.labeled_items())
    w, h = manifest.resolution
    print(f"ok: {len(manifest)} items ({labeled} labeled) at {w}x{h}")
    return 0


def _cmd_serve(args) -> int:  # pragma: no cover - network entry point
    import uvicorn

    from .service import create_app

    backend = build_backend(_backend_spec(args.backend, args.checkpoint))
    manifest = load_dataset(args.data, args.layout) if args.data else None
    uvicorn.run(create_app(backend=backend, manifest=manifest), host=args.host, port=args.port)
    return 0


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "report":
            return _cmd_report(args)
        if args.command == "validate-data":
            return _cmd_validate(args)
        if args.command == "serve":
            return _cmd_serve(args)
    except EyesegError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 2


if __name__ == "__main__":
    sys.exit(main())
