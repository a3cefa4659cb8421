"""Command-line interface: ``baldwin-nk {generate,run,compare,plot,figures}``."""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from dataclasses import replace
from pathlib import Path

from . import charts, experiment, landscape, stats


class CliError(Exception):
    pass


def _atomic_write(path: Path, text: str) -> None:
    tmp = path.with_name(path.name + ".partial")
    try:
        tmp.write_text(text)
        os.replace(tmp, path)
    finally:
        if tmp.exists():
            tmp.unlink()


def _load_suite(args) -> experiment.SuiteConfig:
    if bool(args.preset) == bool(args.config):
        raise CliError("give exactly one of --preset or --config")
    if args.preset:
        suite = experiment.figure_preset(args.preset, n=args.n)
    else:
        try:
            text = Path(args.config).read_text()
        except OSError as exc:
            raise CliError(f"cannot read config: {exc}") from exc
        suite = experiment.parse_suite(text)
    changes = {}
    if args.seed is not None:
        changes["master_seed"] = args.seed
    if args.trajectory_stride is not None:
        changes["trajectory_stride"] = args.trajectory_stride
    for key in ("generations", "landscapes", "runs"):
        if getattr(args, key) is not None:
            changes[key] = getattr(args, key)
    if args.k_list is not None:
        changes["k_list"] = tuple(int(k) for k in args.k_list.split(","))
    return replace(suite, **changes) if changes else suite


def _write_run_outputs(records, out: Path, stride: int) -> list[Path]:
    written = [out]
    _atomic_write(out, experiment.results_csv(records))
    if stride > 0:
        tpath = out.with_name(out.stem + ".trajectory.csv")
        _atomic_write(tpath, experiment.trajectory_csv(records))
        written.append(tpath)
    return written


def cmd_generate(args) -> int:
    land = landscape.generate_landscape(args.n, args.k, args.seed)
    _atomic_write(Path(args.out), landscape.dumps(land))
    return 0


def cmd_run(args) -> int:
    suite = _load_suite(args)
    records = experiment.run_suite(suite, parallel=args.parallel)
    _write_run_outputs(records, Path(args.out), suite.trajectory_stride)
    return 0


def _compare(results: Path, baseline: str, out: Path) -> None:
    records = experiment.read_results(results)
    rows = stats.significance_report(records, baseline)
    _atomic_write(out, stats.report_csv(rows))


def cmd_compare(args) -> int:
    _compare(Path(args.results), args.baseline, Path(args.out))
    return 0


def _plot(results: Path, out: Path, title: str) -> None:
    records = experiment.read_results(results)
    chart = charts.chart_from_records(records, title)
    _atomic_write(out, charts.render_svg(chart))


def cmd_plot(args) -> int:
    title = args.title or Path(args.results).stem
    _plot(Path(args.results), Path(args.out), title)
    return 0


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def cmd_figures(args) -> int:
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    names = args.only.split(",") if args.only else list(experiment.PRESET_NAMES)
    manifest = {"master_seed": args.seed, "figures": {}}
    failed = False
    for name in names:
        entry = {"status": "incomplete", "files": {}}
        manifest["figures"][name] = entry
        try:
            ns = argparse.Namespace(**{**vars(args), "preset": name, "config": None})
            suite = _load_suite(ns)
            records = experiment.run_suite(suite, parallel=args.parallel)
            results = outdir / f"{name}.csv"
            written = _write_run_outputs(records, results, suite.trajectory_stride)
            report = outdir / f"{name}.report.csv"
            _compare(results, experiment.PRESET_BASELINES[name], report)
            svg = outdir / f"{name}.svg"
            _plot(results, svg, f"{name} (N={suite.n})")
            for path in [*written, report, svg]:
                entry["files"][path.name] = _sha256(path)
            entry["status"] = "complete"
        except Exception as exc:  # recorded in the manifest, reported at the end
            entry["error"] = str(exc)
            failed = True
            print(f"error: {name}: {exc}", file=sys.stderr)
    _atomic_write(outdir / "manifest.json", json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return 1 if failed else 0


def _add_suite_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, help="master seed (overrides the suite's)")
    p.add_argument("--parallel", type=int, default=os.cpu_count() or 1, help="worker processes (default: CPU count)")
    p.add_argument("--trajectory-stride", type=int, help="record stored fitness every this many generations")
    p.add_argument("--n", type=int, help="override N of a preset")
    p.add_argument("--generations", type=int, help="override generations per run")
    p.add_argument("--landscapes", type=int, help="override landscapes per cell")
    p.add_argument("--runs", type=int, help="override runs per landscape")
    p.add_argument("--k-list", help="override K grid, comma separated")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="baldwin-nk", description="Baldwin-effect haploid-diploid NK experiments")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write an NK landscape file")
    p.add_argument("-n", "--n", type=int, required=True)
    p.add_argument("-k", "--k", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("run", help="run a suite and write the results CSV")
    p.add_argument("--preset", choices=experiment.PRESET_NAMES)
    p.add_argument("--config")
    p.add_argument("--out", required=True)
    _add_suite_options(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("compare", help="t-test every strategy against a baseline")
    p.add_argument("results")
    p.add_argument("--baseline", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("plot", help="SVG chart of mean final fitness against K")
    p.add_argument("results")
    p.add_argument("--out", required=True)
    p.add_argument("--title")
    p.set_defaults(func=cmd_plot)

    p = sub.add_parser("figures", help="run, compare and plot every preset")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--only", help="comma-separated subset of presets")
    _add_suite_options(p)
    p.set_defaults(func=cmd_figures, seed=1)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (CliError, ValueError, OSError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2 if isinstance(exc, (CliError, ValueError)) else 1


if __name__ == "__main__":
    sys.exit(main())
