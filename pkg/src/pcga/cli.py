"""Command-line interface: ``pcga run | report | targets | validate``.

Exit codes: 0 success, 1 usage error, 2 incomplete data, 3 internal
invariant violation.
"""

from __future__ import annotations

import argparse
import logging
import sys
import time
from pathlib import Path

from .core import ConfigurationError
from .experiment import WORKERS_ENV, ExperimentSpec, ManifestMismatch, expand_grid, preset, read_manifest, run_experiment
from .reports import KINDS, compute_targets, load_logs, read_targets, report, targets_csv

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INCOMPLETE = 2
EXIT_INVARIANT = 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _load_spec(source: str) -> ExperimentSpec:
    if source.startswith("preset:"):
        return preset(source.split(":", 1)[1])
    path = Path(source)
    if not path.exists():
        raise UsageError(f"spec file {source} not found")
    return ExperimentSpec.load(path)


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def _logs_dir(path: str) -> Path:
    p = Path(path)
    if not p.is_dir():
        raise UsageError(f"{path} is not a directory")
    return p


def cmd_run(args) -> int:
    spec = _load_spec(args.spec)
    if args.dry_run:
        grid = expand_grid(spec)
        print(f"{len(grid.cells)} cells ({len(grid.skipped)} skipped), {len(grid)} runs")
        return EXIT_OK
    out = Path(args.out or f"results/{spec.name}")
    start = time.perf_counter()
    run_experiment(spec, out, args.workers)
    manifest = read_manifest(out)
    n_cells = len(manifest["cells"])
    status = "complete" if manifest["complete"] else "INCOMPLETE"
    print(f"{out}: {n_cells} cells, {status} ({time.perf_counter() - start:.1f} s)")
    return EXIT_OK if manifest["complete"] else EXIT_INCOMPLETE


def cmd_report(args) -> int:
    data = load_logs(_logs_dir(args.logs))
    targets = read_targets(args.targets) if args.targets else None
    _emit(report(data, args.kind, targets), args.out)
    missing = data.incomplete_cells
    if missing:
        print(f"warning: {len(missing)} incomplete cells reported as NA", file=sys.stderr)
        return EXIT_INCOMPLETE
    return EXIT_OK


def cmd_targets(args) -> int:
    data = load_logs(_logs_dir(args.logs))
    if not data.logs:
        print("no run logs found", file=sys.stderr)
        return EXIT_INCOMPLETE
    _emit(targets_csv(compute_targets(data, args.percentile)), args.out)
    return EXIT_INCOMPLETE if data.incomplete_cells else EXIT_OK


def cmd_validate(args) -> int:
    from .validation import run_self_tests

    checks = run_self_tests(samples=args.samples, exhaustive=not args.quick)
    failed = 0
    for c in checks:
        if not c.passed or args.verbose:
            print(f"{'PASS' if c.passed else 'FAIL'} {c.name} {c.detail}".rstrip())
        failed += not c.passed
    print(f"{len(checks) - failed}/{len(checks)} problem checks passed")
    return EXIT_INVARIANT if failed else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="pcga", description="(mu+lambda) GA benchmarking with crossover probability p_c")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("run", help="execute an experiment spec (YAML file or preset:<name>)")
    p.add_argument("spec")
    p.add_argument("--out", help="output directory (default results/<spec name>)")
    p.add_argument("--workers", type=int, help=f"worker processes (default ${WORKERS_ENV} or 1)")
    p.add_argument("--dry-run", action="store_true", help="only print the grid size")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("report", help="write a CSV report from a results directory")
    p.add_argument("logs")
    p.add_argument("--kind", required=True, choices=KINDS)
    p.add_argument("--targets", help="problem,n,target CSV (as written by the targets verb)")
    p.add_argument("--out", help="output file (default stdout)")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("targets", help="select ERT targets from final best values")
    p.add_argument("logs")
    p.add_argument("--percentile", type=float, default=2.0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_targets)

    p = sub.add_parser("validate", help="run the problem self-tests")
    p.add_argument("--samples", type=int, default=200)
    p.add_argument("--quick", action="store_true", help="skip exhaustive enumeration")
    p.set_defaults(func=cmd_validate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (UsageError, ConfigurationError, ManifestMismatch, ValueError, OSError) as exc:
        print(f"pcga: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except AssertionError as exc:
        print(f"pcga: invariant violated: {exc}", file=sys.stderr)
        return EXIT_INVARIANT


if __name__ == "__main__":
    sys.exit(main())
