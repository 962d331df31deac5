"""Command-line entry point.

Exit status: 0 on success, 1 for usage or configuration problems, 2 when an
input data file is missing, malformed or inconsistent.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from readtrack import files
from readtrack.config import ConfigError, RunConfig, load_config, missing_keys, with_overrides
from readtrack.geometry import ReadTrackError
from readtrack.pipeline import evaluate_dirs, report_rows, run_pipeline, simulate_to_dir, track_path

EXIT_OK, EXIT_USAGE, EXIT_DATA = 0, 1, 2

log = logging.getLogger("readtrack")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="readtrack", description="Track reading progression in eye-gaze fixations.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("simulate", help="write simulated truth and fixation files")
    p.add_argument("--config")
    p.add_argument("--out", dest="output")

    p = sub.add_parser("track", help="label lines and smooth x for a fixation file or directory")
    p.add_argument("--config")
    p.add_argument("--in", dest="input")
    p.add_argument("--out", dest="output")

    p = sub.add_parser("evaluate", help="score tracked results against truth files")
    p.add_argument("--config")
    p.add_argument("--truth", required=True)
    p.add_argument("--results", required=True)
    p.add_argument("--out", dest="report", required=True)
    p.add_argument("--sigma", type=float, help="noise level label (default: from a sigma_<s> folder name)")

    p = sub.add_parser("pipeline", help="simulate, track and evaluate every sigma level")
    p.add_argument("--config")
    p.add_argument("--out", dest="output")
    return parser


def _config(args, required=()) -> RunConfig:
    config = load_config(args.config)
    overrides = {k: getattr(args, k, None) for k in ("input", "output")}
    missing = missing_keys(config, required, overrides)
    if missing:
        raise UsageError(f"missing required setting(s): {', '.join(missing)} (give as flags or config keys)")
    return with_overrides(config, **overrides)


def cmd_simulate(args) -> None:
    config = _config(args, ("output",))
    written = simulate_to_dir(config, config.output)
    log.info("wrote %d files under %s", len(written), config.output)


def cmd_track(args) -> None:
    config = _config(args, ("input", "output"))
    for path in track_path(config, config.input, config.output):
        log.info("wrote %s", path)


def cmd_evaluate(args) -> None:
    config = _config(args)
    report = evaluate_dirs(config, args.truth, args.results, args.sigma)
    files.write_report_csv(report_rows(report), args.report)
    print(
        f"sigma={files.fmt(report.sigma) or '?'} pages={len(report.matched_count_per_page)} "
        f"nrmse_measured={report.mean_nrmse_measured:.4f}% "
        f"nrmse_estimated={report.mean_nrmse_estimated:.4f}%"
    )


def cmd_pipeline(args) -> None:
    config = _config(args, ("output",))
    reports = run_pipeline(config, config.output)
    for sigma, r in reports.items():
        print(
            f"sigma={sigma:<5g} accuracy={r.mean_detection_accuracy:.4f} "
            f"nrmse_measured={r.mean_nrmse_measured:.4f}% nrmse_estimated={r.mean_nrmse_estimated:.4f}%"
        )
    print(f"results in {Path(config.output)}")


COMMANDS = {
    "simulate": cmd_simulate,
    "track": cmd_track,
    "evaluate": cmd_evaluate,
    "pipeline": cmd_pipeline,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        COMMANDS[args.command](args)
    except (UsageError, ConfigError) as exc:
        print(f"readtrack {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ReadTrackError, OSError) as exc:
        print(f"readtrack {args.command}: {exc}", file=sys.stderr)
        return EXIT_DATA
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
