"""End-to-end runs: simulate pages, track them, and score the results.

The directory-level functions here back the CLI subcommands. A simulated
sigma level lives under ``<out>/sigma_<s>/`` with one file per page in each
of ``truth/``, ``fixations/`` and ``results/``; files are paired across
those folders by name.
"""

from __future__ import annotations

import logging
import math
import re
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from readtrack import files
from readtrack.config import RunConfig
from readtrack.geometry import AlignmentError, GazeSample, LabeledSample, PageGeometry, split_into_batches
from readtrack.lines import HmmParams, detect_lines
from readtrack.metrics import EvalReport, PageOutcome, evaluate_dataset, protocol_warnings
from readtrack.saccade import MotionModel, track_page
from readtrack.simulate import generate_dataset

log = logging.getLogger(__name__)


class DataFileError(files.CsvFormatError):
    """Input files are missing, unpaired or inconsistent with each other."""


@dataclass(frozen=True)
class TrackedPage:
    labeled: list
    estimates: list
    x_hat: np.ndarray  # aligned with ``labeled``; NaN where no estimate exists

    def rows(self) -> list[tuple[LabeledSample, Optional[float]]]:
        return [(lab, None if math.isnan(v) else float(v)) for lab, v in zip(self.labeled, self.x_hat)]


def track_samples(
    samples: Sequence[GazeSample],
    geometry: PageGeometry,
    hmm: Optional[HmmParams] = None,
    model: Optional[MotionModel] = None,
) -> TrackedPage:
    """Detect lines, split into batches and fit each batch.

    Works on positions rather than the samples' own indices, so input
    indices need only be increasing, not 1..T.
    """
    positional = [replace(s, index=i) for i, s in enumerate(samples, start=1)]
    labeled = detect_lines(positional, geometry, hmm)
    batches = split_into_batches(labeled, geometry)
    track = track_page(batches, model, num_samples=len(samples))
    original = [LabeledSample(sample=s, est_line=lab.est_line) for s, lab in zip(samples, labeled)]
    return TrackedPage(original, track.estimates, track.x_hat)


def sigma_dirname(sigma: float) -> str:
    return f"sigma_{sigma:g}"


def page_filename(page: int) -> str:
    return f"page_{page:03d}.csv"


def simulate_to_dir(config: RunConfig, out_dir) -> list[Path]:
    """Write truth and fixation files for every configured sigma level."""
    out_dir = Path(out_dir)
    written = []
    for sigma in config.sigma_levels:
        level = out_dir / sigma_dirname(sigma)
        for p, page in enumerate(generate_dataset(config.sim(sigma)), start=1):
            truth_path = level / "truth" / page_filename(p)
            fix_path = level / "fixations" / page_filename(p)
            files.write_truth_csv(page.truth, truth_path)
            files.write_fixation_csv(page.measurements, fix_path)
            written += [truth_path, fix_path]
    return written


def _csvs(path: Path) -> list[Path]:
    return sorted(p for p in path.iterdir() if p.suffix == ".csv" and p.is_file())


def track_path(config: RunConfig, in_path, out_dir) -> list[Path]:
    """Track one fixation file, or every ``*.csv`` in a directory.

    Each input ``name.csv`` produces ``out_dir/name.csv`` in labelled format.
    """
    in_path = Path(in_path)
    if in_path.is_dir():
        inputs = _csvs(in_path)
        if not inputs:
            raise DataFileError(f"{in_path}: no .csv files to track")
    elif in_path.exists():
        inputs = [in_path]
    else:
        raise DataFileError(f"{in_path}: no such file or directory")
    geometry, hmm, model = config.geometry(), config.hmm(), config.motion()
    written = []
    for src in inputs:
        samples = files.parse_fixation_csv(src, geometry, normalized=config.normalized_coords)
        tracked = track_samples(samples, geometry, hmm, model)
        for msg in protocol_warnings(tracked.labeled, geometry.num_lines):
            log.info("%s: %s", src.name, msg)
        dest = Path(out_dir) / src.name
        files.write_labeled_csv(tracked.rows(), dest)
        written.append(dest)
    return written


def sigma_from_path(path) -> Optional[float]:
    for part in reversed(Path(path).resolve().parts):
        m = re.fullmatch(r"sigma_([0-9.eE+-]+)", part)
        if m:
            try:
                return float(m.group(1))
            except ValueError:
                return None
    return None


def load_outcome(truth_path: Path, result_path: Path) -> PageOutcome:
    truth = files.read_truth_csv(truth_path)
    results = files.read_labeled_csv(result_path)
    if len(truth) != len(results):
        raise DataFileError(
            f"row count mismatch: {truth_path} has {len(truth)} rows, {result_path} has {len(results)}"
        )
    if [t.index for t in truth] != [lab.sample.index for lab, _ in results]:
        raise DataFileError(f"{truth_path} and {result_path} do not list the same indices in order")
    # metrics address x_hat by index, so renumber both sides by position
    truth = [replace(t, index=i) for i, t in enumerate(truth, start=1)]
    labeled = [
        LabeledSample(replace(lab.sample, index=i), lab.est_line)
        for i, (lab, _) in enumerate(results, start=1)
    ]
    x_hat = np.array([math.nan if xh is None else xh for _, xh in results])
    return PageOutcome(truth=truth, labeled=labeled, x_hat=x_hat)


def evaluate_dirs(config: RunConfig, truth_dir, results_dir, sigma: Optional[float] = None) -> EvalReport:
    truth_dir, results_dir = Path(truth_dir), Path(results_dir)
    for d in (truth_dir, results_dir):
        if not d.is_dir():
            raise DataFileError(f"{d}: not a directory")
    truth_files = _csvs(truth_dir)
    if not truth_files:
        raise DataFileError(f"{truth_dir}: no truth files")
    outcomes = []
    for tpath in truth_files:
        rpath = results_dir / tpath.name
        if not rpath.exists():
            raise DataFileError(f"{tpath} has no matching results file {rpath}")
        try:
            outcomes.append(load_outcome(tpath, rpath))
        except AlignmentError as exc:
            raise DataFileError(f"{tpath} vs {rpath}: {exc}") from None
    if sigma is None:
        sigma = sigma_from_path(truth_dir)
    return evaluate_dataset(outcomes, config.text_width, sigma)


def report_rows(report: EvalReport) -> list[tuple]:
    """Per-page rows followed by one ``mean`` summary row."""
    rows = []
    for p, (m, acc, meas, est) in enumerate(
        zip(
            report.matched_count_per_page,
            report.detection_accuracy_per_page,
            report.per_page_nrmse_measured,
            report.per_page_nrmse_estimated,
        ),
        start=1,
    ):
        rows.append((report.sigma, p, m, acc, meas, est))
    rows.append(
        (
            report.sigma,
            "mean",
            int(sum(report.matched_count_per_page)),
            report.mean_detection_accuracy,
            report.mean_nrmse_measured,
            report.mean_nrmse_estimated,
        )
    )
    return rows


def run_pipeline(config: RunConfig, out_dir) -> dict[float, EvalReport]:
    """Simulate, track and evaluate every sigma level; write report and curve files."""
    out_dir = Path(out_dir)
    simulate_to_dir(config, out_dir)
    reports = {}
    for sigma in config.sigma_levels:
        level = out_dir / sigma_dirname(sigma)
        track_path(config, level / "fixations", level / "results")
        reports[sigma] = evaluate_dirs(config, level / "truth", level / "results", sigma)
    files.write_report_csv([row for r in reports.values() for row in report_rows(r)], out_dir / "report.csv")
    files.write_curve_csv(
        [(s, r.mean_nrmse_measured, r.mean_nrmse_estimated) for s, r in reports.items()],
        out_dir / "nrmse_curve.csv",
    )
    return reports

