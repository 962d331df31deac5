"""Scoring of line detection and x-trajectory estimates against ground truth."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from readtrack.geometry import (
    DEFAULT_TEXT_WIDTH,
    AlignmentError,
    GroundTruth,
    LabeledSample,
    ReadTrackError,
)

log = logging.getLogger(__name__)


class UndefinedMetricError(ReadTrackError):
    """NRMSE requested over zero matched samples."""


@dataclass(frozen=True)
class PageOutcome:
    """Everything needed to score one page.

    ``x_hat[i - 1]`` is the tracker's estimate for page index ``i``.
    """

    truth: Sequence[GroundTruth]
    labeled: Sequence[LabeledSample]
    x_hat: Sequence[float]


@dataclass(frozen=True)
class EvalReport:
    sigma: Optional[float]
    per_page_nrmse_estimated: tuple
    per_page_nrmse_measured: tuple
    mean_nrmse_estimated: float
    mean_nrmse_measured: float
    matched_count_per_page: tuple
    detection_accuracy_per_page: tuple

    @property
    def mean_detection_accuracy(self) -> float:
        return float(np.mean(self.detection_accuracy_per_page))


def matched_indices(labeled: Sequence[LabeledSample], truth: Sequence[GroundTruth]) -> list[int]:
    """Page indices whose estimated line equals the true line, ascending."""
    if len(labeled) != len(truth):
        raise AlignmentError(f"{len(labeled)} labelled samples but {len(truth)} truth records")
    out = []
    for lab, tru in zip(labeled, truth):
        if lab.sample.index != tru.index:
            raise AlignmentError(f"sample index {lab.sample.index} paired with truth index {tru.index}")
        if lab.est_line == tru.true_line:
            out.append(tru.index)
    return sorted(out)


def nrmse_page(values, truth_x, text_width: float = DEFAULT_TEXT_WIDTH) -> float:
    """Root-mean-square error as a percentage of the text width."""
    values = np.asarray(values, dtype=float)
    truth_x = np.asarray(truth_x, dtype=float)
    if values.shape != truth_x.shape:
        raise AlignmentError(f"{values.size} values but {truth_x.size} truth values")
    if values.size == 0:
        raise UndefinedMetricError("NRMSE undefined for zero matched samples")
    return float(np.sqrt(np.mean((values - truth_x) ** 2)) * 100.0 / text_width)


def _mean_defined(values: Sequence[float]) -> float:
    defined = [v for v in values if not math.isnan(v)]
    return float(np.mean(defined)) if defined else math.nan


def evaluate_dataset(
    pages: Sequence[PageOutcome],
    text_width: float = DEFAULT_TEXT_WIDTH,
    sigma: Optional[float] = None,
) -> EvalReport:
    """Score measured and estimated x against truth over each page's matched samples.

    Pages without any correctly detected sample get NaN NRMSE and are left
    out of the means.
    """
    est, meas, counts, acc = [], [], [], []
    for p, page in enumerate(pages, start=1):
        matched = matched_indices(page.labeled, page.truth)
        x_hat = np.asarray(page.x_hat, dtype=float)
        by_index = {t.index: t for t in page.truth}
        z_by_index = {lab.sample.index: lab.sample.z_x for lab in page.labeled}
        truth_x = [by_index[i].true_x for i in matched]
        T = len(page.truth)
        counts.append(len(matched))
        acc.append(len(matched) / T if T else math.nan)
        try:
            est.append(nrmse_page(x_hat[np.asarray(matched, dtype=np.intp) - 1], truth_x, text_width))
            meas.append(nrmse_page([z_by_index[i] for i in matched], truth_x, text_width))
        except UndefinedMetricError:
            log.warning("page %d has no correctly detected samples; excluded from mean NRMSE", p)
            est.append(math.nan)
            meas.append(math.nan)
    return EvalReport(
        sigma=sigma,
        per_page_nrmse_estimated=tuple(est),
        per_page_nrmse_measured=tuple(meas),
        mean_nrmse_estimated=_mean_defined(est),
        mean_nrmse_measured=_mean_defined(meas),
        matched_count_per_page=tuple(counts),
        detection_accuracy_per_page=tuple(acc),
    )


def protocol_warnings(labeled: Sequence[LabeledSample], num_lines: int) -> list[str]:
    """Flag departures from a single top-to-bottom read of every line.

    Real recordings have no ground truth, so this is the only sanity check
    available: every line should be visited once, in order, and lines should
    hold comparable numbers of fixations.
    """
    labels = [s.est_line for s in labeled]
    warnings = []
    runs = [labels[0]] if labels else []
    for n in labels[1:]:
        if n != runs[-1]:
            runs.append(n)
    missing = sorted(set(range(1, num_lines + 1)) - set(labels))
    if missing:
        warnings.append(f"no fixations assigned to lines {missing}")
    back = [(a, b) for a, b in zip(runs, runs[1:]) if b < a]
    if back:
        warnings.append(f"{len(back)} backward line transitions (first {back[0][0]}->{back[0][1]})")
    revisited = sorted({n for n in runs if runs.count(n) > 1})
    if revisited:
        warnings.append(f"lines visited more than once: {revisited}")
    if labels:
        counts = np.bincount(labels, minlength=num_lines + 1)[1:]
        present = counts[counts > 0]
        med = float(np.median(present))
        odd = [n + 1 for n, c in enumerate(counts) if c and (c < med / 3 or c > 3 * med)]
        if odd:
            warnings.append(f"lines with unusual fixation counts (median {med:g}): {odd}")
    return warnings
