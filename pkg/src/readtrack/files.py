"""CSV readers and writers.

All files are UTF-8, comma separated, LF terminated, with a mandatory header
row. Floats are written with 9 significant digits, blanks mean "no value".
"""

from __future__ import annotations

import csv
import logging
import math
import numbers
from pathlib import Path
from typing import Iterable, Optional, Sequence

from readtrack.geometry import (
    EmptyInputError,
    GazeSample,
    GroundTruth,
    InvalidInputError,
    LabeledSample,
    PageGeometry,
    ReadTrackError,
    check_strictly_increasing,
)

log = logging.getLogger(__name__)

FIXATION_HEADER = ("index", "time", "fpog_x", "fpog_y")
TRUTH_HEADER = ("index", "true_x", "true_y", "true_line")
LABELED_HEADER = ("index", "z_x", "z_y", "est_line", "x_hat")
REPORT_HEADER = ("sigma", "page", "m", "accuracy", "nrmse_measured", "nrmse_estimated")
CURVE_HEADER = ("sigma", "mean_nrmse_measured", "mean_nrmse_estimated")


class CsvFormatError(ReadTrackError, ValueError):
    """A CSV file does not follow the expected layout."""


def fmt(value) -> str:
    """Locale-independent text for one cell."""
    if value is None:
        return ""
    if isinstance(value, numbers.Integral):
        return str(int(value))
    value = float(value)
    if math.isnan(value):
        return ""
    return format(value, ".9g")


def _write(path, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([fmt(v) if not isinstance(v, str) else v for v in row])


def _key(name: str) -> str:
    return name.strip().lower().replace("_", "")


def _read(path, required: Sequence[str], optional: Sequence[str] = ()) -> list[tuple[int, dict]]:
    """Rows as ``(file line number, {canonical column: raw text})``."""
    path = Path(path)
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise EmptyInputError(f"{path}: file is empty") from None
        wanted = {_key(c): c for c in (*required, *optional)}
        cols = {}
        for pos, name in enumerate(header):
            canon = wanted.get(_key(name))
            if canon is not None and canon not in cols:
                cols[canon] = pos
        missing = [c for c in required if c not in cols]
        if missing:
            raise CsvFormatError(f"{path}: header lacks column(s) {', '.join(missing)}")
        rows = []
        for record in reader:
            if not record or all(not cell.strip() for cell in record):
                continue
            if len(record) < len(header):
                raise CsvFormatError(
                    f"{path}: row {reader.line_num}: expected {len(header)} fields, got {len(record)}"
                )
            rows.append((reader.line_num, {c: record[pos].strip() for c, pos in cols.items()}))
    return rows


def _float(path, lineno: int, column: str, text: str, allow_blank: bool = False) -> Optional[float]:
    if text == "" and allow_blank:
        return None
    try:
        value = float(text)
    except ValueError:
        raise CsvFormatError(f"{path}: row {lineno}: {column} is not a number: {text!r}") from None
    if not math.isfinite(value):
        raise CsvFormatError(f"{path}: row {lineno}: {column} is not finite: {text!r}")
    return value


def _int(path, lineno: int, column: str, text: str) -> int:
    try:
        return int(text)
    except ValueError:
        raise CsvFormatError(f"{path}: row {lineno}: {column} is not an integer: {text!r}") from None


def parse_fixation_csv(
    path, geometry: Optional[PageGeometry] = None, normalized: bool = False
) -> list[GazeSample]:
    """Read ``index,time,fpog_x,fpog_y`` fixations in file order.

    ``index`` and ``time`` may be missing or blank; indices then become
    1..T. With ``normalized`` the coordinates are fractions of the page and
    are mapped to ``x * text_width`` and ``y * (N + 1) * line_spacing``.
    """
    geometry = geometry or PageGeometry()
    rows = _read(path, required=("fpog_x", "fpog_y"), optional=("index", "time"))
    if not rows:
        raise EmptyInputError(f"{path}: no fixation rows")
    has_index = all(r.get("index", "") != "" for _, r in rows)
    x_scale = geometry.text_width if normalized else 1.0
    y_scale = (geometry.num_lines + 1) * geometry.line_spacing if normalized else 1.0
    samples = []
    for pos, (lineno, r) in enumerate(rows, start=1):
        x = _float(path, lineno, "fpog_x", r["fpog_x"])
        y = _float(path, lineno, "fpog_y", r["fpog_y"])
        t = _float(path, lineno, "time", r.get("time", ""), allow_blank=True)
        index = _int(path, lineno, "index", r["index"]) if has_index else pos
        samples.append(GazeSample(index=index, z_x=x * x_scale, z_y=y * y_scale, timestamp=t))
    try:
        check_strictly_increasing([s.index for s in samples])
    except InvalidInputError as exc:
        raise CsvFormatError(f"{path}: {exc}") from None
    times = [s.timestamp for s in samples if s.timestamp is not None]
    if any(b < a for a, b in zip(times, times[1:])):
        log.warning("%s: time column is not monotone", path)
    return samples


def write_fixation_csv(samples: Sequence[GazeSample], path) -> None:
    _write(path, FIXATION_HEADER, ((s.index, s.timestamp, s.z_x, s.z_y) for s in samples))


def write_truth_csv(truth: Sequence[GroundTruth], path) -> None:
    _write(path, TRUTH_HEADER, ((t.index, t.true_x, t.true_y, t.true_line) for t in truth))


def read_truth_csv(path) -> list[GroundTruth]:
    rows = _read(path, required=TRUTH_HEADER)
    return [
        GroundTruth(
            index=_int(path, n, "index", r["index"]),
            true_x=_float(path, n, "true_x", r["true_x"]),
            true_y=_float(path, n, "true_y", r["true_y"]),
            true_line=_int(path, n, "true_line", r["true_line"]),
        )
        for n, r in rows
    ]


def write_labeled_csv(results: Sequence[tuple[LabeledSample, Optional[float]]], path) -> None:
    """Write ``(labelled sample, x estimate or None)`` pairs; missing estimates are blank."""
    _write(
        path,
        LABELED_HEADER,
        ((lab.sample.index, lab.sample.z_x, lab.sample.z_y, lab.est_line, xh) for lab, xh in results),
    )


def read_labeled_csv(path) -> list[tuple[LabeledSample, Optional[float]]]:
    out = []
    for n, r in _read(path, required=LABELED_HEADER):
        sample = GazeSample(
            index=_int(path, n, "index", r["index"]),
            z_x=_float(path, n, "z_x", r["z_x"]),
            z_y=_float(path, n, "z_y", r["z_y"]),
        )
        lab = LabeledSample(sample=sample, est_line=_int(path, n, "est_line", r["est_line"]))
        out.append((lab, _float(path, n, "x_hat", r["x_hat"], allow_blank=True)))
    return out


def write_report_csv(rows: Iterable[Sequence], path) -> None:
    _write(path, REPORT_HEADER, rows)


def write_curve_csv(rows: Iterable[Sequence], path) -> None:
    _write(path, CURVE_HEADER, rows)


def read_rows(path) -> list[dict]:
    """Generic reader for report-style files: header-keyed dicts of raw text."""
    with open(path, encoding="utf-8", newline="") as fh:
        return list(csv.DictReader(fh))
