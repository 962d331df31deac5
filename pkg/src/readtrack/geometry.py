"""Page coordinate frame, fixation records and per-line batches.

Coordinates are in abstract "page units": x grows to the right, y grows
downward, and line ``n`` (1-based) is centred at ``y = n * line_spacing``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

DEFAULT_NUM_LINES = 25
DEFAULT_LINE_SPACING = 25.0
DEFAULT_TEXT_WIDTH = 600.0


class ReadTrackError(Exception):
    """Base class for data errors raised by this package."""


class InvalidInputError(ReadTrackError, ValueError):
    """Input violates a documented precondition."""


class EmptyInputError(InvalidInputError):
    """An operation that needs at least one sample was given none."""


class AlignmentError(ReadTrackError, ValueError):
    """Two sequences that must line up index-for-index do not."""


@dataclass(frozen=True)
class PageGeometry:
    """Known layout of one page of text.

    Args:
        num_lines: Number of text lines on the page.
        line_spacing: Vertical distance between adjacent line centres. This
            is also the unit ("line-width") in which noise levels are given.
        text_width: Horizontal extent of the text, used to normalise errors.
    """

    num_lines: int = DEFAULT_NUM_LINES
    line_spacing: float = DEFAULT_LINE_SPACING
    text_width: float = DEFAULT_TEXT_WIDTH

    def __post_init__(self):
        if int(self.num_lines) != self.num_lines or self.num_lines < 1:
            raise InvalidInputError(f"num_lines must be a positive integer, got {self.num_lines!r}")
        if not self.line_spacing > 0:
            raise InvalidInputError(f"line_spacing must be > 0, got {self.line_spacing!r}")
        if not self.text_width > 0:
            raise InvalidInputError(f"text_width must be > 0, got {self.text_width!r}")

    def line_center(self, n: int) -> float:
        if not 1 <= n <= self.num_lines:
            raise InvalidInputError(f"line {n} outside 1..{self.num_lines}")
        return n * self.line_spacing

    def line_centers(self) -> np.ndarray:
        """Centres of lines 1..N as a float array of length N."""
        return np.arange(1, self.num_lines + 1, dtype=float) * self.line_spacing


@dataclass(frozen=True)
class GazeSample:
    index: int
    z_x: float
    z_y: float
    timestamp: Optional[float] = None


@dataclass(frozen=True)
class GroundTruth:
    index: int
    true_x: float
    true_y: float
    true_line: int


@dataclass(frozen=True)
class LabeledSample:
    sample: GazeSample
    est_line: int

    @property
    def index(self) -> int:
        return self.sample.index


@dataclass(frozen=True)
class LineBatch:
    """Measured x-coordinates of every sample assigned to one line, in page order."""

    line: int
    xs: tuple = ()
    source_indices: tuple = ()

    def __post_init__(self):
        if len(self.xs) != len(self.source_indices):
            raise AlignmentError(
                f"line {self.line}: {len(self.xs)} xs but {len(self.source_indices)} indices"
            )
        if any(b <= a for a, b in zip(self.source_indices, self.source_indices[1:])):
            raise InvalidInputError(f"line {self.line}: source indices not strictly increasing")

    def __len__(self) -> int:
        return len(self.xs)


def check_strictly_increasing(indices: Sequence[int], what: str = "sample") -> None:
    for prev, cur in zip(indices, indices[1:]):
        if cur <= prev:
            raise InvalidInputError(f"{what} index {cur} does not follow {prev} in increasing order")


def split_into_batches(labeled: Sequence[LabeledSample], geometry: PageGeometry) -> list[LineBatch]:
    """Partition labelled samples by estimated line.

    Returns one batch per line (``result[n - 1]`` holds line ``n``); lines
    with no samples get an empty batch so the output stays aligned with the
    page's line numbering.
    """
    xs: list[list[float]] = [[] for _ in range(geometry.num_lines)]
    idx: list[list[int]] = [[] for _ in range(geometry.num_lines)]
    check_strictly_increasing([item.sample.index for item in labeled])
    for item in labeled:
        n = item.est_line
        if not 1 <= n <= geometry.num_lines:
            raise InvalidInputError(
                f"sample index {item.sample.index}: est_line {n} outside 1..{geometry.num_lines}"
            )
        xs[n - 1].append(item.sample.z_x)
        idx[n - 1].append(item.sample.index)
    return [
        LineBatch(line=n + 1, xs=tuple(xs[n]), source_indices=tuple(idx[n]))
        for n in range(geometry.num_lines)
    ]
