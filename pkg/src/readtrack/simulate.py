"""Synthetic reading pages: a left-to-right sweep of every line plus Gaussian noise."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from readtrack.geometry import GazeSample, GroundTruth, InvalidInputError, PageGeometry

SIGMA_LEVELS = (0.2, 0.22, 0.25, 0.26, 0.3, 0.37, 0.46, 0.63, 1.0)
DEFAULT_FIXATIONS_PER_LINE = 40
DEFAULT_PAGES = 20
DEFAULT_SEED = 2019


def canonical_sigma_levels() -> tuple[float, ...]:
    """The nine noise levels (in line-widths) of the reference experiment."""
    return SIGMA_LEVELS


@dataclass(frozen=True)
class SimConfig:
    geometry: PageGeometry = field(default_factory=PageGeometry)
    sigma: float = 0.2
    fixations_per_line: int = DEFAULT_FIXATIONS_PER_LINE
    pages: int = DEFAULT_PAGES
    rng_seed: int = DEFAULT_SEED

    def __post_init__(self):
        if not self.sigma >= 0:
            raise InvalidInputError(f"sigma must be >= 0, got {self.sigma!r}")
        if self.fixations_per_line < 1:
            raise InvalidInputError(f"fixations_per_line must be >= 1, got {self.fixations_per_line!r}")
        if self.pages < 1:
            raise InvalidInputError(f"pages must be >= 1, got {self.pages!r}")


@dataclass(frozen=True)
class SimulatedPage:
    truth: tuple
    measurements: tuple
    config_echo: SimConfig


def generate_truth(config: SimConfig) -> list[GroundTruth]:
    """Noise-free reading path: lines top to bottom, each swept at constant speed.

    Fixation ``k`` of ``K`` on a line sits at ``(k - 1) / (K - 1) * text_width``;
    a single fixation per line sits at x = 0.
    """
    geom = config.geometry
    K = config.fixations_per_line
    if K == 1:
        ramp = np.zeros(1)
    else:
        ramp = np.arange(K) / (K - 1) * geom.text_width
    truth = []
    i = 1
    for n in range(1, geom.num_lines + 1):
        y = geom.line_center(n)
        for x in ramp:
            truth.append(GroundTruth(index=i, true_x=float(x), true_y=y, true_line=n))
            i += 1
    return truth


def add_noise(
    truth: Sequence[GroundTruth],
    sigma: float,
    geometry: PageGeometry,
    rng: np.random.Generator,
) -> list[GazeSample]:
    """Perturb x and y independently with N(0, sigma * line_spacing)."""
    if not sigma >= 0:
        raise InvalidInputError(f"sigma must be >= 0, got {sigma!r}")
    scale = sigma * geometry.line_spacing
    noise = rng.normal(0.0, 1.0, size=(len(truth), 2)) * scale
    return [
        GazeSample(index=t.index, z_x=t.true_x + float(ex), z_y=t.true_y + float(ey))
        for t, (ex, ey) in zip(truth, noise)
    ]


def page_rngs(seed: int, pages: int) -> list[np.random.Generator]:
    """Independent per-page generators derived deterministically from ``seed``."""
    children = np.random.SeedSequence(seed).spawn(pages)
    return [np.random.default_rng(child) for child in children]


def generate_dataset(config: SimConfig) -> list[SimulatedPage]:
    """All pages share one truth path; each is re-noised from its own substream."""
    truth = tuple(generate_truth(config))
    return [
        SimulatedPage(
            truth=truth,
            measurements=tuple(add_noise(truth, config.sigma, config.geometry, rng)),
            config_echo=config,
        )
        for rng in page_rngs(config.rng_seed, config.pages)
    ]
