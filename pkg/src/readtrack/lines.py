"""Line detection: assign each fixation to a text line with an HMM over lines.

Hidden states are the page's lines. Emissions are Gaussian in the fixation's
y-coordinate around the line centre, and the transition matrix favours
staying on the current line or advancing to the next one, with a small
uniform mass for any other jump. Decoding is Viterbi in the log domain.

Optionally the horizontal jump between consecutive fixations also informs
the transition: staying on a line is scored with a Gaussian jump centred
on 0, changing line with one centred on ``-text_width`` (the return sweep).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from readtrack.geometry import (
    EmptyInputError,
    GazeSample,
    InvalidInputError,
    LabeledSample,
    PageGeometry,
)

_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)


@dataclass(frozen=True)
class HmmParams:
    """Transition and emission settings for the line HMM.

    ``emission_std`` of ``None`` means half the page's line spacing and
    ``sweep_std`` of ``None`` a quarter of the text width. ``sweep_cue=False``
    decodes from y alone.
    """

    p_stay: float = 0.94
    p_advance: float = 0.05
    p_other_total: float = 0.01
    emission_std: Optional[float] = None
    initial_mass_on_line1: float = 0.9
    sweep_cue: bool = True
    sweep_std: Optional[float] = None

    def __post_init__(self):
        probs = {
            "p_stay": self.p_stay,
            "p_advance": self.p_advance,
            "p_other_total": self.p_other_total,
            "initial_mass_on_line1": self.initial_mass_on_line1,
        }
        bad = [k for k, v in probs.items() if not 0.0 <= v <= 1.0]
        if bad:
            raise InvalidInputError(f"probabilities outside [0, 1]: {', '.join(bad)}")
        total = self.p_stay + self.p_advance + self.p_other_total
        if abs(total - 1.0) > 1e-12:
            raise InvalidInputError(f"p_stay + p_advance + p_other_total must be 1, got {total!r}")
        if self.emission_std is not None and not self.emission_std > 0:
            raise InvalidInputError(f"emission_std must be > 0, got {self.emission_std!r}")
        if self.sweep_std is not None and not self.sweep_std > 0:
            raise InvalidInputError(f"sweep_std must be > 0, got {self.sweep_std!r}")

    def std_for(self, geometry: PageGeometry) -> float:
        if self.emission_std is None:
            return 0.5 * geometry.line_spacing
        return self.emission_std

    def sweep_std_for(self, geometry: PageGeometry) -> float:
        if self.sweep_std is None:
            return 0.25 * geometry.text_width
        return self.sweep_std


def emission_logprob(z_y: float, line: int, geometry: PageGeometry, params: HmmParams) -> float:
    """Gaussian log-density of ``z_y`` around the centre of ``line``."""
    center = geometry.line_center(line)
    std = params.std_for(geometry)
    u = (z_y - center) / std
    return -0.5 * u * u - math.log(std) - _LOG_SQRT_2PI


def emission_matrix(z_y: np.ndarray, centers: np.ndarray, std: float) -> np.ndarray:
    """(T, N) array of Gaussian log-densities, one column per line centre."""
    u = (np.asarray(z_y, dtype=float)[:, None] - centers[None, :]) / std
    return -0.5 * u * u - math.log(std) - _LOG_SQRT_2PI


def transition_matrix(num_lines: int, params: HmmParams) -> np.ndarray:
    """Row-stochastic (N, N) matrix; ``A[i, j]`` is P(line j | line i), 0-based.

    Rows without a next line (the last one) or without "other" targets are
    renormalised so every row sums to one.
    """
    N = num_lines
    A = np.zeros((N, N))
    for i in range(N):
        A[i, i] = params.p_stay
        if i + 1 < N:
            A[i, i + 1] = params.p_advance
        others = [j for j in range(N) if j != i and j != i + 1]
        if others:
            A[i, others] = params.p_other_total / len(others)
        total = A[i].sum()
        if total > 0:
            A[i] /= total
        else:
            A[i, i] = 1.0
    return A


def initial_distribution(num_lines: int, params: HmmParams) -> np.ndarray:
    if num_lines == 1:
        return np.ones(1)
    pi = np.full(num_lines, (1.0 - params.initial_mass_on_line1) / (num_lines - 1))
    pi[0] = params.initial_mass_on_line1
    return pi


def _log(a: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore"):
        return np.log(a)


def jump_logprob(dx: np.ndarray, text_width: float, sweep_std: float) -> np.ndarray:
    """(T, 2) log-densities of each x jump under "same line" and "line change".

    Row ``t`` scores ``dx[t] = z_x[t] - z_x[t - 1]``; row 0 is all zeros.
    """
    dx = np.asarray(dx, dtype=float)
    out = np.zeros((dx.size, 2))
    if dx.size > 1:
        d = dx[1:]
        norm = -math.log(sweep_std) - _LOG_SQRT_2PI
        out[1:, 0] = -0.5 * (d / sweep_std) ** 2 + norm
        out[1:, 1] = -0.5 * ((d + text_width) / sweep_std) ** 2 + norm
    return out


def step_matrix(log_trans: np.ndarray, log_jump: Optional[np.ndarray], t: int) -> np.ndarray:
    """Transition log-scores into step ``t``, including the jump term if any."""
    if log_jump is None:
        return log_trans
    N = log_trans.shape[0]
    same = np.eye(N, dtype=bool)
    return log_trans + np.where(same, log_jump[t, 0], log_jump[t, 1])


def viterbi(
    log_init: np.ndarray,
    log_trans: np.ndarray,
    log_emit: np.ndarray,
    log_jump: Optional[np.ndarray] = None,
) -> np.ndarray:
    """Most probable state path (0-based) for a (T, N) emission log-likelihood table.

    ``log_jump`` is the optional (T, 2) output of :func:`jump_logprob`.
    Ties between predecessors, and between final states, go to the lower
    state index.
    """
    T, N = log_emit.shape
    back = np.zeros((T, N), dtype=np.intp)
    delta = log_init + log_emit[0]
    for t in range(1, T):
        scores = delta[:, None] + step_matrix(log_trans, log_jump, t)
        # argmax returns the first maximum, i.e. the lowest predecessor index
        back[t] = np.argmax(scores, axis=0)
        delta = scores[back[t], np.arange(N)] + log_emit[t]
    path = np.empty(T, dtype=np.intp)
    path[-1] = int(np.argmax(delta))
    for t in range(T - 1, 0, -1):
        path[t - 1] = back[t, path[t]]
    return path


def log_model(
    z_x: Optional[Sequence[float]],
    z_y: Sequence[float],
    centers: np.ndarray,
    std: float,
    params: HmmParams,
    text_width: float,
    sweep_std: float,
) -> tuple:
    """``(log_init, log_trans, log_emit, log_jump)`` for one page.

    ``log_jump`` is ``None`` when the sweep cue is off or x is not given.
    """
    N = len(centers)
    log_emit = emission_matrix(np.asarray(z_y, dtype=float), np.asarray(centers, dtype=float), std)
    log_init = _log(initial_distribution(N, params))
    log_trans = _log(transition_matrix(N, params))
    log_jump = None
    if params.sweep_cue and z_x is not None:
        log_jump = jump_logprob(np.diff(np.asarray(z_x, dtype=float), prepend=0.0), text_width, sweep_std)
    return log_init, log_trans, log_emit, log_jump


def decode(
    z_x: Optional[Sequence[float]],
    z_y: Sequence[float],
    centers: np.ndarray,
    std: float,
    params: HmmParams,
    text_width: float = 600.0,
    sweep_std: float = 150.0,
) -> np.ndarray:
    """1-based line labels for raw coordinates given explicit line centres."""
    if len(z_y) == 0:
        raise EmptyInputError("cannot detect lines on an empty page")
    return viterbi(*log_model(z_x, z_y, centers, std, params, text_width, sweep_std)) + 1


def detect_lines(
    page: Sequence[GazeSample], geometry: PageGeometry, params: Optional[HmmParams] = None
) -> list[LabeledSample]:
    """Label every fixation on the page with its maximum-a-posteriori line."""
    params = params or HmmParams()
    if len(page) == 0:
        raise EmptyInputError("cannot detect lines on an empty page")
    labels = decode(
        [s.z_x for s in page],
        [s.z_y for s in page],
        geometry.line_centers(),
        params.std_for(geometry),
        params,
        geometry.text_width,
        params.sweep_std_for(geometry),
    )
    return [LabeledSample(sample=s, est_line=int(n)) for s, n in zip(page, labels)]
