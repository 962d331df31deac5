"""Least-squares batch estimation of the horizontal reading trajectory.

Each line's measured x-coordinates are explained by a noiseless
constant-acceleration model started from an unknown initial state
``(position, velocity, acceleration)``::

    z(k) = [1, k*dt, (k*dt)**2 / 2] @ x0 + v(k),   k = 1..l

``x0`` is the weighted least-squares solution ``(H' R^-1 H)^-1 H' R^-1 z``
with ``R = sigma**2 I``, and the smoothed positions are ``H @ x0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Optional, Sequence

import numpy as np
from scipy.linalg import solve_triangular

from readtrack.geometry import InvalidInputError, LineBatch

DEFAULT_DELTA_T = 64.0


@dataclass(frozen=True)
class MotionModel:
    delta_t: float = DEFAULT_DELTA_T
    sigma: float = 1.0

    def __post_init__(self):
        if not self.delta_t > 0:
            raise InvalidInputError(f"delta_t must be > 0, got {self.delta_t!r}")
        if not self.sigma > 0:
            raise InvalidInputError(f"sigma must be > 0, got {self.sigma!r}")


@dataclass(frozen=True)
class SaccadeState:
    position: float = 0.0
    velocity: float = 0.0
    acceleration: float = 0.0

    def __post_init__(self):
        if not all(map(math.isfinite, (self.position, self.velocity, self.acceleration))):
            raise InvalidInputError(f"non-finite state {self!r}")

    def as_array(self) -> np.ndarray:
        return np.array([self.position, self.velocity, self.acceleration])

    @classmethod
    def from_array(cls, values) -> SaccadeState:
        p, v, a = (float(x) for x in values)
        return cls(p, v, a)


@dataclass(frozen=True)
class BatchEstimate:
    """Fit of one line's batch.

    ``initial_state`` is ``None`` and ``xs_hat`` empty when the batch had no
    samples (``skipped``). ``order`` is the number of state components that
    were actually estimated (1, 2 or 3); the rest are held at zero.
    """

    line: int
    initial_state: Optional[SaccadeState]
    xs_hat: tuple = ()
    source_indices: tuple = ()
    order: int = 0
    skipped: bool = False
    rank_deficient: bool = False


def transition(k: float, delta_t: float) -> np.ndarray:
    """State transition matrix over ``k`` steps."""
    s = k * delta_t
    return np.array([[1.0, s, s * s / 2.0], [0.0, 1.0, s], [0.0, 0.0, 1.0]])


def design_row(k: int, delta_t: float) -> np.ndarray:
    if k < 1:
        raise InvalidInputError(f"step index must be >= 1, got {k}")
    s = k * delta_t
    return np.array([1.0, s, s * s / 2.0])


def design_matrix(length: int, delta_t: float) -> np.ndarray:
    """Stacked design rows for k = 1..length, shape (length, 3)."""
    s = np.arange(1, length + 1, dtype=float) * delta_t
    return np.column_stack([np.ones(length), s, s * s / 2.0])


def propagate(state: SaccadeState, k: int, delta_t: float) -> SaccadeState:
    if k < 0:
        raise InvalidInputError(f"cannot propagate a negative number of steps ({k})")
    return SaccadeState.from_array(transition(k, delta_t) @ state.as_array())


def _solve_scaled(H: np.ndarray, z: np.ndarray) -> tuple[np.ndarray, bool]:
    # Columns span ~1 to ~(l*dt)**2, so equilibrate before the QR solve.
    scale = np.linalg.norm(H, axis=0)
    scale[scale == 0] = 1.0
    Hs = H / scale
    Q, R = np.linalg.qr(Hs)
    diag = np.abs(np.diag(R))
    tol = diag.max(initial=0.0) * max(H.shape) * np.finfo(float).eps
    if diag.size == 0 or diag.min() <= tol:
        theta, *_ = np.linalg.lstsq(Hs, z, rcond=None)
        return theta / scale, True
    return solve_triangular(R, Q.T @ z) / scale, False


def fit_batch(batch: LineBatch, model: Optional[MotionModel] = None) -> BatchEstimate:
    """Estimate the initial state of one line and reconstruct its x positions.

    Batches of one or two samples are fitted with a position-only or a
    position+velocity model respectively (the largest model they identify).
    """
    model = model or MotionModel()
    z = np.asarray(batch.xs, dtype=float)
    l = z.size
    if l == 0:
        return BatchEstimate(line=batch.line, initial_state=None, skipped=True)
    if not np.all(np.isfinite(z)):
        raise InvalidInputError(f"line {batch.line}: non-finite x measurement")

    order = min(l, 3)
    H = design_matrix(l, model.delta_t)
    w = 1.0 / model.sigma
    theta, deficient = _solve_scaled(H[:, :order] * w, z * w)

    x0 = np.zeros(3)
    x0[:order] = theta
    xs_hat = H @ x0
    return BatchEstimate(
        line=batch.line,
        initial_state=SaccadeState.from_array(x0),
        xs_hat=tuple(float(v) for v in xs_hat),
        source_indices=tuple(batch.source_indices),
        order=order,
        rank_deficient=deficient,
    )


class PageTrack(NamedTuple):
    estimates: list
    x_hat: np.ndarray  # x_hat[i - 1] is the estimate for page index i; NaN if none


def track_page(
    batches: Sequence[LineBatch],
    model: Optional[MotionModel] = None,
    num_samples: Optional[int] = None,
) -> PageTrack:
    """Fit every batch and scatter the estimates back into page order.

    ``num_samples`` sets the length of the flattened vector; by default it is
    the largest index present in any batch.
    """
    model = model or MotionModel()
    seen: set[int] = set()
    for b in batches:
        overlap = seen.intersection(b.source_indices)
        if overlap:
            raise InvalidInputError(f"index {min(overlap)} appears in more than one batch")
        seen.update(b.source_indices)

    estimates = [fit_batch(b, model) for b in batches]
    if num_samples is None:
        num_samples = max(seen, default=0)
    x_hat = np.full(num_samples, np.nan)
    for est in estimates:
        if est.skipped:
            continue
        idx = np.asarray(est.source_indices, dtype=np.intp) - 1
        if idx.min() < 0 or idx.max() >= num_samples:
            raise InvalidInputError(f"line {est.line}: index outside 1..{num_samples}")
        x_hat[idx] = est.xs_hat
    return PageTrack(estimates, x_hat)
