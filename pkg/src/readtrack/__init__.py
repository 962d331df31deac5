"""Reading-progression tracking from eye-gaze fixations.

Fixations are first assigned to text lines by an HMM decoded with Viterbi
(:mod:`readtrack.lines`), then each line's x-coordinates are smoothed by a
least-squares fit of a constant-acceleration trajectory
(:mod:`readtrack.saccade`).
"""

from readtrack.geometry import (
    AlignmentError,
    EmptyInputError,
    GazeSample,
    GroundTruth,
    InvalidInputError,
    LabeledSample,
    LineBatch,
    PageGeometry,
    ReadTrackError,
    split_into_batches,
)
from readtrack.lines import HmmParams, detect_lines, emission_logprob
from readtrack.metrics import EvalReport, PageOutcome, evaluate_dataset, matched_indices, nrmse_page
from readtrack.saccade import (
    BatchEstimate,
    MotionModel,
    SaccadeState,
    design_row,
    fit_batch,
    propagate,
    track_page,
)
from readtrack.simulate import (
    SimConfig,
    SimulatedPage,
    add_noise,
    canonical_sigma_levels,
    generate_dataset,
    generate_truth,
)

__version__ = "0.1.0"
