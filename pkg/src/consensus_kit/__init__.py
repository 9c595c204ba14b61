"""Consensus of inhomogeneous products of row-stochastic matrices.

Stabilization schedules, Gantmacher decomposition, ergodicity bounds along
the schedule, spectral projection with joint spectral radius bounds, and
interval-growth experiments.
"""
__version__ = "0.1.0"

from .errors import *  # noqa: F401,F403
from .kernels import BACKEND
from .stochastic import (
    EPS_C,
    EPS_ROW,
    EPS_Z,
    OpinionVector,
    StochasticMatrix,
    ZeroPattern,
    backward_accumulate,
    column_spread,
    forward_accumulate,
    is_consensus,
    multiply,
    pattern_of,
    pos_min,
    row_sum_norm,
    tau,
    validate,
)
from .sources import ArraySequence, MatrixSequence, constant_sequence
from .gantmacher import (
    ClassPartition,
    GantmacherForm,
    communicating_classes,
    extract_block,
    gantmacher_form,
    spectrum_union_check,
)
from .schedule import AccumulationSchedule, detect_schedule, verify_schedule, window_accumulations
from .spectral import JsrBounds, build_projection, jsr_bounds, spectral_radius, transform_block, transform_full
from .convergence import ConvergenceReport, check_theorem, essential_limit, inessential_decay, tau_envelope
from .growth import (
    GeneratorSpec,
    check_delta_threshold,
    gap_lengths,
    generate_sequence,
    growth_experiment,
    series_partial_sums,
)
