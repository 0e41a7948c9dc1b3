"""Desk-scale toolkit for the two-state Wonham filter at strong observation
noise: exact chain sampling, twin filter integrators, fixed-lag smoothing with
its damping term, the limiting spike process, and the pathwise metrics that
tell smoothing regimes apart.
"""

from .config import ExperimentConfig, RngStreams, Smoothing
from .errors import (
    ConfigurationError,
    DomainError,
    GridMismatchError,
    IntegrationError,
    QuadratureError,
    SingularWindowError,
    WonhamError,
)
from .model import (
    JumpPath,
    PlanarGraph,
    SamplePath,
    TimeGrid,
    build_grid,
    graph_of_cadlag,
    graph_of_continuous,
    state_at,
)
from .markov import RatePair, conditioned_no_jump_path, sample_jump_path, stationary_law
from .observation import ObservationIncrements, simulate_observation
from .filtering import (
    FilterPath,
    innovation_increments,
    integrate_filter_logistic,
    integrate_filter_pi,
)
from .smoothing import (
    DampingPath,
    SmoothedPath,
    additive_functional,
    damping_coefficient,
    damping_window,
    smooth_backward_ode,
    smooth_path,
    smoothing_components,
)
from .coordinates import (
    ResidualDecomposition,
    backward_transform,
    forward_transform,
    logistic,
    logit,
    residual_decompose,
    scale_g,
    scale_h,
)
from .spikes import (
    SpikeSet,
    limit_estimator_slices,
    max_spike,
    max_spike_cdf,
    sample_spike_process,
    spike_graph,
)
from .metrics import (
    ErrorEstimate,
    ExcursionSet,
    distance_H,
    distance_H_bruteforce,
    distance_L,
    error_probability,
    estimator_path,
    extract_excursions,
    hitting_time,
)

__all__ = [name for name in dir() if not name.startswith("_")]
