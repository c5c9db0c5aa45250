"""Coherent states and quantum beats of a free particle on the unit sphere."""
from .analysis import (
    BeatReport,
    CriticalPoint,
    Event,
    beat_envelope,
    classify_t_star_event,
    find_critical_points,
    periodicity_check,
)
from .coherent import (
    ComplexDirection,
    PhasePoint,
    adequate_config,
    coherent_coefficients,
    norm_sq,
    overlap_series,
    z_from_phase,
)
from .dynamics import (
    Free,
    Rotation,
    SphericalGrid,
    coherent_state,
    density_free,
    density_rotation,
    evolve,
    evolve_series,
    phi_of_t,
    theta_of_t,
)
from .hilbert import RepresentationConfig, StateVector

__version__ = "0.1.0"
