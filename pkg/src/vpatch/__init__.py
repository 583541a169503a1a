"""Contour dynamics of near-elliptical vortex patches.

Nonlinear evolution of the radial boundary deformation, conserved-quantity
diagnostics, the exact linear spectrum at the ellipse, the symplectic
rectification of the angular momentum, and non-resonance analysis of the
linear frequencies over the aspect-ratio parameter.
"""

from .dynamics import (
    ConservedSet,
    TrajectoryRecord,
    conserved_quantities,
    deformation_rhs,
    hamiltonian,
    integrate,
    linearized_rhs,
    pseudo_energy,
    rectified_momentum,
)
from .errors import ConvergenceError, DomainError, SelfIntersectionError
from .geometry import (
    DiffeoPair,
    EllipseParams,
    Grid,
    RadialDeformation,
    chord_squared,
    ellipse_params,
    g_weight,
    particular_deformation,
    straightening_diffeo,
)
from .kernels import BACKEND, COMPILED
from .quadrature import (
    LogKernelRule,
    build_log_rule,
    log_chord_convolve,
    log_potential_apply,
)
from .rectification import (
    RectifiedState,
    impact_time,
    linear_momentum_flow,
    momentum_flow,
    rectify,
    rectify_inverse,
)
from .resonance import (
    ResonanceConfig,
    ResonanceReport,
    measure_estimate,
    melnikov_margins,
    transversality_margins,
)
from .spectral import (
    FourierModes,
    ModeData,
    asymptotic_remainder,
    critical_gamma,
    linear_solution,
    log_potential_modes,
    mode_data,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
