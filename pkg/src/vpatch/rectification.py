"""Symplectic rectification of the normalized angular momentum.

The normalized momentum generates an affine transport flow whose linear
part is conjugate, through the straightening warp beta, to a plain
translation:

    linear flow = (1/g) * B[ translate(2*aleph*t) [ B^{-1}[ g * xi ] ] ]

with (B q)(theta) = q(theta + beta(theta)). The rectifying map sends xi to
(momentum, impact time, mode-2-free part of the flowed state); its inverse
is explicit thanks to the closed-form inverse psi(z) = (-1+sqrt(1+4z))/2
of y + y^2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import fourier
from .dynamics import rectified_momentum
from .errors import ConvergenceError, DomainError
from .geometry import (
    EllipseParams,
    RadialDeformation,
    beta_warp,
    beta_warp_inverse,
    g_weight,
    particular_deformation,
)
from .spectral import SQRT_PI, basis_cos, basis_sin

NEWTON_MAX_ITER = 50
NEWTON_TOL = 1e-13
DEFAULT_RADIUS = 0.05  # advisory smallness radius for the impact-time solve


def _warp_tables(params: EllipseParams, n_points: int):
    grid_nodes = fourier.nodes(n_points)
    warped_fwd = grid_nodes + beta_warp(params, grid_nodes)
    warped_inv = grid_nodes + beta_warp_inverse(params, grid_nodes)
    g = g_weight(params, grid_nodes)
    return warped_fwd, warped_inv, np.asarray(g)


def _linear_flow_raw(t: float, values: np.ndarray, params: EllipseParams) -> np.ndarray:
    aleph = params.require_momentum_scale()
    warped_fwd, warped_inv, g = _warp_tables(params, len(values))
    u = values * g
    u = fourier.trig_interpolate(u, warped_inv)  # B^{-1}
    u = fourier.translate(u, 2.0 * aleph * t)
    u = fourier.trig_interpolate(u, warped_fwd)  # B
    return u / g


def linear_momentum_flow(
    t: float, xi: RadialDeformation, params: EllipseParams
) -> RadialDeformation:
    """Flow of the linear transport part of the momentum field.

    Composition operators are evaluated by trigonometric interpolation at
    the warped nodes; the inner translation is an exact FFT phase shift.
    """
    u = _linear_flow_raw(t, xi.values, params)
    return RadialDeformation(xi.grid, fourier.remove_mean(u))


def linear_momentum_flow_adjoint(
    t: float, values: np.ndarray, params: EllipseParams
) -> np.ndarray:
    """Adjoint of the linear flow: B [ translate(-2*aleph*t) [ B^{-1} . ] ]."""
    aleph = params.require_momentum_scale()
    n = len(values)
    warped_fwd, warped_inv, _ = _warp_tables(params, n)
    u = fourier.trig_interpolate(values, warped_inv)
    u = fourier.translate(u, -2.0 * aleph * t)
    return fourier.trig_interpolate(u, warped_fwd)


def momentum_flow(
    t: float, xi: RadialDeformation, params: EllipseParams
) -> RadialDeformation:
    """Affine flow generated by the normalized momentum.

    The stationary particular state is transported trivially:
    flow(t, xi) = xi_p + linear_flow(t)(xi - xi_p).
    """
    xi_p = particular_deformation(params, xi.grid)
    flowed = _linear_flow_raw(t, xi.values - xi_p.values, params)
    return RadialDeformation(xi.grid, fourier.remove_mean(xi_p.values + flowed))


def momentum_field(xi: RadialDeformation, params: EllipseParams) -> np.ndarray:
    """The affine vector field -s_2 + 2*aleph*d_theta(g*xi)."""
    aleph = params.require_momentum_scale()
    theta = xi.grid.nodes
    g = g_weight(params, theta)
    return -basis_sin(2, theta) + 2.0 * aleph * fourier.spectral_derivative(g * xi.values)


def _section_inner(values: np.ndarray, theta: np.ndarray) -> float:
    return fourier.grid_inner(basis_sin(2, theta), values)


def impact_time(xi: RadialDeformation, params: EllipseParams) -> float:
    """Flow time at which the momentum-flow trajectory crosses {beta_2 = 0}.

    Scalar Newton iteration with the analytic derivative
    (s_2, field(flow(t, xi))); the initial guess is the mode-2 sine
    coordinate of xi. Raises ConvergenceError outside the rectification
    neighborhood.
    """
    theta = xi.grid.nodes
    t = 0.5 * _section_inner(xi.values, theta)
    for _ in range(NEWTON_MAX_ITER):
        flowed = momentum_flow(t, xi, params)
        f = _section_inner(flowed.values, theta)
        if abs(f) <= NEWTON_TOL:
            return t
        df = _section_inner(momentum_field(flowed, params), theta)
        if df == 0.0:
            break
        t -= f / df
    raise ConvergenceError("outside rectification neighborhood")


def impact_time_gradient(xi: RadialDeformation, params: EllipseParams) -> np.ndarray:
    """L2 gradient of the impact time.

    grad = - (adjoint linear flow at the impact time applied to s_2)
           / (s_2, field(flow(t_bar, xi))).
    """
    theta = xi.grid.nodes
    t_bar = impact_time(xi, params)
    flowed = momentum_flow(t_bar, xi, params)
    denom = _section_inner(momentum_field(flowed, params), theta)
    numer = linear_momentum_flow_adjoint(t_bar, basis_sin(2, theta), params)
    return -numer / denom


def remove_mode2(values: np.ndarray) -> np.ndarray:
    """Project out the (c_2, s_2) plane (and the mean)."""
    n = len(values)
    coeff = np.fft.rfft(values)
    coeff[0] = 0.0
    coeff[2] = 0.0
    return np.fft.irfft(coeff, n)


def mode2_coordinates(values: np.ndarray, theta: np.ndarray) -> tuple[float, float]:
    """(alpha_2, beta_2) coordinates: halves of the mode-2 inner products."""
    a2 = 0.5 * fourier.grid_inner(basis_cos(2, theta), values)
    b2 = 0.5 * fourier.grid_inner(basis_sin(2, theta), values)
    return a2, b2


@dataclass(frozen=True)
class RectifiedState:
    """Image of the rectifying map: (momentum, impact time, mode-2-free rest)."""

    j_coord: float
    t_coord: float
    u_perp: RadialDeformation


def rectify(xi: RadialDeformation, params: EllipseParams) -> RectifiedState:
    """The symplectic coordinates (momentum, impact time, perpendicular part)."""
    j_val = rectified_momentum(xi, params)
    t_bar = impact_time(xi, params)
    flowed = momentum_flow(t_bar, xi, params)
    u_perp = RadialDeformation(xi.grid, remove_mode2(flowed.values))
    return RectifiedState(j_val, t_bar, u_perp)


def psi_inverse_quad(z: float) -> float:
    """Closed-form inverse of y + y^2 on (-1/4, 3/4): (-1+sqrt(1+4z))/2."""
    if not -0.25 < z < 0.75:
        raise DomainError(f"inverse of y + y^2 needs z in (-1/4, 3/4), got {z}")
    return 0.5 * (-1.0 + math.sqrt(1.0 + 4.0 * z))


def rectify_inverse(
    j_coord: float,
    t_coord: float,
    u_perp: RadialDeformation,
    params: EllipseParams,
) -> RadialDeformation:
    """Explicit inverse of the rectifying map.

    Solves the scalar momentum equation for the mode-2 cosine amplitude
    via psi and transports back with the momentum flow for time -t_coord.
    """
    aleph = params.require_momentum_scale()
    quad = params.momentum_quad
    theta = u_perp.grid.nodes
    g = g_weight(params, theta)
    c4_coeff = fourier.grid_inner(
        np.cos(4.0 * theta) / SQRT_PI, u_perp.values
    )
    scale = 1.0 + c4_coeff / SQRT_PI
    quad_term = aleph * fourier.grid_inner(u_perp.values**2, g)
    v_c = (scale / quad) * psi_inverse_quad(quad * (j_coord - quad_term) / scale**2)
    base = RadialDeformation(
        u_perp.grid,
        fourier.remove_mean(v_c * basis_cos(2, theta) + u_perp.values),
    )
    return momentum_flow(-t_coord, base, params)
