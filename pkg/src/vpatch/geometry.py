"""Elliptic-coordinate primitives for the rotating patch boundary.

The boundary of a near-elliptical patch with aspect ratio gamma is encoded
by a zero-mean radial deformation xi(theta): the boundary point at angle
theta is sqrt(1 + 2*xi(theta)) times the reference ellipse parametrization
(sqrt(gamma)*cos(theta), sin(theta)/sqrt(gamma)).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import fourier
from .errors import DomainError

MEAN_TOL = 1e-12


@dataclass(frozen=True)
class Grid:
    """Uniform periodic grid with an even number of nodes."""

    n_points: int

    def __post_init__(self) -> None:
        if self.n_points < 8 or self.n_points % 2 != 0:
            raise DomainError("grid size must be even and at least 8")

    @property
    def nodes(self) -> np.ndarray:
        return fourier.nodes(self.n_points)

    @property
    def spacing(self) -> float:
        return 2.0 * np.pi / self.n_points


@dataclass(frozen=True)
class EllipseParams:
    """Aspect ratio and the constants derived from it.

    rotation_rate    gamma/(1+gamma)^2, the rigid rotation rate of the
                     exact elliptical solution.
    momentum_scale   sqrt(2)/(sqrt(pi)*(gamma - 1/gamma)); normalizes the
                     angular momentum into a canonical coordinate.
                     None when gamma == 1 (the formula degenerates).
    momentum_quad    (gamma^2+1)*sqrt(2)/((gamma^2-1)*sqrt(pi)); quadratic
                     coefficient in the mode-2 expansion of the normalized
                     momentum. None when gamma == 1.
    """

    gamma: float
    rotation_rate: float
    momentum_scale: float | None
    momentum_quad: float | None

    def require_momentum_scale(self) -> float:
        if self.momentum_scale is None:
            raise DomainError("operation undefined at gamma = 1")
        return self.momentum_scale


def ellipse_params(gamma: float) -> EllipseParams:
    """Derived constants for aspect ratio ``gamma`` >= 1."""
    gamma = float(gamma)
    if not gamma >= 1.0:
        raise DomainError(f"aspect ratio must be >= 1, got {gamma}")
    rotation = gamma / (1.0 + gamma) ** 2
    if gamma == 1.0:
        return EllipseParams(gamma, rotation, None, None)
    aleph = math.sqrt(2.0) / (math.sqrt(math.pi) * (gamma - 1.0 / gamma))
    quad = (gamma**2 + 1.0) * math.sqrt(2.0) / ((gamma**2 - 1.0) * math.sqrt(math.pi))
    return EllipseParams(gamma, rotation, aleph, quad)


def g_weight(params: EllipseParams, theta: np.ndarray | float) -> np.ndarray | float:
    """Boundary weight gamma*cos(theta)^2 + sin(theta)^2/gamma.

    Even, pi-periodic, with range [1/gamma, gamma]; the squared modulus of
    the reference ellipse parametrization.
    """
    g = params.gamma
    return g * np.cos(theta) ** 2 + np.sin(theta) ** 2 / g


def g_weight_derivative(params: EllipseParams, theta: np.ndarray | float):
    g = params.gamma
    return -(g - 1.0 / g) * np.sin(2.0 * theta)


def g_weight_conjugate(params: EllipseParams, theta: np.ndarray | float):
    """gamma*sin^2 + sin->cos swapped weight; |d/dtheta of the ellipse map|^2."""
    g = params.gamma
    return g * np.sin(theta) ** 2 + np.cos(theta) ** 2 / g


@dataclass
class RadialDeformation:
    """Zero-mean samples of the radial deformation on a grid.

    The represented boundary is embedded (at this resolution) only while
    1 + 2*xi > 0 everywhere, which the constructor enforces.
    """

    grid: Grid
    values: np.ndarray

    def __post_init__(self) -> None:
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.grid.n_points,):
            raise DomainError("deformation samples do not match the grid")
        if np.min(1.0 + 2.0 * self.values) <= 0.0:
            raise DomainError("1 + 2*xi must stay positive (radial chart degenerates)")
        if abs(self.values.mean()) > MEAN_TOL:
            raise DomainError("deformation must have zero average")

    @classmethod
    def zero(cls, grid: Grid) -> "RadialDeformation":
        return cls(grid, np.zeros(grid.n_points))

    @classmethod
    def from_modes(cls, grid: Grid, cos_amps=None, sin_amps=None) -> "RadialDeformation":
        """Build from plain cos/sin amplitudes, e.g. {4: 1e-3}."""
        th = grid.nodes
        vals = np.zeros(grid.n_points)
        for n, a in (cos_amps or {}).items():
            vals += a * np.cos(n * th)
        for n, a in (sin_amps or {}).items():
            vals += a * np.sin(n * th)
        return cls(grid, vals)

    def reflected(self) -> "RadialDeformation":
        """The involution xi(theta) -> xi(-theta) (node 0 fixed)."""
        return RadialDeformation(self.grid, np.roll(self.values[::-1], 1))

    def norm_inf(self) -> float:
        return float(np.abs(self.values).max())


@dataclass(frozen=True)
class DiffeoPair:
    """Samples of the straightening diffeomorphism and its inverse.

    beta(theta) = arctan(tan(theta)/gamma) - theta, extended pi-periodically;
    beta_inv(y) = arctan(gamma*tan(y)) - y. The forward map straightens the
    transport field generated by the angular momentum.
    """

    grid: Grid
    beta: np.ndarray
    beta_inv: np.ndarray


def _branch_corrected_warp(ratio_fn, theta: np.ndarray) -> np.ndarray:
    # arctan(c*tan(theta)) - theta, continued smoothly across theta = pi/2 + k*pi.
    shift = np.round(theta / np.pi)
    reduced = theta - np.pi * shift
    return np.arctan(ratio_fn(np.tan(reduced))) - reduced


def straightening_diffeo(params: EllipseParams, grid: Grid) -> DiffeoPair:
    """The odd warp beta and its compositional inverse on the grid nodes."""
    g = params.gamma
    th = grid.nodes
    beta = _branch_corrected_warp(lambda t: t / g, th)
    beta_inv = _branch_corrected_warp(lambda t: g * t, th)
    return DiffeoPair(grid, beta, beta_inv)


def beta_warp(params: EllipseParams, theta: np.ndarray) -> np.ndarray:
    """beta evaluated at arbitrary angles (not just grid nodes)."""
    return _branch_corrected_warp(lambda t: t / params.gamma, np.asarray(theta))


def beta_warp_inverse(params: EllipseParams, y: np.ndarray) -> np.ndarray:
    return _branch_corrected_warp(lambda t: params.gamma * t, np.asarray(y))


def particular_deformation(params: EllipseParams, grid: Grid) -> RadialDeformation:
    """The stationary state (1/g - 1)/2 of the momentum transport flow.

    Zero-mean because 1/g integrates to 2*pi.
    """
    vals = 0.5 * (1.0 / g_weight(params, grid.nodes) - 1.0)
    # exact zero mean analytically; strip the rounding residue
    return RadialDeformation(grid, fourier.remove_mean(np.asarray(vals)))


def boundary_components(xi: RadialDeformation, params: EllipseParams):
    """Cartesian boundary samples and their theta-derivatives.

    Returns (rho, drho, P, Q, dP, dQ) with the boundary curve P + i*Q,
    P = sqrt(gamma)*rho*cos, Q = rho*sin/sqrt(gamma), rho = sqrt(1+2*xi).
    Derivatives use spectral differentiation of xi.
    """
    g = params.gamma
    th = xi.grid.nodes
    if np.min(1.0 + 2.0 * xi.values) <= 0.0:
        raise DomainError("1 + 2*xi must stay positive (radial chart degenerates)")
    rho = np.sqrt(1.0 + 2.0 * xi.values)
    drho = fourier.spectral_derivative(xi.values) / rho
    c, s = np.cos(th), np.sin(th)
    sg = math.sqrt(g)
    P = sg * rho * c
    Q = rho * s / sg
    dP = sg * (drho * c - rho * s)
    dQ = (drho * s + rho * c) / sg
    return rho, drho, P, Q, dP, dQ


def chord_squared(xi: RadialDeformation, params: EllipseParams) -> np.ndarray:
    """Matrix of squared chord lengths |w(theta_i) - w(theta_j)|^2.

    Symmetric, zero on the diagonal, positive off it for embedded
    boundaries.
    """
    _, _, P, Q, _, _ = boundary_components(xi, params)
    return (P[:, None] - P[None, :]) ** 2 + (Q[:, None] - Q[None, :]) ** 2


@lru_cache(maxsize=16)
def _grid_tables(n_points: int):
    """Per-grid geometric tables shared by the quadrature routines."""
    th = fourier.nodes(n_points)
    du = th[None, :] - th[:, None]  # theta_j - theta_i
    sind = np.sin(du)
    cosd = np.cos(du)
    four_sin2 = 4.0 * np.sin(du / 2.0) ** 2
    inv4sin2 = np.zeros_like(four_sin2)
    mask = four_sin2 > 0
    inv4sin2[mask] = 1.0 / four_sin2[mask]
    return th, sind, cosd, inv4sin2
