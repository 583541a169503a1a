"""Spectrally accurate quadrature for the logarithmic boundary kernel.

Integrals of the form

    I(theta) = int ln(M(xi)(theta, theta')) f(theta, theta') dtheta'

are evaluated by splitting the kernel as

    ln M = ln(4 sin^2((theta-theta')/2)) + ln(M / (4 sin^2(...)))

The first, translation-invariant part is handled by a trigonometric rule
whose weights reproduce the exact Fourier multipliers -2*pi/|k| of the
periodic log kernel; the second factor is smooth (its diagonal value is
the squared boundary speed |w'(theta)|^2) and integrates with the periodic
trapezoid rule at spectral accuracy.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import kernels
from .errors import SelfIntersectionError
from .geometry import (
    EllipseParams,
    Grid,
    RadialDeformation,
    _grid_tables,
    boundary_components,
)


@dataclass(frozen=True)
class LogKernelRule:
    """Translation-invariant weights for the kernel ln(4 sin^2(u/2)).

    ``weights[m]`` multiplies the sample at node distance m; row sums
    vanish (the kernel has zero mean) and the rule reproduces the Fourier
    multiplier -2*pi/|k| exactly for |k| <= n_points/2.
    """

    grid: Grid
    weights: np.ndarray
    matrix: np.ndarray = field(repr=False)

    def apply(self, samples: np.ndarray) -> np.ndarray:
        """Quadrature of ln(4 sin^2((theta_i - theta')/2)) f(theta')."""
        return self.matrix @ samples


def build_log_rule(grid: Grid) -> LogKernelRule:
    """Construct the log-kernel rule for a grid.

    The weights are the inverse DFT of the multiplier sequence
    (0, -2*pi/1, ..., -2*pi/(N/2)), i.e.

        R_m = -(4*pi/N) * sum_{k=1}^{N/2-1} cos(k*theta_m)/k
              - (4*pi/N^2) * (-1)^m .
    """
    n = grid.n_points
    spectrum = np.zeros(n // 2 + 1)
    k = np.arange(1, n // 2 + 1)
    spectrum[1:] = -2.0 * np.pi / k
    # inverse real DFT of a symmetric spectrum
    weights = np.fft.irfft(spectrum, n)
    idx = np.arange(n)
    matrix = weights[(idx[:, None] - idx[None, :]) % n]
    return LogKernelRule(grid, weights, matrix)


@lru_cache(maxsize=16)
def _cached_rule(n_points: int) -> LogKernelRule:
    return build_log_rule(Grid(n_points))


def rule_for(grid: Grid) -> LogKernelRule:
    return _cached_rule(grid.n_points)


def smooth_log_matrix(xi: RadialDeformation, params: EllipseParams) -> np.ndarray:
    """Samples of ln(M(xi)/(4 sin^2)) with the exact diagonal limit."""
    _, _, P, Q, dP, dQ = boundary_components(xi, params)
    _, _, _, inv4sin2 = _grid_tables(xi.grid.n_points)
    out = kernels.log_smooth_factor(P, Q, dP, dQ, inv4sin2)
    if out is None:
        raise SelfIntersectionError(
            "patch boundary self-intersecting at resolution"
        )
    return out


def log_chord_convolve(
    xi: RadialDeformation, params: EllipseParams, f_values: np.ndarray
) -> np.ndarray:
    """I(theta_i) = int ln(M(xi)(theta_i, theta')) f(theta_i, theta') dtheta'.

    ``f_values[i, j]`` holds f(theta_i, theta_j); the diagonal must carry
    the continuous limit f(theta, theta).
    """
    n = xi.grid.n_points
    if f_values.shape != (n, n):
        raise ValueError("two-point samples must be an (N, N) matrix")
    lns = smooth_log_matrix(xi, params)
    rule = rule_for(xi.grid)
    return kernels.pair_reduce(f_values, rule.matrix, lns, 2.0 * np.pi / n)


def log_potential_apply(
    xi: RadialDeformation, params: EllipseParams, q: np.ndarray
) -> np.ndarray:
    """The self-adjoint operator (1/4pi) int ln(M(xi)(theta, theta')) q(theta') dtheta'."""
    n = xi.grid.n_points
    lns = smooth_log_matrix(xi, params)
    rule = rule_for(xi.grid)
    return (rule.matrix @ q + (2.0 * np.pi / n) * (lns @ q)) / (4.0 * np.pi)
