"""Exact linear theory at the ellipse equilibrium.

In the mode coordinates (alpha_n, beta_n) the linearization at xi = 0
decouples into 2x2 blocks

    d/dt (alpha_n, beta_n) = ((0, -mu_plus), (mu_minus, 0)) (alpha_n, beta_n)

with mu_pm(n) = n*rotation_rate - 1/2 +- kappa_n/2 and
kappa_n = ((gamma-1)/(gamma+1))^n. Mode 2 is degenerate (mu_plus = 0
identically in gamma); mode n flips from elliptic to hyperbolic at the
critical aspect ratio where mu_minus(n) crosses zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .geometry import EllipseParams, Grid

SQRT_PI = math.sqrt(math.pi)


def kappa(n: int, gamma: float) -> float:
    """((gamma-1)/(gamma+1))^n for n >= 0.

    math.pow evaluates this as exp(n*log(r)) in extended precision, which
    avoids the drift of repeated multiplication for large n and stays exact
    at dyadic ratios (e.g. gamma = 3 gives exactly 2^-n).
    """
    if gamma == 1.0:
        return 0.0 if n >= 1 else 1.0
    return math.pow((gamma - 1.0) / (gamma + 1.0), n)


def mu_pair(n: int, params: EllipseParams) -> tuple[float, float]:
    """(mu_plus, mu_minus) of mode n; mu_plus(2) is pinned to exact zero."""
    base = n * params.rotation_rate - 0.5
    half_kappa = 0.5 * kappa(n, params.gamma)
    if n == 2:
        # algebraically 2*g/(1+g)^2 - 1/2 + ((g-1)/(g+1))^2/2 == 0
        return 0.0, base - half_kappa
    return base + half_kappa, base - half_kappa


def mu_minus_derivative(n: int, gamma: float) -> float:
    """Closed-form d(mu_minus)/d(gamma); negative for all gamma > 1."""
    return (
        -n * (gamma**2 - 1.0) / (1.0 + gamma) ** 4
        - n * kappa(n - 1, gamma) / (1.0 + gamma) ** 2
    )


@dataclass(frozen=True)
class ModeData:
    """Spectral record of one linearized mode."""

    n: int
    mu_plus: float
    mu_minus: float
    omega_n: float
    m_n: float
    stability: str  # elliptic | hyperbolic | degenerate | marginal


def mode_data(n: int, params: EllipseParams) -> ModeData:
    """Mode coefficients, oscillation frequency and symmetrizer of mode n."""
    if n < 1:
        raise DomainError("mode index must be >= 1")
    mu_p, mu_m = mu_pair(n, params)
    product = mu_p * mu_m
    omega_n = math.sqrt(abs(product))
    if n == 2:
        m_n = 1.0
        stability = "degenerate"
    else:
        m_n = (abs(mu_p) / abs(mu_m)) ** 0.25 if mu_m != 0.0 else float("inf")
        if product > 0.0:
            stability = "elliptic"
        elif product < 0.0:
            stability = "hyperbolic"
        else:
            stability = "marginal"
    return ModeData(n, mu_p, mu_m, omega_n, m_n, stability)


def mode_frequency(n: int, params: EllipseParams) -> float:
    """Oscillation frequency |mu_plus * mu_minus|^(1/2) of mode n."""
    mu_p, mu_m = mu_pair(n, params)
    return math.sqrt(abs(mu_p * mu_m))


def critical_gamma(n: int, tol: float = 1e-13) -> float:
    """Unique aspect ratio where mode n changes stability (n >= 3).

    Bisection on the monotone-decreasing mu_minus(n, .), starting from the
    bracket [3, hi] with hi doubled until the sign flips.
    """
    if n < 3:
        raise DomainError("stability transitions exist only for modes n >= 3")

    def f(g: float) -> float:
        return n * g / (1.0 + g) ** 2 - 0.5 - 0.5 * kappa(n, g)

    lo, hi = 3.0, 6.0
    while f(hi) > 0.0:
        hi *= 2.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if f(mid) > 0.0:
            lo = mid
        else:
            hi = mid
    root = 0.5 * (lo + hi)
    assert mu_minus_derivative(n, root) < 0.0
    return root


# --- mode coordinate transform ------------------------------------------

def basis_cos(n: int, theta: np.ndarray) -> np.ndarray:
    """Normalized cosine basis element (extra sqrt(2) at n = 2)."""
    scale = math.sqrt(2.0) if n == 2 else 1.0
    return scale * np.cos(n * theta) / SQRT_PI


def basis_sin(n: int, theta: np.ndarray) -> np.ndarray:
    scale = math.sqrt(2.0) if n == 2 else 1.0
    return scale * np.sin(n * theta) / SQRT_PI


@dataclass
class FourierModes:
    """Mode coordinates (alpha_n, beta_n), n = 1..n_max.

    The samples-to-modes map extracts alpha_n = (q, c_n) for n != 2 and
    alpha_2 = (q, c_2)/2 (the mode-2 basis carries an extra sqrt(2), so
    its basis elements have squared norm 2).
    """

    alpha: np.ndarray  # index 0 <-> n = 1
    beta: np.ndarray

    @property
    def n_max(self) -> int:
        return len(self.alpha)

    @classmethod
    def from_samples(cls, values: np.ndarray) -> "FourierModes":
        n = len(values)
        coeff = np.fft.rfft(values) / n
        n_max = n // 2 - 1
        a_cos = 2.0 * coeff[1 : n_max + 1].real
        b_sin = -2.0 * coeff[1 : n_max + 1].imag
        alpha = SQRT_PI * a_cos
        beta = SQRT_PI * b_sin
        if n_max >= 2:
            alpha[1] /= math.sqrt(2.0)
            beta[1] /= math.sqrt(2.0)
        return cls(alpha, beta)

    def to_samples(self, grid: Grid) -> np.ndarray:
        theta = grid.nodes
        out = np.zeros(grid.n_points)
        for i in range(self.n_max):
            n = i + 1
            out += self.alpha[i] * basis_cos(n, theta)
            out += self.beta[i] * basis_sin(n, theta)
        return out


def log_potential_modes(modes: FourierModes, params: EllipseParams) -> FourierModes:
    """Fourier-side action of the equilibrium log-potential operator.

    Diagonal in this basis: cos components scale by -(1+kappa_n)/(2n) and
    sin components by -(1-kappa_n)/(2n); matches the quadrature-side
    operator applied at xi = 0.
    """
    n_vals = np.arange(1, modes.n_max + 1)
    kap = np.array([kappa(int(n), params.gamma) for n in n_vals])
    alpha = -(1.0 + kap) / (2.0 * n_vals) * modes.alpha
    beta = -(1.0 - kap) / (2.0 * n_vals) * modes.beta
    return FourierModes(alpha, beta)


def linear_solution(
    t: float,
    amplitudes: dict[int, float],
    params: EllipseParams,
    grid: Grid,
    n_threshold: int = 2,
) -> np.ndarray:
    """Oscillating solution of the linearization at xi = 0.

    q(t, theta) = sum_n a_n [ M_n cos(omega_n t) cos(n theta)
                            + (1/M_n) sin(omega_n t) sin(n theta) ]

    restricted to elliptic modes n >= n_threshold + 1.
    """
    theta = grid.nodes
    out = np.zeros(grid.n_points)
    for n, a_n in sorted(amplitudes.items()):
        data = mode_data(n, params)
        if data.stability != "elliptic" or n < n_threshold + 1:
            raise DomainError(
                f"mode {n} is {data.stability}; oscillating solutions need "
                f"elliptic modes above the threshold {n_threshold}"
            )
        phase = data.omega_n * t
        out += a_n * (
            data.m_n * math.cos(phase) * np.cos(n * theta)
            + math.sin(phase) * np.sin(n * theta) / data.m_n
        )
    return out


def linear_solution_time_derivative(
    t: float,
    amplitudes: dict[int, float],
    params: EllipseParams,
    grid: Grid,
    n_threshold: int = 2,
) -> np.ndarray:
    """Exact d/dt of ``linear_solution`` (differentiated mode by mode)."""
    theta = grid.nodes
    out = np.zeros(grid.n_points)
    for n, a_n in sorted(amplitudes.items()):
        data = mode_data(n, params)
        if data.stability != "elliptic" or n < n_threshold + 1:
            raise DomainError(f"mode {n} is not an allowed elliptic mode")
        phase = data.omega_n * t
        out += a_n * data.omega_n * (
            -data.m_n * math.sin(phase) * np.cos(n * theta)
            + math.cos(phase) * np.sin(n * theta) / data.m_n
        )
    return out


def asymptotic_remainder(n: int, params: EllipseParams) -> float:
    """r(n) in the exact identity omega_n = n*Omega_1 - 1/2 + r(n).

    Exponentially small in n: proportional to kappa_n^2.
    """
    a = n * params.rotation_rate - 0.5
    if a <= 0.0:
        raise DomainError("asymptotic form requires n*rotation_rate > 1/2")
    kap = kappa(n, params.gamma)
    inside = 1.0 - (kap / (2.0 * a)) ** 2
    if inside < 0.0:
        raise DomainError("mode is hyperbolic; no real frequency expansion")
    return -(kap**2) / (4.0 * a * (math.sqrt(inside) + 1.0))
