"""Spectral helpers on a uniform periodic grid.

All functions assume samples on the even uniform grid theta_j = 2*pi*j/N.
Derivatives, translations and interpolation are exact (to rounding) for
trigonometric polynomials below the Nyquist mode.
"""

from __future__ import annotations

import numpy as np

_EPS = np.finfo(float).eps


def nodes(n_points: int) -> np.ndarray:
    """Uniform grid theta_j = 2*pi*j/n_points, j = 0..n_points-1."""
    return 2.0 * np.pi * np.arange(n_points) / n_points


def spectral_derivative(values: np.ndarray) -> np.ndarray:
    """d/dtheta of the trigonometric interpolant of ``values``.

    The Nyquist mode is dropped (standard choice for real even-size FFT
    differentiation).
    """
    n = values.shape[-1]
    coeff = np.fft.rfft(values)
    k = np.arange(coeff.shape[-1])
    coeff = coeff * (1j * k)
    coeff[..., -1] = 0.0
    return np.fft.irfft(coeff, n)


def translate(values: np.ndarray, shift: float) -> np.ndarray:
    """Samples of f(theta + shift) for the interpolant of ``values``.

    The Nyquist bin is treated as a pure cosine, so it picks up the factor
    cos(N/2 * shift); all lower modes are shifted exactly.
    """
    n = values.shape[-1]
    coeff = np.fft.rfft(values)
    k = np.arange(coeff.shape[-1])
    coeff = coeff * np.exp(1j * k * shift)
    coeff[..., -1] = coeff[..., -1].real * np.cos(n // 2 * shift) + 0.0j
    return np.fft.irfft(coeff, n)


def trig_interpolate(values: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Evaluate the trigonometric interpolant of ``values`` at points ``x``.

    Barycentric form with cot weights (even number of samples). O(N*M) but
    exact for band-limited data, which is what the composition operators
    need on warped nodes.
    """
    n = values.shape[0]
    xk = nodes(n)
    w = (-1.0) ** np.arange(n)
    d = 0.5 * (np.asarray(x)[:, None] - xk[None, :])
    d = 1.0 / np.tan(d + _EPS * (d == 0))
    return (d @ (w * values)) / (d @ w)


def remove_mean(values: np.ndarray) -> np.ndarray:
    return values - values.mean()


def grid_inner(f: np.ndarray, g: np.ndarray) -> float:
    """Trapezoidal L2(T) inner product; exact below the Nyquist mode."""
    n = f.shape[-1]
    return float(np.dot(f, g) * (2.0 * np.pi / n))


def grid_integral(f: np.ndarray):
    """Trapezoidal integral over the period; preserves complex dtype."""
    n = f.shape[-1]
    total = f.sum() * (2.0 * np.pi / n)
    return complex(total) if np.iscomplexobj(f) else float(total)
