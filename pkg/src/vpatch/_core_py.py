"""Pure NumPy implementation of the O(N^2) inner kernels.

Signature-compatible with the compiled module ``_core_c``; selected as a
fallback at import time (see ``kernels.py``).
"""

from __future__ import annotations

import numpy as np

COMPILED = False


def log_smooth_factor(P, Q, dP, dQ, inv4sin2):
    """ln of the smooth factor |w_i - w_j|^2 / (4 sin^2((theta_i-theta_j)/2)).

    The diagonal carries the continuous limit |w'(theta_i)|^2. Returns None
    when the factor is not strictly positive somewhere; callers turn that
    into a domain error.
    """
    M = (P[:, None] - P[None, :]) ** 2 + (Q[:, None] - Q[None, :]) ** 2
    S = M * inv4sin2
    np.fill_diagonal(S, dP * dP + dQ * dQ)
    if np.min(S) <= 0.0:
        return None
    return np.log(S)


def flux_reduce(rho, drho, sind, cosd, ring_w, log_smooth, trap_w):
    """Row sums of (ring_w + trap_w*log_smooth) * f without materializing f.

    f_ij = (drho_i*drho_j + rho_i*rho_j)*sin(theta_j-theta_i)
         + (drho_i*rho_j - rho_i*drho_j)*cos(theta_j-theta_i),
    the mixed second derivative of rho_i*rho_j*sin(theta_j-theta_i); it is
    antisymmetric and vanishes on the diagonal.
    """
    f = (np.outer(drho, drho) + np.outer(rho, rho)) * sind
    f += (np.outer(drho, rho) - np.outer(rho, drho)) * cosd
    return ((ring_w + trap_w * log_smooth) * f).sum(axis=1)


def pair_reduce(G, ring_w, log_smooth, trap_w):
    """Row sums of (ring_w + trap_w*log_smooth) * G for a generic matrix G."""
    return ((ring_w + trap_w * log_smooth) * G).sum(axis=1)


def energy_reduce(P, Q, dP, dQ, ring_w, log_smooth, trap_w):
    """Double sum for the pseudo-energy.

    sum_ij (ring_w_ij + trap_w*(log_smooth_ij + ln(4sin^2) split constant
    handled by ring_w) - 2*trap_w) * M_ij * d2M_ij with
    d2M_ij = -2*(dP_i*dP_j + dQ_i*dQ_j); the diagonal vanishes with M.
    """
    M = (P[:, None] - P[None, :]) ** 2 + (Q[:, None] - Q[None, :]) ** 2
    MD = M * (-2.0) * (np.outer(dP, dP) + np.outer(dQ, dQ))
    np.fill_diagonal(MD, 0.0)
    return float(((ring_w + trap_w * (log_smooth - 2.0)) * MD).sum())
