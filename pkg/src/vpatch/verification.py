"""Named verification checks with pinned tolerances.

Each check exercises one falsifiable property of the implementation
against an independent reference (closed form, finite differences, or a
high-resolution oracle) and reports a pass/fail with the measured error.
``vpatch verify`` and the acceptance test module both run these.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import fourier
from .dynamics import (
    deformation_rhs,
    hamiltonian,
    integrate,
    linearized_rhs,
    rectified_momentum,
)
from .geometry import Grid, RadialDeformation, ellipse_params, g_weight_derivative
from .quadrature import log_chord_convolve, log_potential_apply
from .rectification import (
    impact_time,
    impact_time_gradient,
    momentum_field,
    momentum_flow,
    rectify,
    rectify_inverse,
)
from .resonance import ResonanceConfig, transversality_margins
from .spectral import (
    critical_gamma,
    kappa,
    linear_solution,
    linear_solution_time_derivative,
    mode_data,
    mu_minus_derivative,
    mu_pair,
)

# independently computed reference values (high-precision bisection / series)
CRITICAL_GAMMA_4_REFERENCE = 4.61158178930871498


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str
    elapsed: float


def _random_deformation(grid: Grid, amplitude: float, rng, mode_cutoff: int = 10):
    theta = grid.nodes
    vals = np.zeros(grid.n_points)
    for n in range(1, mode_cutoff + 1):
        decay = 1.0 / (1 + n)
        vals += decay * (rng.normal() * np.cos(n * theta) + rng.normal() * np.sin(n * theta))
    vals *= amplitude / np.abs(vals).max()
    return RadialDeformation(grid, fourier.remove_mean(vals))


def _assemble_block(n: int, params, grid: Grid) -> np.ndarray:
    """2x2 matrix of the discrete linearization on span{cos(n.), sin(n.)}."""
    theta = grid.nodes
    xi0 = RadialDeformation.zero(grid)
    rot = params.rotation_rate
    c, s = np.cos(n * theta), np.sin(n * theta)
    lc = linearized_rhs(xi0, c, rot, params)
    ls = linearized_rhs(xi0, s, rot, params)
    ip = fourier.grid_inner
    return np.array(
        [
            [ip(c, lc) / math.pi, ip(c, ls) / math.pi],
            [ip(s, lc) / math.pi, ip(s, ls) / math.pi],
        ]
    )


def check_equilibrium() -> CheckResult:
    """gamma = 2, omega = 2/9: the zero state is stationary (<= 1e-10, < 1 s)."""
    t0 = time.time()
    params = ellipse_params(2.0)
    grid = Grid(256)
    rhs = deformation_rhs(RadialDeformation.zero(grid), 2.0 / 9.0, params)
    err = float(np.abs(rhs).max())
    elapsed = time.time() - t0
    return CheckResult(
        "equilibrium",
        err <= 1e-10 and elapsed < 1.0,
        f"max|rhs(0)| = {err:.3e} (tol 1e-10), {elapsed:.2f} s (< 1 s)",
        elapsed,
    )


def check_singular_integral_identity() -> CheckResult:
    """Quadrature of the sine-convolved log kernel vs the closed form (1e-9)."""
    t0 = time.time()
    grid = Grid(128)
    theta = grid.nodes
    worst = 0.0
    for gamma in (1.5, 2.0, 4.0):
        params = ellipse_params(gamma)
        xi0 = RadialDeformation.zero(grid)
        f2 = np.sin(theta[None, :] - theta[:, None])
        quad = log_chord_convolve(xi0, params, f2) / (4.0 * math.pi)
        closed = -0.5 * params.rotation_rate * g_weight_derivative(params, theta)
        sample = slice(0, grid.n_points, grid.n_points // 32)
        worst = max(worst, float(np.abs(quad[sample] - closed[sample]).max()))
    return CheckResult(
        "singular-integral-identity",
        worst <= 1e-9,
        f"max error over gamma in {{1.5, 2, 4}} at 32 angles = {worst:.3e} (tol 1e-9)",
        time.time() - t0,
    )


def check_log_potential_multipliers() -> CheckResult:
    """Quadrature-side operator matches the Fourier multipliers, j <= 32 (1e-9)."""
    t0 = time.time()
    params = ellipse_params(2.0)
    grid = Grid(128)
    theta = grid.nodes
    xi0 = RadialDeformation.zero(grid)
    worst = 0.0
    for j in range(1, 33):
        kap = kappa(j, 2.0)
        wc = log_potential_apply(xi0, params, np.cos(j * theta))
        worst = max(worst, float(np.abs(wc + (1 + kap) / (2 * j) * np.cos(j * theta)).max()))
        ws = log_potential_apply(xi0, params, np.sin(j * theta))
        worst = max(worst, float(np.abs(ws + (1 - kap) / (2 * j) * np.sin(j * theta)).max()))
    return CheckResult(
        "log-potential-multipliers",
        worst <= 1e-9,
        f"max multiplier error for j <= 32 = {worst:.3e} (tol 1e-9)",
        time.time() - t0,
    )


def check_degenerate_mode() -> CheckResult:
    """mu_plus(2) vanishes and the discrete mode-2 block is lower-triangular."""
    t0 = time.time()
    grid = Grid(128)
    worst_mu = 0.0
    worst_entry = 0.0
    worst_lower = 0.0
    for gamma in (1.5, 2.0, 3.0, 5.0):
        params = ellipse_params(gamma)
        worst_mu = max(worst_mu, abs(mu_pair(2, params)[0]))
        block = _assemble_block(2, params, grid)
        worst_entry = max(worst_entry, abs(block[0, 1]), abs(block[0, 0]), abs(block[1, 1]))
        worst_lower = max(worst_lower, abs(block[1, 0] - mu_pair(2, params)[1]))
    return CheckResult(
        "degenerate-mode",
        worst_mu <= 1e-14 and worst_entry <= 1e-9 and worst_lower <= 1e-9,
        f"|mu_plus(2)| = {worst_mu:.3e} (tol 1e-14), "
        f"block upper entry = {worst_entry:.3e}, "
        f"lower-entry defect = {worst_lower:.3e} (tol 1e-9)",
        time.time() - t0,
    )


def check_critical_ratios() -> CheckResult:
    """critical_gamma(3) = 3 and critical_gamma(4) matches the frozen oracle."""
    t0 = time.time()
    g3 = critical_gamma(3)
    g4 = critical_gamma(4)
    e3 = abs(g3 - 3.0)
    e4 = abs(g4 - CRITICAL_GAMMA_4_REFERENCE)
    return CheckResult(
        "critical-ratios",
        e3 <= 1e-10 and e4 <= 1e-10 and g4 > g3,
        f"|g3 - 3| = {e3:.3e}, |g4 - ref| = {e4:.3e} (tol 1e-10), g4 = {g4:.12f}",
        time.time() - t0,
    )


def check_stability_classes() -> CheckResult:
    """Mode 3 hyperbolic at gamma = 4 (real block eigenvalues); 3..64 elliptic at 2."""
    t0 = time.time()
    grid = Grid(256)
    params4 = ellipse_params(4.0)
    data3 = mode_data(3, params4)
    block = _assemble_block(3, params4, grid)
    eig = np.linalg.eigvals(block)
    eig_err = max(
        abs(np.sort(eig.real) - np.array([-data3.omega_n, data3.omega_n])).max(),
        float(np.abs(eig.imag).max()),
    )
    params2 = ellipse_params(2.0)
    all_elliptic = all(mode_data(n, params2).stability == "elliptic" for n in range(3, 65))
    return CheckResult(
        "stability-classes",
        data3.stability == "hyperbolic" and eig_err <= 1e-8 and all_elliptic,
        f"mode 3 at gamma=4: {data3.stability}, block eigenvalue error = {eig_err:.3e} "
        f"(tol 1e-8); modes 3..64 elliptic at gamma=2: {all_elliptic}",
        time.time() - t0,
    )


def check_linear_flow() -> CheckResult:
    """Single elliptic mode solves the linearized equation and is periodic."""
    t0 = time.time()
    params = ellipse_params(2.0)
    grid = Grid(256)
    amps = {4: 1.0}
    xi0 = RadialDeformation.zero(grid)
    worst = 0.0
    for t in (0.0, 0.3, 1.7):
        q = linear_solution(t, amps, params, grid)
        dq = linear_solution_time_derivative(t, amps, params, grid)
        lq = linearized_rhs(xi0, q, params.rotation_rate, params)
        worst = max(worst, float(np.abs(dq - lq).max()))
    period = 2.0 * math.pi / mode_data(4, params).omega_n
    close_err = float(
        np.abs(linear_solution(period, amps, params, grid) - linear_solution(0.0, amps, params, grid)).max()
    )
    return CheckResult(
        "linear-flow",
        worst <= 1e-9 and close_err <= 1e-9,
        f"PDE residual = {worst:.3e}, period closure = {close_err:.3e} (tol 1e-9)",
        time.time() - t0,
    )


def check_hamiltonian_structure() -> CheckResult:
    """deformation_rhs equals d_theta of the finite-difference gradient of H."""
    t0 = time.time()
    params = ellipse_params(2.0)
    grid = Grid(128)
    theta = grid.nodes
    rng = np.random.default_rng(11)
    xi = _random_deformation(grid, 1e-3, rng)
    omega = 0.21
    rhs = deformation_rhs(xi, omega, params)
    eps = 1e-6
    grad = np.zeros(grid.n_points)
    for n in range(1, 33):
        for direction in (np.cos(n * theta), np.sin(n * theta)):
            plus = RadialDeformation(grid, fourier.remove_mean(xi.values + eps * direction))
            minus = RadialDeformation(grid, fourier.remove_mean(xi.values - eps * direction))
            dh = (hamiltonian(plus, omega, params) - hamiltonian(minus, omega, params)) / (2 * eps)
            grad += dh * direction / math.pi
    rel = float(np.abs(rhs - fourier.spectral_derivative(grad)).max() / np.abs(rhs).max())
    return CheckResult(
        "hamiltonian-structure",
        rel <= 1e-5,
        f"relative error rhs vs d_theta grad H = {rel:.3e} (tol 1e-5)",
        time.time() - t0,
    )


def check_linearization_consistency() -> CheckResult:
    """Central differences of the nonlinear field converge at order h^2."""
    t0 = time.time()
    params = ellipse_params(2.0)
    grid = Grid(128)
    theta = grid.nodes
    rng = np.random.default_rng(5)
    xi = _random_deformation(grid, 1e-2, rng)
    q = np.cos(3 * theta) + 0.5 * np.sin(5 * theta)
    omega = params.rotation_rate
    lin = linearized_rhs(xi, q, omega, params)
    errs = []
    for h in (1e-3, 5e-4, 2.5e-4):
        plus = RadialDeformation(grid, fourier.remove_mean(xi.values + h * q))
        minus = RadialDeformation(grid, fourier.remove_mean(xi.values - h * q))
        fd = (deformation_rhs(plus, omega, params) - deformation_rhs(minus, omega, params)) / (2 * h)
        errs.append(float(np.abs(fd - lin).max()))
    r1, r2 = errs[0] / errs[1], errs[1] / errs[2]
    ok = 3.0 < r1 < 5.0 and 3.0 < r2 < 5.0
    return CheckResult(
        "linearization-consistency",
        ok,
        f"errors = {errs[0]:.3e}, {errs[1]:.3e}, {errs[2]:.3e}; "
        f"ratios = {r1:.2f}, {r2:.2f} (expect about 4)",
        time.time() - t0,
    )


def check_conservation() -> CheckResult:
    """Drift of the conserved set along an RK4 trajectory (t in [0, 5])."""
    t0 = time.time()
    params = ellipse_params(2.0)
    grid = Grid(256)
    theta = grid.nodes
    xi0 = RadialDeformation(grid, fourier.remove_mean(1e-2 * np.cos(3 * theta)))
    record = integrate(xi0, params.rotation_rate, params, dt=1e-3, t_end=5.0, record_stride=500)
    first, last = record.diagnostics[0], record.diagnostics[-1]
    drift_c = abs(last.circulation - first.circulation) / abs(first.circulation)
    drift_j = abs(last.angular_momentum - first.angular_momentum) / abs(first.angular_momentum)
    drift_e = abs(last.pseudo_energy - first.pseudo_energy) / abs(first.pseudo_energy)
    drift_m = abs(last.rectified_momentum - first.rectified_momentum) / max(
        abs(first.rectified_momentum), 1e-6
    )
    elapsed = time.time() - t0
    ok = (
        not record.aborted
        and drift_c <= 1e-8
        and drift_j <= 1e-8
        and drift_e <= 1e-7
        and drift_m <= 1e-7
        and elapsed < 60.0
    )
    return CheckResult(
        "conservation",
        ok,
        f"relative drifts: C = {drift_c:.2e}, J = {drift_j:.2e} (tol 1e-8); "
        f"E = {drift_e:.2e}, momentum = {drift_m:.2e} (tol 1e-7); {elapsed:.0f} s (< 60 s)",
        elapsed,
    )


def check_rectification() -> CheckResult:
    """Round trip, momentum coordinate, canonical pairing, flow shift."""
    t0 = time.time()
    params = ellipse_params(2.0)
    grid = Grid(256)
    rng = np.random.default_rng(2024)
    worst_rt = worst_mom = worst_pair = worst_shift = 0.0
    for _ in range(100):
        xi = _random_deformation(grid, 1e-3, rng)
        state = rectify(xi, params)
        back = rectify_inverse(state.j_coord, state.t_coord, state.u_perp, params)
        worst_rt = max(worst_rt, float(np.abs(back.values - xi.values).max()))
        worst_mom = max(worst_mom, abs(rectified_momentum(back, params) - state.j_coord))
        grad = impact_time_gradient(xi, params)
        pairing = fourier.grid_inner(grad, momentum_field(xi, params))
        worst_pair = max(worst_pair, abs(pairing + 1.0))
        tau = 0.01
        shifted = impact_time(momentum_flow(tau, xi, params), params)
        worst_shift = max(worst_shift, abs(shifted - (state.t_coord - tau)))
    ok = worst_rt <= 1e-9 and worst_mom <= 1e-9 and worst_pair <= 1e-8 and worst_shift <= 1e-9
    return CheckResult(
        "rectification",
        ok,
        f"round trip = {worst_rt:.2e}, momentum = {worst_mom:.2e}, "
        f"shift = {worst_shift:.2e} (tol 1e-9); pairing = {worst_pair:.2e} (tol 1e-8)",
        time.time() - t0,
    )


def check_flow_representation() -> CheckResult:
    """Composition formula for the linear momentum flow vs direct integration."""
    t0 = time.time()
    from .geometry import g_weight
    from .rectification import linear_momentum_flow

    params = ellipse_params(2.0)
    grid = Grid(256)
    theta = grid.nodes
    rng = np.random.default_rng(8)
    xi = _random_deformation(grid, 1e-3, rng, mode_cutoff=8)
    aleph = params.momentum_scale
    g = g_weight(params, theta)

    def rhs(v):
        return 2.0 * aleph * fourier.spectral_derivative(g * v)

    dt, t_end = 1e-3, 0.1
    y = xi.values.copy()
    for _ in range(int(round(t_end / dt))):
        k1 = rhs(y)
        k2 = rhs(y + 0.5 * dt * k1)
        k3 = rhs(y + 0.5 * dt * k2)
        k4 = rhs(y + dt * k3)
        y = y + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
    err = float(np.abs(linear_momentum_flow(t_end, xi, params).values - y).max())
    return CheckResult(
        "flow-representation",
        err <= 1e-6,
        f"composition vs RK4 transport after t = 0.1: {err:.3e} (tol 1e-6)",
        time.time() - t0,
    )


def _acceptance_resonance_config() -> ResonanceConfig:
    return ResonanceConfig(
        sites=(4, 5),
        n_bar=2,
        upsilons=(1e-2, 1e-3, 1e-4),
        tau=3.0,
        l_max=20,
        n_max=64,
        gamma_min=1.5,
        gamma_max=2.5,
        delta_gamma=5e-3,
    )


def check_measure_trend() -> CheckResult:
    """Excluded measure decreasing over upsilon and below 5% at 1e-4."""
    t0 = time.time()
    from .resonance import measure_estimate

    cfg = _acceptance_resonance_config()
    report = measure_estimate(cfg)
    trend = report.trend()
    measures = [m for _, m in trend]
    interval = cfg.gamma_max - cfg.gamma_min
    monotone = all(measures[i] >= measures[i + 1] for i in range(len(measures) - 1))
    strictly = all(measures[i] > measures[i + 1] for i in range(len(measures) - 1))
    small = measures[-1] <= 0.05 * interval
    elapsed = time.time() - t0
    ok = monotone and strictly and small and elapsed < 60.0
    return CheckResult(
        "measure-trend",
        ok,
        "excluded measure over upsilon {1e-2, 1e-3, 1e-4} = "
        + ", ".join(f"{m:.4f}" for m in measures)
        + f" of {interval:.2f}; needs strict decrease and <= {0.05 * interval:.3f} at 1e-4; "
        f"{elapsed:.0f} s (< 60 s)",
        elapsed,
    )


def check_transversality() -> CheckResult:
    """Positive non-degeneracy margins on the grid; closed-form derivative check."""
    t0 = time.time()
    cfg = _acceptance_resonance_config()
    gammas = cfg.gamma_grid()
    rho_min = math.inf
    for g in gammas:
        rho_min = min(rho_min, transversality_margins(float(g), cfg))
    h = 1e-3
    worst_d = 0.0
    for n in (3, 5, 10, 40):
        for gamma in (1.6, 2.0, 2.4):
            mus = [
                mu_pair(n, ellipse_params(g))[1]
                for g in (gamma + h, gamma - h, gamma + h / 2, gamma - h / 2)
            ]
            d_h = (mus[0] - mus[1]) / (2 * h)
            d_h2 = (mus[2] - mus[3]) / h
            fd = (4.0 * d_h2 - d_h) / 3.0
            worst_d = max(worst_d, abs(fd - mu_minus_derivative(n, gamma)))
    ok = rho_min > 0.0 and worst_d <= 1e-8
    return CheckResult(
        "transversality",
        ok,
        f"min margin over grid = {rho_min:.3e} (> 0); "
        f"mu_minus derivative FD vs closed form = {worst_d:.3e} (tol 1e-8)",
        time.time() - t0,
    )


CHECKS: list[tuple[str, Callable[[], CheckResult], bool]] = [
    ("equilibrium", check_equilibrium, False),
    ("singular-integral-identity", check_singular_integral_identity, False),
    ("log-potential-multipliers", check_log_potential_multipliers, False),
    ("degenerate-mode", check_degenerate_mode, False),
    ("critical-ratios", check_critical_ratios, False),
    ("stability-classes", check_stability_classes, False),
    ("linear-flow", check_linear_flow, False),
    ("hamiltonian-structure", check_hamiltonian_structure, False),
    ("linearization-consistency", check_linearization_consistency, False),
    ("conservation", check_conservation, True),
    ("rectification", check_rectification, True),
    ("flow-representation", check_flow_representation, False),
    ("measure-trend", check_measure_trend, True),
    ("transversality", check_transversality, True),
]


def run_checks(names: list[str] | None = None, fast: bool = False) -> list[CheckResult]:
    results = []
    for name, fn, slow in CHECKS:
        if names and name not in names:
            continue
        if fast and slow:
            continue
        results.append(fn())
    return results
