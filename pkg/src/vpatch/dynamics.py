"""Nonlinear contour dynamics of the radial deformation.

The evolution in the frame rotating at angular velocity Omega is

    d(xi)/dt = (Omega/2) d_theta[g(theta)(1 + 2 xi)]
               + (1/4pi) int ln(M(xi)(theta,theta'))
                 d^2/(dtheta dtheta')[rho(theta) rho(theta') sin(theta'-theta)] dtheta'

with rho = sqrt(1+2 xi) and M the squared chord length. It is Hamiltonian,
d(xi)/dt = d_theta grad H, for H = -E/2 + (Omega/2) J with E the pseudo-energy
and J the angular momentum, and it conserves the circulation, |center of
mass|, J, E and the normalized momentum.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from . import fourier, kernels
from .errors import DomainError, SelfIntersectionError
from .geometry import (
    EllipseParams,
    Grid,
    RadialDeformation,
    _grid_tables,
    g_weight,
)
from .quadrature import rule_for

BLOWUP_MARGIN = 0.1

SCHEMA_VERSION = 1


def _components_raw(values: np.ndarray, params: EllipseParams, theta: np.ndarray):
    rho = np.sqrt(1.0 + 2.0 * values)
    drho = fourier.spectral_derivative(values) / rho
    c, s = np.cos(theta), np.sin(theta)
    sg = math.sqrt(params.gamma)
    return rho, drho, sg * rho * c, rho * s / sg, sg * (drho * c - rho * s), (drho * s + rho * c) / sg


def _log_smooth_raw(values, params, theta, inv4sin2):
    rho, drho, P, Q, dP, dQ = _components_raw(values, params, theta)
    lns = kernels.log_smooth_factor(P, Q, dP, dQ, inv4sin2)
    if lns is None:
        raise SelfIntersectionError("patch boundary self-intersecting at resolution")
    return rho, drho, P, Q, dP, dQ, lns


def _rhs_raw(values: np.ndarray, omega: float, params: EllipseParams, grid: Grid) -> np.ndarray:
    if np.min(1.0 + 2.0 * values) <= 0.0:
        raise SelfIntersectionError("radial chart degenerated during evaluation")
    theta, sind, cosd, inv4sin2 = _grid_tables(grid.n_points)
    rho, drho, _, _, _, _, lns = _log_smooth_raw(values, params, theta, inv4sin2)
    rule = rule_for(grid)
    h = 2.0 * np.pi / grid.n_points
    flux = kernels.flux_reduce(rho, drho, sind, cosd, rule.matrix, lns, h)
    transport = g_weight(params, theta) * (1.0 + 2.0 * values)
    return 0.5 * omega * fourier.spectral_derivative(transport) + flux / (4.0 * np.pi)


def deformation_rhs(
    xi: RadialDeformation, omega: float, params: EllipseParams
) -> np.ndarray:
    """Time derivative of the radial deformation (zero-mean samples).

    Vanishes at xi = 0 exactly when omega equals the ellipse rotation rate.
    """
    return _rhs_raw(xi.values, omega, params, xi.grid)


def linearized_rhs(
    xi: RadialDeformation, q: np.ndarray, omega: float, params: EllipseParams
) -> np.ndarray:
    """Action of the linearized vector field at state xi on a zero-mean q.

    Returns d_theta[(omega*g + v(xi)) q - W(xi) q] where W(xi) is the
    log-kernel potential operator and v(xi) the induced multiplier; at
    xi = 0 and omega equal to the rotation rate this reduces to
    -rotation_rate * d_theta q - d_theta W(0) q.
    """
    grid = xi.grid
    theta, sind, cosd, inv4sin2 = _grid_tables(grid.n_points)
    rho, drho, _, _, _, _, lns = _log_smooth_raw(xi.values, params, theta, inv4sin2)
    rule = rule_for(grid)
    h = 2.0 * np.pi / grid.n_points
    g1 = (sind * drho[None, :] + cosd * rho[None, :]) / rho[:, None]
    v = kernels.pair_reduce(g1, rule.matrix, lns, h) / (4.0 * np.pi)
    wq = (rule.matrix @ q + h * (lns @ q)) / (4.0 * np.pi)
    symbol = (omega * g_weight(params, theta) + v) * q - wq
    return fourier.spectral_derivative(symbol)


@dataclass(frozen=True)
class ConservedSet:
    """Snapshot of the conserved functionals of one state.

    rectified_momentum is the normalized momentum (a canonical coordinate
    near the ellipse); it is None at gamma = 1 where the normalization
    constant is undefined.
    """

    circulation: float
    center_modulus: float
    angular_momentum: float
    pseudo_energy: float
    rectified_momentum: float | None


def pseudo_energy(xi: RadialDeformation, params: EllipseParams) -> float:
    """Double-integral energy (1/32pi) intint [ln M - 2] M d2M/(dth dth')."""
    grid = xi.grid
    theta, _, _, inv4sin2 = _grid_tables(grid.n_points)
    _, _, P, Q, dP, dQ, lns = _log_smooth_raw(xi.values, params, theta, inv4sin2)
    rule = rule_for(grid)
    h = 2.0 * np.pi / grid.n_points
    total = kernels.energy_reduce(P, Q, dP, dQ, rule.matrix, lns, h)
    return h * total / (32.0 * np.pi)


def angular_momentum(xi: RadialDeformation, params: EllipseParams) -> float:
    g = g_weight(params, xi.grid.nodes)
    return 0.25 * fourier.grid_integral((1.0 + 2.0 * xi.values) ** 2 * g)


def rectified_momentum(xi: RadialDeformation, params: EllipseParams) -> float:
    """momentum_scale * (J1 + J2): linear-plus-quadratic momentum part.

    Equals the mode-2 cosine coordinate plus a quadratic correction, and is
    conserved by the flow. Requires gamma > 1.
    """
    aleph = params.require_momentum_scale()
    g = g_weight(params, xi.grid.nodes)
    j1 = fourier.grid_integral(xi.values * g)
    j2 = fourier.grid_integral(xi.values**2 * g)
    return aleph * (j1 + j2)


def conserved_quantities(xi: RadialDeformation, params: EllipseParams) -> ConservedSet:
    """All conserved functionals, each recomputed from the state."""
    grid = xi.grid
    vals = xi.values
    circulation = math.pi + fourier.grid_integral(vals)
    theta = grid.nodes
    rho2 = 1.0 + 2.0 * vals
    sg = math.sqrt(params.gamma)
    w0 = sg * np.cos(theta) + 1j * np.sin(theta) / sg
    center = fourier.grid_integral(rho2**1.5 * w0) / 3.0
    momentum = angular_momentum(xi, params)
    energy = pseudo_energy(xi, params)
    rect = None if params.momentum_scale is None else rectified_momentum(xi, params)
    return ConservedSet(circulation, abs(center), momentum, energy, rect)


def hamiltonian(xi: RadialDeformation, omega: float, params: EllipseParams) -> float:
    """H = -E/2 + (omega/2) J; the flow is d(xi)/dt = d_theta grad H."""
    return -0.5 * pseudo_energy(xi, params) + 0.5 * omega * angular_momentum(xi, params)


@dataclass
class TrajectoryRecord:
    """Recorded time series of one integration run."""

    times: np.ndarray
    states: np.ndarray  # (n_records, n_points)
    diagnostics: list[ConservedSet]
    dt: float
    method: str
    gamma: float
    omega: float
    aborted: bool = False
    abort_reason: str = ""

    CSV_HEADER = (
        "t,circulation,center_modulus,angular_momentum,"
        "pseudo_energy,rectified_momentum,max_abs_xi"
    )

    def max_abs(self) -> float:
        return float(np.abs(self.states).max())

    def to_csv(self, path) -> None:
        """One row per record: t, C, |Z|, J, E, normalized momentum, max|xi|."""
        lines = [self.CSV_HEADER]
        for t, row, cons in zip(self.times, self.states, self.diagnostics):
            rect = float("nan") if cons.rectified_momentum is None else cons.rectified_momentum
            fields = (
                t,
                cons.circulation,
                cons.center_modulus,
                cons.angular_momentum,
                cons.pseudo_energy,
                rect,
                float(np.abs(row).max()),
            )
            lines.append(",".join(format(x, ".17g") for x in fields))
        with open(path, "w") as fh:
            fh.write("\n".join(lines) + "\n")

    def to_state_dump(self, path) -> None:
        """JSON manifest plus raw little-endian float64 states (row-major).

        The binary file holds n_records * n_points float64 values: record i
        occupies bytes [i*8*n_points, (i+1)*8*n_points), node-ordered.
        """
        path = str(path)
        bin_path = path + ".bin"
        manifest = {
            "schema_version": SCHEMA_VERSION,
            "kind": "trajectory-state-dump",
            "gamma": self.gamma,
            "omega": self.omega,
            "dt": self.dt,
            "method": self.method,
            "n_points": int(self.states.shape[1]),
            "n_records": int(self.states.shape[0]),
            "times": [float(t) for t in self.times],
            "aborted": self.aborted,
            "abort_reason": self.abort_reason,
            "states_file": bin_path.rsplit("/", 1)[-1],
            "dtype": "<f8",
            "order": "row-major",
        }
        with open(path, "w") as fh:
            json.dump(manifest, fh, indent=1, sort_keys=True)
            fh.write("\n")
        with open(bin_path, "wb") as fh:
            fh.write(np.ascontiguousarray(self.states, dtype="<f8").tobytes())


def integrate(
    xi0: RadialDeformation,
    omega: float,
    params: EllipseParams,
    dt: float,
    t_end: float,
    record_stride: int = 1,
) -> TrajectoryRecord:
    """Classical RK4 time stepping with zero-mean re-projection.

    Diagnostics are recomputed from the recorded states. Integration
    aborts (returning the partial record, flagged) once min(1 + 2 xi)
    falls below the blow-up margin: the radial chart degenerates before
    the boundary can self-intersect.
    """
    if dt <= 0:
        raise DomainError("dt must be positive")
    if record_stride < 1:
        raise DomainError("record_stride must be >= 1")
    grid = xi0.grid
    n_steps = int(round(t_end / dt))
    y = xi0.values.copy()
    times = [0.0]
    states = [y.copy()]
    aborted = False
    reason = ""

    def rhs(v):
        return _rhs_raw(v, omega, params, grid)

    step = 0
    while step < n_steps:
        try:
            k1 = rhs(y)
            k2 = rhs(y + 0.5 * dt * k1)
            k3 = rhs(y + 0.5 * dt * k2)
            k4 = rhs(y + dt * k3)
        except SelfIntersectionError as exc:
            aborted = True
            reason = str(exc)
            break
        y = y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        y -= y.mean()
        step += 1
        if np.min(1.0 + 2.0 * y) < BLOWUP_MARGIN:
            aborted = True
            reason = "blow-up margin reached: min(1+2*xi) < %g" % BLOWUP_MARGIN
            times.append(step * dt)
            states.append(y.copy())
            break
        if step % record_stride == 0 or step == n_steps:
            times.append(step * dt)
            states.append(y.copy())

    state_arr = np.array(states)
    diagnostics = []
    for s in state_arr:
        try:
            diagnostics.append(
                conserved_quantities(RadialDeformation(grid, fourier.remove_mean(s)), params)
            )
        except SelfIntersectionError:
            nan = float("nan")
            diagnostics.append(ConservedSet(nan, nan, nan, nan, None))
    return TrajectoryRecord(
        times=np.array(times),
        states=state_arr,
        diagnostics=diagnostics,
        dt=dt,
        method="rk4",
        gamma=params.gamma,
        omega=omega,
        aborted=aborted,
        abort_reason=reason,
    )
