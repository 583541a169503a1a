import math

import numpy as np
import pytest

from vpatch import (
    Grid,
    RadialDeformation,
    conserved_quantities,
    deformation_rhs,
    ellipse_params,
    hamiltonian,
    integrate,
    linearized_rhs,
    pseudo_energy,
    rectified_momentum,
)
from vpatch.dynamics import angular_momentum
from vpatch.fourier import grid_inner, remove_mean
from vpatch.geometry import g_weight, g_weight_derivative
from vpatch.spectral import basis_cos

from conftest import random_deformation

# pseudo-energy of the gamma = 2 ellipse, frozen from a resolution-doubling
# run (stable to 3e-16 between N = 256 and N = 1024)
ENERGY_GAMMA2 = -0.3001925018148243


class TestVectorField:
    def test_equilibrium(self, grid256, params2):
        rhs = deformation_rhs(RadialDeformation.zero(grid256), params2.rotation_rate, params2)
        assert np.abs(rhs).max() < 1e-10

    def test_omega_linearity_at_zero(self, grid, params2):
        # rhs(0, omega) - rhs(0, omega_eq) = ((omega - omega_eq)/2) g'
        xi0 = RadialDeformation.zero(grid)
        omega = 0.1
        delta = deformation_rhs(xi0, omega, params2) - deformation_rhs(
            xi0, params2.rotation_rate, params2
        )
        expect = 0.5 * (omega - params2.rotation_rate) * g_weight_derivative(params2, grid.nodes)
        assert np.abs(delta - expect).max() < 1e-13

    def test_matches_linearization_at_small_amplitude(self, grid256, params2):
        eps = 1e-4
        th = grid256.nodes
        direction = math.sqrt(2.0) * np.cos(4 * th) / math.sqrt(math.pi)
        xi = RadialDeformation(grid256, remove_mean(eps * direction))
        rhs = deformation_rhs(xi, params2.rotation_rate, params2)
        lin = linearized_rhs(
            RadialDeformation.zero(grid256), xi.values, params2.rotation_rate, params2
        )
        assert np.abs(rhs - lin).max() < 1e-7

    def test_zero_mean(self, grid, params2):
        for seed in range(3):
            xi = random_deformation(grid, 3e-2, seed=seed)
            rhs = deformation_rhs(xi, 0.3, params2)
            assert abs(rhs.mean()) < 1e-12

    def test_reversibility(self, grid, params2):
        # X(S xi) = -S X(xi) with (S xi)(theta) = xi(-theta)
        xi = random_deformation(grid, 2e-2, seed=6)
        lhs = deformation_rhs(xi.reflected(), params2.rotation_rate, params2)
        rhs = deformation_rhs(xi, params2.rotation_rate, params2)
        reflected_rhs = np.roll(rhs[::-1], 1)
        assert np.abs(lhs + reflected_rhs).max() < 1e-10

    def test_half_wave_invariance(self, grid, params2):
        # pi-periodic states (even harmonics only) form an invariant
        # subspace, on which the center of mass vanishes identically
        th = grid.nodes
        vals = remove_mean(1e-2 * (np.cos(2 * th) - 0.3 * np.sin(4 * th)))
        xi = RadialDeformation(grid, vals)
        rhs = deformation_rhs(xi, params2.rotation_rate, params2)
        n = grid.n_points
        assert np.abs(rhs - np.roll(rhs, n // 2)).max() < 1e-12
        assert conserved_quantities(xi, params2).center_modulus < 1e-13


class TestLinearizedField:
    def test_equilibrium_symbol_is_constant(self, grid, params2):
        # omega_eq * g + v(0) must be the constant -omega_eq
        from vpatch.geometry import _grid_tables
        from vpatch.dynamics import _log_smooth_raw
        from vpatch.quadrature import rule_for
        from vpatch import kernels

        theta, sind, cosd, inv4 = _grid_tables(grid.n_points)
        xi0 = RadialDeformation.zero(grid)
        rho, drho, *_, lns = _log_smooth_raw(xi0.values, params2, theta, inv4)
        rule = rule_for(grid)
        h = 2 * np.pi / grid.n_points
        g1 = (sind * drho[None, :] + cosd * rho[None, :]) / rho[:, None]
        v = kernels.pair_reduce(g1, rule.matrix, lns, h) / (4 * np.pi)
        symbol = params2.rotation_rate * np.asarray(g_weight(params2, theta)) + v
        assert np.abs(symbol + params2.rotation_rate).max() < 1e-12

    def test_self_adjoint_symbol(self, grid, params2):
        # the discrete operator q -> (omega g + v) q - W q is a symmetric
        # matrix in the grid inner product
        from vpatch.geometry import _grid_tables
        from vpatch.dynamics import _log_smooth_raw
        from vpatch.quadrature import rule_for
        from vpatch import kernels

        xi = random_deformation(grid, 2e-2, seed=8)
        omega = 0.25
        theta, sind, cosd, inv4 = _grid_tables(grid.n_points)
        rho, drho, *_, lns = _log_smooth_raw(xi.values, params2, theta, inv4)
        rule = rule_for(grid)
        h = 2 * np.pi / grid.n_points
        g1 = (sind * drho[None, :] + cosd * rho[None, :]) / rho[:, None]
        v = kernels.pair_reduce(g1, rule.matrix, lns, h) / (4 * np.pi)
        symbol = np.diag(omega * np.asarray(g_weight(params2, theta)) + v)
        symbol -= (rule.matrix + h * lns) / (4 * np.pi)
        assert np.abs(symbol - symbol.T).max() < 1e-10


class TestConservedQuantities:
    def test_values_at_equilibrium(self, grid, params2):
        cons = conserved_quantities(RadialDeformation.zero(grid), params2)
        assert cons.circulation == pytest.approx(math.pi, abs=1e-14)
        assert cons.angular_momentum == pytest.approx(5 * math.pi / 8, abs=1e-13)
        assert cons.center_modulus < 1e-14
        assert cons.rectified_momentum == pytest.approx(0.0, abs=1e-15)

    def test_momentum_linear_coordinate(self, grid, params2):
        # J_normalized(eps * c2) = eps + O(eps^2)
        th = grid.nodes
        for eps in (1e-3, 1e-4):
            xi = RadialDeformation(grid, eps * basis_cos(2, th))
            val = rectified_momentum(xi, params2)
            assert abs(val - eps) < 10 * eps**2

    def test_energy_disk(self, grid256):
        e = pseudo_energy(RadialDeformation.zero(grid256), ellipse_params(1.0))
        assert e == pytest.approx(-math.pi / 8, abs=1e-13)

    def test_energy_gamma2_frozen(self, grid256, params2):
        e = pseudo_energy(RadialDeformation.zero(grid256), params2)
        assert e == pytest.approx(ENERGY_GAMMA2, abs=1e-13)

    def test_energy_independent_oracle(self, grid256, params2):
        # independent route: for the exact ellipse the stream function is
        # the interior quadratic (ab/(2(a+b)))(x^2/a + y^2/b) plus the
        # constant psi(0) = (1/2pi) int_D ln|z| dA, so
        # E = (pi/8)(ab)^2 + pi * psi(0); psi(0) reduces to a smooth
        # periodic 1D integral evaluated here by the trapezoid rule
        a, b = math.sqrt(2.0), 1.0 / math.sqrt(2.0)
        phi = np.linspace(0.0, 2 * np.pi, 4096, endpoint=False)
        rb2 = (a * b) ** 2 / ((b * np.cos(phi)) ** 2 + (a * np.sin(phi)) ** 2)
        psi0 = np.mean(rb2 / 2 * np.log(np.sqrt(rb2)) - rb2 / 4)
        oracle = math.pi / 8 * (a * b) ** 2 + math.pi * psi0
        e = pseudo_energy(RadialDeformation.zero(grid256), params2)
        assert e == pytest.approx(oracle, abs=1e-13)

    def test_momentum_none_at_circle(self, grid):
        cons = conserved_quantities(RadialDeformation.zero(grid), ellipse_params(1.0))
        assert cons.rectified_momentum is None

    def test_center_linearization(self, grid, params2):
        # |Z| of a mode-1 state: Z = pi (sqrt(g) a1 + i b1/sqrt(g)) + O(amp^2)
        # in the plain cos/sin amplitudes a1, b1
        th = grid.nodes
        a1, b1 = 2e-4, -1e-4
        vals = a1 * np.cos(th) + b1 * np.sin(th)
        cons = conserved_quantities(RadialDeformation(grid, remove_mean(vals)), params2)
        g = params2.gamma
        expect = math.pi * abs(math.sqrt(g) * a1 + 1j * b1 / math.sqrt(g))
        amp = max(abs(a1), abs(b1))
        assert abs(cons.center_modulus - expect) < 50 * amp**2

    def test_momentum_is_prime_integral(self, grid, params2):
        # directional derivative of the normalized momentum along the flow
        xi = random_deformation(grid, 1e-2, seed=12)
        rhs = deformation_rhs(xi, params2.rotation_rate, params2)
        g = np.asarray(g_weight(params2, grid.nodes))
        aleph = params2.momentum_scale
        derivative = aleph * grid_inner(g * (1 + 2 * xi.values), rhs)
        assert abs(derivative) < 1e-8


class TestHamiltonian:
    def test_omega_linearity(self, grid, params2):
        xi = random_deformation(grid, 1e-2, seed=13)
        h1 = hamiltonian(xi, 0.4, params2)
        h2 = hamiltonian(xi, 0.1, params2)
        expect = 0.5 * (0.4 - 0.1) * angular_momentum(xi, params2)
        assert abs((h1 - h2) - expect) < 1e-14

    def test_disk_value(self, grid256):
        p1 = ellipse_params(1.0)
        h = hamiltonian(RadialDeformation.zero(grid256), 0.0, p1)
        assert h == pytest.approx(math.pi / 16, abs=1e-13)

    def test_gradient_structure(self, grid, params2):
        # the vector field is d_theta of the L2 gradient of H (FD in a few
        # mode directions; the full sweep runs in the acceptance suite)
        xi = random_deformation(grid, 1e-3, seed=14)
        omega = 0.3
        rhs = deformation_rhs(xi, omega, params2)
        th = grid.nodes
        eps = 1e-6
        for n in (1, 2, 5):
            direction = np.cos(n * th)
            plus = RadialDeformation(grid, remove_mean(xi.values + eps * direction))
            minus = RadialDeformation(grid, remove_mean(xi.values - eps * direction))
            dh = (hamiltonian(plus, omega, params2) - hamiltonian(minus, omega, params2)) / (2 * eps)
            # (rhs, primitive-of-direction) = -dH[direction]
            prim = np.sin(n * th) / n
            assert abs(grid_inner(rhs, prim) + dh) < 1e-7


class TestIntegrate:
    def test_equilibrium_stays(self, params2):
        grid = Grid(128)
        rec = integrate(RadialDeformation.zero(grid), params2.rotation_rate, params2,
                        dt=1e-2, t_end=1.0, record_stride=10)
        assert not rec.aborted
        assert rec.max_abs() < 1e-9

    def test_rk4_order(self, params2):
        grid = Grid(64)
        th = grid.nodes
        xi0 = RadialDeformation(grid, remove_mean(1e-2 * np.cos(3 * th)))
        ref = integrate(xi0, params2.rotation_rate, params2, dt=1.25e-3, t_end=0.4)
        coarse = integrate(xi0, params2.rotation_rate, params2, dt=1e-2, t_end=0.4)
        fine = integrate(xi0, params2.rotation_rate, params2, dt=5e-3, t_end=0.4)
        err_coarse = np.abs(coarse.states[-1] - ref.states[-1]).max()
        err_fine = np.abs(fine.states[-1] - ref.states[-1]).max()
        ratio = err_coarse / err_fine
        assert 11.0 < ratio < 22.0  # 16x up to reference contamination

    def test_short_conservation(self, params2):
        grid = Grid(128)
        th = grid.nodes
        xi0 = RadialDeformation(grid, remove_mean(1e-2 * np.cos(3 * th)))
        rec = integrate(xi0, params2.rotation_rate, params2, dt=2e-3, t_end=0.5,
                        record_stride=50)
        c0, c1 = rec.diagnostics[0], rec.diagnostics[-1]
        assert abs(c1.circulation - c0.circulation) < 1e-12
        assert abs(c1.angular_momentum - c0.angular_momentum) < 1e-12
        assert abs(c1.pseudo_energy - c0.pseudo_energy) < 1e-12

    def test_abort_on_instability(self, params2):
        # a grossly unstable step size trips the blow-up margin
        grid = Grid(64)
        th = grid.nodes
        xi0 = RadialDeformation(grid, remove_mean(0.3 * np.cos(2 * th)))
        rec = integrate(xi0, 0.0, params2, dt=0.5, t_end=50.0)
        assert rec.aborted
        assert rec.times[-1] < 50.0

    def test_validates_arguments(self, grid, params2):
        xi0 = RadialDeformation.zero(grid)
        with pytest.raises(ValueError):
            integrate(xi0, 0.1, params2, dt=-1.0, t_end=1.0)
        with pytest.raises(ValueError):
            integrate(xi0, 0.1, params2, dt=0.1, t_end=1.0, record_stride=0)


class TestSerialization:
    def test_csv_and_dump(self, tmp_path, params2):
        grid = Grid(64)
        th = grid.nodes
        xi0 = RadialDeformation(grid, remove_mean(5e-3 * np.cos(3 * th)))
        rec = integrate(xi0, params2.rotation_rate, params2, dt=1e-2, t_end=0.1,
                        record_stride=2)
        csv_path = tmp_path / "diag.csv"
        rec.to_csv(csv_path)
        lines = csv_path.read_text().strip().split("\n")
        assert lines[0].startswith("t,circulation,")
        assert len(lines) == 1 + len(rec.times)

        assert (np.diff(rec.times) > 0).all()

        dump_path = tmp_path / "states.json"
        rec.to_state_dump(dump_path)
        import json

        manifest = json.loads(dump_path.read_text())
        assert manifest["schema_version"] == 1
        assert manifest["dtype"] == "<f8"
        raw = np.frombuffer((tmp_path / "states.json.bin").read_bytes(), dtype="<f8")
        assert np.array_equal(raw.reshape(manifest["n_records"], manifest["n_points"]),
                              rec.states)

    def test_csv_deterministic(self, tmp_path, params2):
        grid = Grid(64)
        th = grid.nodes
        xi0 = RadialDeformation(grid, remove_mean(5e-3 * np.cos(3 * th)))
        paths = []
        for tag in ("a", "b"):
            rec = integrate(xi0, params2.rotation_rate, params2, dt=1e-2, t_end=0.1)
            p = tmp_path / f"{tag}.csv"
            rec.to_csv(p)
            paths.append(p.read_bytes())
        assert paths[0] == paths[1]
