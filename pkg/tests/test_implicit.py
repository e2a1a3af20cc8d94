from __future__ import annotations

import numpy as np
import pytest

from phasefd.energetics import PhysicalConstants
from phasefd.errors import SingularCoefficientError, UnsupportedBoundaryError
from phasefd.grid import BoundaryCondition, Field, Grid, create_field, total_mass
from phasefd.implicit import (
    ac_omega,
    assemble_ac_coefficients,
    assemble_ch_coefficients,
    ch_omega,
    dense_reference_step,
    implicit_step,
    solve_ac_step,
    solve_ch_step,
)
from phasefd.models import Model
from phasefd.operators import grid_bases, laplacian_values
from phasefd.splitting import SplittingPolicy, XiMode, xi_field

from conftest import SPECTRAL_BCS, random_field

P = BoundaryCondition.PERIODIC
N = BoundaryCondition.NEUMANN


def uniform_case(grid, phi_value=1.0, T=-2.0, h=0.0, xi=3.5, gamma=0.01):
    return (
        create_field(grid, phi_value),
        create_field(grid, T),
        create_field(grid, h),
        create_field(grid, xi),
        PhysicalConstants(gamma=gamma),
    )


class TestAssembleAcCoefficients:
    def test_hand_evaluated_uniform_case(self, unit_grid):
        phi, T, h, xi, consts = uniform_case(unit_grid)
        coeffs = assemble_ac_coefficients(phi, T, h, xi, consts, dt=0.1)
        assert np.allclose(coeffs.eps.values, 1.0)
        assert np.allclose(coeffs.b.values, 2.0)
        assert coeffs.eta == pytest.approx(-0.1 * 0.01)

    def test_dt_zero_limits(self, unit_grid):
        phi = random_field(unit_grid, seed=1)
        _, T, h, xi, consts = uniform_case(unit_grid)
        coeffs = assemble_ac_coefficients(phi, T, h, xi, consts, dt=0.0)
        assert np.all(coeffs.eps.values == 0.0)
        assert coeffs.eta == 0.0
        assert np.array_equal(coeffs.b.values, phi.values)

    def test_h_shifts_rhs_only(self, unit_grid):
        phi, T, _, xi, consts = uniform_case(unit_grid)
        dt = 0.05
        base = assemble_ac_coefficients(phi, T, create_field(unit_grid, 0.0), xi, consts, dt)
        moved = assemble_ac_coefficients(phi, T, create_field(unit_grid, 2.0), xi, consts, dt)
        assert np.array_equal(base.eps.values, moved.eps.values)
        assert np.allclose(moved.b.values - base.b.values, -2.0 * dt)


class TestAssembleChCoefficients:
    def test_uniform_coefficient_gives_unit_c0(self, unit_grid):
        phi, T, h, xi, consts = uniform_case(unit_grid)
        coeffs = assemble_ch_coefficients(phi, T, h, xi, consts, dt=0.02)
        assert np.all(coeffs.c0.values == 1.0)
        assert np.allclose(coeffs.c2.values, -2.0 * 0.02 * (1.0 - 3.5) * -2.0)
        assert coeffs.c4 == pytest.approx(0.02 * 0.01)

    def test_dt_zero_limits(self, unit_grid):
        phi = random_field(unit_grid, seed=2)
        _, T, h, xi, consts = uniform_case(unit_grid)
        coeffs = assemble_ch_coefficients(phi, T, h, xi, consts, dt=0.0)
        assert np.all(coeffs.c0.values == 1.0)
        assert np.all(coeffs.c2.values == 0.0)
        assert coeffs.c4 == 0.0
        assert np.array_equal(coeffs.b.values, phi.values)

    def test_uniform_state_keeps_rhs(self, unit_grid):
        phi, T, h, xi, consts = uniform_case(unit_grid, phi_value=0.4)
        coeffs = assemble_ch_coefficients(phi, T, h, xi, consts, dt=0.02)
        assert np.array_equal(coeffs.b.values, phi.values)


class TestSolveIdentityAndFixedPoints:
    @pytest.mark.parametrize("model", [Model.AC, Model.CH])
    def test_dt_zero_exact_identity(self, unit_grid, model):
        phi = random_field(unit_grid, seed=3)
        _, T, h, xi, consts = uniform_case(unit_grid)
        out = implicit_step(model, phi, T, h, xi, consts, 0.0)
        assert np.array_equal(out.values, phi.values)

    @pytest.mark.parametrize("model", [Model.AC, Model.CH])
    @pytest.mark.parametrize("dt", [1e-3, 0.1, 10.0])
    def test_equilibrium_preserved(self, unit_grid, model, dt):
        phi, T, h, _, consts = uniform_case(unit_grid)
        xi = xi_field(T, phi, SplittingPolicy())
        out = implicit_step(model, phi, T, h, xi, consts, dt)
        assert np.abs(out.values - 1.0).max() <= 1e-12

    def test_dense_dt_zero_identity(self, unit_grid):
        phi = random_field(unit_grid, seed=4)
        _, T, h, xi, consts = uniform_case(unit_grid)
        for model in (Model.AC, Model.CH):
            out = dense_reference_step(model, phi, T, h, xi, consts, 0.0)
            assert np.array_equal(out.values, phi.values)


class TestSpectralMatchesDense:
    @pytest.mark.parametrize("bc_y,bc_x", [(P, P), (N, N), (P, N)])
    @pytest.mark.parametrize("model", [Model.AC, Model.CH])
    def test_uniform_coefficients_random_states(self, bc_y, bc_x, model):
        rng = np.random.default_rng(hash((bc_y, bc_x, model)) % 2**31)
        for trial in range(4):
            n, m = rng.integers(6, 13, size=2)
            g = Grid(int(n), int(m), float(rng.uniform(0.05, 0.5)), bc_y, bc_x)
            phi = random_field(g, seed=int(rng.integers(1e6)), lo=-1.2, hi=1.2)
            T = create_field(g, float(rng.uniform(0.3, 4.0) * rng.choice([-1, 1])))
            h = create_field(g, float(rng.uniform(-3, 3)))
            consts = PhysicalConstants(gamma=float(10 ** rng.uniform(-3, -0.5)))
            xi = xi_field(T, phi, SplittingPolicy())
            dt = float(10 ** rng.uniform(-4, -1.5))
            spectral = implicit_step(model, phi, T, h, xi, consts, dt)
            dense = dense_reference_step(model, phi, T, h, xi, consts, dt)
            gap = np.abs(spectral.values - dense.values).max()
            assert gap <= 1e-10, f"trial {trial}: gap {gap}"

    @pytest.mark.parametrize("model", [Model.AC, Model.CH])
    def test_uniform_coefficient_mode_with_varying_t(self, model):
        g = Grid(10, 8, 0.2, P, P)
        rng = np.random.default_rng(5)
        t_vals = rng.uniform(0.5, 3.0, g.shape) * rng.choice([-1.0, 1.0], g.shape)
        T = Field(t_vals, g)
        phi = random_field(g, seed=6, lo=-1.1, hi=1.1)
        h = random_field(g, seed=7, lo=-2, hi=2)
        consts = PhysicalConstants(gamma=0.02)
        xi = xi_field(T, phi, SplittingPolicy(mode=XiMode.UNIFORM_COEFFICIENT))
        dt = 0.01
        spectral = implicit_step(model, phi, T, h, xi, consts, dt)
        dense = dense_reference_step(model, phi, T, h, xi, consts, dt)
        assert np.abs(spectral.values - dense.values).max() <= 1e-10

    def test_literal_mode_varying_t_gap_is_finite_and_reported(self):
        # the published scheme's mixed-index arithmetic is not the exact
        # solve when T varies; the dense oracle quantifies the gap
        g = Grid(8, 8, 0.125, P, P)
        t_vals = np.full(g.shape, 0.49)
        t_vals[4:] = -4.13
        T = Field(t_vals, g)
        phi = random_field(g, seed=8)
        h = create_field(g, 0.0)
        consts = PhysicalConstants(gamma=0.01)
        xi = xi_field(T, phi, SplittingPolicy())
        dt = 0.005
        spectral = implicit_step(Model.AC, phi, T, h, xi, consts, dt)
        dense = dense_reference_step(Model.AC, phi, T, h, xi, consts, dt)
        gap = np.abs(spectral.values - dense.values).max()
        assert np.isfinite(gap)
        assert gap > 0.0  # nonzero by design in literal mode


class TestLinearSystemResidual:
    def test_ac_residual(self, neumann_grid):
        phi, T, h, xi, consts = uniform_case(neumann_grid, phi_value=0.3)
        phi = random_field(neumann_grid, seed=9)
        dt = 0.01
        coeffs = assemble_ac_coefficients(phi, T, h, xi, consts, dt)
        out = solve_ac_step(coeffs, grid_bases(neumann_grid), dt)
        lhs = (1.0 + coeffs.eps.values) * out.values + coeffs.eta * laplacian_values(
            out.values, neumann_grid
        )
        rel = np.abs(lhs - coeffs.b.values).max() / np.abs(coeffs.b.values).max()
        assert rel <= 1e-10

    def test_ch_residual(self, unit_grid):
        phi = random_field(unit_grid, seed=10)
        _, T, h, xi, consts = uniform_case(unit_grid)
        dt = 0.02
        coeffs = assemble_ch_coefficients(phi, T, h, xi, consts, dt)
        out = solve_ch_step(coeffs, grid_bases(unit_grid), dt)
        lap = laplacian_values(out.values, unit_grid)
        lhs = (
            coeffs.c0.values * out.values
            + coeffs.c2.values * lap
            + coeffs.c4 * laplacian_values(lap, unit_grid)
        )
        rel = np.abs(lhs - coeffs.b.values).max() / np.abs(coeffs.b.values).max()
        assert rel <= 1e-10


class TestMassPreservation:
    @pytest.mark.parametrize("bc", SPECTRAL_BCS)
    def test_ch_step_preserves_mean(self, bc):
        g = Grid(12, 9, 0.1, bc, bc)
        phi = random_field(g, seed=11)
        T = create_field(g, -2.0)
        h = create_field(g, 0.4)
        consts = PhysicalConstants(gamma=1e-3)
        xi = xi_field(T, phi, SplittingPolicy())
        out = implicit_step(Model.CH, phi, T, h, xi, consts, 0.05)
        m0, m1 = total_mass(phi), total_mass(out)
        assert abs(m1 - m0) <= 1e-12 * max(1.0, abs(m0))


class TestGuardsAndErrors:
    def test_singular_omega_reported_with_index(self, unit_grid):
        phi, T, h, _, consts = uniform_case(unit_grid)
        # 2 dt (1 - xi) T = -1 makes the zero-mode divisor vanish
        xi = create_field(unit_grid, -1.0)
        coeffs = assemble_ac_coefficients(phi, T, h, xi, consts, dt=0.125)
        omega = ac_omega(coeffs, grid_bases(unit_grid))
        assert np.abs(omega).min() <= 1e-14
        with pytest.raises(SingularCoefficientError, match=r"mode \(0, 0\)"):
            solve_ac_step(coeffs, grid_bases(unit_grid), 0.125)

    def test_symmetric_bc_rejected(self):
        g = Grid(6, 6, 0.1, BoundaryCondition.SYMMETRIC, P)
        phi, T, h, xi, consts = uniform_case(g)
        with pytest.raises(UnsupportedBoundaryError):
            implicit_step(Model.AC, phi, T, h, xi, consts, 0.01)

    def test_dense_reference_size_cap(self):
        g = Grid(70, 70, 0.1, P, P)
        phi, T, h, xi, consts = uniform_case(g)
        with pytest.raises(ValueError):
            dense_reference_step(Model.AC, phi, T, h, xi, consts, 0.01)

    def test_negative_dt_rejected(self, unit_grid):
        phi, T, h, xi, consts = uniform_case(unit_grid)
        with pytest.raises(ValueError):
            assemble_ac_coefficients(phi, T, h, xi, consts, -0.1)

    def test_gamma_zero_rejected(self, unit_grid):
        phi, T, h, xi, _ = uniform_case(unit_grid)
        consts = PhysicalConstants(gamma=0.0)
        with pytest.raises(ValueError):
            assemble_ch_coefficients(phi, T, h, xi, consts, 0.1)


class TestOmegaAssembly:
    def test_ac_omega_formula(self, unit_grid):
        phi, T, h, xi, consts = uniform_case(unit_grid)
        dt = 0.1
        coeffs = assemble_ac_coefficients(phi, T, h, xi, consts, dt)
        bases = grid_bases(unit_grid)
        omega = ac_omega(coeffs, bases)
        d = bases.y.eigenvalues[:, None] + bases.x.eigenvalues[None, :]
        assert np.allclose(omega, 1.0 + 1.0 + (-dt * consts.gamma) * d)

    def test_ch_omega_uses_squared_eigenvalue_sum(self, unit_grid):
        phi, T, h, xi, consts = uniform_case(unit_grid)
        dt = 0.1
        coeffs = assemble_ch_coefficients(phi, T, h, xi, consts, dt)
        bases = grid_bases(unit_grid)
        omega = ch_omega(coeffs, bases)
        d = bases.y.eigenvalues[:, None] + bases.x.eigenvalues[None, :]
        expected = coeffs.c0.values + coeffs.c2.values * d + coeffs.c4 * d * d
        assert np.array_equal(omega, expected)

    def test_mobility_rescales_time(self, unit_grid):
        phi, T, h, xi, _ = uniform_case(unit_grid)
        slow = assemble_ac_coefficients(
            phi, T, h, xi, PhysicalConstants(gamma=0.01, mobility=1.0), 0.2
        )
        fast = assemble_ac_coefficients(
            phi, T, h, xi, PhysicalConstants(gamma=0.01, mobility=2.0), 0.1
        )
        assert np.array_equal(slow.eps.values, fast.eps.values)
        assert slow.eta == fast.eta
        assert np.array_equal(slow.b.values, fast.b.values)
