"""Unconditionally gradient-stable semi-implicit steps for both models,
solved directly in the per-axis eigenbasis, plus a dense reference solver
for small-grid verification.

One step solves a linear system in the new field.  For the second-order
model:

    (1 + eps) . phi_new + eta * laplacian(phi_new) = b
    eps = 2 dt (1 - xi) T        (per cell)
    eta = -dt gamma              (scalar)
    b   = phi - 2 dt xi T phi - 4 dt phi^3 - dt h

For the fourth-order (conserved) model:

    c0 . phi_new + c2 . laplacian(phi_new) + c4 * biharmonic(phi_new) = b
    c0 = 1 - 2 dt laplacian((1 - xi) T)
    c2 = -2 dt (1 - xi) T
    c4 = dt gamma
    b  = phi + dt * laplacian(2 xi T phi + 4 phi^3 + h)

The direct solve transforms b into the eigenbasis, divides elementwise by
the coefficient matrix Omega built from the eigenvalue sums, and
transforms back.  When the coefficient fields are spatially uniform this
is the exact solution of the linear system; when they vary, Omega mixes
spatial and spectral indices (the scheme as published) and the dense
reference solver measures the gap.  Constant mobility other than one is
folded into an effective time step before assembly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .energetics import PhysicalConstants
from .errors import SingularCoefficientError
from .grid import Field
from .models import Model
from .operators import (
    GridBases,
    axis_matrices,
    eigenvalue_sums,
    grid_bases,
    laplacian_values,
)

OMEGA_GUARD = 1e-14

DENSE_REFERENCE_MAX_CELLS = 4096


@dataclass(frozen=True)
class AcCoefficients:
    eps: Field
    eta: float
    b: Field


@dataclass(frozen=True)
class ChCoefficients:
    c0: Field
    c2: Field
    c4: float
    b: Field


def assemble_ac_coefficients(
    phi: Field,
    T: Field,
    h: Field,
    xi: Field,
    constants: PhysicalConstants,
    dt: float,
) -> AcCoefficients:
    if dt < 0:
        raise ValueError(f"dt must be non-negative, got {dt}")
    if not constants.gamma > 0:
        raise ValueError("implicit stepping requires gamma > 0")
    dt_eff = constants.mobility * dt
    p = phi.values
    t = T.values
    x = xi.values
    eps = 2.0 * dt_eff * (1.0 - x) * t
    b = p - 2.0 * dt_eff * x * t * p - 4.0 * dt_eff * p * p * p - h.values * dt_eff
    return AcCoefficients(
        eps=phi.with_values(eps),
        eta=-dt_eff * constants.gamma,
        b=phi.with_values(b),
    )


def assemble_ch_coefficients(
    phi: Field,
    T: Field,
    h: Field,
    xi: Field,
    constants: PhysicalConstants,
    dt: float,
) -> ChCoefficients:
    if dt < 0:
        raise ValueError(f"dt must be non-negative, got {dt}")
    if not constants.gamma > 0:
        raise ValueError("implicit stepping requires gamma > 0")
    dt_eff = constants.mobility * dt
    grid = phi.grid
    p = phi.values
    t = T.values
    x = xi.values
    implicit_coeff = (1.0 - x) * t
    c0 = 1.0 - 2.0 * dt_eff * laplacian_values(implicit_coeff, grid)
    c2 = -2.0 * dt_eff * implicit_coeff
    b = p + dt_eff * laplacian_values(
        2.0 * x * t * p + 4.0 * p * p * p + h.values, grid
    )
    return ChCoefficients(
        c0=phi.with_values(c0),
        c2=phi.with_values(c2),
        c4=dt_eff * constants.gamma,
        b=phi.with_values(b),
    )


def _check_omega(omega: np.ndarray) -> None:
    flat = np.abs(omega)
    k = int(np.argmin(flat))
    if flat.flat[k] <= OMEGA_GUARD:
        i, j = np.unravel_index(k, omega.shape)
        raise SingularCoefficientError(
            f"spectral divisor ~0 at mode ({i}, {j}): "
            f"|Omega| = {flat.flat[k]:.3e} <= {OMEGA_GUARD}"
        )


def ac_omega(coeffs: AcCoefficients, bases: GridBases) -> np.ndarray:
    """Spectral divisor 1 + eps_ij + eta (d_y[i] + d_x[j])."""
    return 1.0 + coeffs.eps.values + coeffs.eta * eigenvalue_sums(bases)


def ch_omega(coeffs: ChCoefficients, bases: GridBases) -> np.ndarray:
    """Spectral divisor c0_ij + c2_ij (d_y+d_x) + c4 (d_y+d_x)^2."""
    d = eigenvalue_sums(bases)
    return coeffs.c0.values + coeffs.c2.values * d + coeffs.c4 * d * d


def _spectral_solve(b: Field, omega: np.ndarray, bases: GridBases) -> Field:
    _check_omega(omega)
    qy, qx = bases.y.Q, bases.x.Q
    B = qy.T @ b.values @ qx
    return b.with_values(qy @ (B / omega) @ qx.T)


def solve_ac_step(coeffs: AcCoefficients, bases: GridBases, dt: float) -> Field:
    """New field from the assembled second-order-model coefficients."""
    if dt == 0.0:
        return coeffs.b.with_values(coeffs.b.values.copy())
    return _spectral_solve(coeffs.b, ac_omega(coeffs, bases), bases)


def solve_ch_step(coeffs: ChCoefficients, bases: GridBases, dt: float) -> Field:
    """New field from the assembled fourth-order-model coefficients."""
    if dt == 0.0:
        return coeffs.b.with_values(coeffs.b.values.copy())
    return _spectral_solve(coeffs.b, ch_omega(coeffs, bases), bases)


def implicit_step(
    model: Model,
    phi: Field,
    T: Field,
    h: Field,
    xi: Field,
    constants: PhysicalConstants,
    dt: float,
    bases: GridBases | None = None,
) -> Field:
    """Assemble-and-solve convenience wrapper for one implicit step."""
    if bases is None:
        bases = grid_bases(phi.grid)
    if model is Model.AC:
        return solve_ac_step(
            assemble_ac_coefficients(phi, T, h, xi, constants, dt), bases, dt
        )
    return solve_ch_step(
        assemble_ch_coefficients(phi, T, h, xi, constants, dt), bases, dt
    )


def _dense_laplacian(grid) -> np.ndarray:
    """(n m) x (n m) matrix of the 2-D Laplacian on row-major flattening:
    vec(A_y F + F A_x^T) = (A_y kron I + I kron A_x) vec(F)."""
    a_y, a_x = axis_matrices(grid)
    eye_n = np.eye(grid.n)
    eye_m = np.eye(grid.m)
    return np.kron(a_y.entries, eye_m) + np.kron(eye_n, a_x.entries)


def dense_reference_step(
    model: Model,
    phi: Field,
    T: Field,
    h: Field,
    xi: Field,
    constants: PhysicalConstants,
    dt: float,
) -> Field:
    """Direct-elimination solve of the full implicit linear system.

    Builds the (n m) x (n m) operator from the same per-axis matrices and
    solves it densely; this is the verification oracle for the spectral
    path.  Restricted to n*m <= 4096 cells.
    """
    grid = phi.grid
    cells = grid.n * grid.m
    if cells > DENSE_REFERENCE_MAX_CELLS:
        raise ValueError(
            f"dense reference solver is limited to {DENSE_REFERENCE_MAX_CELLS} "
            f"cells, got {cells}"
        )
    if dt == 0.0:
        return phi.with_values(phi.values.copy())
    lap = _dense_laplacian(grid)
    if model is Model.AC:
        coeffs = assemble_ac_coefficients(phi, T, h, xi, constants, dt)
        system = np.diag(1.0 + coeffs.eps.values.ravel()) + coeffs.eta * lap
        rhs = coeffs.b.values.ravel()
    else:
        coeffs = assemble_ch_coefficients(phi, T, h, xi, constants, dt)
        system = (
            np.diag(coeffs.c0.values.ravel())
            + coeffs.c2.values.ravel()[:, None] * lap
            + coeffs.c4 * (lap @ lap)
        )
        rhs = coeffs.b.values.ravel()
    try:
        solution = np.linalg.solve(system, rhs)
    except np.linalg.LinAlgError as err:
        raise SingularCoefficientError(f"dense implicit system is singular: {err}")
    return phi.with_values(solution.reshape(grid.shape))
