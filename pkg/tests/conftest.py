"""Shared fixtures and independent numerical oracles.

The stencil oracles here deliberately avoid the package's operator path:
ghost cells come from np.pad and the five-point arithmetic is written out
directly, so matrix-based operators are checked against an independent
discretization of the same boundary conditions.
"""

from __future__ import annotations

import numpy as np
import pytest

from phasefd.grid import BoundaryCondition, Field, Grid

PAD_MODE = {
    BoundaryCondition.PERIODIC: "wrap",
    BoundaryCondition.NEUMANN: "edge",
    BoundaryCondition.SYMMETRIC: "reflect",
}

ALL_BCS = [
    BoundaryCondition.PERIODIC,
    BoundaryCondition.NEUMANN,
    BoundaryCondition.SYMMETRIC,
]

SPECTRAL_BCS = [BoundaryCondition.PERIODIC, BoundaryCondition.NEUMANN]


def stencil_laplacian(values: np.ndarray, grid: Grid) -> np.ndarray:
    """Five-point Laplacian via ghost padding, independent of the operators
    module."""
    dr2 = grid.dr * grid.dr
    pad_y = np.pad(values, ((1, 1), (0, 0)), mode=PAD_MODE[grid.bc_y])
    pad_x = np.pad(values, ((0, 0), (1, 1)), mode=PAD_MODE[grid.bc_x])
    d2y = pad_y[2:, :] - 2.0 * values + pad_y[:-2, :]
    d2x = pad_x[:, 2:] - 2.0 * values + pad_x[:, :-2]
    return (d2y + d2x) / dr2


def stencil_chemical_potential(
    values: np.ndarray, T: np.ndarray, h: np.ndarray, gamma: float, grid: Grid
) -> np.ndarray:
    bulk = 4.0 * values**3 + 2.0 * T * values + h
    return bulk - gamma * stencil_laplacian(values, grid)


def random_field(grid: Grid, seed: int, lo: float = -1.0, hi: float = 1.0) -> Field:
    rng = np.random.default_rng(seed)
    return Field(rng.uniform(lo, hi, grid.shape), grid)


@pytest.fixture
def unit_grid() -> Grid:
    return Grid(8, 8, 1.0, BoundaryCondition.PERIODIC, BoundaryCondition.PERIODIC)


@pytest.fixture
def neumann_grid() -> Grid:
    return Grid(8, 8, 0.125, BoundaryCondition.NEUMANN, BoundaryCondition.NEUMANN)
