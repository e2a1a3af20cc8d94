"""1-D Laplacian coefficient matrices, their eigendecompositions, and the
discrete Laplacian / biharmonic / spectral-transform operators.

The 2-D Laplacian of a field F is A_y F + F A_x^T where A_y, A_x are the
per-axis second-difference matrices (tridiagonal plus boundary terms,
scaled by 1/dr^2).  For periodic and Neumann axes A is symmetric, so the
transpose is immaterial; for the mirror ("symmetric") boundary variant the
matrix is not symmetric and the transpose keeps the column-axis stencil
identical to the row-axis one.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from functools import lru_cache

import numpy as np
import scipy.sparse as sp

from .errors import UnsupportedBoundaryError
from .grid import BoundaryCondition, Field, Grid


@dataclass(frozen=True)
class LaplacianMatrix:
    """Dense per-axis second-difference matrix with its sparse twin."""

    size: int
    dr: float
    bc: BoundaryCondition
    entries: np.ndarray

    @property
    def csr(self) -> sp.csr_matrix:
        return _axis_csr(self.size, self.dr, self.bc)


@dataclass(frozen=True)
class SpectralBasis:
    """Orthogonal eigendecomposition A = Q diag(d) Q^T of a per-axis matrix.

    Eigenvalues are sorted by ascending magnitude, so the zero (constant)
    mode comes first and the stiffest mode last.
    """

    Q: np.ndarray
    eigenvalues: np.ndarray


@dataclass(frozen=True)
class GridBases:
    """Per-axis spectral bases for a grid: y (rows) and x (columns)."""

    y: SpectralBasis
    x: SpectralBasis


class TransformDirection(Enum):
    FORWARD = "forward"
    INVERSE = "inverse"


def build_laplacian_matrix(size: int, dr: float, bc: BoundaryCondition) -> LaplacianMatrix:
    """Second-difference matrix for one axis, scaled by 1/dr^2.

    Periodic wraps via unit corner entries; Neumann replaces the corner
    diagonal by -1 (zero-gradient ghost); the mirror variant doubles the
    off-diagonal next to each corner.
    """
    if size < 3:
        raise ValueError(f"axis must have at least 3 cells, got {size}")
    if not dr > 0:
        raise ValueError(f"grid spacing must be positive, got {dr}")
    # every entry is a small power-of-two multiple of one rounded scale, so
    # row sums cancel exactly in floating point
    s = 1.0 / (dr * dr)
    a = np.zeros((size, size))
    idx = np.arange(size)
    a[idx, idx] = -(s + s)
    a[idx[:-1], idx[:-1] + 1] = s
    a[idx[1:], idx[1:] - 1] = s
    if bc is BoundaryCondition.PERIODIC:
        a[0, -1] = s
        a[-1, 0] = s
    elif bc is BoundaryCondition.NEUMANN:
        a[0, 0] = -s
        a[-1, -1] = -s
    elif bc is BoundaryCondition.SYMMETRIC:
        a[0, 1] = s + s
        a[-1, -2] = s + s
    else:  # pragma: no cover - enum is closed
        raise UnsupportedBoundaryError(f"unknown boundary condition {bc}")
    a.setflags(write=False)
    return LaplacianMatrix(size=size, dr=dr, bc=bc, entries=a)


@lru_cache(maxsize=None)
def _axis_matrix(size: int, dr: float, bc: BoundaryCondition) -> LaplacianMatrix:
    return build_laplacian_matrix(size, dr, bc)


@lru_cache(maxsize=None)
def _axis_csr(size: int, dr: float, bc: BoundaryCondition) -> sp.csr_matrix:
    return sp.csr_matrix(_axis_matrix(size, dr, bc).entries)


def axis_matrices(grid: Grid) -> tuple[LaplacianMatrix, LaplacianMatrix]:
    """(A_y, A_x) for a grid, cached by (size, dr, bc)."""
    return (
        _axis_matrix(grid.n, grid.dr, grid.bc_y),
        _axis_matrix(grid.m, grid.dr, grid.bc_x),
    )


def eigendecompose(matrix: LaplacianMatrix) -> SpectralBasis:
    """Orthogonal eigendecomposition of a periodic or Neumann axis matrix.

    The mirror boundary variant is rejected: its matrix is not symmetric,
    so no orthogonal eigenbasis exists and the direct solve does not apply.
    """
    if matrix.bc is BoundaryCondition.SYMMETRIC:
        raise UnsupportedBoundaryError(
            "spectral direct solve supports periodic and Neumann axes only"
        )
    eigenvalues, q = np.linalg.eigh(matrix.entries)
    order = np.argsort(np.abs(eigenvalues), kind="stable")
    eigenvalues = eigenvalues[order]
    q = q[:, order]
    # clamp roundoff: the discrete Laplacian is negative semi-definite
    eigenvalues[eigenvalues > 0.0] = 0.0
    eigenvalues.setflags(write=False)
    q.setflags(write=False)
    return SpectralBasis(Q=q, eigenvalues=eigenvalues)


@lru_cache(maxsize=None)
def _axis_basis(size: int, dr: float, bc: BoundaryCondition) -> SpectralBasis:
    return eigendecompose(_axis_matrix(size, dr, bc))


def grid_bases(grid: Grid) -> GridBases:
    """Per-axis spectral bases for a grid, cached by axis signature."""
    return GridBases(
        y=_axis_basis(grid.n, grid.dr, grid.bc_y),
        x=_axis_basis(grid.m, grid.dr, grid.bc_x),
    )


@lru_cache(maxsize=None)
def _grid_laplacian_terms(
    n: int, m: int, dr: float, bc_y: BoundaryCondition, bc_x: BoundaryCondition
) -> tuple[sp.csr_matrix, sp.csr_matrix]:
    """Kronecker factors of A_y F + F A_x^T on row-major flattened fields:
    vec(A_y F) = (A_y kron I) vec(F), vec(F A_x^T) = (I kron A_x) vec(F).

    The two terms are kept separate (not summed into one matrix) so each
    row's entries stay small power-of-two multiples of one scale and a
    constant field maps to exactly zero; cost is two sparse matvecs, O(n m).
    """
    a_y = _axis_csr(n, dr, bc_y)
    a_x = _axis_csr(m, dr, bc_x)
    return (
        sp.kron(a_y, sp.eye(m), format="csr"),
        sp.kron(sp.eye(n), a_x, format="csr"),
    )


def laplacian_values(values: np.ndarray, grid: Grid) -> np.ndarray:
    """Discrete Laplacian A_y F + F A_x^T on raw values."""
    k_y, k_x = _grid_laplacian_terms(grid.n, grid.m, grid.dr, grid.bc_y, grid.bc_x)
    flat = np.ascontiguousarray(values).reshape(-1)
    return (k_y @ flat + k_x @ flat).reshape(grid.n, grid.m)


def apply_laplacian(f: Field) -> Field:
    """Five-point discrete Laplacian with the grid's boundary handling."""
    return f.with_values(laplacian_values(f.values, f.grid))


def apply_biharmonic(f: Field) -> Field:
    """Discrete biharmonic, exactly the Laplacian applied twice."""
    lap = laplacian_values(f.values, f.grid)
    return f.with_values(laplacian_values(lap, f.grid))


def spectral_transform(f: Field, direction: TransformDirection) -> Field:
    """Forward: Y = Q_y^T F Q_x.  Inverse: F = Q_y Y Q_x^T."""
    bases = grid_bases(f.grid)
    qy, qx = bases.y.Q, bases.x.Q
    if direction is TransformDirection.FORWARD:
        out = qy.T @ f.values @ qx
    elif direction is TransformDirection.INVERSE:
        out = qy @ f.values @ qx.T
    else:  # pragma: no cover - enum is closed
        raise ValueError(f"unknown transform direction {direction}")
    return f.with_values(out)


def eigenvalue_sums(bases: GridBases) -> np.ndarray:
    """Matrix of d_y[i] + d_x[j], the spectral symbol of the 2-D Laplacian."""
    return bases.y.eigenvalues[:, None] + bases.x.eigenvalues[None, :]
