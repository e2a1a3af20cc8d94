"""Free-energy density, chemical potential, and the discrete total free
energy used for gradient-stability monitoring.

The bulk density is f(phi) = phi^4 + T phi^2 + h phi with external
parameters T and h that may vary per cell.  The total free energy adds the
gradient contribution (gamma/2) |grad phi|^2, discretized with per-axis
central differences using boundary-consistent ghost cells.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import Field, pad_ghost
from .operators import laplacian_values


@dataclass(frozen=True)
class PhysicalConstants:
    """Gradient energy coefficient and mobility.

    gamma may be zero for pure-bulk energy evaluation; the time steppers
    themselves require gamma > 0 (the gradient term is what stabilizes
    them) and enforce that separately.
    """

    gamma: float
    mobility: float = 1.0

    def __post_init__(self) -> None:
        if self.gamma < 0:
            raise ValueError(f"gamma must be non-negative, got {self.gamma}")
        if not self.mobility > 0:
            raise ValueError(f"mobility must be positive, got {self.mobility}")


def bulk_energy_density(phi, T, h):
    """phi^4 + T phi^2 + h phi, elementwise on arrays or scalars."""
    phi = np.asarray(phi, dtype=float)
    phi2 = phi * phi
    return phi2 * phi2 + T * phi2 + h * phi


def bulk_energy_derivative(phi, T, h):
    """d f / d phi = 4 phi^3 + 2 T phi + h."""
    phi = np.asarray(phi, dtype=float)
    return 4.0 * phi * phi * phi + 2.0 * T * phi + h


def chemical_potential_values(
    phi: np.ndarray, T: np.ndarray, h: np.ndarray, constants: PhysicalConstants, grid
) -> np.ndarray:
    return bulk_energy_derivative(phi, T, h) - constants.gamma * laplacian_values(phi, grid)


def chemical_potential(f: Field, T: Field, h: Field, constants: PhysicalConstants) -> Field:
    """mu = f'(phi) - gamma * laplacian(phi)."""
    return f.with_values(
        chemical_potential_values(f.values, T.values, h.values, constants, f.grid)
    )


def gradient_squared_values(phi: np.ndarray, grid) -> np.ndarray:
    """|grad phi|^2 by central differences with ghost cells per axis BC."""
    two_dr = 2.0 * grid.dr
    padded_y = pad_ghost(phi, grid.bc_y, axis=0)
    padded_x = pad_ghost(phi, grid.bc_x, axis=1)
    dy = (padded_y[2:, :] - padded_y[:-2, :]) / two_dr
    dx = (padded_x[:, 2:] - padded_x[:, :-2]) / two_dr
    return dx * dx + dy * dy


def total_free_energy(f: Field, T: Field, h: Field, constants: PhysicalConstants) -> float:
    """Riemann sum of f(phi) + (gamma/2) |grad phi|^2 over the domain."""
    density = bulk_energy_density(f.values, T.values, h.values)
    if constants.gamma != 0.0:
        density = density + 0.5 * constants.gamma * gradient_squared_values(f.values, f.grid)
    return float(np.sum(density) * f.grid.cell_area)


def equilibrium_order_parameter(T: float, h: float) -> float:
    """Global minimizer of the bulk density: the real root of
    4 phi^3 + 2 T phi + h = 0 with the lowest f(phi)."""
    roots = np.roots([4.0, 0.0, 2.0 * T, h])
    real = roots[np.abs(roots.imag) < 1e-9].real
    densities = bulk_energy_density(real, T, h)
    return float(real[np.argmin(densities)])
