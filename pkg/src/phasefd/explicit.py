"""Forward-Euler explicit time steps for both models, and the analytic
stability limits used to locate the instability boundary.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .energetics import PhysicalConstants, chemical_potential_values
from .grid import Field
from .models import Model
from .operators import laplacian_values

DIVERGENCE_LIMIT = 1e6


@dataclass(frozen=True)
class StepInputs:
    """State and parameters for one explicit step; all fields on one grid."""

    phi: Field
    T: Field
    h: Field
    constants: PhysicalConstants
    dt: float

    def __post_init__(self) -> None:
        if self.dt < 0:
            raise ValueError(f"dt must be non-negative, got {self.dt}")
        if not self.constants.gamma > 0:
            raise ValueError("time stepping requires gamma > 0")


def explicit_ac_step(inputs: StepInputs) -> Field:
    """phi + dt * (-M mu) with mu = f'(phi) - gamma * laplacian(phi).

    Divergence (non-finite entries) is left in the output field for the
    stability experiments to observe; no exception is raised.
    """
    phi = inputs.phi.values
    mu = chemical_potential_values(
        phi, inputs.T.values, inputs.h.values, inputs.constants, inputs.phi.grid
    )
    return inputs.phi.with_values(phi - (inputs.dt * inputs.constants.mobility) * mu)


def explicit_ch_step(inputs: StepInputs) -> Field:
    """phi + M dt * laplacian(mu); conserves total mass by construction."""
    phi = inputs.phi.values
    grid = inputs.phi.grid
    mu = chemical_potential_values(
        phi, inputs.T.values, inputs.h.values, inputs.constants, grid
    )
    return inputs.phi.with_values(
        phi + (inputs.dt * inputs.constants.mobility) * laplacian_values(mu, grid)
    )


def explicit_stability_limit(model: Model, gamma: float, dr: float) -> float:
    """Critical time step of the explicit solver for constant parameters.

    dr^2 / (4 gamma) for the second-order model, dr^2 / (4 + 32 gamma/dr^2)
    for the fourth-order one.
    """
    if not gamma > 0:
        raise ValueError(f"gamma must be positive, got {gamma}")
    if not dr > 0:
        raise ValueError(f"dr must be positive, got {dr}")
    if model is Model.AC:
        return dr * dr / (4.0 * gamma)
    return dr * dr / (4.0 + 32.0 * gamma / (dr * dr))


def is_diverged(values: np.ndarray) -> bool:
    """Trajectory divergence test: any non-finite entry or |phi| > 1e6."""
    finite = np.isfinite(values)
    if not finite.all():
        return True
    return bool(np.abs(values).max() > DIVERGENCE_LIMIT)
