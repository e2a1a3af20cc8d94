"""Critical splitting weight for the convex-split implicit schemes.

The quadratic T phi^2 term of the free energy is split between the
implicit (contractive) and explicit (expansive) treatments by a weight
xi; the quartic and linear terms stay explicit and the gradient term
stays implicit.  Unconditional gradient stability holds when

    xi >= (T - 12 |phi|_max^2) / (2 T)   for T < 0,
    xi <= -6 |phi|_max^2 / T             for T > 0.

Because T varies in space and time, so does the critical weight.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple

import numpy as np

from .errors import DegenerateParameterError, UnsupportedConfigurationError
from .grid import Field


class XiMode(str, Enum):
    """How the per-cell weight is chosen.

    LITERAL uses the critical weight cell by cell, so the implicit
    coefficient (1 - xi) T varies in space and the spectral solve treats it
    with mixed spatial/spectral indexing.  UNIFORM_COEFFICIENT retunes xi
    per cell to make (1 - xi) T spatially uniform, which makes the direct
    spectral solve mathematically exact; it requires T != 0 everywhere.
    """

    LITERAL = "literal"
    UNIFORM_COEFFICIENT = "uniform_coefficient"


class StableSide(Enum):
    """Which side of the critical weight is gradient-stable."""

    AT_LEAST = ">="
    AT_MOST = "<="


class XiCritical(NamedTuple):
    value: float
    side: StableSide


@dataclass(frozen=True)
class SplittingPolicy:
    safety_factor: float = 1.0
    margin: float = 0.0
    xi_at_zero_t: float = 1.0
    mode: XiMode = XiMode.LITERAL

    def __post_init__(self) -> None:
        if self.safety_factor < 1.0:
            raise ValueError(f"safety_factor must be >= 1, got {self.safety_factor}")
        if self.margin < 0.0:
            raise ValueError(f"margin must be >= 0, got {self.margin}")


def phi_max_estimate(f: Field, policy: SplittingPolicy) -> float:
    """Safety-scaled max |phi| over the current field."""
    return policy.safety_factor * f.max_abs()


def xi_critical(T: float, phi_max: float) -> XiCritical:
    """Critical weight and its stable side for one (T, phi_max) pair."""
    if T == 0.0:
        raise DegenerateParameterError(
            "T = 0 leaves the splitting condition degenerate; "
            "substitute the policy's xi_at_zero_t"
        )
    if T < 0.0:
        return XiCritical((T - 12.0 * phi_max * phi_max) / (2.0 * T), StableSide.AT_LEAST)
    return XiCritical(-6.0 * phi_max * phi_max / T, StableSide.AT_MOST)


def coefficient_lower_bound(T, phi_max: float):
    """Lower bound on the implicit coefficient (1 - xi) T implied by the
    stability condition: (T + 12 phi_max^2)/2 for T < 0, T + 6 phi_max^2
    for T > 0.  Elementwise on arrays."""
    T = np.asarray(T, dtype=float)
    p2 = phi_max * phi_max
    return np.where(T < 0.0, 0.5 * (T + 12.0 * p2), T + 6.0 * p2)


def xi_field(T: Field, f: Field, policy: SplittingPolicy) -> Field:
    """Per-cell splitting weight for the current parameter and state fields."""
    phi_max = phi_max_estimate(f, policy)
    t = T.values
    if policy.mode is XiMode.UNIFORM_COEFFICIENT:
        if np.any(t == 0.0):
            raise UnsupportedConfigurationError(
                "uniform-coefficient mode requires T != 0 everywhere"
            )
        c = float(np.max(coefficient_lower_bound(t, phi_max)))
        return T.with_values(1.0 - c / t)
    xi = np.full(t.shape, policy.xi_at_zero_t)
    neg = t < 0.0
    pos = t > 0.0
    tn = t[neg]
    tp = t[pos]
    xi[neg] = (tn - 12.0 * phi_max * phi_max) / (2.0 * tn) + policy.margin
    xi[pos] = -6.0 * phi_max * phi_max / tp - policy.margin
    return T.with_values(xi)
