"""Uniform structured 2-D grids, boundary-condition tags, and scalar fields.

Row index i runs along y and is coupled by operator matrices applied from
the left; column index j runs along x and is coupled from the right.  Cell
centers sit at x = (j + 1/2) dr, y = (i + 1/2) dr.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from pathlib import Path

import numpy as np
import yaml

from .errors import ShapeMismatchError


class BoundaryCondition(str, Enum):
    """Per-axis boundary handling.

    PERIODIC wraps the axis, NEUMANN reflects the boundary cell (zero
    normal gradient), SYMMETRIC mirrors about the boundary node.  The
    SYMMETRIC variant is accepted by the explicit stencil paths only;
    spectral direct solves require PERIODIC or NEUMANN axes.
    """

    PERIODIC = "periodic"
    NEUMANN = "neumann"
    SYMMETRIC = "symmetric"


# np.pad mode realizing each boundary condition's ghost cells
_PAD_MODE = {
    BoundaryCondition.PERIODIC: "wrap",
    BoundaryCondition.NEUMANN: "edge",
    BoundaryCondition.SYMMETRIC: "reflect",
}


@dataclass(frozen=True)
class Grid:
    """n x m uniform grid with spacing dr and per-axis boundary conditions."""

    n: int
    m: int
    dr: float
    bc_y: BoundaryCondition = BoundaryCondition.PERIODIC
    bc_x: BoundaryCondition = BoundaryCondition.PERIODIC

    def __post_init__(self) -> None:
        if self.n < 3 or self.m < 3:
            raise ValueError(f"grid must be at least 3x3, got {self.n}x{self.m}")
        if not self.dr > 0:
            raise ValueError(f"grid spacing must be positive, got {self.dr}")

    @property
    def shape(self) -> tuple[int, int]:
        return (self.n, self.m)

    @property
    def cell_area(self) -> float:
        return self.dr * self.dr

    def x_coords(self) -> np.ndarray:
        """Cell-center x coordinates, one per column."""
        return (np.arange(self.m) + 0.5) * self.dr

    def y_coords(self) -> np.ndarray:
        """Cell-center y coordinates, one per row."""
        return (np.arange(self.n) + 0.5) * self.dr


@dataclass
class Field:
    """Scalar values on a grid (order parameter or coefficient field).

    Treated as immutable once shared: operations return new fields and
    never write through ``values``.
    """

    values: np.ndarray
    grid: Grid

    def __post_init__(self) -> None:
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != self.grid.shape:
            raise ShapeMismatchError(
                f"field values have shape {self.values.shape}, "
                f"grid is {self.grid.shape}"
            )

    def with_values(self, values: np.ndarray) -> "Field":
        """New field on the same grid."""
        return Field(values, self.grid)

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.values)))


def create_field(grid: Grid, fill: float) -> Field:
    return Field(np.full(grid.shape, float(fill)), grid)


def l2_difference(a: Field, b: Field) -> float:
    """Root-mean-square difference sqrt(sum (a-b)^2 / (n*m))."""
    if a.grid != b.grid:
        raise ShapeMismatchError(
            f"fields live on different grids: {a.grid} vs {b.grid}"
        )
    diff = a.values - b.values
    return float(np.sqrt(np.sum(diff * diff) / (a.grid.n * a.grid.m)))


def total_mass(f: Field) -> float:
    """Integral of the field over the domain, sum(f) * dr^2."""
    return float(np.sum(f.values) * f.grid.cell_area)


def pad_ghost(values: np.ndarray, bc: BoundaryCondition, axis: int) -> np.ndarray:
    """Pad one ghost layer along ``axis`` according to the boundary condition."""
    width = [(0, 0), (0, 0)]
    width[axis] = (1, 1)
    return np.pad(values, width, mode=_PAD_MODE[bc])


# -- snapshot serialization ---------------------------------------------------
#
# A snapshot is a CSV of n lines with m comma-separated values at 17
# significant digits, plus a YAML sidecar carrying n, m, dr, bc_x, bc_y,
# time, and step.

def snapshot_meta_path(csv_path: Path) -> Path:
    return csv_path.with_suffix(".meta.yaml")


def write_snapshot(field: Field, path: Path, *, time: float, step: int) -> None:
    path = Path(path)
    np.savetxt(path, field.values, fmt="%.17g", delimiter=",")
    g = field.grid
    meta = {
        "n": g.n,
        "m": g.m,
        "dr": g.dr,
        "bc_x": g.bc_x.value,
        "bc_y": g.bc_y.value,
        "time": float(time),
        "step": int(step),
    }
    snapshot_meta_path(path).write_text(yaml.safe_dump(meta, sort_keys=False))


def read_snapshot(path: Path) -> tuple[Field, dict]:
    path = Path(path)
    values = np.loadtxt(path, delimiter=",", ndmin=2)
    meta = yaml.safe_load(snapshot_meta_path(path).read_text())
    grid = Grid(
        n=int(meta["n"]),
        m=int(meta["m"]),
        dr=float(meta["dr"]),
        bc_y=BoundaryCondition(meta["bc_y"]),
        bc_x=BoundaryCondition(meta["bc_x"]),
    )
    return Field(values, grid), meta
