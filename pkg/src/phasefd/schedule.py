"""Piecewise-in-time, region-masked external parameters T(x, t) and h(x, t).

A schedule is a region mask plus an ordered list of time rows.  Each row
assigns one (T, h) pair per region id.  Rows tile [0, t_final] without
overlap; time t belongs to a row when t_begin < t <= t_end, except the
first row which is closed at 0.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Mapping

import numpy as np

from .errors import ConfigError, ScheduleRangeError
from .grid import Field, Grid

_TIME_TOL = 1e-12


class MaskKind(str, Enum):
    UNIFORM = "uniform"
    HORIZONTAL_BANDS = "horizontal_bands"
    CELL_MAP = "cell_map"


@dataclass(frozen=True)
class RegionMask:
    """Assignment of a region id to every grid cell."""

    kind: MaskKind
    band_height_cells: int = 0
    phase_offset_cells: int = 0
    cell_ids: np.ndarray | None = None
    source_path: Path | None = None

    def __post_init__(self) -> None:
        if self.kind is MaskKind.HORIZONTAL_BANDS and self.band_height_cells < 1:
            raise ValueError("horizontal bands need band_height_cells >= 1")
        if self.kind is MaskKind.CELL_MAP:
            if self.cell_ids is None:
                raise ValueError("cell_map mask needs a cell_ids matrix")
            ids = np.asarray(self.cell_ids, dtype=int)
            if ids.min() < 0:
                raise ValueError("region ids must be non-negative")
            object.__setattr__(self, "cell_ids", ids)

    def region_ids(self, grid: Grid) -> np.ndarray:
        """Integer region id per cell, shape (n, m)."""
        if self.kind is MaskKind.UNIFORM:
            return np.zeros(grid.shape, dtype=int)
        if self.kind is MaskKind.HORIZONTAL_BANDS:
            rows = np.arange(grid.n) + self.phase_offset_cells
            band_parity = (rows // self.band_height_cells) % 2
            return np.repeat(band_parity[:, None], grid.m, axis=1)
        ids = self.cell_ids
        if ids.shape != grid.shape:
            raise ConfigError(
                f"cell map has shape {ids.shape}, grid is {grid.shape}"
            )
        return ids


def uniform_mask() -> RegionMask:
    return RegionMask(kind=MaskKind.UNIFORM)


def horizontal_bands_mask(band_height_cells: int, phase_offset_cells: int = 0) -> RegionMask:
    return RegionMask(
        kind=MaskKind.HORIZONTAL_BANDS,
        band_height_cells=band_height_cells,
        phase_offset_cells=phase_offset_cells,
    )


def cell_map_mask(cell_ids: np.ndarray, source_path: Path | None = None) -> RegionMask:
    return RegionMask(kind=MaskKind.CELL_MAP, cell_ids=cell_ids, source_path=source_path)


def load_cell_map(path: Path) -> RegionMask:
    """Region ids from a CSV of integers laid out like a field snapshot."""
    path = Path(path)
    ids = np.loadtxt(path, delimiter=",", dtype=int, ndmin=2)
    return cell_map_mask(ids, source_path=path)


@dataclass(frozen=True)
class ScheduleRow:
    """(T, h) per region id over one time interval."""

    t_begin: float
    t_end: float
    values: Mapping[int, tuple[float, float]]

    def __post_init__(self) -> None:
        if not self.t_end > self.t_begin:
            raise ValueError(
                f"row interval must be non-empty, got [{self.t_begin}, {self.t_end}]"
            )
        object.__setattr__(
            self,
            "values",
            {int(k): (float(v[0]), float(v[1])) for k, v in self.values.items()},
        )


@dataclass(frozen=True)
class ParameterSchedule:
    mask: RegionMask
    rows: tuple[ScheduleRow, ...]

    def __post_init__(self) -> None:
        rows = tuple(self.rows)
        if not rows:
            raise ValueError("schedule needs at least one row")
        if abs(rows[0].t_begin) > _TIME_TOL:
            raise ValueError(f"first row must start at t = 0, got {rows[0].t_begin}")
        for prev, nxt in zip(rows, rows[1:]):
            if abs(nxt.t_begin - prev.t_end) > _TIME_TOL:
                raise ValueError(
                    f"rows must tile time contiguously; gap between "
                    f"t = {prev.t_end} and t = {nxt.t_begin}"
                )
        object.__setattr__(self, "rows", rows)

    @property
    def t_end(self) -> float:
        return self.rows[-1].t_end


def active_row_index(schedule: ParameterSchedule, t: float) -> int:
    """Index of the row covering time t; first row is closed at 0."""
    rows = schedule.rows
    if t < rows[0].t_begin or t > rows[-1].t_end:
        raise ScheduleRangeError(
            f"t = {t} outside schedule coverage [{rows[0].t_begin}, {rows[-1].t_end}]"
        )
    for k, row in enumerate(rows):
        if t <= row.t_end:
            return k
    return len(rows) - 1  # pragma: no cover - t <= rows[-1].t_end always hits


def evaluate_schedule(
    schedule: ParameterSchedule, t: float, grid: Grid
) -> tuple[Field, Field]:
    """Per-cell (T, h) fields at time t.  No extrapolation outside coverage."""
    row = schedule.rows[active_row_index(schedule, t)]
    ids = schedule.mask.region_ids(grid)
    present = np.unique(ids)
    missing = [int(r) for r in present if int(r) not in row.values]
    if missing:
        raise ConfigError(
            f"schedule row [{row.t_begin}, {row.t_end}] has no values for "
            f"region ids {missing}"
        )
    max_id = int(present.max())
    t_lookup = np.zeros(max_id + 1)
    h_lookup = np.zeros(max_id + 1)
    for region, (t_val, h_val) in row.values.items():
        if region <= max_id:
            t_lookup[region] = t_val
            h_lookup[region] = h_val
    return Field(t_lookup[ids], grid), Field(h_lookup[ids], grid)


def uniform_schedule(T: float, h: float, t_final: float) -> ParameterSchedule:
    """Single-row schedule with one region covering [0, t_final]."""
    if not t_final > 0:
        raise ValueError(f"t_final must be positive, got {t_final}")
    row = ScheduleRow(t_begin=0.0, t_end=float(t_final), values={0: (T, h)})
    return ParameterSchedule(mask=uniform_mask(), rows=(row,))


def two_region_schedule(
    mask: RegionMask,
    rows: list[tuple[float, float, tuple[float, float], tuple[float, float]]],
) -> ParameterSchedule:
    """Schedule from (t_begin, t_end, (T0, h0), (T1, h1)) tuples.

    Region 0 takes the first pair, region 1 the second; this is the shape
    the banded benchmark tables come in.
    """
    built = tuple(
        ScheduleRow(t_begin=b, t_end=e, values={0: v0, 1: v1})
        for b, e, v0, v1 in rows
    )
    return ParameterSchedule(mask=mask, rows=built)
