from __future__ import annotations

import numpy as np
import pytest

from phasefd.errors import ConfigError, ScheduleRangeError
from phasefd.experiments import AC_BANDED_ROWS, CH_BANDED_ROWS
from phasefd.grid import Grid
from phasefd.schedule import (
    ParameterSchedule,
    RegionMask,
    ScheduleRow,
    cell_map_mask,
    evaluate_schedule,
    horizontal_bands_mask,
    load_cell_map,
    two_region_schedule,
    uniform_mask,
    uniform_schedule,
)


@pytest.fixture
def banded_grid():
    return Grid(50, 50, 0.02)


@pytest.fixture
def ac_schedule():
    return two_region_schedule(horizontal_bands_mask(10), AC_BANDED_ROWS)


@pytest.fixture
def ch_schedule():
    return two_region_schedule(horizontal_bands_mask(10), CH_BANDED_ROWS)


class TestMasks:
    def test_uniform_mask_single_region(self, banded_grid):
        ids = uniform_mask().region_ids(banded_grid)
        assert set(np.unique(ids)) == {0}

    def test_horizontal_bands_alternate(self, banded_grid):
        ids = horizontal_bands_mask(10).region_ids(banded_grid)
        assert np.all(ids[0:10] == 0)
        assert np.all(ids[10:20] == 1)
        assert np.all(ids[20:30] == 0)
        assert np.all(ids[40:50] == 0)
        # bands are horizontal: constant across each row
        assert np.all(ids == ids[:, :1])

    def test_phase_offset_shifts_bands(self, banded_grid):
        ids = horizontal_bands_mask(10, phase_offset_cells=10).region_ids(banded_grid)
        assert np.all(ids[0:10] == 1)

    def test_cell_map_shape_checked(self, banded_grid):
        mask = cell_map_mask(np.zeros((5, 5), dtype=int))
        with pytest.raises(ConfigError):
            mask.region_ids(banded_grid)

    def test_cell_map_round_trip(self, tmp_path):
        ids = np.array([[0, 1, 2], [2, 1, 0], [1, 1, 1], [0, 0, 2]])
        path = tmp_path / "regions.csv"
        np.savetxt(path, ids, fmt="%d", delimiter=",")
        mask = load_cell_map(path)
        grid = Grid(4, 3, 1.0)
        assert np.array_equal(mask.region_ids(grid), ids)

    def test_negative_ids_rejected(self):
        with pytest.raises(ValueError):
            cell_map_mask(np.array([[0, -1, 0], [0, 0, 0], [0, 0, 0]]))


class TestScheduleValidation:
    def test_rows_must_tile(self):
        rows = (
            ScheduleRow(0.0, 0.05, {0: (1.0, 0.0)}),
            ScheduleRow(0.06, 0.10, {0: (2.0, 0.0)}),
        )
        with pytest.raises(ValueError):
            ParameterSchedule(mask=uniform_mask(), rows=rows)

    def test_first_row_starts_at_zero(self):
        rows = (ScheduleRow(0.01, 0.05, {0: (1.0, 0.0)}),)
        with pytest.raises(ValueError):
            ParameterSchedule(mask=uniform_mask(), rows=rows)

    def test_empty_interval_rejected(self):
        with pytest.raises(ValueError):
            ScheduleRow(0.1, 0.1, {0: (1.0, 0.0)})

    def test_missing_region_values_flagged(self, banded_grid):
        schedule = ParameterSchedule(
            mask=horizontal_bands_mask(10),
            rows=(ScheduleRow(0.0, 1.0, {0: (1.0, 0.0)}),),
        )
        with pytest.raises(ConfigError):
            evaluate_schedule(schedule, 0.5, banded_grid)


class TestEvaluateSchedule:
    def test_banded_first_row(self, ac_schedule, banded_grid):
        T, h = evaluate_schedule(ac_schedule, 0.03, banded_grid)
        # region 1 bands (rows 10-19, ...) carry the first pair's partner
        assert T.values[15, 0] == 0.49
        assert h.values[15, 0] == -11.76
        assert T.values[5, 0] == -4.13
        assert h.values[5, 0] == 3.24

    def test_closed_right_endpoint(self, ac_schedule, banded_grid):
        T, h = evaluate_schedule(ac_schedule, 0.05, banded_grid)
        assert T.values[15, 0] == 0.49  # still the first row
        T2, _ = evaluate_schedule(ac_schedule, 0.050001, banded_grid)
        assert T2.values[15, 0] == 4.18  # second row begins after 0.05

    def test_t_zero_covered(self, ac_schedule, banded_grid):
        T, _ = evaluate_schedule(ac_schedule, 0.0, banded_grid)
        assert T.values[15, 0] == 0.49

    def test_ch_table_third_row(self, ch_schedule, banded_grid):
        T, h = evaluate_schedule(ch_schedule, 0.12, banded_grid)
        assert T.values[15, 0] == 9.73
        assert h.values[15, 0] == -23.46
        assert T.values[5, 0] == 12.65
        assert h.values[5, 0] == 29.30

    def test_out_of_range(self, ac_schedule, banded_grid):
        with pytest.raises(ScheduleRangeError):
            evaluate_schedule(ac_schedule, 0.21, banded_grid)
        with pytest.raises(ScheduleRangeError):
            evaluate_schedule(ac_schedule, -0.01, banded_grid)

    def test_same_row_same_fields(self, ac_schedule, banded_grid):
        T1, h1 = evaluate_schedule(ac_schedule, 0.11, banded_grid)
        T2, h2 = evaluate_schedule(ac_schedule, 0.14, banded_grid)
        assert np.array_equal(T1.values, T2.values)
        assert np.array_equal(h1.values, h2.values)

    def test_cell_value_depends_only_on_region(self, ac_schedule, banded_grid):
        T, h = evaluate_schedule(ac_schedule, 0.08, banded_grid)
        ids = ac_schedule.mask.region_ids(banded_grid)
        for region in (0, 1):
            vals = T.values[ids == region]
            assert vals.max() == vals.min()


class TestUniformSchedule:
    def test_constant_fields(self, banded_grid):
        s = uniform_schedule(-2.0, 0.0, 1.0)
        for t in (0.0, 0.5, 1.0):
            T, h = evaluate_schedule(s, t, banded_grid)
            assert np.all(T.values == -2.0)
            assert np.all(h.values == 0.0)

    def test_out_of_coverage(self, banded_grid):
        s = uniform_schedule(-2.0, 0.0, 1.0)
        with pytest.raises(ScheduleRangeError):
            evaluate_schedule(s, 1.5, banded_grid)

    def test_requires_positive_final_time(self):
        with pytest.raises(ValueError):
            uniform_schedule(-2.0, 0.0, 0.0)
