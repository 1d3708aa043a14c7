import numpy as np
import pytest

from config.settings import TURBINES_PATH
from farm.evaluation import (
    PowerCurve,
    RunRecord,
    compare,
    evaluate_layout,
    power_cubic,
    power_from_curve,
)
from farm.farm_domain import FarmGrid, TurbineSpec, make_square_grid
from farm.wind_resource import WindRose, WindState


def nrel_curve():
    return PowerCurve.from_csv(TURBINES_PATH / "nrel5mw_power.csv", cut_in=3.0, cut_out=25.0, rated_power=5000.0)


class TestPowerModels:
    def test_cubic(self):
        assert power_cubic(12.0) == pytest.approx(518.4)
        assert power_cubic(0.0) == 0.0
        assert power_cubic(np.array([10.0, 12.0])).tolist() == pytest.approx([300.0, 518.4])
        with pytest.raises(ValueError):
            power_cubic(-1.0)

    def test_curve_interpolates_between_knots(self):
        curve = nrel_curve()
        assert power_from_curve(curve, 8.0) == pytest.approx(1771.1)
        assert power_from_curve(curve, 8.5) == pytest.approx((1771.1 + 2518.6) / 2)

    def test_curve_cut_in_cut_out_and_rated(self):
        curve = nrel_curve()
        assert power_from_curve(curve, 2.9) == 0.0
        assert power_from_curve(curve, 25.1) == 0.0
        assert power_from_curve(curve, 15.0) == 5000.0
        assert power_from_curve(curve, 25.0) == 5000.0

    def test_curve_validation(self):
        with pytest.raises(ValueError):
            PowerCurve(speeds=[3, 3], powers=[0, 1], cut_in=3, cut_out=25)
        with pytest.raises(ValueError):
            PowerCurve(speeds=[3, 4, 5], powers=[10, 5, 20], cut_in=3, cut_out=25)
        with pytest.raises(ValueError):
            PowerCurve(speeds=[3, 4], powers=[0, 1], cut_in=25, cut_out=3)


class TestEvaluateLayout:
    def test_single_turbine_aep(self, spec, params, wr1):
        grid = make_square_grid(2000.0, 10)
        report = evaluate_layout([0], grid, wr1, spec, params)
        assert report.expected_power_kw == pytest.approx(518.4)
        assert report.aep_kwh == pytest.approx(4_541_184.0)

    def test_thirty_unwaked_turbines(self, spec, params, wr1):
        # one east-west line across a northerly wind
        grid = FarmGrid.from_points([(200.0 * i, 0.0) for i in range(30)], cell_side=200.0)
        report = evaluate_layout(range(30), grid, wr1, spec, params)
        assert report.expected_power_kw == pytest.approx(15_552.0)

    def test_stacked_rows_lose_power(self, spec, params, wr1):
        grid = make_square_grid(2000.0, 10)
        report = evaluate_layout(range(30), grid, wr1, spec, params)
        assert report.expected_power_kw < 15_552.0

    def test_waked_turbine(self, spec, params, wr1, line3):
        report = evaluate_layout([1, 2], line3, wr1, spec, params)
        assert report.turbine_speeds[0] == pytest.approx([12.0, 12.0 * (1 - 0.163397)], abs=1e-4)
        assert report.expected_power_kw == pytest.approx(518.4 + power_cubic(12.0 * (1 - 0.163397)), rel=1e-5)

    def test_expected_power_weights_states(self, spec, params):
        grid = FarmGrid.from_points([(0.0, 0.0)], cell_side=200.0)
        rose = WindRose(states=(WindState(10.0, 0.0, 0.5), WindState(12.0, 90.0, 0.5)))
        report = evaluate_layout([0], grid, rose, spec, params)
        assert report.state_power_kw == pytest.approx([300.0, 518.4])
        assert report.expected_power_kw == pytest.approx(409.2)

    def test_empty_layout(self, spec, params, wr1):
        report = evaluate_layout([], make_square_grid(2000.0, 2), wr1, spec, params)
        assert report.expected_power_kw == 0.0

    def test_curve_turbine(self, params, wr1):
        spec = TurbineSpec(rotor_radius=63.0, hub_height=90.0, thrust=0.77, power_curve=nrel_curve())
        report = evaluate_layout([0], make_square_grid(7000.0, 10), wr1, spec, params)
        assert report.expected_power_kw == pytest.approx(5000.0)

    def test_cell_out_of_range(self, spec, params, wr1):
        with pytest.raises(ValueError):
            evaluate_layout([4], make_square_grid(2000.0, 2), wr1, spec, params)


class TestCompare:
    def test_table_two_difference(self):
        metrics = compare(RunRecord("mp", 12486.0, 10.0), RunRecord("exact", 12709.0, 100.0))
        assert metrics["percent_difference"] == pytest.approx(-1.755, abs=1e-3)
        assert metrics["time_ratio"] == pytest.approx(10.0)
        assert metrics["surrogate_relative_gap"] is None

    def test_table_three_difference(self):
        metrics = compare(RunRecord("mp", 32142.0, 1.0, 2.0), RunRecord("exact", 32818.0, 1.0, 4.0))
        assert metrics["percent_difference"] == pytest.approx(-2.060, abs=1e-3)
        assert metrics["surrogate_relative_gap"] == pytest.approx(-0.5)

    def test_zero_reference(self):
        with pytest.raises(ValueError):
            compare(RunRecord("a", 1.0, 1.0), RunRecord("b", 0.0, 1.0))
