import pytest

from config.settings import (
    CONFIGS_PATH,
    build_grid,
    build_rose,
    build_turbine,
    build_wake_params,
    config_from_dict,
    load_config,
)
from farm.farm_domain import ThrustCurve, proximity_pairs


class TestLoadConfig:
    def test_shipped_configs_validate(self):
        for name in ("mosetti_wr1", "mosetti_wr36", "nrel5mw_wr36", "nrel5mw_400", "nrel5mw_2500"):
            cfg = load_config(CONFIGS_PATH / f"{name}.yaml")
            assert cfg.name == name

    def test_relative_paths_resolve_against_the_file(self):
        cfg = load_config(CONFIGS_PATH / "mosetti_wr1.yaml")
        rose = build_rose(cfg)
        assert len(rose) == 1
        assert cfg.rose.file.endswith("wr1.csv")

    def test_mosetti_instance(self):
        cfg = load_config(CONFIGS_PATH / "mosetti_wr1.yaml")
        grid = build_grid(cfg)
        spec = build_turbine(cfg)
        params = build_wake_params(cfg, spec, build_rose(cfg))
        assert grid.n == 100
        assert spec.rotor_radius == 20.0
        assert params.wake_radius == "expanded"
        assert cfg.solver.k == 30

    def test_table_turbine(self):
        cfg = load_config(CONFIGS_PATH / "nrel5mw_wr36.yaml")
        spec = build_turbine(cfg)
        assert isinstance(spec.thrust, ThrustCurve)
        assert spec.power_curve.rated_power == 5000.0

    @pytest.mark.parametrize("name,cell_side", [("nrel5mw_400", 350.0), ("nrel5mw_2500", 140.0)])
    def test_high_resolution_sites(self, name, cell_side):
        cfg = load_config(CONFIGS_PATH / f"{name}.yaml")
        grid = build_grid(cfg)
        assert grid.cell_side == pytest.approx(cell_side)
        assert grid.n * cell_side ** 2 == pytest.approx(49e6)

    def test_exclusions_only_at_the_finest_site(self):
        coarse = load_config(CONFIGS_PATH / "nrel5mw_400.yaml")
        assert len(proximity_pairs(build_grid(coarse), build_turbine(coarse))) == 0
        fine = load_config(CONFIGS_PATH / "nrel5mw_2500.yaml")
        exclusions = proximity_pairs(build_grid(fine), build_turbine(fine))
        # 5 rotor radii is 315 m: two cells apart is too close, three is not
        assert exclusions.violations([0, 2]) == [(0, 2)]
        assert exclusions.violations([0, 3]) == []

    def test_overrides(self):
        cfg = load_config(CONFIGS_PATH / "mosetti_wr1.yaml", overrides={"solver.k": 26, "solver.name": None})
        assert cfg.solver.k == 26
        assert cfg.solver.name == "mp"

    def test_env_overrides(self, monkeypatch):
        monkeypatch.setenv("WFLO_SEED", "42")
        monkeypatch.setenv("WFLO_OUTPUT_DIR", "elsewhere")
        cfg = config_from_dict({"rose": {"builtin": "wr1"}})
        assert cfg.solver.seed == 42
        assert cfg.output_dir == "elsewhere"

    def test_unknown_field(self):
        with pytest.raises(ValueError, match="solver"):
            config_from_dict({"rose": {"builtin": "wr1"}, "solver": {"nme": "mp"}})

    def test_rose_needs_one_source(self):
        with pytest.raises(ValueError):
            config_from_dict({"rose": {}})
        with pytest.raises(ValueError):
            config_from_dict({"rose": {"builtin": "wr1", "file": "x.csv"}})

    def test_curve_power_needs_a_file(self):
        with pytest.raises(ValueError):
            config_from_dict({"rose": {"builtin": "wr1"}, "turbine": {"power": "curve"}})

    def test_builtin_uniform_rose(self):
        cfg = config_from_dict({"rose": {"builtin": "uniform", "n_directions": 8, "speed_ms": 10}})
        rose = build_rose(cfg)
        assert len(rose) == 8
        assert rose.speeds.tolist() == [10.0] * 8

    def test_not_a_mapping(self, tmp_path):
        path = tmp_path / "bad.yaml"
        path.write_text("- 1\n- 2\n")
        with pytest.raises(ValueError):
            load_config(path)

    def test_yaml_error(self, tmp_path):
        path = tmp_path / "bad.yaml"
        path.write_text("rose: [unclosed\n")
        with pytest.raises(ValueError):
            load_config(path)
