# Centralized configuration for the wind-farm layout optimizer: defaults, env overrides and run config files.

import logging
import os
from pathlib import Path
from typing import Any, Dict, Literal, Optional

import yaml
from dotenv import load_dotenv
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from farm.evaluation import PowerCurve
from farm.farm_domain import FarmGrid, ThrustCurve, TurbineSpec, make_square_grid
from farm.wake_jensen import WakeParams, wake_params_for
from farm.wind_resource import HOURS_PER_YEAR, WindRose, builtin_wr1, load_rose, uniform_rose

load_dotenv()

PROJECT_ROOT = Path(__file__).resolve().parent.parent
DATA_PATH = PROJECT_ROOT / "data"
ROSES_PATH = DATA_PATH / "roses"
TURBINES_PATH = DATA_PATH / "turbines"
CONFIGS_PATH = DATA_PATH / "configs"
SUITES_PATH = DATA_PATH / "suites"

OUTPUT_DIR = os.getenv("WFLO_OUTPUT_DIR", "output")
CUTOFF_SECONDS = float(os.getenv("WFLO_CUTOFF_SECONDS", "3600"))
LOG_LEVEL = os.getenv("WFLO_LOG_LEVEL", "INFO")
SEED = int(os.getenv("WFLO_SEED", "0"))

LOG_FORMAT = "[%(name)s] %(message)s"


def setup_logging(verbose: bool = False) -> None:
    level = logging.DEBUG if verbose else getattr(logging, LOG_LEVEL.upper(), logging.INFO)
    logging.basicConfig(level=level, format=LOG_FORMAT, force=True)


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid")


class RoseConfig(_Section):
    # a csv file, or one of the built-in roses
    file: Optional[str] = None
    builtin: Optional[Literal["wr1", "uniform"]] = None
    speed_ms: float = Field(default=12.0, gt=0)
    n_directions: int = Field(default=36, ge=1)
    observation_hours: float = Field(default=HOURS_PER_YEAR, gt=0)

    @model_validator(mode="after")
    def _one_source(self) -> "RoseConfig":
        if (self.file is None) == (self.builtin is None):
            raise ValueError("rose needs exactly one of `file` or `builtin`")
        return self


class GridConfig(_Section):
    area_side_m: float = Field(default=2000.0, gt=0)
    cells_per_side: int = Field(default=10, ge=1)
    min_separation_m: Optional[float] = Field(default=None, ge=0)


class TurbineConfig(_Section):
    rotor_radius_m: float = Field(default=20.0, gt=0)
    hub_height_m: float = Field(default=60.0, ge=0)
    thrust_coefficient: float = Field(default=0.88, gt=0, lt=1)
    thrust_file: Optional[str] = None
    power: Literal["cubic", "curve"] = "cubic"
    power_file: Optional[str] = None
    cut_in_ms: float = Field(default=3.0, ge=0)
    cut_out_ms: float = Field(default=25.0, gt=0)
    rated_power_kw: Optional[float] = Field(default=None, gt=0)

    @model_validator(mode="after")
    def _curve_has_file(self) -> "TurbineConfig":
        if self.power == "curve" and self.power_file is None:
            raise ValueError("power: curve needs a power_file")
        return self


class WakeConfig(_Section):
    decay: float = Field(default=0.1, gt=0)
    wake_radius: Literal["rotor", "expanded"] = "rotor"


class SolverSection(_Section):
    name: Literal["mp", "greedy", "local", "brute"] = "mp"
    k: int = Field(default=30, ge=0)
    max_sweeps: int = Field(default=2000, ge=1)
    tolerance: float = Field(default=1e-9, gt=0)
    cutoff_seconds: float = Field(default=CUTOFF_SECONDS, gt=0)
    seed: int = SEED
    restarts: int = Field(default=20, ge=1)
    repair_passes: int = Field(default=1000, ge=0)
    max_clusters: int = Field(default=5000, ge=0)
    clusters_per_round: int = Field(default=20, ge=1)
    top_percent: float = Field(default=5.0, gt=0, le=100)
    max_candidates: int = Field(default=50000, ge=1)
    cluster_file: Optional[str] = None
    dump_clusters: Optional[str] = None
    enumeration_budget: int = Field(default=10 ** 7, ge=1)


class PenaltyConfig(_Section):
    # None means the default rule from the interaction matrix
    beta: Optional[float] = Field(default=None, gt=0)
    exclusion_factor: float = Field(default=1e3, gt=0)
    budget_slack: int = Field(default=0, ge=0)
    escalations: int = Field(default=2, ge=0)


class RunConfig(_Section):
    name: str = "run"
    rose: RoseConfig
    grid: GridConfig = Field(default_factory=GridConfig)
    turbine: TurbineConfig = Field(default_factory=TurbineConfig)
    wake: WakeConfig = Field(default_factory=WakeConfig)
    solver: SolverSection = Field(default_factory=SolverSection)
    penalty: PenaltyConfig = Field(default_factory=PenaltyConfig)
    output_dir: str = OUTPUT_DIR


_PATH_FIELDS = (("rose", "file"), ("turbine", "thrust_file"), ("turbine", "power_file"), ("solver", "cluster_file"))


def _resolve_paths(raw: Dict[str, Any], base: Path) -> None:
    for section, key in _PATH_FIELDS:
        value = (raw.get(section) or {}).get(key)
        if value is not None and not Path(value).is_absolute():
            raw[section][key] = str((base / value).resolve())


def _set_dotted(raw: Dict[str, Any], dotted: str, value: Any) -> None:
    *parents, key = dotted.split(".")
    node = raw
    for part in parents:
        node = node.setdefault(part, {})
    node[key] = value


def _env_overrides() -> Dict[str, Any]:
    overrides = {}
    if os.getenv("WFLO_OUTPUT_DIR"):
        overrides["output_dir"] = os.getenv("WFLO_OUTPUT_DIR")
    if os.getenv("WFLO_CUTOFF_SECONDS"):
        overrides["solver.cutoff_seconds"] = float(os.getenv("WFLO_CUTOFF_SECONDS"))
    if os.getenv("WFLO_SEED"):
        overrides["solver.seed"] = int(os.getenv("WFLO_SEED"))
    return overrides


def config_from_dict(raw: Dict[str, Any], base_dir=None, overrides: Optional[Dict[str, Any]] = None) -> RunConfig:
    # overrides use dotted keys, e.g. {"solver.name": "local"}; None values are skipped
    raw = {k: (dict(v) if isinstance(v, dict) else v) for k, v in (raw or {}).items()}
    if base_dir is not None:
        _resolve_paths(raw, Path(base_dir))
    for dotted, value in {**_env_overrides(), **(overrides or {})}.items():
        if value is not None:
            _set_dotted(raw, dotted, value)
    try:
        return RunConfig.model_validate(raw)
    except ValidationError as e:
        first = e.errors()[0]
        where = ".".join(str(p) for p in first["loc"]) or "config"
        raise ValueError(f"invalid config field `{where}`: {first['msg']}") from e


def load_config(path, overrides: Optional[Dict[str, Any]] = None) -> RunConfig:
    path = Path(path)
    try:
        with open(path, "r", encoding="utf-8") as f:
            raw = yaml.safe_load(f) or {}
    except yaml.YAMLError as e:
        raise ValueError(f"could not parse config {path}: {e}") from e
    if not isinstance(raw, dict):
        raise ValueError(f"config {path} must be a mapping of sections")
    return config_from_dict(raw, base_dir=path.parent, overrides=overrides)


def build_rose(cfg: RunConfig) -> WindRose:
    rose = cfg.rose
    if rose.file is not None:
        return load_rose(rose.file, observation_hours=rose.observation_hours)
    if rose.builtin == "wr1":
        base = builtin_wr1(rose.speed_ms)
    else:
        base = uniform_rose(rose.speed_ms, rose.n_directions)
    return WindRose(states=base.states, observation_hours=rose.observation_hours, name=base.name)


def build_grid(cfg: RunConfig) -> FarmGrid:
    return make_square_grid(cfg.grid.area_side_m, cfg.grid.cells_per_side)


def build_turbine(cfg: RunConfig) -> TurbineSpec:
    t = cfg.turbine
    thrust = ThrustCurve.from_csv(t.thrust_file) if t.thrust_file else t.thrust_coefficient
    curve = None
    if t.power == "curve":
        curve = PowerCurve.from_csv(t.power_file, cut_in=t.cut_in_ms, cut_out=t.cut_out_ms, rated_power=t.rated_power_kw)
    return TurbineSpec(
        rotor_radius=t.rotor_radius_m,
        hub_height=t.hub_height_m,
        thrust=thrust,
        power_curve=curve,
        rated_power=t.rated_power_kw,
    )


def build_wake_params(cfg: RunConfig, spec: TurbineSpec, rose: WindRose) -> WakeParams:
    # table turbines get their induction per wind state; this is the first state's
    return wake_params_for(spec, rose.states[0].speed, decay=cfg.wake.decay, wake_radius=cfg.wake.wake_radius)
