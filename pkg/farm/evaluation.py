# evaluation: true farm power per wind state, expected power, aep and run comparisons.

import logging
from dataclasses import asdict, dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np

from farm.farm_domain import FarmGrid, TurbineSpec, load_speed_table
from farm.wake_jensen import WakeParams, params_for_state, effective_speeds
from farm.wind_resource import WindRose

logger = logging.getLogger(__name__)

# kW per (m/s)^3
CUBIC_COEFFICIENT = 0.3


def power_cubic(u):
    u_arr = np.asarray(u, dtype=float)
    if np.any(u_arr < 0):
        raise ValueError(f"wind speed must be nonnegative, got {u}")
    power = CUBIC_COEFFICIENT * u_arr ** 3
    return float(power) if power.ndim == 0 else power


@dataclass(frozen=True, eq=False)
class PowerCurve:
    """Tabulated power (kW) against speed (m/s). Zero outside [cut_in, cut_out],
    clamped to rated_power from the rated knot up to cut-out."""

    speeds: np.ndarray
    powers: np.ndarray
    cut_in: float
    cut_out: float
    rated_power: Optional[float] = None

    def __post_init__(self):
        speeds = np.array(self.speeds, dtype=float)
        powers = np.array(self.powers, dtype=float)
        if speeds.size == 0:
            raise ValueError("power curve table is empty")
        if speeds.shape != powers.shape:
            raise ValueError("power curve speed and power columns differ in length")
        if np.any(np.diff(speeds) <= 0):
            raise ValueError("power curve speeds must be strictly increasing")
        if np.any(powers < 0):
            raise ValueError("power curve values must be nonnegative")
        if not 0 <= self.cut_in < self.cut_out:
            raise ValueError(f"need 0 <= cut_in < cut_out, got {self.cut_in}, {self.cut_out}")
        rated = float(powers.max()) if self.rated_power is None else float(self.rated_power)
        # monotone up to the rated knot
        rated_idx = int(np.argmax(powers >= rated)) if np.any(powers >= rated) else len(powers) - 1
        if np.any(np.diff(powers[: rated_idx + 1]) < 0):
            raise ValueError("power curve must be nondecreasing up to rated speed")
        object.__setattr__(self, "speeds", speeds)
        object.__setattr__(self, "powers", powers)
        object.__setattr__(self, "rated_power", rated)

    @classmethod
    def from_csv(cls, path, cut_in: float, cut_out: float, rated_power: Optional[float] = None) -> "PowerCurve":
        speeds, powers = load_speed_table(path)
        return cls(speeds=speeds, powers=powers, cut_in=cut_in, cut_out=cut_out, rated_power=rated_power)


def power_from_curve(curve: PowerCurve, u):
    u_arr = np.asarray(u, dtype=float)
    if np.any(u_arr < 0):
        raise ValueError(f"wind speed must be nonnegative, got {u}")
    power = np.interp(u_arr, curve.speeds, curve.powers)
    power = np.minimum(power, curve.rated_power)
    power = np.where((u_arr < curve.cut_in) | (u_arr > curve.cut_out), 0.0, power)
    return float(power) if power.ndim == 0 else power


def turbine_power(spec: TurbineSpec, speeds):
    if spec.power_curve is None:
        return power_cubic(speeds)
    return power_from_curve(spec.power_curve, speeds)


@dataclass
class EvaluationReport:
    cells: List[int]
    state_power_kw: List[float]
    expected_power_kw: float
    aep_kwh: float
    observation_hours: float
    turbine_speeds: List[List[float]] = field(default_factory=list)

    def to_dict(self) -> Dict:
        return asdict(self)


def evaluate_layout(
    cells: Sequence[int],
    grid: FarmGrid,
    rose: WindRose,
    spec: TurbineSpec,
    params: WakeParams,
) -> EvaluationReport:
    chosen = sorted(set(int(c) for c in cells))
    for c in chosen:
        if not 0 <= c < grid.n:
            raise ValueError(f"cell index {c} outside 0..{grid.n - 1}")
    state_power = []
    speeds_per_state = []
    expected = 0.0
    # rose order fixes the summation order
    for state in rose.states:
        state_params = params_for_state(spec, state, params)
        speeds = effective_speeds(chosen, state, grid, state_params, spec.rotor_radius)
        total = float(np.sum(turbine_power(spec, speeds))) if chosen else 0.0
        state_power.append(total)
        speeds_per_state.append([float(v) for v in speeds])
        expected += state.probability * total
    report = EvaluationReport(
        cells=chosen,
        state_power_kw=state_power,
        expected_power_kw=expected,
        aep_kwh=expected * rose.observation_hours,
        observation_hours=rose.observation_hours,
        turbine_speeds=speeds_per_state,
    )
    logger.debug("%d turbines: expected power %.2f kW", len(chosen), expected)
    return report


class PowerObjective:
    # maximizes expected power; brute force minimizes, so the value is negated
    def __init__(self, grid: FarmGrid, rose: WindRose, spec: TurbineSpec, params: WakeParams):
        self.grid = grid
        self.rose = rose
        self.spec = spec
        self.params = params

    def __call__(self, cells: Sequence[int]) -> float:
        return -evaluate_layout(cells, self.grid, self.rose, self.spec, self.params).expected_power_kw


@dataclass(frozen=True)
class RunRecord:
    name: str
    expected_power_kw: float
    wall_time: float
    surrogate_energy: Optional[float] = None


def compare(a: RunRecord, b: RunRecord) -> Dict[str, Optional[float]]:
    if b.expected_power_kw == 0:
        raise ValueError(f"cannot compare against {b.name}: expected power is zero")
    if a.wall_time <= 0:
        raise ValueError(f"cannot form a time ratio: {a.name} has wall time {a.wall_time}")
    metrics = {
        "percent_difference": 100.0 * (a.expected_power_kw - b.expected_power_kw) / b.expected_power_kw,
        "time_ratio": b.wall_time / a.wall_time,
        "surrogate_relative_gap": None,
    }
    if a.surrogate_energy is not None and b.surrogate_energy is not None and b.surrogate_energy != 0:
        metrics["surrogate_relative_gap"] = (a.surrogate_energy - b.surrogate_energy) / abs(b.surrogate_energy)
    return metrics
