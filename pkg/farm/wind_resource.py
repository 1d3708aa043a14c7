# wind roses: discrete speed/direction distributions of the site resource, loaded from csv or built in.

import logging
from dataclasses import dataclass, field
from typing import Tuple

import numpy as np
import pandas as pd

logger = logging.getLogger(__name__)

HOURS_PER_YEAR = 8760.0
ROSE_COLUMNS = ("speed_ms", "direction_deg", "probability")

# probabilities of a constructed rose must sum to one within this
SUM_TOLERANCE = 1e-9
# a loaded file may be off by this much and still gets renormalized
LOAD_TOLERANCE = 1e-6


class RoseFormatError(ValueError):
    pass


@dataclass(frozen=True)
class WindState:
    """One wind bin: free-stream speed (m/s), meteorological FROM-direction
    (degrees clockwise from north) and fraction of the observation period."""

    speed: float
    direction: float
    probability: float

    def __post_init__(self):
        if not self.speed > 0:
            raise ValueError(f"wind speed must be positive, got {self.speed}")
        if not 0.0 <= self.direction < 360.0:
            raise ValueError(f"direction must be in [0, 360), got {self.direction}")
        if not 0.0 <= self.probability <= 1.0:
            raise ValueError(f"probability must be in [0, 1], got {self.probability}")


@dataclass(frozen=True)
class WindRose:
    states: Tuple[WindState, ...]
    observation_hours: float = HOURS_PER_YEAR
    name: str = field(default="custom", compare=False)

    def __post_init__(self):
        object.__setattr__(self, "states", tuple(self.states))
        if not self.states:
            raise RoseFormatError("a wind rose needs at least one state")
        if self.observation_hours <= 0:
            raise ValueError(f"observation hours must be positive, got {self.observation_hours}")
        seen = set()
        for state in self.states:
            key = (state.speed, state.direction)
            if key in seen:
                raise RoseFormatError(f"duplicate wind state speed={state.speed} direction={state.direction}")
            seen.add(key)
        total = self.total_probability
        if abs(total - 1.0) > SUM_TOLERANCE:
            raise RoseFormatError(f"state probabilities sum to {total:.12f}, expected 1")

    @property
    def total_probability(self) -> float:
        # fixed left-to-right order keeps the sum reproducible
        return float(sum(state.probability for state in self.states))

    @property
    def speeds(self) -> np.ndarray:
        return np.array([s.speed for s in self.states], dtype=float)

    @property
    def directions(self) -> np.ndarray:
        return np.array([s.direction for s in self.states], dtype=float)

    @property
    def probabilities(self) -> np.ndarray:
        return np.array([s.probability for s in self.states], dtype=float)

    def __len__(self):
        return len(self.states)

    def dominant_direction(self) -> float:
        # ties go to the first state in file order
        best = max(range(len(self.states)), key=lambda i: (self.states[i].probability, -i))
        return self.states[best].direction


def load_rose(path, observation_hours: float = HOURS_PER_YEAR) -> WindRose:
    try:
        df = pd.read_csv(path, comment="#")
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as e:
        raise RoseFormatError(f"could not parse wind rose {path}: {e}") from e
    df.columns = [str(c).strip() for c in df.columns]
    missing = [c for c in ROSE_COLUMNS if c not in df.columns]
    if missing:
        raise RoseFormatError(f"wind rose {path} is missing columns: {', '.join(missing)}")
    try:
        values = df[list(ROSE_COLUMNS)].astype(float).to_numpy()
    except ValueError as e:
        raise RoseFormatError(f"non-numeric value in wind rose {path}: {e}") from e
    if len(values) == 0:
        raise RoseFormatError(f"wind rose {path} has no states")
    total = float(sum(values[:, 2]))
    if abs(total - 1.0) > LOAD_TOLERANCE:
        raise RoseFormatError(f"probabilities in {path} sum to {total:.9f}, expected 1 within {LOAD_TOLERANCE}")
    states = [
        WindState(speed=row[0], direction=row[1] % 360.0, probability=row[2] / total)
        for row in values
    ]
    rose = WindRose(states=tuple(states), observation_hours=observation_hours, name=str(path))
    logger.info("loaded wind rose %s with %d states", path, len(rose))
    return rose


def save_rose(rose: WindRose, path) -> None:
    df = pd.DataFrame(
        {"speed_ms": rose.speeds, "direction_deg": rose.directions, "probability": rose.probabilities}
    )
    df.to_csv(path, index=False)


# unidirectional benchmark resource: one state from the north
def builtin_wr1(speed: float = 12.0) -> WindRose:
    return WindRose(states=(WindState(speed=speed, direction=0.0, probability=1.0),), name="wr1")


def uniform_rose(speed: float, n_directions: int) -> WindRose:
    if n_directions < 1:
        raise ValueError(f"n_directions must be at least 1, got {n_directions}")
    if n_directions == 1:
        return builtin_wr1(speed)
    step = 360.0 / n_directions
    p = 1.0 / n_directions
    states = [WindState(speed=speed, direction=q * step, probability=p) for q in range(n_directions)]
    return WindRose(states=tuple(states), name=f"uniform{n_directions}")
