# shared fixtures: project root on sys.path and small wind-farm instances.

import sys
from pathlib import Path

import pytest

ROOT = Path(__file__).resolve().parent.parent
if str(ROOT) not in sys.path:
    sys.path.insert(0, str(ROOT))

from farm.farm_domain import FarmGrid, TurbineSpec  # noqa: E402
from farm.wake_jensen import WakeParams, axial_induction  # noqa: E402
from farm.wind_resource import builtin_wr1  # noqa: E402

SMALL_CONFIG = """
name: small
rose:
  builtin: wr1
grid:
  area_side_m: 2000
  cells_per_side: 3
turbine:
  rotor_radius_m: 20
  hub_height_m: 60
  thrust_coefficient: 0.88
wake:
  decay: 0.1
solver:
  name: {solver}
  k: 3
  max_sweeps: 200
  cutoff_seconds: 60
  restarts: 3
"""


@pytest.fixture(autouse=True)
def _clean_env(monkeypatch):
    for var in ("WFLO_OUTPUT_DIR", "WFLO_CUTOFF_SECONDS", "WFLO_SEED"):
        monkeypatch.delenv(var, raising=False)


@pytest.fixture
def spec():
    return TurbineSpec(rotor_radius=20.0, hub_height=60.0, thrust=0.88)


@pytest.fixture
def params():
    return WakeParams(decay=0.1, induction=axial_induction(0.88), wake_radius="rotor")


@pytest.fixture
def wr1():
    return builtin_wr1(12.0)


@pytest.fixture
def line3():
    # three cells 200 m apart on a north-south line, index 0 furthest north
    return FarmGrid.from_points([(0.0, 400.0), (0.0, 200.0), (0.0, 0.0)], cell_side=200.0)


@pytest.fixture
def small_config(tmp_path):
    def write(solver="mp", **extra):
        text = SMALL_CONFIG.format(solver=solver)
        for key, value in extra.items():
            text += f"{key}: {value}\n"
        path = tmp_path / f"small_{solver}.yaml"
        path.write_text(text, encoding="utf-8")
        return path

    return write
