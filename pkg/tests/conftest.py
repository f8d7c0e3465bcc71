"""Shared fixtures: a small waveguide that keeps every stage fast."""

import copy
import json
import os
import sys
import tempfile
from pathlib import Path

import pytest

# Add the package to the path for testing
sys.path.insert(0, str(Path(__file__).parent.parent))
os.environ.setdefault("WGI_LOG_DIR", tempfile.mkdtemp(prefix="wgi-logs-"))
os.environ.setdefault("WGI_LOG_LEVEL", "WARNING")

# 2.3 x 2.1 wavelengths carries 20 propagating index pairs at k = 2 pi. The
# point reflector sits on the center voxel of both imaging grids.
SMALL_SCENARIO = {
    "units": "wavelength",
    "geometry": {"L1": 2.3, "L2": 2.1, "terminating": True},
    "k": 6.283185307179586,
    "source": {"position": [0.9, 0.8], "polarization": [0.3, 1.0, 0.2], "L": 6.0},
    "array": {
        "center": [1.15, 1.05],
        "size": [2.3, 2.1],
        "spacing": 0.25,
        "components": [1, 2],
        "decimation": 1,
    },
    "modes": {"budget": 12, "evanescent_cutoff": 4.0},
    "imaging": {
        "window_min": [0.8, 0.7, -3.0],
        "window_max": [1.3, 1.2, -2.0],
        "pitch_cross": 0.25,
        "pitch_range": 0.5,
        "generation": {"pitch_cross": 0.25, "pitch_range": 0.5},
        "l1": {
            "window_min": [0.8, 0.7, -3.0],
            "window_max": [1.3, 1.2, -2.0],
            "pitch_cross": 0.25,
            "pitch_range": 0.5,
        },
        "display": {"y1": 1.05, "y3": -2.5},
    },
    "reflector": {
        "kind": "point",
        "value": 1.0,
        "center": [1.05, 0.95, -2.5],
        "cell": [0.25, 0.25, 0.5],
    },
}

CENTER_VOXEL = (1, 1, 1)


@pytest.fixture
def scenario_dict():
    """A fresh copy of the small scenario document."""
    return copy.deepcopy(SMALL_SCENARIO)


@pytest.fixture
def small_scenario(scenario_dict):
    from waveguide_imaging.controllers import scenario_from_dict
    from waveguide_imaging.utils import validate_scenario

    scenario = scenario_from_dict(scenario_dict)
    validate_scenario(scenario)
    return scenario


@pytest.fixture
def infinite_scenario(small_scenario):
    from waveguide_imaging.controllers import with_variant

    return with_variant(small_scenario, terminating=False)


@pytest.fixture
def shell_scenario(scenario_dict):
    from waveguide_imaging.controllers import scenario_from_dict

    scenario_dict = copy.deepcopy(scenario_dict)
    scenario_dict["imaging"]["generation"] = {"pitch_cross": 0.05, "pitch_range": 0.1}
    scenario_dict["reflector"] = {
        "kind": "shell",
        "value": 2.0,
        "outer_min": [0.85, 0.75, -2.9],
        "outer_max": [1.25, 1.15, -2.1],
        "inner_min": [0.95, 0.85, -2.7],
        "inner_max": [1.35, 1.25, -1.9],
    }
    return scenario_from_dict(scenario_dict)


@pytest.fixture
def scenario_file(tmp_path, scenario_dict):
    """The small scenario written to disk."""
    path = tmp_path / "small.json"
    path.write_text(json.dumps(scenario_dict, indent=4), encoding="utf-8")
    return path


@pytest.fixture
def window_grid(small_scenario):
    from waveguide_imaging.models import VoxelGrid

    return VoxelGrid.from_spec(small_scenario.imaging.window_grid())


@pytest.fixture
def point_data(small_scenario):
    """Noiseless Born data of the point reflector."""
    from waveguide_imaging.physics import synthesize_data

    return synthesize_data(small_scenario)
