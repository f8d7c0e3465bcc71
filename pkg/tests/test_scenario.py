"""Tests for scenario files, presets and receiver grids."""

import json

import numpy as np
import pytest

from waveguide_imaging.controllers import (
    ScenarioManager, build_receiver_grid, load_scenario, preset, receiver_points, scale_aperture,
    scenario_hash, scenario_to_dict, with_decimation, with_mode_budget, with_variant, write_scenario,
)
from waveguide_imaging.models import VoxelGrid
from waveguide_imaging.utils import (
    ConfigurationError, FileOperationError, ValidationError, scenario_violations,
)


def test_load_and_hash(scenario_file, small_scenario):
    """A scenario file round-trips through the canonical document and hash."""
    loaded = load_scenario(scenario_file)
    assert loaded == small_scenario
    assert scenario_hash(loaded) == scenario_hash(small_scenario)
    assert len(scenario_hash(loaded)) == 64


def test_hash_changes_with_content(small_scenario):
    """Any setting change changes the digest."""
    assert scenario_hash(small_scenario) != scenario_hash(with_mode_budget(small_scenario, 11))
    assert scenario_hash(small_scenario) != scenario_hash(with_variant(small_scenario, False))


def test_write_scenario_atomic_with_backup(tmp_path, small_scenario):
    """Writes go through a temp file and keep a backup of the previous version."""
    path = tmp_path / "out" / "scenario.json"
    write_scenario(small_scenario, path)
    write_scenario(with_mode_budget(small_scenario, 10), path)
    assert path.exists()
    assert (tmp_path / "out" / "scenario.json.backup").exists()
    assert not (tmp_path / "out" / "scenario.json.tmp").exists()
    assert load_scenario(path).mode_budget == 10
    assert load_scenario(str(path) + ".backup").mode_budget == 12


def test_scenario_manager_caches_the_loaded_scenario(tmp_path, small_scenario):
    """The manager reads lazily, keeps what it saved and hashes the current scenario."""
    path = tmp_path / "managed.json"
    write_scenario(small_scenario, path)
    manager = ScenarioManager(path)
    assert manager.scenario == small_scenario
    path.write_text("{", encoding="utf-8")
    assert manager.digest == scenario_hash(small_scenario)
    with pytest.raises(ConfigurationError):
        manager.load()
    smaller = with_mode_budget(small_scenario, 10)
    manager.save(smaller)
    assert manager.scenario.mode_budget == 10
    assert ScenarioManager(path).scenario == smaller
    assert (tmp_path / "managed.json.backup").read_text(encoding="utf-8") == "{"


def test_malformed_file(tmp_path):
    """JSON errors map to configuration errors, missing files to file errors."""
    bad = tmp_path / "bad.json"
    bad.write_text("{not json", encoding="utf-8")
    with pytest.raises(ConfigurationError):
        load_scenario(bad)
    with pytest.raises(FileOperationError):
        load_scenario(tmp_path / "missing.json")


def test_missing_key(tmp_path, scenario_dict):
    """A missing section is a configuration error."""
    del scenario_dict["source"]
    path = tmp_path / "s.json"
    path.write_text(json.dumps(scenario_dict), encoding="utf-8")
    with pytest.raises(ConfigurationError):
        load_scenario(path)


def test_every_violation_listed(tmp_path, scenario_dict):
    """Validation collects one diagnostic line per violated invariant."""
    scenario_dict["geometry"]["L1"] = -1.0
    scenario_dict["source"]["polarization"] = [0.0, 0.0, 0.0]
    scenario_dict["array"]["components"] = [2, 4]
    scenario_dict["modes"]["budget"] = 0
    path = tmp_path / "s.json"
    path.write_text(json.dumps(scenario_dict), encoding="utf-8")
    with pytest.raises(ValidationError) as info:
        load_scenario(path)
    violations = info.value.details["violations"]
    assert any("geometry.L1" in v for v in violations)
    assert any("polarization" in v for v in violations)
    assert any("components" in v for v in violations)
    assert any("budget" in v for v in violations)


def test_window_and_reflector_violations(small_scenario, scenario_dict):
    """Windows must sit between the array plane and the end wall; reflectors inside them."""
    from waveguide_imaging.controllers import scenario_from_dict

    scenario_dict["imaging"]["window_max"] = [1.3, 1.2, 0.5]
    scenario_dict["reflector"]["center"] = [2.0, 0.95, -2.5]
    scenario_dict["modes"]["budget"] = 21
    violations = scenario_violations(scenario_from_dict(scenario_dict))
    assert any("end wall" in v for v in violations)
    assert any("reflector.center" in v for v in violations)
    assert any("exceeds the 20 propagating pairs" in v for v in violations)
    assert scenario_violations(small_scenario) == []


def test_shell_needs_nonempty_difference(scenario_dict):
    """The inner box must overlap the outer one without covering it."""
    from waveguide_imaging.controllers import scenario_from_dict

    scenario_dict["reflector"] = {
        "kind": "shell", "value": 1.0,
        "outer_min": [0.9, 0.8, -2.8], "outer_max": [1.2, 1.1, -2.2],
        "inner_min": [0.85, 0.75, -2.9], "inner_max": [1.25, 1.15, -2.1],
    }
    violations = scenario_violations(scenario_from_dict(scenario_dict))
    assert any("empty" in v for v in violations)

    scenario_dict["reflector"]["inner_min"] = [0.82, 0.72, -2.95]
    scenario_dict["reflector"]["inner_max"] = [0.88, 0.78, -2.85]
    violations = scenario_violations(scenario_from_dict(scenario_dict))
    assert any("must overlap" in v for v in violations)
    assert not any("empty" in v for v in violations)


def test_receiver_grid(small_scenario):
    """Full-aperture receivers keep half a spacing from the walls."""
    points = build_receiver_grid(small_scenario.array, small_scenario.geometry)
    assert points.shape == (72, 2)
    assert points[:, 0].min() == pytest.approx(0.15)
    assert points[:, 0].max() == pytest.approx(2.15)
    assert points[:, 1].min() == pytest.approx(0.175)
    assert np.allclose(np.diff(np.unique(points[:, 0])), 0.25)
    # row-major with x1 outermost
    assert points[0, 0] == points[1, 0] and points[0, 1] < points[1, 1]


def test_receiver_decimation(small_scenario):
    """Decimation keeps every r-th receiver along each axis."""
    full = receiver_points(small_scenario)
    halved = receiver_points(with_decimation(small_scenario, 2))
    assert halved.shape == (5 * 4, 2)
    assert set(map(tuple, halved)).issubset(set(map(tuple, full)))


def test_receivers_strictly_inside_partial_aperture():
    """A 10.5 aperture at spacing 1/2 keeps 22 receivers per axis, none on its edge."""
    import dataclasses

    scenario, _ = preset("point")
    array = dataclasses.replace(scenario.array, spacing=0.5)
    points = build_receiver_grid(array, scenario.geometry)
    assert points.shape == (22 * 22, 2)
    for axis in (0, 1):
        lo = array.center[axis] - array.size[axis] / 2.0
        hi = array.center[axis] + array.size[axis] / 2.0
        assert np.all((points[:, axis] > lo) & (points[:, axis] < hi))
    assert np.allclose(np.diff(np.unique(points[:, 0])), 0.5)


def test_unknown_parameterization_is_a_validation_error():
    from waveguide_imaging.models import channel_count

    assert channel_count("diagonal") == 3
    with pytest.raises(ValidationError):
        channel_count("tensor")


def test_spacing_larger_than_aperture(small_scenario):
    """The aperture must fit at least one spacing."""
    narrow = scale_aperture(small_scenario, 0.1)
    with pytest.raises(ValidationError):
        receiver_points(narrow)


@pytest.mark.parametrize("name", ["point", "shell", "anisotropic"])
def test_presets_load(name):
    """Every preset is valid and carries its reflector."""
    scenario, reflector = preset(name)
    assert scenario.geometry.L1 == pytest.approx(13.9)
    assert scenario.geometry.L2 == pytest.approx(14.2)
    assert scenario.mode_budget == 350
    assert reflector.kind == name
    assert scenario_violations(scenario) == []


def test_preset_apertures():
    """The default aperture covers 75% of each side; 'full' covers the whole section."""
    partial, _ = preset("point")
    full, _ = preset("point", aperture="full")
    assert partial.array.size[0] == pytest.approx(0.75 * 13.9, rel=1e-2)
    assert full.array.size == pytest.approx((13.9, 14.2))
    with pytest.raises(ValidationError):
        preset("point", aperture="half")
    with pytest.raises(ValidationError):
        preset("sphere")


def test_display_planes():
    """Display planes follow the reference figures."""
    point, _ = preset("point")
    shell, _ = preset("shell")
    assert point.display_planes() == pytest.approx((6.95, -10.44))
    assert shell.display_planes() == pytest.approx((6.96, -11.14))


def test_default_display_planes(scenario_dict):
    """Without explicit planes: source x1 and reflector depth."""
    from waveguide_imaging.controllers import scenario_from_dict

    del scenario_dict["imaging"]["display"]
    scenario = scenario_from_dict(scenario_dict)
    assert scenario.display_planes() == pytest.approx((0.9, -2.5))


def test_canonical_document_round_trip(small_scenario):
    """The canonical document rebuilds the same scenario."""
    from waveguide_imaging.controllers import scenario_from_dict

    assert scenario_from_dict(scenario_to_dict(small_scenario)) == small_scenario


def test_voxel_grid(small_scenario):
    """Window grids include both window faces."""
    grid = VoxelGrid.from_spec(small_scenario.imaging.window_grid())
    assert grid.shape == (3, 3, 3)
    assert grid.voxel_volume == pytest.approx(0.25 * 0.25 * 0.5)
    assert grid.upper == pytest.approx((1.3, 1.2, -2.0))
    assert grid.nearest_index(2, -2.6) == 1
    with pytest.raises(ValueError):
        grid.nearest_index(0, 2.0)
    centers = grid.centers()
    assert centers.shape == (27, 3)
    assert np.allclose(centers[13], (1.05, 0.95, -2.5))
