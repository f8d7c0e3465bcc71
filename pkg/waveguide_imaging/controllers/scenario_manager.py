"""Scenario files, presets and receiver grids."""

import dataclasses
import hashlib
import json
import os
import pathlib
import shutil
from typing import Any, Dict, Optional, Tuple, Union

from ..models import (
    ArraySpec, GridSpec, ImagingSpec, ModeSettings, ReflectorSpec, Scenario, SourceSpec,
    WaveguideGeometry, build_receiver_grid, receiver_points,
)
from ..utils import (
    get_logger, log_operation, log_error, log_warning,
    ConfigurationError, FileOperationError, ValidationError, validate_scenario
)

PRESET_DIR = pathlib.Path(__file__).resolve().parent.parent / "presets"
PRESET_FILES = {
    "point": "reference_point.json",
    "shell": "reference_shell.json",
    "anisotropic": "reference_anisotropic.json",
}
APERTURES = ("partial", "full")

PathLike = Union[str, pathlib.Path]


def _vec(value: Any, size: int, name: str) -> Tuple[float, ...]:
    if not isinstance(value, (list, tuple)) or len(value) != size:
        raise ConfigurationError(f"'{name}' must be a list of {size} numbers", {"value": value})
    try:
        return tuple(float(v) for v in value)
    except (TypeError, ValueError):
        raise ConfigurationError(f"'{name}' must contain numbers only", {"value": value}) from None


def _optional_vec(data: Dict[str, Any], key: str, size: int, prefix: str) -> Optional[Tuple[float, ...]]:
    if data.get(key) is None:
        return None
    return _vec(data[key], size, f"{prefix}.{key}")


def _section(data: Dict[str, Any], key: str) -> Dict[str, Any]:
    if key not in data:
        raise ConfigurationError(f"Missing required scenario key: {key}")
    section = data[key]
    if not isinstance(section, dict):
        raise ConfigurationError(f"'{key}' must be an object")
    return section


def _grid_from_dict(data: Dict[str, Any], prefix: str) -> GridSpec:
    return GridSpec(
        window_min=_vec(data["window_min"], 3, f"{prefix}.window_min"),  # type: ignore[arg-type]
        window_max=_vec(data["window_max"], 3, f"{prefix}.window_max"),  # type: ignore[arg-type]
        pitch_cross=float(data["pitch_cross"]),
        pitch_range=float(data["pitch_range"]),
    )


def reflector_from_dict(data: Dict[str, Any]) -> ReflectorSpec:
    kind = str(data.get("kind", ""))
    cell = _optional_vec(data, "cell", 3, "reflector")
    kwargs: Dict[str, Any] = {
        "kind": kind,
        "value": float(data.get("value", 1.0)),
        "center": _optional_vec(data, "center", 3, "reflector"),
        "values": _optional_vec(data, "values", 3, "reflector"),
        "outer_min": _optional_vec(data, "outer_min", 3, "reflector"),
        "outer_max": _optional_vec(data, "outer_max", 3, "reflector"),
        "inner_min": _optional_vec(data, "inner_min", 3, "reflector"),
        "inner_max": _optional_vec(data, "inner_max", 3, "reflector"),
    }
    if cell is not None:
        kwargs["cell"] = cell
    return ReflectorSpec(**kwargs)


def scenario_from_dict(data: Dict[str, Any]) -> Scenario:
    """Build a scenario from its JSON document (no invariant checks)."""
    if not isinstance(data, dict):
        raise ConfigurationError("Scenario document must be an object")
    try:
        geometry = _section(data, "geometry")
        source = _section(data, "source")
        array = _section(data, "array")
        modes = _section(data, "modes")
        imaging = _section(data, "imaging")
        generation = imaging.get("generation") or {}
        display = imaging.get("display") or {}
        l1 = imaging.get("l1")
        window = _grid_from_dict(imaging, "imaging")
        reflector = data.get("reflector")
        return Scenario(
            geometry=WaveguideGeometry(
                L1=float(geometry["L1"]), L2=float(geometry["L2"]),
                terminating=bool(geometry.get("terminating", True)),
            ),
            k=float(data["k"]),
            source=SourceSpec(
                position=_vec(source["position"], 2, "source.position"),  # type: ignore[arg-type]
                polarization=_vec(source["polarization"], 3, "source.polarization"),  # type: ignore[arg-type]
                L=float(source["L"]),
            ),
            array=ArraySpec(
                center=_vec(array["center"], 2, "array.center"),  # type: ignore[arg-type]
                size=_vec(array["size"], 2, "array.size"),  # type: ignore[arg-type]
                spacing=float(array["spacing"]),
                components=tuple(int(q) for q in array["components"]),
                decimation=int(array.get("decimation", 1)),
            ),
            modes=ModeSettings(
                budget=int(modes["budget"]),
                evanescent_cutoff=float(modes.get("evanescent_cutoff", 9.0)),
                cutoff_tolerance=float(modes.get("cutoff_tolerance", 1e-9)),
                evanescent_field=bool(modes.get("evanescent_field", False)),
            ),
            imaging=ImagingSpec(
                window_min=window.window_min,
                window_max=window.window_max,
                pitch_cross=window.pitch_cross,
                pitch_range=window.pitch_range,
                generation_pitch_cross=float(generation.get("pitch_cross", window.pitch_cross)),
                generation_pitch_range=float(generation.get("pitch_range", window.pitch_range)),
                l1=_grid_from_dict(l1, "imaging.l1") if l1 else None,
                display_y1=None if display.get("y1") is None else float(display["y1"]),
                display_y3=None if display.get("y3") is None else float(display["y3"]),
            ),
            reflector=reflector_from_dict(reflector) if reflector else None,
            units=str(data.get("units", "wavelength")),
        )
    except KeyError as e:
        raise ConfigurationError(f"Missing required scenario key: {e.args[0]}") from None
    except (TypeError, ValueError) as e:
        raise ConfigurationError(f"Invalid scenario value: {e}") from None


def _grid_to_dict(grid: GridSpec) -> Dict[str, Any]:
    return {
        "window_min": list(grid.window_min),
        "window_max": list(grid.window_max),
        "pitch_cross": grid.pitch_cross,
        "pitch_range": grid.pitch_range,
    }


def reflector_to_dict(reflector: ReflectorSpec) -> Dict[str, Any]:
    out: Dict[str, Any] = {"kind": reflector.kind, "value": reflector.value}
    for key in ("center", "values", "outer_min", "outer_max", "inner_min", "inner_max"):
        value = getattr(reflector, key)
        if value is not None:
            out[key] = list(value)
    if reflector.kind != "shell":
        out["cell"] = list(reflector.cell)
    return out


def scenario_to_dict(scenario: Scenario) -> Dict[str, Any]:
    """JSON document of a scenario; inverse of :func:`scenario_from_dict`."""
    imaging = scenario.imaging
    imaging_dict: Dict[str, Any] = _grid_to_dict(imaging.window_grid())
    imaging_dict["generation"] = {
        "pitch_cross": imaging.generation_pitch_cross,
        "pitch_range": imaging.generation_pitch_range,
    }
    if imaging.l1 is not None:
        imaging_dict["l1"] = _grid_to_dict(imaging.l1)
    display = {k: v for k, v in (("y1", imaging.display_y1), ("y3", imaging.display_y3))
               if v is not None}
    if display:
        imaging_dict["display"] = display
    data: Dict[str, Any] = {
        "units": scenario.units,
        "geometry": dataclasses.asdict(scenario.geometry),
        "k": scenario.k,
        "source": {
            "position": list(scenario.source.position),
            "polarization": list(scenario.source.polarization),
            "L": scenario.source.L,
        },
        "array": {
            "center": list(scenario.array.center),
            "size": list(scenario.array.size),
            "spacing": scenario.array.spacing,
            "components": list(scenario.array.components),
            "decimation": scenario.array.decimation,
        },
        "modes": dataclasses.asdict(scenario.modes),
        "imaging": imaging_dict,
    }
    if scenario.reflector is not None:
        data["reflector"] = reflector_to_dict(scenario.reflector)
    return data


def scenario_hash(scenario: Scenario) -> str:
    """sha256 of the canonical JSON document."""
    canonical = json.dumps(scenario_to_dict(scenario), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


class ScenarioManager:
    """Loads, validates and saves one scenario file, keeping the last document read."""

    def __init__(self, path: PathLike):
        self.logger = get_logger("scenario_manager")
        self.scenario_file = str(path)
        self._scenario: Optional[Scenario] = None
        self.logger.debug(f"ScenarioManager initialized with scenario file: {self.scenario_file}")

    @property
    def scenario(self) -> Scenario:
        """The loaded scenario; reads the file on first access."""
        if self._scenario is None:
            return self.load()
        return self._scenario

    @property
    def digest(self) -> str:
        return scenario_hash(self.scenario)

    def load(self) -> Scenario:
        """Read and validate the scenario file."""
        path = self.scenario_file
        try:
            with open(path, "r", encoding="utf-8") as f:
                try:
                    data = json.load(f)
                except json.JSONDecodeError as e:
                    self.logger.error(f"Scenario file malformed: {e}")
                    raise ConfigurationError(
                        f"Scenario file is malformed: {str(e)}",
                        {"file": path, "error": str(e)},
                    )
        except (OSError, IOError) as e:
            log_error("scenario_manager", e, "load_scenario", {"file": path})
            raise FileOperationError(f"Failed to read scenario file: {str(e)}", {"file": path})

        scenario = scenario_from_dict(data)
        validate_scenario(scenario)
        self._scenario = scenario
        log_operation("scenario_manager", "load_scenario",
                      {"file": path, "budget": scenario.mode_budget})
        return scenario

    def save(self, scenario: Scenario) -> None:
        """Validate and write the scenario atomically, keeping a ``.backup`` of the old file."""
        validate_scenario(scenario)
        path = self.scenario_file
        temp_file = f"{path}.tmp"
        try:
            directory = os.path.dirname(path)
            if directory:
                os.makedirs(directory, exist_ok=True)
            self._backup_scenario_file()
            with open(temp_file, "w", encoding="utf-8") as f:
                json.dump(scenario_to_dict(scenario), f, indent=4)
                f.write("\n")
            shutil.move(temp_file, path)
            self._scenario = scenario
            log_operation("scenario_manager", "write_scenario", {"file": path})
        except (OSError, IOError) as e:
            log_error("scenario_manager", e, "write_scenario", {"file": path})
            if os.path.exists(temp_file):
                try:
                    os.remove(temp_file)
                except OSError:
                    pass
            raise FileOperationError(f"Failed to write scenario file: {str(e)}", {"file": path})

    def _backup_scenario_file(self) -> None:
        path = self.scenario_file
        if not os.path.exists(path):
            return
        try:
            shutil.copy2(path, f"{path}.backup")
            self.logger.debug(f"Scenario backup created: {path}.backup")
        except (OSError, IOError) as e:
            log_warning("scenario_manager", f"Failed to create scenario backup: {str(e)}")


def load_scenario(path: PathLike) -> Scenario:
    """Read and validate a scenario file."""
    return ScenarioManager(path).load()


def write_scenario(scenario: Scenario, path: PathLike) -> None:
    """Validate and write a scenario file atomically."""
    ScenarioManager(path).save(scenario)


def preset_path(name: str) -> pathlib.Path:
    if name not in PRESET_FILES:
        raise ValidationError(f"Unknown preset: {name}", {"available": sorted(PRESET_FILES)})
    return PRESET_DIR / PRESET_FILES[name]


def scale_aperture(scenario: Scenario, fraction: float) -> Scenario:
    """Centered aperture covering ``fraction`` of each cross-section side."""
    if not 0.0 < fraction <= 1.0:
        raise ValidationError("Aperture fraction must lie in (0, 1]", {"fraction": fraction})
    geometry = scenario.geometry
    array = dataclasses.replace(
        scenario.array,
        center=(geometry.L1 / 2.0, geometry.L2 / 2.0),
        size=(fraction * geometry.L1, fraction * geometry.L2),
    )
    return dataclasses.replace(scenario, array=array)


def with_mode_budget(scenario: Scenario, budget: int) -> Scenario:
    scenario = dataclasses.replace(scenario, modes=dataclasses.replace(scenario.modes, budget=budget))
    validate_scenario(scenario)
    return scenario


def with_decimation(scenario: Scenario, decimation: int) -> Scenario:
    array = dataclasses.replace(scenario.array, decimation=decimation)
    return dataclasses.replace(scenario, array=array)


def with_variant(scenario: Scenario, terminating: bool) -> Scenario:
    geometry = dataclasses.replace(scenario.geometry, terminating=terminating)
    return dataclasses.replace(scenario, geometry=geometry)


def preset(name: str, aperture: str = "partial") -> Tuple[Scenario, ReflectorSpec]:
    """Reference configuration: returns the scenario and its reflector.

    ``aperture="full"`` spreads the receivers over the whole cross-section.
    """
    if aperture not in APERTURES:
        raise ValidationError(f"Unknown aperture: {aperture}", {"available": list(APERTURES)})
    scenario = load_scenario(preset_path(name))
    if aperture == "full":
        scenario = scale_aperture(scenario, 1.0)
    assert scenario.reflector is not None
    return scenario, scenario.reflector

