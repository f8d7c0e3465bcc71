"""Input validation utilities for the waveguide imaging toolkit."""

import math
import os
import pathlib
from typing import Any, List, Optional, Sequence

import numpy as np

from .exceptions import ValidationError, WaveguideImagingError
from .logger import get_logger

logger = get_logger("validators")


class PathValidator:
    """Validates file and directory paths."""

    MAX_PATH_LENGTH = 4096

    @staticmethod
    def validate_file_path(path: str, must_exist: bool = True) -> str:
        """Validate a file path and return it resolved."""
        if not path or not isinstance(path, str):
            raise ValidationError("File path cannot be empty or non-string")

        path = path.strip()
        if not path:
            raise ValidationError("File path cannot be empty after trimming whitespace")

        try:
            path_obj = pathlib.Path(path).resolve()
        except (OSError, ValueError) as e:
            raise ValidationError(f"Invalid file path format: {path}", {"error": str(e)})

        if len(str(path_obj)) > PathValidator.MAX_PATH_LENGTH:
            raise ValidationError("Path too long", {"path": path})

        if must_exist and not path_obj.exists():
            raise ValidationError(f"File does not exist: {path}")

        if path_obj.exists() and not path_obj.is_file():
            raise ValidationError(f"Path is not a file: {path}")

        logger.debug(f"File path validation successful: {path}")
        return str(path_obj)

    @staticmethod
    def validate_output_dir(path: str) -> str:
        """Create the output directory if needed and check that it is writable."""
        if not path or not isinstance(path, str):
            raise ValidationError("Output directory cannot be empty or non-string")
        path_obj = pathlib.Path(path.strip()).resolve()
        if path_obj.exists() and not path_obj.is_dir():
            raise ValidationError(f"Output path is not a directory: {path}")
        try:
            path_obj.mkdir(parents=True, exist_ok=True)
        except OSError as e:
            raise ValidationError(f"Cannot create output directory: {path}", {"error": str(e)})
        if not os.access(path_obj, os.W_OK):
            raise ValidationError(f"No write permission for directory: {path}")
        return str(path_obj)


class NumericValidator:
    """Checks on scalars and arrays."""

    @staticmethod
    def require_positive(value: Any, name: str) -> float:
        try:
            number = float(value)
        except (TypeError, ValueError):
            raise ValidationError(f"{name} must be a number", {name: value}) from None
        if not math.isfinite(number) or number <= 0:
            raise ValidationError(f"{name} must be positive and finite", {name: value})
        return number

    @staticmethod
    def require_nonnegative(value: Any, name: str) -> float:
        number = float(value)
        if not math.isfinite(number) or number < 0:
            raise ValidationError(f"{name} must be nonnegative and finite", {name: value})
        return number

    @staticmethod
    def require_finite(values: Any, name: str) -> np.ndarray:
        array = np.asarray(values)
        if not np.all(np.isfinite(array)):
            raise ValidationError(f"{name} contains non-finite entries",
                                  {"count": int(np.sum(~np.isfinite(array)))})
        return array

    @staticmethod
    def require_fraction(value: float, name: str) -> float:
        if not 0.0 < value < 1.0:
            raise ValidationError(f"{name} must lie in (0, 1)", {name: value})
        return float(value)


def _inside_box(point: Sequence[float], lo: Sequence[float], hi: Sequence[float],
                strict: bool = False) -> bool:
    if strict:
        return all(a < c < b for a, c, b in zip(lo, point, hi))
    return all(a <= c <= b for a, c, b in zip(lo, point, hi))


class ScenarioValidator:
    """Collects invariant violations of a scenario, one diagnostic line each."""

    @staticmethod
    def geometry_violations(scenario: Any) -> List[str]:
        geometry = scenario.geometry
        out = []
        if not geometry.L1 > 0:
            out.append(f"geometry.L1 must be positive (got {geometry.L1})")
        if not geometry.L2 > 0:
            out.append(f"geometry.L2 must be positive (got {geometry.L2})")
        if not (math.isfinite(scenario.k) and scenario.k > 0):
            out.append(f"k must be positive (got {scenario.k})")
        return out

    @staticmethod
    def source_violations(scenario: Any) -> List[str]:
        source, geometry = scenario.source, scenario.geometry
        out = []
        x1, x2 = source.position
        if not (0 < x1 < geometry.L1 and 0 < x2 < geometry.L2):
            out.append(f"source.position {source.position} must lie strictly inside the cross-section")
        p = np.asarray(source.polarization, dtype=float)
        if p.shape != (3,) or not np.all(np.isfinite(p)) or not np.any(p):
            out.append(f"source.polarization {source.polarization} must be a nonzero 3-vector")
        if not source.L > 0:
            out.append(f"source.L must be positive (got {source.L})")
        return out

    @staticmethod
    def array_violations(scenario: Any) -> List[str]:
        array, geometry = scenario.array, scenario.geometry
        out = []
        lo = [c - s / 2.0 for c, s in zip(array.center, array.size)]
        hi = [c + s / 2.0 for c, s in zip(array.center, array.size)]
        if any(s <= 0 for s in array.size):
            out.append(f"array.size {array.size} must be positive")
        eps = 1e-9
        if lo[0] < -eps or lo[1] < -eps or hi[0] > geometry.L1 + eps or hi[1] > geometry.L2 + eps:
            out.append("array aperture must lie inside the cross-section")
        if not array.spacing > 0:
            out.append(f"array.spacing must be positive (got {array.spacing})")
        if not array.components:
            out.append("array.components must be a nonempty subset of {1, 2, 3}")
        elif (any(q not in (1, 2, 3) for q in array.components)
              or len(set(array.components)) != len(array.components)):
            out.append(f"array.components {list(array.components)} must be distinct values in {{1, 2, 3}}")
        if array.decimation < 1:
            out.append(f"array.decimation must be >= 1 (got {array.decimation})")
        return out

    @staticmethod
    def mode_violations(scenario: Any) -> List[str]:
        modes = scenario.modes
        out = []
        if not modes.evanescent_cutoff >= 1.0:
            out.append(f"modes.evanescent_cutoff must be >= 1 (got {modes.evanescent_cutoff})")
        if not modes.cutoff_tolerance > 0:
            out.append("modes.cutoff_tolerance must be positive")
        if modes.budget < 1:
            out.append(f"modes.budget must be >= 1 (got {modes.budget})")
        elif (not out and scenario.geometry.L1 > 0 and scenario.geometry.L2 > 0
              and scenario.k > 0):
            from ..physics.modes import enumerate_propagating

            try:
                available = len(enumerate_propagating(scenario))
            except WaveguideImagingError as e:
                out.append(f"modes: {e.message}")
            else:
                if modes.budget > available:
                    out.append(f"modes.budget {modes.budget} exceeds the "
                               f"{available} propagating pairs")
        return out

    @staticmethod
    def _box_violations(label: str, lo: Sequence[float], hi: Sequence[float],
                        scenario: Any) -> List[str]:
        geometry = scenario.geometry
        out = []
        if any(a >= b for a, b in zip(lo, hi)):
            out.append(f"{label}: window_min {list(lo)} must be below window_max {list(hi)}")
        if not (lo[2] > -scenario.source.L and hi[2] < 0.0):
            out.append(f"{label}: range extent [{lo[2]}, {hi[2]}] must lie strictly between "
                       f"the array plane {-scenario.source.L} and the end wall 0")
        if not (lo[0] > 0 and lo[1] > 0 and hi[0] < geometry.L1 and hi[1] < geometry.L2):
            out.append(f"{label}: cross-range extent must lie strictly inside the cross-section")
        return out

    @staticmethod
    def imaging_violations(scenario: Any) -> List[str]:
        imaging = scenario.imaging
        out = ScenarioValidator._box_violations("imaging", imaging.window_min,
                                                imaging.window_max, scenario)
        pitches = {
            "pitch_cross": imaging.pitch_cross, "pitch_range": imaging.pitch_range,
            "generation.pitch_cross": imaging.generation_pitch_cross,
            "generation.pitch_range": imaging.generation_pitch_range,
        }
        for name, value in pitches.items():
            if not value > 0:
                out.append(f"imaging.{name} must be positive (got {value})")
        if imaging.l1 is not None:
            out.extend(ScenarioValidator._box_violations("imaging.l1", imaging.l1.window_min,
                                                         imaging.l1.window_max, scenario))
            if not (imaging.l1.pitch_cross > 0 and imaging.l1.pitch_range > 0):
                out.append("imaging.l1 pitches must be positive")
        if imaging.display_y1 is not None and not (
                imaging.window_min[0] <= imaging.display_y1 <= imaging.window_max[0]):
            out.append(f"imaging.display.y1 {imaging.display_y1} lies outside the window")
        if imaging.display_y3 is not None and not (
                imaging.window_min[2] <= imaging.display_y3 <= imaging.window_max[2]):
            out.append(f"imaging.display.y3 {imaging.display_y3} lies outside the window")
        return out

    @staticmethod
    def reflector_violations(scenario: Any) -> List[str]:
        reflector = scenario.reflector
        if reflector is None:
            return []
        from ..models.scenario import REFLECTOR_KINDS

        out = []
        if reflector.kind not in REFLECTOR_KINDS:
            return [f"reflector.kind {reflector.kind!r} must be one of {list(REFLECTOR_KINDS)}"]
        window_lo, window_hi = scenario.imaging.window_min, scenario.imaging.window_max
        if reflector.kind == "shell":
            boxes = (reflector.outer_min, reflector.outer_max,
                     reflector.inner_min, reflector.inner_max)
            if any(b is None for b in boxes):
                return ["reflector: shell needs outer_min, outer_max, inner_min and inner_max"]
            if not math.isfinite(reflector.value):
                out.append("reflector.value must be finite")
            if any(a >= b for a, b in zip(reflector.outer_min, reflector.outer_max)):
                out.append("reflector: outer box is empty")
            covered = all(i_lo <= o_lo and o_hi <= i_hi for o_lo, o_hi, i_lo, i_hi in zip(
                reflector.outer_min, reflector.outer_max, reflector.inner_min, reflector.inner_max))
            if covered:
                out.append("reflector: shell R minus R_o is empty")
            overlapping = all(max(o_lo, i_lo) < min(o_hi, i_hi) for o_lo, o_hi, i_lo, i_hi in zip(
                reflector.outer_min, reflector.outer_max, reflector.inner_min, reflector.inner_max))
            if not overlapping:
                out.append("reflector: inner box R_o must overlap the outer box R")
            if not (_inside_box(reflector.outer_min, window_lo, window_hi)
                    and _inside_box(reflector.outer_max, window_lo, window_hi)):
                out.append("reflector: shell support must lie inside the imaging window")
            return out
        if reflector.center is None:
            return [f"reflector: {reflector.kind} reflector needs a center"]
        if reflector.kind == "anisotropic":
            if reflector.values is None or len(reflector.values) != 3:
                out.append("reflector: anisotropic reflector needs three diagonal values")
            elif not all(math.isfinite(v) for v in reflector.values):
                out.append("reflector.values must be finite")
        elif not math.isfinite(reflector.value):
            out.append("reflector.value must be finite")
        if any(h <= 0 for h in reflector.cell):
            out.append(f"reflector.cell {list(reflector.cell)} must be positive")
        if not _inside_box(reflector.center, window_lo, window_hi):
            out.append(f"reflector.center {list(reflector.center)} must lie inside the imaging window")
        return out


def scenario_violations(scenario: Any) -> List[str]:
    """Every invariant violation of ``scenario``; empty when valid."""
    violations: List[str] = []
    violations.extend(ScenarioValidator.geometry_violations(scenario))
    violations.extend(ScenarioValidator.source_violations(scenario))
    violations.extend(ScenarioValidator.array_violations(scenario))
    violations.extend(ScenarioValidator.mode_violations(scenario))
    violations.extend(ScenarioValidator.imaging_violations(scenario))
    violations.extend(ScenarioValidator.reflector_violations(scenario))
    return violations


def validate_scenario(scenario: Any) -> None:
    """Raise ``ValidationError`` listing all violations when the scenario is invalid."""
    violations = scenario_violations(scenario)
    if violations:
        raise ValidationError(
            f"Scenario has {len(violations)} invalid setting(s): {violations[0]}",
            {"violations": violations},
        )


def validate_file_path(path: str, must_exist: bool = True) -> str:
    """Convenience function to validate a file path."""
    return PathValidator.validate_file_path(path, must_exist)


def validate_output_dir(path: Optional[str]) -> str:
    """Convenience function to validate an output directory."""
    return PathValidator.validate_output_dir(path or ".")
