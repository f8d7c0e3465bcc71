"""Experiment description records.

All lengths are in units of the wavelength, so the wavenumber of a
homogeneous waveguide filling is ``k = 2*pi``.
"""

import math
from dataclasses import dataclass
from typing import Optional, Tuple

Vec2 = Tuple[float, float]
Vec3 = Tuple[float, float, float]

# Mesh used by the reference experiments: lambda/18 across, lambda/6 along the guide.
FINE_PITCH_CROSS = 1.0 / 18.0
FINE_PITCH_RANGE = 1.0 / 6.0
COARSE_PITCH_CROSS = 0.29
COARSE_PITCH_RANGE = 0.87

REFLECTOR_KINDS = ("point", "shell", "anisotropic")


@dataclass(frozen=True)
class WaveguideGeometry:
    """Rectangular cross-section (0, L1) x (0, L2) and the end-wall flag."""

    L1: float
    L2: float
    terminating: bool = True


@dataclass(frozen=True)
class SourceSpec:
    """Point dipole ``p * delta(x - (position, -L))``."""

    position: Vec2
    polarization: Vec3
    L: float


@dataclass(frozen=True)
class ArraySpec:
    """Receiver array in the source plane x3 = -L."""

    center: Vec2
    size: Vec2
    spacing: float
    components: Tuple[int, ...]
    decimation: int = 1


@dataclass(frozen=True)
class ModeSettings:
    budget: int
    evanescent_cutoff: float = 9.0
    cutoff_tolerance: float = 1e-9
    evanescent_field: bool = False


@dataclass(frozen=True)
class GridSpec:
    """Axis-aligned box sampled at voxel centers ``window_min + i * pitch``."""

    window_min: Vec3
    window_max: Vec3
    pitch_cross: float
    pitch_range: float


@dataclass(frozen=True)
class ImagingSpec:
    window_min: Vec3
    window_max: Vec3
    pitch_cross: float = FINE_PITCH_CROSS
    pitch_range: float = FINE_PITCH_RANGE
    generation_pitch_cross: float = FINE_PITCH_CROSS
    generation_pitch_range: float = FINE_PITCH_RANGE
    l1: Optional[GridSpec] = None
    display_y1: Optional[float] = None
    display_y3: Optional[float] = None

    def window_grid(self) -> GridSpec:
        """Grid used for reverse time migration."""
        return GridSpec(self.window_min, self.window_max, self.pitch_cross, self.pitch_range)

    def l1_grid(self) -> GridSpec:
        """Grid used for sparse inversion; coarse pitches over the window by default."""
        if self.l1 is not None:
            return self.l1
        return GridSpec(self.window_min, self.window_max, COARSE_PITCH_CROSS, COARSE_PITCH_RANGE)

    def generation_pitch(self) -> Tuple[float, float]:
        return (self.generation_pitch_cross, self.generation_pitch_range)


@dataclass(frozen=True)
class ReflectorSpec:
    """A localized reflector.

    ``point`` and ``anisotropic`` reflectors occupy one mesh cell of size
    ``cell`` centered at ``center``; ``shell`` is the set R minus R_o.
    """

    kind: str
    value: float = 1.0
    center: Optional[Vec3] = None
    values: Optional[Vec3] = None
    cell: Vec3 = (FINE_PITCH_CROSS, FINE_PITCH_CROSS, FINE_PITCH_RANGE)
    outer_min: Optional[Vec3] = None
    outer_max: Optional[Vec3] = None
    inner_min: Optional[Vec3] = None
    inner_max: Optional[Vec3] = None

    @property
    def parameterization(self) -> str:
        return "diagonal" if self.kind == "anisotropic" else "isotropic"

    def diagonal(self) -> Vec3:
        """Diagonal of the scattering potential on the support."""
        if self.kind == "anisotropic":
            assert self.values is not None
            return self.values
        return (self.value, self.value, self.value)

    def contains(self, point: Vec3) -> bool:
        """Membership test for the shell (open boxes)."""
        if self.kind != "shell":
            raise ValueError("contains() is defined for shell reflectors only")
        assert self.outer_min and self.outer_max and self.inner_min and self.inner_max
        inside_outer = all(lo < c < hi for lo, c, hi in zip(self.outer_min, point, self.outer_max))
        inside_inner = all(lo < c < hi for lo, c, hi in zip(self.inner_min, point, self.inner_max))
        return inside_outer and not inside_inner

    def bounding_box(self) -> Tuple[Vec3, Vec3]:
        if self.kind == "shell":
            assert self.outer_min is not None and self.outer_max is not None
            return self.outer_min, self.outer_max
        assert self.center is not None
        lo = tuple(c - h / 2.0 for c, h in zip(self.center, self.cell))
        hi = tuple(c + h / 2.0 for c, h in zip(self.center, self.cell))
        return lo, hi  # type: ignore[return-value]

    def depth(self) -> float:
        """Range coordinate used for the cross-range display plane."""
        lo, hi = self.bounding_box()
        return 0.5 * (lo[2] + hi[2])


@dataclass(frozen=True)
class Scenario:
    geometry: WaveguideGeometry
    k: float
    source: SourceSpec
    array: ArraySpec
    modes: ModeSettings
    imaging: ImagingSpec
    reflector: Optional[ReflectorSpec] = None
    units: str = "wavelength"

    @property
    def mode_budget(self) -> int:
        return self.modes.budget

    @property
    def array_plane(self) -> float:
        return -self.source.L

    def display_planes(self) -> Tuple[float, float]:
        """(y1, y3) of the axial and cross-range slices shown by exporters."""
        y1 = self.imaging.display_y1
        if y1 is None:
            y1 = self.source.position[0]
        y3 = self.imaging.display_y3
        if y3 is None:
            if self.reflector is not None:
                y3 = self.reflector.depth()
            else:
                y3 = 0.5 * (self.imaging.window_min[2] + self.imaging.window_max[2])
        return float(y1), float(y3)


TWO_PI = 2.0 * math.pi
__all__ = [
    "Vec2", "Vec3", "WaveguideGeometry", "SourceSpec", "ArraySpec", "ModeSettings", "GridSpec",
    "ImagingSpec", "ReflectorSpec", "Scenario", "REFLECTOR_KINDS", "TWO_PI",
    "FINE_PITCH_CROSS", "FINE_PITCH_RANGE", "COARSE_PITCH_CROSS", "COARSE_PITCH_RANGE",
]
