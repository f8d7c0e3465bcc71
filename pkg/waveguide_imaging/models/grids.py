"""Voxel grids and discretized scattering potentials."""

import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from ..utils.exceptions import ValidationError
from .scenario import GridSpec, Vec3

PARAMETERIZATIONS = {"isotropic": 1, "diagonal": 3, "full": 9}


def channel_count(parameterization: str) -> int:
    try:
        return PARAMETERIZATIONS[parameterization]
    except KeyError:
        raise ValidationError(f"Unknown parameterization: {parameterization}",
                              {"available": list(PARAMETERIZATIONS)}) from None


def channel_labels(parameterization: str) -> Tuple[str, ...]:
    if parameterization == "isotropic":
        return ("iso",)
    if parameterization == "diagonal":
        return ("11", "22", "33")
    return tuple(f"{m}{l}" for m in (1, 2, 3) for l in (1, 2, 3))


@dataclass(frozen=True)
class VoxelGrid:
    """Regular grid of voxel centers ``origin + i * pitch`` in C order (x1 slowest)."""

    origin: Vec3
    pitch: Vec3
    shape: Tuple[int, int, int]

    @classmethod
    def from_spec(cls, spec: GridSpec) -> "VoxelGrid":
        pitch = (spec.pitch_cross, spec.pitch_cross, spec.pitch_range)
        shape = tuple(
            int(math.floor((hi - lo) / h + 1e-9)) + 1
            for lo, hi, h in zip(spec.window_min, spec.window_max, pitch)
        )
        return cls(tuple(spec.window_min), pitch, shape)  # type: ignore[arg-type]

    @property
    def size(self) -> int:
        return int(np.prod(self.shape))

    @property
    def voxel_volume(self) -> float:
        return float(self.pitch[0] * self.pitch[1] * self.pitch[2])

    @property
    def upper(self) -> Vec3:
        return tuple(  # type: ignore[return-value]
            o + (n - 1) * h for o, n, h in zip(self.origin, self.shape, self.pitch)
        )

    def axis(self, a: int) -> np.ndarray:
        return self.origin[a] + self.pitch[a] * np.arange(self.shape[a])

    def centers(self) -> np.ndarray:
        """(size, 3) voxel centers."""
        mesh = np.meshgrid(self.axis(0), self.axis(1), self.axis(2), indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=1)

    def nearest_index(self, a: int, value: float) -> int:
        """Index of the voxel layer nearest to ``value`` along axis ``a``.

        Raises ``ValueError`` when the value lies more than half a pitch outside the grid.
        """
        h = self.pitch[a]
        position = (value - self.origin[a]) / h
        if position < -0.5 - 1e-9 or position > self.shape[a] - 0.5 + 1e-9:
            raise ValueError(f"coordinate {value} outside grid axis {a + 1}")
        return int(min(max(round(position), 0), self.shape[a] - 1))


@dataclass
class PotentialGrid:
    """Scattering potential on a voxel grid, one or three real unknowns per voxel."""

    grid: VoxelGrid
    parameterization: str
    values: np.ndarray

    def __post_init__(self) -> None:
        expected = (self.grid.size, channel_count(self.parameterization))
        self.values = np.asarray(self.values, dtype=float).reshape(expected)

    @classmethod
    def zeros(cls, grid: VoxelGrid, parameterization: str) -> "PotentialGrid":
        return cls(grid, parameterization, np.zeros((grid.size, channel_count(parameterization))))

    @property
    def unknowns(self) -> int:
        return int(self.values.size)

    def as_vector(self) -> np.ndarray:
        return self.values.ravel().copy()


@dataclass
class DiscreteReflector:
    """Midpoint-quadrature samples of a reflector: centers, diagonal values, cell volume."""

    centers: np.ndarray
    diagonal: np.ndarray
    voxel_volume: float

    def __post_init__(self) -> None:
        self.centers = np.asarray(self.centers, dtype=float).reshape(-1, 3)
        self.diagonal = np.asarray(self.diagonal, dtype=float).reshape(-1, 3)

    @property
    def size(self) -> int:
        return int(self.centers.shape[0])
