"""Records produced by the numerical stages."""

from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from .grids import VoxelGrid, channel_count, channel_labels


@dataclass(frozen=True)
class ModeEntry:
    """One transverse eigenmode of the rectangular cross-section."""

    n1: int
    n2: int
    eigenvalue: float
    beta: complex
    multiplicity: int
    norms: Tuple[float, ...]

    @property
    def index(self) -> Tuple[int, int]:
        return (self.n1, self.n2)

    @property
    def propagating(self) -> bool:
        return self.beta.imag == 0.0


@dataclass(frozen=True)
class ModeSet:
    """Ordered modes plus the lattice count reported next to them.

    ``lattice_count`` counts index pairs (n1, n2) in the closed quarter disc
    ``lambda_n < k**2`` including the origin, which carries no field.
    """

    entries: Tuple[ModeEntry, ...]
    lattice_count: int

    def __len__(self) -> int:
        return len(self.entries)


@dataclass(frozen=True)
class NoiseRecord:
    snr_db: float
    seed: int


@dataclass
class DataVector:
    """Array measurements, one row per receiver and one column per measured component."""

    values: np.ndarray
    receivers: np.ndarray
    components: Tuple[int, ...]
    noise: Optional[NoiseRecord] = None

    def __post_init__(self) -> None:
        self.receivers = np.asarray(self.receivers, dtype=float).reshape(-1, 2)
        self.values = np.asarray(self.values, dtype=complex).reshape(
            self.receivers.shape[0], len(self.components)
        )

    def as_vector(self) -> np.ndarray:
        """Row-major (receiver, component) ordering shared with the sensing matrix."""
        return self.values.ravel()

    def scaled(self, alpha: float) -> "DataVector":
        return DataVector(alpha * self.values, self.receivers, self.components, self.noise)


@dataclass
class SensingMatrix:
    matrix: np.ndarray
    scenario_hash: str
    voxel_volume: float
    mode_budget: int
    parameterization: str
    grid: VoxelGrid
    receivers: np.ndarray
    components: Tuple[int, ...]

    @property
    def shape(self) -> Tuple[int, int]:
        return (int(self.matrix.shape[0]), int(self.matrix.shape[1]))


@dataclass
class ImageVolume:
    """Per-voxel complex values, channel last."""

    grid: VoxelGrid
    parameterization: str
    values: np.ndarray
    scenario_hash: str = ""

    def __post_init__(self) -> None:
        shape = tuple(self.grid.shape) + (channel_count(self.parameterization),)
        self.values = np.asarray(self.values, dtype=complex).reshape(shape)

    @property
    def channels(self) -> Tuple[str, ...]:
        return channel_labels(self.parameterization)

    def magnitude(self) -> np.ndarray:
        return np.abs(self.values)

    def channel(self, label: str) -> np.ndarray:
        return self.values[..., self.channels.index(label)]

    def diagonal_channels(self) -> "ImageVolume":
        """Diagonal (m = l) channels of a full 3x3 image."""
        if self.parameterization != "full":
            return self
        picked = self.values[..., [0, 4, 8]]
        return ImageVolume(self.grid, "diagonal", picked, self.scenario_hash)


@dataclass
class SolverReport:
    iterations: int = 0
    residual: float = 0.0
    objective: float = 0.0
    lam: float = 0.0
    converged: bool = False
    warning: str = ""
    step_size: float = 0.0
    stages: List[Dict[str, Any]] = field(default_factory=list)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "iterations": self.iterations,
            "residual": self.residual,
            "objective": self.objective,
            "lambda": self.lam,
            "converged": self.converged,
            "warning": self.warning,
            "step_size": self.step_size,
            "stages": len(self.stages),
            "stage_converged": [bool(stage["converged"]) for stage in self.stages],
        }
