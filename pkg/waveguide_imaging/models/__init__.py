"""Models package for the waveguide imaging toolkit."""

from .scenario import (
    ArraySpec, GridSpec, ImagingSpec, ModeSettings, ReflectorSpec, Scenario, SourceSpec,
    WaveguideGeometry, Vec2, Vec3, REFLECTOR_KINDS, TWO_PI,
    FINE_PITCH_CROSS, FINE_PITCH_RANGE, COARSE_PITCH_CROSS, COARSE_PITCH_RANGE,
)
from .grids import (
    DiscreteReflector, PotentialGrid, VoxelGrid, PARAMETERIZATIONS, channel_count, channel_labels,
)
from .receivers import build_receiver_grid, receiver_points
from .results import (
    DataVector, ImageVolume, ModeEntry, ModeSet, NoiseRecord, SensingMatrix, SolverReport,
)

__all__ = [
    'ArraySpec', 'GridSpec', 'ImagingSpec', 'ModeSettings', 'ReflectorSpec', 'Scenario',
    'SourceSpec', 'WaveguideGeometry', 'Vec2', 'Vec3', 'REFLECTOR_KINDS', 'TWO_PI',
    'FINE_PITCH_CROSS', 'FINE_PITCH_RANGE', 'COARSE_PITCH_CROSS', 'COARSE_PITCH_RANGE',
    'DiscreteReflector', 'PotentialGrid', 'VoxelGrid', 'PARAMETERIZATIONS', 'channel_count',
    'channel_labels', 'build_receiver_grid', 'receiver_points',
    'DataVector', 'ImageVolume', 'ModeEntry', 'ModeSet', 'NoiseRecord', 'SensingMatrix',
    'SolverReport',
]
