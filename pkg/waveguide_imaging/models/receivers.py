"""Receiver positions in the array plane."""

import math

import numpy as np

from ..utils.exceptions import ValidationError
from ..utils.logger import get_logger
from .scenario import ArraySpec, Scenario, WaveguideGeometry

logger = get_logger("receivers")

# relative to the spacing
BOUNDARY_INSET = 1e-6


def _axis_positions(center: float, size: float, spacing: float, side: float) -> np.ndarray:
    if spacing > size:
        raise ValidationError(
            "Receiver spacing is larger than the aperture side",
            {"spacing": spacing, "aperture": size},
        )
    margin = spacing / 2.0
    lo = max(center - size / 2.0, margin)
    hi = min(center + size / 2.0, side - margin)
    if hi < lo:
        lo = hi = side / 2.0
    count = int(math.floor((hi - lo) / spacing + 1e-9)) + 1
    middle = 0.5 * (lo + hi)
    positions = middle + spacing * (np.arange(count) - (count - 1) / 2.0)
    inset = BOUNDARY_INSET * spacing
    if hi - lo > 2.0 * inset:
        positions = np.clip(positions, lo + inset, hi - inset)
    return positions


def build_receiver_grid(array: ArraySpec, geometry: WaveguideGeometry) -> np.ndarray:
    """Uniform receiver positions (N, 2), ordered row-major with x1 outermost.

    Per axis the grid is centered in the aperture. Where the aperture reaches
    the wall it is pulled in to keep a margin of half a spacing; end points that
    would land on the aperture edge move inside by ``BOUNDARY_INSET`` spacings.
    """
    x1 = _axis_positions(array.center[0], array.size[0], array.spacing, geometry.L1)
    x2 = _axis_positions(array.center[1], array.size[1], array.spacing, geometry.L2)
    mesh = np.meshgrid(x1, x2, indexing="ij")
    return np.stack([mesh[0].ravel(), mesh[1].ravel()], axis=1)


def receiver_points(scenario: Scenario) -> np.ndarray:
    """Receiver grid after decimation (every r-th receiver along each axis)."""
    array, geometry = scenario.array, scenario.geometry
    x1 = _axis_positions(array.center[0], array.size[0], array.spacing, geometry.L1)
    x2 = _axis_positions(array.center[1], array.size[1], array.spacing, geometry.L2)
    r = max(1, array.decimation)
    mesh = np.meshgrid(x1[::r], x2[::r], indexing="ij")
    points = np.stack([mesh[0].ravel(), mesh[1].ravel()], axis=1)
    logger.debug(f"Receiver grid: {points.shape[0]} points (decimation {r})")
    return points
