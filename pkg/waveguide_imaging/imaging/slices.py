"""Plane sheets, support estimates and peak metrics of image volumes."""

from dataclasses import dataclass
from typing import Tuple

import numpy as np
from scipy import ndimage

from ..models import ImageVolume, ReflectorSpec, VoxelGrid
from ..physics.forward_model import shell_mask
from ..utils import ValidationError

PLANES = ("axial", "cross-range")
DEFAULT_SUPPORT_FRACTION = 0.1


@dataclass
class ImageSlice:
    """Magnitude sheet of one plane, shape (rows, columns, channels).

    Axial sheets (fixed y1) have rows along y2 and columns along y3;
    cross-range sheets (fixed y3) have rows along y1 and columns along y2.
    """

    plane: str
    value: float
    index: int
    sheet: np.ndarray
    row_axis: np.ndarray
    column_axis: np.ndarray
    row_label: str
    column_label: str
    channels: Tuple[str, ...]


def extract_slices(image: ImageVolume, plane: str, value: float) -> ImageSlice:
    """Nearest voxel sheet of ``|image|`` at ``y1 = value`` (axial) or ``y3 = value``."""
    grid = image.grid
    axis = {"axial": 0, "cross-range": 2}.get(plane)
    if axis is None:
        raise ValidationError(f"Unknown plane: {plane}", {"available": list(PLANES)})
    try:
        index = grid.nearest_index(axis, value)
    except ValueError:
        raise ValidationError(f"Plane {plane} at {value} lies outside the imaging window",
                              {"lower": grid.origin[axis], "upper": grid.upper[axis]}) from None
    magnitude = image.magnitude()
    if axis == 0:
        sheet = magnitude[index]
        rows, columns, labels = grid.axis(1), grid.axis(2), ("y2", "y3")
    else:
        sheet = magnitude[:, :, index]
        rows, columns, labels = grid.axis(0), grid.axis(1), ("y1", "y2")
    return ImageSlice(plane, float(grid.axis(axis)[index]), index, sheet, rows, columns,
                      labels[0], labels[1], image.channels)


def _voxel_magnitude(image: ImageVolume) -> np.ndarray:
    return np.linalg.norm(image.values, axis=-1)


def support_estimate(image: ImageVolume, fraction: float = DEFAULT_SUPPORT_FRACTION) -> np.ndarray:
    """Voxel indices (K, 3) whose magnitude exceeds ``fraction`` of the maximum."""
    if not 0.0 < fraction < 1.0:
        raise ValidationError("Support fraction must lie in (0, 1)", {"fraction": fraction})
    magnitude = _voxel_magnitude(image)
    peak = float(magnitude.max(initial=0.0))
    if peak == 0.0:
        raise ValidationError("Support of an all-zero image is undefined")
    return np.argwhere(magnitude > fraction * peak)


def peak_location(image: ImageVolume, channel: int = -1) -> Tuple[int, int, int]:
    """Index of the largest magnitude (over all channels when ``channel`` is -1)."""
    magnitude = _voxel_magnitude(image) if channel < 0 else np.abs(image.values[..., channel])
    return tuple(int(i) for i in np.unravel_index(np.argmax(magnitude), magnitude.shape))  # type: ignore[return-value]


def peak_sidelobe_ratio(image: ImageVolume, channel: int = -1) -> float:
    """Peak magnitude over the largest other local maximum (3x3x3 neighbourhood)."""
    magnitude = _voxel_magnitude(image) if channel < 0 else np.abs(image.values[..., channel])
    maxima = magnitude == ndimage.maximum_filter(magnitude, size=3, mode="nearest")
    peaks = np.sort(magnitude[maxima])[::-1]
    if peaks.size == 0 or peaks[0] == 0.0:
        raise ValidationError("Peak metrics of an all-zero image are undefined")
    if peaks.size == 1 or peaks[1] == 0.0:
        return float("inf")
    return float(peaks[0] / peaks[1])


def energy_fraction(image: ImageVolume, mask: np.ndarray) -> float:
    """Share of ``sum |v|^2`` carried by the voxels in ``mask`` (grid-shaped boolean)."""
    energy = np.sum(np.abs(image.values) ** 2, axis=-1)
    total = float(energy.sum())
    if total == 0.0:
        raise ValidationError("Energy fraction of an all-zero image is undefined")
    return float(energy[np.asarray(mask, dtype=bool).reshape(energy.shape)].sum() / total)


def shell_rear_mask(grid: VoxelGrid, reflector: ReflectorSpec) -> np.ndarray:
    """Shell voxels on the end-wall side of the shell's mid depth, grid-shaped."""
    if reflector.kind != "shell":
        raise ValidationError("Rear-half mask needs a shell reflector")
    centers = grid.centers()
    inside = shell_mask(reflector, centers) & (centers[:, 2] > reflector.depth())
    return inside.reshape(grid.shape)


def count_above(image: ImageVolume, fraction: float) -> int:
    """Number of voxels above ``fraction`` of the peak magnitude."""
    return int(support_estimate(image, fraction).shape[0])
