"""Figure slice exports: CSV sheets, PGM quick-looks and a sidecar JSON."""

import json
import pathlib
from typing import Any, Dict, List, Optional, Union

import numpy as np

from ..imaging import ImageSlice, extract_slices
from ..models import ImageVolume, Scenario
from ..utils import get_logger, log_operation, ValidationError
from ..utils.file_formats import encode_pgm, write_bytes_atomic, write_csv

logger = get_logger("export_manager")

PathLike = Union[str, pathlib.Path]


def _axis_metadata(label: str, values: np.ndarray) -> Dict[str, Any]:
    pitch = float(values[1] - values[0]) if values.size > 1 else 0.0
    return {"label": label, "origin": float(values[0]), "pitch": pitch,
            "count": int(values.size), "units": "wavelength"}


def _sheet_table(image_slice: ImageSlice, channel: int) -> np.ndarray:
    rows, columns = np.meshgrid(image_slice.row_axis, image_slice.column_axis, indexing="ij")
    return np.stack([rows.ravel(), columns.ravel(),
                     image_slice.sheet[:, :, channel].ravel()], axis=1)


def export_slice(image_slice: ImageSlice, out_dir: pathlib.Path, stem: str) -> List[pathlib.Path]:
    """Write one plane: a CSV and a PGM per channel plus the sidecar JSON."""
    written: List[pathlib.Path] = []
    sidecar: Dict[str, Any] = {
        "plane": image_slice.plane,
        "value": image_slice.value,
        "index": image_slice.index,
        "units": "wavelength",
        "rows": _axis_metadata(image_slice.row_label, image_slice.row_axis),
        "columns": _axis_metadata(image_slice.column_label, image_slice.column_axis),
        "channels": {},
    }
    for c, label in enumerate(image_slice.channels):
        base = f"{stem}_{image_slice.plane}_{label}"
        csv_path = out_dir / f"{base}.csv"
        pgm_path = out_dir / f"{base}.pgm"
        write_csv(csv_path, _sheet_table(image_slice, c),
                  (image_slice.row_label, image_slice.column_label, "magnitude"))
        write_bytes_atomic(pgm_path, encode_pgm(image_slice.sheet[:, :, c]))
        sidecar["channels"][label] = {
            "csv": csv_path.name,
            "pgm": pgm_path.name,
            "max": float(image_slice.sheet[:, :, c].max()),
        }
        written += [csv_path, pgm_path]
    sidecar_path = out_dir / f"{stem}_{image_slice.plane}.json"
    write_bytes_atomic(sidecar_path, (json.dumps(sidecar, indent=2, sort_keys=True) + "\n").encode())
    written.append(sidecar_path)
    return written


def export_figures(image: ImageVolume, scenario: Scenario, out_dir: PathLike,
                   stem: str = "image", full_channels: bool = False,
                   planes: Optional[Dict[str, float]] = None) -> List[pathlib.Path]:
    """Axial slice through the source x1 and cross-range slice at the reflector depth.

    Full 3x3 images export their diagonal channels unless ``full_channels``.
    """
    if image.grid.size == 0 or image.values.size == 0:
        raise ValidationError("Cannot export an empty image volume")
    if image.parameterization == "full" and not full_channels:
        image = image.diagonal_channels()
    if planes is None:
        y1, y3 = scenario.display_planes()
        planes = {"axial": y1, "cross-range": y3}
    directory = pathlib.Path(out_dir)
    written: List[pathlib.Path] = []
    for plane, value in planes.items():
        written += export_slice(extract_slices(image, plane, value), directory, stem)
    log_operation("export_manager", "export_figures",
                  {"stem": stem, "planes": planes, "files": len(written)})
    return written
