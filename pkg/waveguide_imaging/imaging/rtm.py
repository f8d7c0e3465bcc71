"""Reverse time migration through the propagating Green's tensor."""

import numpy as np

from ..models import PARAMETERIZATIONS, DataVector, ImageVolume, Scenario, VoxelGrid, receiver_points
from ..physics.forward_model import SensingOperator
from ..utils import get_logger, log_operation, ValidationError

logger = get_logger("rtm")

RECEIVER_ATOL = 1e-9


def check_receivers(data: DataVector, scenario: Scenario) -> None:
    """Raise unless the data were recorded on the scenario's receiver set."""
    expected = receiver_points(scenario)
    components = tuple(scenario.array.components)
    if (data.receivers.shape != expected.shape
            or not np.allclose(data.receivers, expected, rtol=0.0, atol=RECEIVER_ATOL)):
        raise ValidationError("Data receivers do not match the scenario's receiver grid",
                              {"data_receivers": int(data.receivers.shape[0]),
                               "scenario_receivers": int(expected.shape[0])})
    if tuple(data.components) != components:
        raise ValidationError("Data components do not match the scenario",
                              {"data": list(data.components), "scenario": list(components)})


def rtm_image(data: DataVector, scenario: Scenario, grid: VoxelGrid,
              parameterization: str = "isotropic", scenario_digest: str = "",
              normalize: bool = False) -> ImageVolume:
    """Back-propagated, time-reversed data correlated with the reference field.

    Channel ``(m, l)`` at voxel ``y`` is ``E^o_m(y) * sum_q sum_x G_lq(y, x) conj(d_q(x))``;
    the diagonal parameterization keeps ``m = l`` and the isotropic one sums them.
    The ``k**2`` prefactor is dropped, so the diagonal image equals
    ``conj(F^H d) / (k**2 * voxel_volume)``.

    With ``normalize`` every channel is divided by the norm of its sensing column,
    which removes the pull toward voxels where the reference field is strong.
    Voxels with a vanishing column image to zero.
    """
    if parameterization not in PARAMETERIZATIONS:
        raise ValidationError(f"Unknown parameterization: {parameterization}")
    check_receivers(data, scenario)
    operator = SensingOperator(scenario, grid.centers(), grid.voxel_volume, "isotropic",
                               data.receivers)
    back, reference = operator.backpropagate(data.as_vector())
    if parameterization == "isotropic":
        values = np.sum(back * reference, axis=1, keepdims=True)
    elif parameterization == "diagonal":
        values = back * reference
    else:
        values = np.einsum("nm,nl->nml", reference, back).reshape(-1, 9)
    if normalize:
        norms = operator.column_norms(parameterization)
        values = np.divide(values, norms, out=np.zeros_like(values), where=norms > 0.0)
    log_operation("rtm", "rtm_image",
                  {"voxels": grid.size, "parameterization": parameterization,
                   "receivers": int(data.receivers.shape[0]), "normalized": normalize})
    return ImageVolume(grid, parameterization, values, scenario_digest)
