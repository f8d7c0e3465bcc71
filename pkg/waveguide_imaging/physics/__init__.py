"""Physics package: waveguide modes, reference field, Green's tensor and Born forward model."""

from .modes import (
    ModeTable, eigenfunction, eigenvalue, enumerate_modes, enumerate_propagating,
    evanescent_modes, multiplicity, norm_squared, scenario_modes, select_first_arriving,
)
from .reference_field import (
    ModeAmplitudes, compute_amplitudes, eval_reference_field, scenario_amplitudes, source_projection,
)
from .greens import (
    GreensRequest, axial_profile_derivatives, dyadic_green, dyadic_green_coefficient_form,
    vector_green,
)
from .forward_model import (
    BornSeriesResult, SensingOperator, add_noise, assemble_sensing_matrix, born_series_field,
    build_potential_grid, effective_source, rasterize_reflector, synthesize_data,
)
from .checks import CheckResult, run_greens_checks, run_mode_checks

__all__ = [
    'ModeTable', 'eigenfunction', 'eigenvalue', 'enumerate_modes', 'enumerate_propagating',
    'evanescent_modes', 'multiplicity', 'norm_squared', 'scenario_modes', 'select_first_arriving',
    'ModeAmplitudes', 'compute_amplitudes', 'eval_reference_field', 'scenario_amplitudes',
    'source_projection',
    'GreensRequest', 'axial_profile_derivatives', 'dyadic_green', 'dyadic_green_coefficient_form',
    'vector_green',
    'BornSeriesResult', 'SensingOperator', 'add_noise', 'assemble_sensing_matrix',
    'born_series_field', 'build_potential_grid', 'effective_source', 'rasterize_reflector',
    'synthesize_data',
    'CheckResult', 'run_greens_checks', 'run_mode_checks',
]
