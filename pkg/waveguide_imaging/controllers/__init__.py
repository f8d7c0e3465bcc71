"""Controllers package for the waveguide imaging toolkit."""

from .scenario_manager import (
    ScenarioManager, load_scenario, write_scenario, scenario_hash, scenario_from_dict, scenario_to_dict, preset,
    preset_path, scale_aperture, with_mode_budget, with_decimation, with_variant,
    build_receiver_grid, receiver_points, PRESET_FILES,
)
from .export_manager import export_figures
from .pipeline_manager import (
    PipelineManager, PipelineOptions, RunManifest, run_pipeline, read_manifest, verify_manifest,
    load_data, save_data, load_volume, save_volume, load_matrix, save_matrix, STAGES,
)

__all__ = [
    'ScenarioManager', 'load_scenario', 'write_scenario', 'scenario_hash', 'scenario_from_dict', 'scenario_to_dict',
    'preset', 'preset_path', 'scale_aperture', 'with_mode_budget', 'with_decimation',
    'with_variant', 'build_receiver_grid', 'receiver_points', 'PRESET_FILES',
    'export_figures',
    'PipelineManager', 'PipelineOptions', 'RunManifest', 'run_pipeline', 'read_manifest',
    'verify_manifest', 'load_data', 'save_data', 'load_volume', 'save_volume', 'load_matrix',
    'save_matrix', 'STAGES',
]
