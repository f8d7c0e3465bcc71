"""Staged runs: modes -> synthesize -> rtm / l1 -> export, with a run manifest."""

import json
import pathlib
import time
from dataclasses import asdict, dataclass, field
from typing import Any, Callable, Dict, Iterable, List, Optional, Tuple, Union

import numpy as np

from ..imaging import L1Params, l1_reconstruct, rtm_image
from ..models import (
    DataVector, ImageVolume, NoiseRecord, Scenario, SensingMatrix, VoxelGrid, receiver_points,
)
from ..physics import assemble_sensing_matrix, enumerate_propagating, scenario_modes, synthesize_data
from ..utils import (
    get_logger, log_error, log_operation, log_stage, log_warning, get_version,
    CorruptedDataError, MissingInputError, PipelineStageError, StaleCacheError,
    ValidationError,
)
from ..utils.file_formats import (
    MatrixHeader, VolumeHeader, data_csv_table, decode_data, decode_matrix, decode_volume,
    encode_data, encode_matrix, encode_volume, file_hash, git_blob_sha1, modes_csv_table,
    read_bytes, write_bytes_atomic, write_csv,
)
from .export_manager import export_figures
from .scenario_manager import ScenarioManager, scenario_hash

logger = get_logger("pipeline_manager")

STAGES = ("modes", "synthesize", "rtm", "l1", "export")
MANIFEST_FILE = "manifest.json"
MODES_FILE = "modes.csv"
DATA_FILE = "data.wgid"
DATA_CSV = "data.csv"
MATRIX_FILE = "matrix.wgim"
RTM_FILE = "rtm.wgiv"
L1_FILE = "l1.wgiv"
L1_REPORT = "l1_report.json"
FIGURE_DIR = "figures"
NOISELESS_EPSILON = 1e-8

PathLike = Union[str, pathlib.Path]


# ---------------------------------------------------------------- artifact files

def save_data(path: PathLike, data: DataVector) -> bytes:
    noise = None if data.noise is None else (data.noise.snr_db, data.noise.seed)
    payload = encode_data(data.values, data.receivers, data.components, noise)
    write_bytes_atomic(path, payload)
    return payload


def load_data(path: PathLike) -> DataVector:
    values, receivers, components, noise = decode_data(read_bytes(path), str(path))
    record = None if noise is None else NoiseRecord(*noise)
    return DataVector(values, receivers, components, record)


def save_volume(path: PathLike, image: ImageVolume) -> bytes:
    grid = image.grid
    header = VolumeHeader(grid.shape, int(image.values.shape[-1]), grid.origin, grid.pitch,
                          image.scenario_hash)
    payload = encode_volume(image.values, header)
    write_bytes_atomic(path, payload)
    return payload


def load_volume(path: PathLike) -> ImageVolume:
    values, header = decode_volume(read_bytes(path), str(path))
    grid = VoxelGrid(header.origin, header.pitch, header.shape)
    return ImageVolume(grid, header.parameterization, values, header.scenario_hash)


def save_matrix(path: PathLike, sensing: SensingMatrix) -> bytes:
    header = MatrixHeader(sensing.shape[0], sensing.shape[1], sensing.scenario_hash,
                          sensing.voxel_volume, sensing.mode_budget, sensing.parameterization)
    payload = encode_matrix(sensing.matrix, header)
    write_bytes_atomic(path, payload)
    return payload


def load_matrix(path: PathLike, scenario: Scenario, grid: VoxelGrid,
                digest: Optional[str] = None) -> SensingMatrix:
    """Cached sensing matrix; raises ``StaleCacheError`` unless it matches the scenario."""
    digest = digest or scenario_hash(scenario)
    matrix, header = decode_matrix(read_bytes(path), str(path))
    receivers = receiver_points(scenario)
    components = tuple(scenario.array.components)
    expected_rows = receivers.shape[0] * len(components)
    if header.scenario_hash != digest:
        raise StaleCacheError(f"Sensing matrix cache is stale: {path}",
                              {"file": str(path), "expected": digest, "found": header.scenario_hash})
    if header.rows != expected_rows or header.cols % grid.size != 0:
        raise StaleCacheError(f"Sensing matrix cache has the wrong shape: {path}",
                              {"file": str(path), "rows": header.rows, "cols": header.cols})
    return SensingMatrix(matrix, header.scenario_hash, header.voxel_volume, header.mode_budget,
                         header.parameterization, grid, receivers, components)


# ---------------------------------------------------------------- manifest

@dataclass
class PipelineOptions:
    """Run options recorded in the manifest; noise flows from the single ``seed``."""

    snr_db: Optional[float] = None
    seed: int = 0
    epsilon: Optional[float] = None
    parameterization: Optional[str] = None
    max_iter: int = 5000
    tol: float = 1e-6
    nonneg: bool = False
    full_channels: bool = False
    normalize_rtm: bool = False
    refresh: bool = False

    def noise(self) -> Optional[NoiseRecord]:
        return None if self.snr_db is None else NoiseRecord(self.snr_db, self.seed)

    def relative_epsilon(self, recorded: Optional[NoiseRecord] = None) -> float:
        """Residual bound relative to ``||d||``; noise-level when noisy, tiny when not.

        ``recorded`` is the noise record stored with the data, used when no SNR was given.
        """
        if self.epsilon is not None:
            return self.epsilon
        snr_db = self.snr_db
        if snr_db is None and recorded is not None:
            snr_db = recorded.snr_db
        if snr_db is not None:
            return 10.0 ** (-snr_db / 20.0)
        return NOISELESS_EPSILON

    def fingerprint(self) -> Dict[str, Any]:
        options = asdict(self)
        options.pop("refresh")
        return options


@dataclass
class RunManifest:
    tool_version: str
    scenario_file: str
    scenario_hash: str
    stages: List[str] = field(default_factory=list)
    options: Dict[str, Any] = field(default_factory=dict)
    inputs: Dict[str, str] = field(default_factory=dict)
    outputs: Dict[str, str] = field(default_factory=dict)
    stage_outputs: Dict[str, List[str]] = field(default_factory=dict)
    timings: Dict[str, float] = field(default_factory=dict)
    solver_reports: Dict[str, Dict[str, Any]] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "RunManifest":
        return cls(**data)


def read_manifest(out_dir: PathLike) -> Optional[RunManifest]:
    path = pathlib.Path(out_dir) / MANIFEST_FILE
    if not path.exists():
        return None
    try:
        return RunManifest.from_dict(json.loads(read_bytes(path).decode("utf-8")))
    except (json.JSONDecodeError, TypeError, UnicodeDecodeError) as e:
        log_warning("pipeline_manager", "Ignoring unreadable manifest",
                    {"file": str(path), "error": str(e)})
        return None


def write_manifest(out_dir: PathLike, manifest: RunManifest) -> pathlib.Path:
    path = pathlib.Path(out_dir) / MANIFEST_FILE
    text = json.dumps(manifest.to_dict(), indent=2, sort_keys=True) + "\n"
    write_bytes_atomic(path, text.encode("utf-8"))
    return path


def verify_manifest(manifest: RunManifest, out_dir: PathLike) -> List[str]:
    """Files named by the manifest that are missing or no longer match their hash."""
    problems = []
    for name, digest in manifest.outputs.items():
        path = pathlib.Path(out_dir) / name
        if not path.exists():
            problems.append(f"{name}: missing")
        elif file_hash(path) != digest:
            problems.append(f"{name}: hash mismatch")
    return problems


# ---------------------------------------------------------------- pipeline

def resolve_stages(stages: Optional[Iterable[str]]) -> Tuple[str, ...]:
    if stages is None:
        return STAGES
    requested = set(stages)
    if "all" in requested:
        return STAGES
    unknown = requested - set(STAGES)
    if unknown:
        raise ValidationError(f"Unknown stage(s): {sorted(unknown)}", {"available": list(STAGES)})
    return tuple(s for s in STAGES if s in requested)


class PipelineManager:
    """Runs the requested stages of one scenario into an output directory."""

    def __init__(self, scenario_path: PathLike, out_dir: PathLike,
                 options: Optional[PipelineOptions] = None):
        self.scenario_path = pathlib.Path(scenario_path)
        scenarios = ScenarioManager(self.scenario_path)
        self.scenario = scenarios.scenario
        self.digest = scenarios.digest
        self.out_dir = pathlib.Path(out_dir)
        self.options = options or PipelineOptions()
        self.previous = read_manifest(self.out_dir)
        self.manifest = RunManifest(
            tool_version=get_version(),
            scenario_file=str(self.scenario_path),
            scenario_hash=self.digest,
            options=self.options.fingerprint(),
            inputs={"scenario": file_hash(self.scenario_path)},
        )
        self._fresh: Dict[str, Any] = {}
        self._rebuilt = False

    @property
    def parameterization(self) -> str:
        if self.options.parameterization:
            return self.options.parameterization
        reflector = self.scenario.reflector
        return reflector.parameterization if reflector is not None else "isotropic"

    def _record(self, stage: str, name: str, payload: bytes) -> None:
        self.manifest.outputs[name] = git_blob_sha1(payload)
        self.manifest.stage_outputs.setdefault(stage, []).append(name)

    def _record_file(self, stage: str, path: pathlib.Path) -> None:
        name = path.relative_to(self.out_dir).as_posix()
        self._record(stage, name, read_bytes(path))

    def _require(self, stage: str, name: str) -> pathlib.Path:
        """Input file of a stage, checked against the previous manifest when not rebuilt."""
        path = self.out_dir / name
        if not path.exists():
            raise MissingInputError(f"Stage '{stage}' needs {name}; run the producing stage first",
                                    {"file": str(path)})
        if name in self.manifest.outputs:
            return path
        if self.previous is not None:
            if self.previous.scenario_hash != self.digest:
                raise StaleCacheError(f"{name} was produced for a different scenario",
                                      {"file": str(path), "expected": self.digest,
                                       "found": self.previous.scenario_hash})
            recorded = self.previous.outputs.get(name)
            if recorded is not None and recorded != file_hash(path):
                raise StaleCacheError(f"{name} changed since it was produced",
                                      {"file": str(path)})
        return path

    def _cached(self, stage: str) -> bool:
        previous = self.previous
        if self._rebuilt or previous is None or stage not in previous.stage_outputs:
            return False
        if previous.scenario_hash != self.digest or previous.options != self.manifest.options:
            return False
        for name in previous.stage_outputs[stage]:
            path = self.out_dir / name
            if not path.exists() or file_hash(path) != previous.outputs.get(name):
                return False
        for name in previous.stage_outputs[stage]:
            self.manifest.outputs[name] = previous.outputs[name]
        self.manifest.stage_outputs[stage] = list(previous.stage_outputs[stage])
        if stage in previous.solver_reports:
            self.manifest.solver_reports[stage] = previous.solver_reports[stage]
        return True

    # stages ---------------------------------------------------------------

    def stage_modes(self) -> None:
        mode_set = enumerate_propagating(self.scenario)
        retained = scenario_modes(self.scenario)
        path = self.out_dir / MODES_FILE
        write_csv(path, *modes_csv_table(retained))
        self._record_file("modes", path)
        self.manifest.solver_reports["modes"] = {
            "lattice_count": mode_set.lattice_count,
            "propagating": len(mode_set),
            "retained": len(retained),
        }

    def stage_synthesize(self) -> None:
        data = synthesize_data(self.scenario, noise=self.options.noise())
        self._record("synthesize", DATA_FILE, save_data(self.out_dir / DATA_FILE, data))
        table, columns = data_csv_table(data.values, data.receivers, data.components)
        write_csv(self.out_dir / DATA_CSV, table, columns)
        self._record_file("synthesize", self.out_dir / DATA_CSV)

    def stage_rtm(self) -> None:
        data = load_data(self._require("rtm", DATA_FILE))
        grid = VoxelGrid.from_spec(self.scenario.imaging.window_grid())
        parameterization = self.parameterization
        if self.options.full_channels and parameterization != "isotropic":
            parameterization = "full"
        image = rtm_image(data, self.scenario, grid, parameterization, self.digest,
                          self.options.normalize_rtm)
        self._record("rtm", RTM_FILE, save_volume(self.out_dir / RTM_FILE, image))

    def _sensing_matrix(self, grid: VoxelGrid) -> SensingMatrix:
        path = self.out_dir / MATRIX_FILE
        if path.exists() and not self.options.refresh:
            sensing = load_matrix(path, self.scenario, grid, self.digest)
            if sensing.parameterization == self.parameterization:
                self._record("l1", MATRIX_FILE, read_bytes(path))
                logger.info(f"Reusing sensing matrix cache {path}")
                return sensing
        sensing = assemble_sensing_matrix(self.scenario, grid, self.parameterization,
                                          scenario_digest=self.digest)
        self._record("l1", MATRIX_FILE, save_matrix(path, sensing))
        return sensing

    def stage_l1(self) -> None:
        data = load_data(self._require("l1", DATA_FILE))
        grid = VoxelGrid.from_spec(self.scenario.imaging.l1_grid())
        sensing = self._sensing_matrix(grid)
        epsilon = self.options.relative_epsilon(data.noise) * float(np.linalg.norm(data.values))
        params = L1Params(epsilon=epsilon, max_iter=self.options.max_iter, tol=self.options.tol,
                          nonneg=self.options.nonneg, seed=self.options.seed)
        image, report = l1_reconstruct(data, sensing, params)
        self._record("l1", L1_FILE, save_volume(self.out_dir / L1_FILE, image))
        report_text = json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n"
        write_bytes_atomic(self.out_dir / L1_REPORT, report_text.encode("utf-8"))
        self._record("l1", L1_REPORT, report_text.encode("utf-8"))
        self.manifest.solver_reports["l1"] = report.to_dict()

    def stage_export(self) -> None:
        exported = 0
        for name, stem in ((RTM_FILE, "rtm"), (L1_FILE, "l1")):
            if not (self.out_dir / name).exists():
                continue
            image = load_volume(self._require("export", name))
            if image.scenario_hash and image.scenario_hash != self.digest:
                raise StaleCacheError(f"{name} was imaged for a different scenario",
                                      {"file": str(self.out_dir / name)})
            for path in export_figures(image, self.scenario, self.out_dir / FIGURE_DIR, stem,
                                       self.options.full_channels):
                self._record_file("export", path)
            exported += 1
        if exported == 0:
            raise MissingInputError("Stage 'export' needs an image volume; run rtm or l1 first",
                                    {"out_dir": str(self.out_dir)})

    # driver ---------------------------------------------------------------

    def _runner(self, stage: str) -> Callable[[], None]:
        return getattr(self, f"stage_{stage}")

    def run(self, stages: Optional[Iterable[str]] = None) -> RunManifest:
        selected = resolve_stages(stages)
        self.out_dir.mkdir(parents=True, exist_ok=True)
        for stage in selected:
            self.manifest.stages.append(stage)
            if not self.options.refresh and self._cached(stage):
                self.manifest.timings[stage] = 0.0
                logger.info(f"Stage {stage}: outputs are fresh, skipped")
                continue
            started = time.perf_counter()
            try:
                self._runner(stage)()
            except (MissingInputError, StaleCacheError, CorruptedDataError):
                raise
            except Exception as e:
                log_error("pipeline_manager", e, f"stage {stage}")
                raise PipelineStageError(stage, e) from e
            self._rebuilt = True
            seconds = time.perf_counter() - started
            self.manifest.timings[stage] = seconds
            log_stage(stage, seconds, {"outputs": self.manifest.stage_outputs.get(stage, [])})
        write_manifest(self.out_dir, self.manifest)
        log_operation("pipeline_manager", "run",
                      {"stages": list(selected), "outputs": len(self.manifest.outputs)})
        return self.manifest


def run_pipeline(config_path: PathLike, stages: Optional[Iterable[str]] = None,
                 out_dir: Optional[PathLike] = None,
                 options: Optional[PipelineOptions] = None) -> RunManifest:
    """Run ``stages`` (all by default) of the scenario at ``config_path``.

    Outputs go to ``out_dir`` (default: ``<scenario stem>_run`` next to the file).
    """
    config_path = pathlib.Path(config_path)
    if out_dir is None:
        out_dir = config_path.with_name(f"{config_path.stem}_run")
    return PipelineManager(config_path, out_dir, options).run(stages)
