"""Born forward model: sensing matrix, data synthesis and the Born series.

The sensing matrix factors as ``F = A @ B``: ``A`` holds the eigenfunctions at
the receivers (rows (receiver, component), columns (mode, branch)) and ``B``
the per-voxel Green's factors multiplied by the reference field and by
``k**2 * voxel_volume``. Data synthesis and the Born series share
:func:`propagate_sources`, so their first-order results are bitwise identical.
"""

import dataclasses
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from ..models import (
    DataVector, DiscreteReflector, GridSpec, NoiseRecord, PotentialGrid, ReflectorSpec, Scenario,
    SensingMatrix, VoxelGrid, channel_count, receiver_points,
)
from ..utils import (
    get_logger, log_operation, DivergenceError, MemoryBudgetError, ValidationError, get_settings,
    map_row_blocks,
)
from .greens import GreensRequest, green_factors, receiver_factors
from .modes import ModeTable
from .reference_field import ModeAmplitudes, eval_reference_field, scenario_amplitudes

logger = get_logger("forward_model")

BLOCK = 256
COMPLEX_BYTES = 16
SEPARATION_RTOL = 1e-9


def effective_source(potential: np.ndarray, field_values: np.ndarray) -> np.ndarray:
    """``u = V E`` for a scalar (isotropic) or diagonal potential, pointwise."""
    potential = np.asarray(potential, dtype=float)
    field_values = np.asarray(field_values, dtype=complex)
    if potential.ndim == 0 or potential.shape[-1:] != (3,):
        potential = potential[..., None]
    return potential * field_values


def shell_mask(reflector: ReflectorSpec, points: np.ndarray) -> np.ndarray:
    assert reflector.outer_min and reflector.outer_max
    assert reflector.inner_min and reflector.inner_max
    outer = np.all((points > np.asarray(reflector.outer_min))
                   & (points < np.asarray(reflector.outer_max)), axis=1)
    inner = np.all((points > np.asarray(reflector.inner_min))
                   & (points < np.asarray(reflector.inner_max)), axis=1)
    return outer & ~inner


def rasterize_reflector(reflector: ReflectorSpec, scenario: Scenario,
                        pitch: Optional[Tuple[float, float]] = None) -> DiscreteReflector:
    """Midpoint samples of the reflector at the given (cross-range, range) pitch.

    Point cells are subdivided into ``round(cell / pitch)`` sub-cells per axis;
    the shell is sampled on the window-aligned grid of that pitch.
    """
    hc, hr = pitch or scenario.imaging.generation_pitch()
    values = np.asarray(reflector.diagonal(), dtype=float)
    if reflector.kind == "shell":
        grid = VoxelGrid.from_spec(GridSpec(scenario.imaging.window_min,
                                            scenario.imaging.window_max, hc, hr))
        centers = grid.centers()
        centers = centers[shell_mask(reflector, centers)]
        volume = grid.voxel_volume
    else:
        assert reflector.center is not None
        steps = (hc, hc, hr)
        counts = [max(1, int(round(c / h))) for c, h in zip(reflector.cell, steps)]
        sub = [c / n for c, n in zip(reflector.cell, counts)]
        axes = [ctr - c / 2.0 + (np.arange(n) + 0.5) * s
                for ctr, c, n, s in zip(reflector.center, reflector.cell, counts, sub)]
        mesh = np.meshgrid(*axes, indexing="ij")
        centers = np.stack([m.ravel() for m in mesh], axis=1)
        volume = float(np.prod(sub))
    if centers.shape[0] == 0:
        raise ValidationError("Reflector support contains no sample point",
                              {"kind": reflector.kind, "pitch": (hc, hr)})
    return DiscreteReflector(centers, np.tile(values, (centers.shape[0], 1)), volume)


def build_potential_grid(reflector: ReflectorSpec, grid: VoxelGrid,
                         parameterization: Optional[str] = None) -> PotentialGrid:
    """Ground-truth potential on an imaging grid (nearest voxel for point reflectors)."""
    parameterization = parameterization or reflector.parameterization
    potential = PotentialGrid.zeros(grid, parameterization)
    diagonal = np.asarray(reflector.diagonal(), dtype=float)
    if parameterization == "isotropic":
        if not np.allclose(diagonal, diagonal[0]):
            raise ValidationError("Anisotropic reflector needs the diagonal parameterization")
        entry = diagonal[:1]
    elif parameterization == "diagonal":
        entry = diagonal
    else:
        raise ValidationError(f"Potential grids are isotropic or diagonal, not {parameterization}")
    if reflector.kind == "shell":
        potential.values[shell_mask(reflector, grid.centers())] = entry
        return potential
    assert reflector.center is not None
    try:
        index = tuple(grid.nearest_index(a, reflector.center[a]) for a in range(3))
    except ValueError as e:
        raise ValidationError(f"Point reflector is outside the grid: {e}",
                              {"center": list(reflector.center)}) from None
    potential.values[int(np.ravel_multi_index(index, grid.shape))] = entry
    return potential


def propagate_sources(request: GreensRequest, receiver_table: np.ndarray, array_plane: float,
                      points: np.ndarray, sources: np.ndarray, voxel_volume: float) -> np.ndarray:
    """Array trace ``k**2 vol sum_y G^P(x, y) u(y)``, rows ordered like ``receiver_table``."""
    points = np.asarray(points, dtype=float).reshape(-1, 3)
    sources = np.asarray(sources, dtype=complex).reshape(-1, 3)

    def modal_block(start: int, stop: int) -> np.ndarray:
        w = green_factors(request, array_plane, points[start:stop])
        return np.einsum("ypsl,yl->ps", w, sources[start:stop])

    partial = map_row_blocks(modal_block, points.shape[0], BLOCK)
    modal = np.sum(partial, axis=0).ravel()
    return request.k ** 2 * voxel_volume * (receiver_table @ modal)


def _check_budget(rows: int, cols: int) -> None:
    budget = get_settings().memory_budget_bytes
    required = rows * cols * COMPLEX_BYTES
    if required > budget:
        raise MemoryBudgetError(
            "Sensing matrix exceeds the memory budget; decimate the receivers or coarsen the grid",
            {"required_bytes": required, "available_bytes": budget, "rows": rows, "cols": cols},
        )


@dataclass
class SensingOperator:
    """Matrix-free Born sensing operator over a set of voxel centers.

    Columns are ordered (voxel, channel) with one channel (isotropic) or three
    (diagonal); rows (receiver, component).
    """

    scenario: Scenario
    points: np.ndarray
    voxel_volume: float
    parameterization: str = "isotropic"
    receivers: Optional[np.ndarray] = None
    request: Optional[GreensRequest] = None
    amplitudes: Optional[ModeAmplitudes] = None
    _blocks: Dict[int, np.ndarray] = field(default_factory=dict, repr=False)

    def __post_init__(self) -> None:
        if self.parameterization not in ("isotropic", "diagonal"):
            raise ValidationError(f"Sensing matrices are isotropic or diagonal, "
                                  f"not {self.parameterization}")
        self.points = np.asarray(self.points, dtype=float).reshape(-1, 3)
        if self.receivers is None:
            self.receivers = receiver_points(self.scenario)
        if self.request is None:
            self.request = GreensRequest.for_scenario(self.scenario)
        if self.amplitudes is None:
            self.amplitudes = scenario_amplitudes(self.scenario)
        self.components = tuple(self.scenario.array.components)
        self.receiver_table = receiver_factors(self.request, self.receivers, self.components)
        self.channels = channel_count(self.parameterization)
        self._cache_blocks = (len(self.request.table) * 3 * self.cols * COMPLEX_BYTES
                              <= get_settings().memory_budget_bytes // 4)

    @property
    def rows(self) -> int:
        return int(self.receiver_table.shape[0])

    @property
    def cols(self) -> int:
        return int(self.points.shape[0]) * self.channels

    @property
    def array_plane(self) -> float:
        return self.scenario.array_plane

    def reference_field(self, start: int, stop: int) -> np.ndarray:
        assert self.amplitudes is not None
        return eval_reference_field(self.points[start:stop], self.amplitudes)

    def _factors(self, start: int, stop: int) -> Tuple[np.ndarray, np.ndarray]:
        assert self.request is not None
        return green_factors(self.request, self.array_plane, self.points[start:stop]), \
            self.reference_field(start, stop)

    def voxel_block(self, start: int, stop: int) -> np.ndarray:
        """Block of ``B`` for voxels ``start:stop``: shape (3 * modes, (stop - start) * channels)."""
        if start in self._blocks:
            return self._blocks[start]
        assert self.request is not None
        w, e = self._factors(start, stop)
        scaled = w * e[:, None, None, :]
        if self.parameterization == "isotropic":
            block = scaled.sum(axis=3).transpose(1, 2, 0).reshape(-1, stop - start)
        else:
            block = scaled.transpose(1, 2, 0, 3).reshape(-1, (stop - start) * 3)
        block = self.request.k ** 2 * self.voxel_volume * block
        if self._cache_blocks:
            self._blocks[start] = block
        return block

    def _span(self, start: int, stop: int) -> slice:
        return slice(start * self.channels, stop * self.channels)

    def matrix(self) -> np.ndarray:
        """Dense ``F``; refuses matrices beyond the memory budget."""
        _check_budget(self.rows, self.cols)
        out = np.empty((self.rows, self.cols), dtype=complex)

        def fill(start: int, stop: int) -> None:
            out[:, self._span(start, stop)] = self.receiver_table @ self.voxel_block(start, stop)

        map_row_blocks(fill, self.points.shape[0], BLOCK)
        return out

    def apply(self, v: np.ndarray) -> np.ndarray:
        v = np.asarray(v).ravel()
        if v.shape[0] != self.cols:
            raise ValidationError("Vector length does not match the sensing columns",
                                  {"expected": self.cols, "got": int(v.shape[0])})
        partial = map_row_blocks(lambda a, b: self.voxel_block(a, b) @ v[self._span(a, b)],
                                 self.points.shape[0], BLOCK)
        return self.receiver_table @ np.sum(partial, axis=0)

    def adjoint(self, d: np.ndarray) -> np.ndarray:
        d = np.asarray(d, dtype=complex).ravel()
        if d.shape[0] != self.rows:
            raise ValidationError("Data length does not match the sensing rows",
                                  {"expected": self.rows, "got": int(d.shape[0])})
        modal = self.receiver_table.conj().T @ d
        parts = map_row_blocks(lambda a, b: self.voxel_block(a, b).conj().T @ modal,
                               self.points.shape[0], BLOCK)
        return np.concatenate(parts)

    def column_norms(self, parameterization: str = "isotropic") -> np.ndarray:
        """Norms of the image columns without the ``k**2 * voxel_volume`` factor, shape (N, channels).

        Channel ``(m, l)`` of the full tensor has norm ``|E^o_m(y)| * ||A w_l(y)||``.
        """
        assert self.request is not None
        channels = channel_count(parameterization)

        def block(start: int, stop: int) -> np.ndarray:
            w, e = self._factors(start, stop)
            columns = np.einsum("rm,yml->yrl", self.receiver_table,
                                w.reshape(stop - start, -1, 3))
            if parameterization == "isotropic":
                return np.linalg.norm(np.einsum("yrl,yl->yr", columns, e), axis=1)[:, None]
            green = np.linalg.norm(columns, axis=1)
            if parameterization == "diagonal":
                return np.abs(e) * green
            return (np.abs(e)[:, :, None] * green[:, None, :]).reshape(-1, channels)

        return np.concatenate(map_row_blocks(block, self.points.shape[0], BLOCK), axis=0)

    def backpropagate(self, d: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """Time-reversed field ``sum_q sum_x G_lq(y, x) conj(d_q(x))`` and ``E^o``, both (N, 3)."""
        d = np.asarray(d, dtype=complex).ravel()
        if d.shape[0] != self.rows:
            raise ValidationError("Data length does not match the receiver set",
                                  {"expected": self.rows, "got": int(d.shape[0])})
        modal = (self.receiver_table.T @ d.conj()).reshape(-1, 3)

        def block(start: int, stop: int) -> Tuple[np.ndarray, np.ndarray]:
            w, e = self._factors(start, stop)
            return np.einsum("ypsl,ps->yl", w, modal), e

        parts = map_row_blocks(block, self.points.shape[0], BLOCK)
        back = np.concatenate([p[0] for p in parts], axis=0)
        reference = np.concatenate([p[1] for p in parts], axis=0)
        return back, reference


def sensing_operator(scenario: Scenario, grid: VoxelGrid, parameterization: str = "isotropic",
                     receivers: Optional[np.ndarray] = None) -> SensingOperator:
    return SensingOperator(scenario, grid.centers(), grid.voxel_volume, parameterization,
                           receivers)


def assemble_sensing_matrix(scenario: Scenario, grid: VoxelGrid,
                            parameterization: str = "isotropic",
                            receivers: Optional[np.ndarray] = None,
                            scenario_digest: str = "") -> SensingMatrix:
    """Dense Born sensing matrix over ``grid``, tagged with the scenario digest."""
    operator = sensing_operator(scenario, grid, parameterization, receivers)
    matrix = operator.matrix()
    log_operation("forward_model", "assemble_sensing_matrix",
                  {"rows": operator.rows, "cols": operator.cols,
                   "parameterization": parameterization, "modes": scenario.mode_budget})
    assert operator.receivers is not None
    return SensingMatrix(
        matrix=matrix,
        scenario_hash=scenario_digest,
        voxel_volume=grid.voxel_volume,
        mode_budget=scenario.mode_budget,
        parameterization=parameterization,
        grid=grid,
        receivers=operator.receivers,
        components=operator.components,
    )


def add_noise(values: np.ndarray, snr_db: float, seed: int) -> np.ndarray:
    """Additive complex circular Gaussian noise at ``||d|| / sqrt(N) * 10**(-snr/20)``."""
    values = np.asarray(values, dtype=complex)
    if values.size == 0:
        return values.copy()
    sigma = np.linalg.norm(values) / math.sqrt(values.size) * 10.0 ** (-snr_db / 20.0)
    rng = np.random.default_rng(seed)
    noise = rng.standard_normal(values.shape) + 1j * rng.standard_normal(values.shape)
    return values + sigma / math.sqrt(2.0) * noise


def synthesize_data(scenario: Scenario, reflector: Optional[ReflectorSpec] = None,
                    noise: Optional[NoiseRecord] = None,
                    receivers: Optional[np.ndarray] = None) -> DataVector:
    """Born data of the reflector on the data-generation grid, optionally noisy."""
    reflector = reflector or scenario.reflector
    if reflector is None:
        raise ValidationError("Scenario has no reflector to synthesize data for")
    if receivers is None:
        receivers = receiver_points(scenario)
    components = tuple(scenario.array.components)
    samples = rasterize_reflector(reflector, scenario)
    request = GreensRequest.for_scenario(scenario)
    amplitudes = scenario_amplitudes(scenario)
    reference = eval_reference_field(samples.centers, amplitudes)
    sources = effective_source(samples.diagonal, reference)
    table = receiver_factors(request, receivers, components)
    values = propagate_sources(request, table, scenario.array_plane, samples.centers, sources,
                               samples.voxel_volume)
    values = values.reshape(-1, len(components))
    if noise is not None:
        values = add_noise(values, noise.snr_db, noise.seed)
    log_operation("forward_model", "synthesize_data",
                  {"reflector": reflector.kind, "samples": samples.size,
                   "receivers": int(receivers.shape[0]), "noise": noise is not None})
    return DataVector(values, receivers, components, noise)


def sample_diagonal(pitch: Tuple[float, float]) -> float:
    """Diagonal of a rasterization cell with pitches ``(cross, range)``."""
    cross, rng = pitch
    return math.sqrt(2.0 * cross ** 2 + rng ** 2)


def _interaction(table: ModeTable, request: GreensRequest, points: np.ndarray,
                 sources: np.ndarray, voxel_volume: float) -> np.ndarray:
    """``k**2 vol sum_y G(x, y) w(y)`` over ``|x - y| >= request.min_separation``.

    The self pair is always dropped; pairs closer than the separation are too.
    """
    out = np.zeros_like(sources)
    cutoff = max(request.min_separation * (1.0 - SEPARATION_RTOL), 0.0)
    for x3 in np.unique(points[:, 2]):
        layer = np.nonzero(points[:, 2] == x3)[0]
        w = green_factors(request, float(x3), points)
        modal = np.einsum("ypsl,yl->ps", w, sources)
        phi = table.evaluate(points[layer, :2])
        out[layer] = np.einsum("xpsq,ps->xq", phi, modal)
        distances = np.linalg.norm(points[layer, None, :] - points[None, :, :], axis=2)
        for row, index in enumerate(layer):
            near = np.nonzero((distances[row] < cutoff) | (distances[row] == 0.0))[0]
            out[index] -= np.einsum("psq,ypsl,yl->q", phi[row], w[near], sources[near])
    return request.k ** 2 * voxel_volume * out


@dataclass
class BornSeriesResult:
    data: DataVector
    update_norms: List[float]


def born_series_field(scenario: Scenario, reflector: Optional[ReflectorSpec] = None,
                      iterations: int = 1, pitch: Optional[Tuple[float, float]] = None,
                      receivers: Optional[np.ndarray] = None) -> BornSeriesResult:
    """Array trace of the scattered field after ``iterations`` Born-series terms.

    The interior field iterates ``u <- E^o + T(V u)`` where ``T`` is the midpoint
    discretization of the Lippmann-Schwinger integral with the full (propagating
    plus evanescent) Green's tensor. Sample pairs closer than the sample cell
    diagonal are excluded, the self pair included. The default interior grid
    uses the coarse l1 pitches.
    """
    if iterations < 1:
        raise ValidationError("Born series needs at least one iteration", {"m": iterations})
    reflector = reflector or scenario.reflector
    if reflector is None:
        raise ValidationError("Scenario has no reflector")
    if receivers is None:
        receivers = receiver_points(scenario)
    if pitch is None:
        grid = scenario.imaging.l1_grid()
        pitch = (grid.pitch_cross, grid.pitch_range)
    components = tuple(scenario.array.components)
    samples = rasterize_reflector(reflector, scenario, pitch)
    request = GreensRequest.for_scenario(scenario)
    amplitudes = scenario_amplitudes(scenario)
    reference = eval_reference_field(samples.centers, amplitudes)

    field_values = reference
    norms: List[float] = []
    if iterations > 1:
        full_request = dataclasses.replace(
            GreensRequest.for_scenario(scenario, evanescent=True),
            min_separation=sample_diagonal(pitch),
        )
        growth = 0
        for m in range(1, iterations):
            scattered = _interaction(full_request.table, full_request, samples.centers,
                                     effective_source(samples.diagonal, field_values),
                                     samples.voxel_volume)
            updated = reference + scattered
            norms.append(float(np.linalg.norm(updated - field_values)))
            field_values = updated
            if len(norms) >= 2 and norms[-1] > norms[-2]:
                growth += 1
                if growth >= 2:
                    raise DivergenceError("Born series diverges",
                                          {"iteration": m, "update_norms": norms})
            else:
                growth = 0
            logger.debug(f"Born iteration {m}: update norm {norms[-1]:.3e}")

    table = receiver_factors(request, receivers, components)
    values = propagate_sources(request, table, scenario.array_plane, samples.centers,
                               effective_source(samples.diagonal, field_values),
                               samples.voxel_volume)
    log_operation("forward_model", "born_series_field",
                  {"iterations": iterations, "samples": samples.size})
    data = DataVector(values.reshape(-1, len(components)), receivers, components)
    return BornSeriesResult(data, norms)
