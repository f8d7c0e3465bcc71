"""Unperturbed field of the point-dipole source.

Each mode contributes TE (s=1) and TM (s=2, s=3) terms. With
``P_s = <Phi^(s), J> / ||Phi^(s)||**2`` the outgoing amplitudes are

    a+(1) = -k P_1 e^{i beta L} / (2 beta)              b+(1) = -a+(1)
    a+(2) = [-beta P_2 / (2k) - i k P_3 / (2 lambda)] e^{i beta L}   b+(2) = -a+(2)

and the field below the source plane follows from continuity across it. The
infinite waveguide keeps the direct waves only. Evaluation combines every
exponential into a single decaying phase so that evanescent terms never overflow.
"""

from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np

from ..models import ModeEntry, Scenario, SourceSpec, WaveguideGeometry
from ..utils.exceptions import CutoffError, GeometryError
from ..utils.logger import get_logger
from .modes import ModeTable, _check_index, check_cross_section, evanescent_modes, mode_fields, \
    scenario_modes

logger = get_logger("reference_field")


def source_projection(n1: int, n2: int, s: int, source: SourceSpec,
                      geometry: WaveguideGeometry) -> float:
    """``<Phi_n^(s), J>`` for the dipole ``J = p delta(x - x_s)``."""
    _check_index(n1, n2, s)
    check_cross_section(np.asarray(source.position), geometry)
    phi = mode_fields(np.array([n1]), np.array([n2]), np.asarray(source.position), geometry)
    return float(phi[0, 0, s - 1] @ np.asarray(source.polarization, dtype=float))


@dataclass(frozen=True)
class ModeAmplitudes:
    """Per-mode TE/TM amplitudes of the reference field.

    ``te`` holds ``k P_1 / (2 beta)``; ``tm_curl_free`` holds ``beta P_2 / (2k)`` and
    ``tm_longitudinal`` holds ``i k P_3 / (2 lambda)``. The closed-form amplitudes are
    exposed as properties.
    """

    table: ModeTable
    k: float
    L: float
    terminating: bool
    te: np.ndarray
    tm_curl_free: np.ndarray
    tm_longitudinal: np.ndarray

    @property
    def reflection(self) -> float:
        return 1.0 if self.terminating else 0.0

    def _phases(self) -> Tuple[np.ndarray, np.ndarray]:
        beta = self.table.beta
        with np.errstate(over="ignore", invalid="ignore"):
            return np.exp(1j * beta * self.L), np.exp(-1j * beta * self.L)

    @property
    def tm_outgoing(self) -> np.ndarray:
        """Bracket of ``a+(2)`` without the ``e^{i beta L}`` factor."""
        return -self.tm_curl_free - self.tm_longitudinal

    @property
    def a_plus_te(self) -> np.ndarray:
        forward, _ = self._phases()
        return -self.te * forward

    @property
    def b_plus_te(self) -> np.ndarray:
        forward, _ = self._phases()
        return self.reflection * self.te * forward

    @property
    def b_minus_te(self) -> np.ndarray:
        forward, backward = self._phases()
        return self.te * (self.reflection * forward - backward)

    @property
    def a_plus_tm(self) -> np.ndarray:
        forward, _ = self._phases()
        return self.tm_outgoing * forward

    @property
    def b_plus_tm(self) -> np.ndarray:
        forward, _ = self._phases()
        return -self.reflection * self.tm_outgoing * forward

    @property
    def b_minus_tm(self) -> np.ndarray:
        forward, backward = self._phases()
        return (self.tm_curl_free * (self.reflection * forward - backward)
                + self.tm_longitudinal * (self.reflection * forward + backward))


def compute_amplitudes(scenario: Scenario, modes: Sequence[ModeEntry]) -> ModeAmplitudes:
    """Closed-form amplitudes for every mode of ``modes``."""
    for entry in modes:
        if abs(entry.beta) == 0.0:
            raise CutoffError("Mode at cutoff in amplitude computation", {"n": entry.index})
    table = ModeTable.from_entries(modes, scenario.geometry)
    source = scenario.source
    check_cross_section(np.asarray(source.position), scenario.geometry, closed=False)
    phi = table.evaluate(np.asarray(source.position))[0]
    projection = phi @ np.asarray(source.polarization, dtype=float)
    weights = projection * table.inv_norms
    k, beta, lam = scenario.k, table.beta, table.eigenvalue
    te = k * weights[:, 0] / (2.0 * beta)
    tm_curl_free = beta * weights[:, 1] / (2.0 * k)
    tm_longitudinal = 1j * k * weights[:, 2] / (2.0 * lam)
    logger.debug(f"Computed amplitudes for {len(table)} modes")
    return ModeAmplitudes(table, k, source.L, scenario.geometry.terminating,
                          te, tm_curl_free, tm_longitudinal)


def axial_coefficients(amplitudes: ModeAmplitudes, x3: float,
                       side: str = "auto") -> Tuple[np.ndarray, np.ndarray]:
    """Coefficient functions ``g^(s)(x3)`` and their x3-derivatives, shape (modes, 3).

    ``side`` selects the branch at the source plane: ``"upper"`` for the limit
    from ``x3 > -L``, ``"lower"`` for ``x3 < -L``.
    """
    L = amplitudes.L
    beta = amplitudes.table.beta
    lam = amplitudes.table.eigenvalue
    sigma = amplitudes.reflection
    upper = x3 > -L if side == "auto" else side == "upper"
    g = np.zeros((len(amplitudes.table), 3), dtype=complex)
    dg = np.zeros_like(g)
    coupling = 1j * lam / beta
    c1 = amplitudes.te
    a0 = amplitudes.tm_outgoing
    if upper:
        direct = np.exp(1j * beta * (x3 + L))
        reflected = np.exp(1j * beta * (L - x3))
        g[:, 0] = -c1 * direct + sigma * c1 * reflected
        dg[:, 0] = 1j * beta * (-c1 * direct - sigma * c1 * reflected)
        g[:, 1] = a0 * direct - sigma * a0 * reflected
        dg[:, 1] = 1j * beta * (a0 * direct + sigma * a0 * reflected)
        g[:, 2] = coupling * (-a0 * direct - sigma * a0 * reflected)
        dg[:, 2] = coupling * 1j * beta * (-a0 * direct + sigma * a0 * reflected)
    else:
        direct = np.exp(-1j * beta * (L + x3))
        reflected = np.exp(1j * beta * (L - x3))
        g[:, 0] = c1 * (sigma * reflected - direct)
        g[:, 1] = (amplitudes.tm_curl_free * (sigma * reflected - direct)
                   + amplitudes.tm_longitudinal * (sigma * reflected + direct))
        g[:, 2] = coupling * g[:, 1]
        dg[:] = -1j * beta[:, None] * g
    return g, dg


def _check_points(points: np.ndarray, amplitudes: ModeAmplitudes) -> None:
    check_cross_section(points[:, :2], amplitudes.table.geometry)
    x3 = points[:, 2]
    if np.any(np.isclose(x3, -amplitudes.L, rtol=0.0, atol=1e-12)):
        raise GeometryError("Reference field is not evaluated on the source plane",
                            {"L": amplitudes.L})
    if amplitudes.terminating and np.any(x3 > 1e-12):
        raise GeometryError("Point beyond the end wall", {"max_x3": float(x3.max())})


def eval_reference_field(points: np.ndarray, amplitudes: ModeAmplitudes) -> np.ndarray:
    """``E^o`` at points of shape (N, 3) (or a single point); returns (N, 3) complex."""
    pts = np.asarray(points, dtype=float)
    single = pts.ndim == 1
    pts = pts.reshape(-1, 3)
    _check_points(pts, amplitudes)
    phi = amplitudes.table.evaluate(pts[:, :2])
    field = np.zeros((pts.shape[0], 3), dtype=complex)
    for x3 in np.unique(pts[:, 2]):
        rows = pts[:, 2] == x3
        g, _ = axial_coefficients(amplitudes, float(x3))
        field[rows] = np.einsum("npsc,ps->nc", phi[rows], g)
    return field[0] if single else field


def scenario_amplitudes(scenario: Scenario) -> ModeAmplitudes:
    """Amplitudes over the scenario's retained modes (plus evanescent ones when enabled)."""
    modes = scenario_modes(scenario)
    if scenario.modes.evanescent_field:
        retained = {e.index for e in modes}
        modes = modes + tuple(e for e in evanescent_modes(scenario)
                              if not e.propagating and e.index not in retained)
    return compute_amplitudes(scenario, modes)
