"""Eigenmodes of the vectorial Laplacian on the rectangular cross-section.

For an index pair ``n = (n1, n2)`` the eigenvalue is
``lambda_n = (pi*n1/L1)**2 + (pi*n2/L2)**2``. Pairs on an axis (``n1*n2 == 0``)
carry a single transverse mode; interior pairs carry three: a divergence-free
transverse field (s=1), a curl-free transverse field (s=2) and a longitudinal
field (s=3).
"""

import math
from dataclasses import dataclass
from typing import Iterable, List, Sequence, Tuple

import numpy as np
from scipy.integrate import simpson

from ..models import ModeEntry, ModeSet, Scenario, WaveguideGeometry
from ..utils.exceptions import CutoffError, GeometryError, ModeIndexError, ValidationError
from ..utils.logger import get_logger, log_operation, log_warning

logger = get_logger("modes")

DISTINCT_RTOL = 1e-12


def _check_index(n1: int, n2: int, s: int = 1) -> None:
    if n1 < 0 or n2 < 0 or (n1 == 0 and n2 == 0):
        raise ModeIndexError(f"Invalid mode index ({n1}, {n2})", {"n1": n1, "n2": n2})
    if s < 1 or s > multiplicity(n1, n2):
        raise ModeIndexError(
            f"Branch s={s} does not exist for ({n1}, {n2})",
            {"n1": n1, "n2": n2, "s": s, "multiplicity": multiplicity(n1, n2)},
        )


def multiplicity(n1: int, n2: int) -> int:
    return 1 if n1 * n2 == 0 else 3


def eigenvalue(n1: int, n2: int, geometry: WaveguideGeometry) -> float:
    """Eigenvalue of the index pair; (0, 0) is not a mode."""
    _check_index(n1, n2)
    return (math.pi * n1 / geometry.L1) ** 2 + (math.pi * n2 / geometry.L2) ** 2


def axial_wavenumber(k: float, lam: float, tolerance: float = 1e-9) -> complex:
    """``sqrt(k**2 - lam)`` on the branch with nonnegative imaginary part.

    Raises:
        CutoffError: if ``|k**2 - lam| < tolerance * k**2``.
    """
    if k <= 0 or lam <= 0:
        raise ValidationError("Wavenumber and eigenvalue must be positive", {"k": k, "lambda": lam})
    gap = k * k - lam
    if abs(gap) < tolerance * k * k:
        raise CutoffError("Mode is at cutoff", {"k": k, "lambda": lam, "gap": gap})
    if gap > 0:
        return complex(math.sqrt(gap), 0.0)
    return complex(0.0, math.sqrt(-gap))


def norm_squared(n1: int, n2: int, s: int, geometry: WaveguideGeometry) -> float:
    _check_index(n1, n2, s)
    area = geometry.L1 * geometry.L2
    if n1 * n2 == 0:
        return area / 2.0
    if s == 3:
        return area / 4.0
    return eigenvalue(n1, n2, geometry) * area / 4.0


def mode_fields(n1: np.ndarray, n2: np.ndarray, points: np.ndarray,
                geometry: WaveguideGeometry) -> np.ndarray:
    """Evaluate every branch of every mode at every cross-range point.

    Returns an array of shape (points, modes, 3, 3) indexed as
    [point, mode, s - 1, component]. Branches that do not exist are zero.
    """
    n1 = np.asarray(n1, dtype=float)
    n2 = np.asarray(n2, dtype=float)
    points = np.asarray(points, dtype=float).reshape(-1, 2)
    a1 = math.pi * n1 / geometry.L1
    a2 = math.pi * n2 / geometry.L2
    t1 = points[:, 0:1] * a1[None, :]
    t2 = points[:, 1:2] * a2[None, :]
    s1, c1 = np.sin(t1), np.cos(t1)
    s2, c2 = np.sin(t2), np.cos(t2)

    full = (n1 * n2) != 0
    on_x1_axis = n2 == 0
    on_x2_axis = n1 == 0

    out = np.zeros((points.shape[0], n1.shape[0], 3, 3))
    out[:, :, 0, 0] = np.where(full, a2 * c1 * s2, np.where(on_x2_axis, s2, 0.0))
    out[:, :, 0, 1] = np.where(full, -a1 * s1 * c2, np.where(on_x1_axis, s1, 0.0))
    out[:, :, 1, 0] = np.where(full, a1 * c1 * s2, 0.0)
    out[:, :, 1, 1] = np.where(full, a2 * s1 * c2, 0.0)
    out[:, :, 2, 2] = np.where(full, s1 * s2, 0.0)
    return out


def check_cross_section(points: np.ndarray, geometry: WaveguideGeometry,
                        closed: bool = True) -> None:
    points = np.asarray(points, dtype=float).reshape(-1, 2)
    eps = 1e-12 * max(geometry.L1, geometry.L2)
    if closed:
        bad = ((points[:, 0] < -eps) | (points[:, 0] > geometry.L1 + eps)
               | (points[:, 1] < -eps) | (points[:, 1] > geometry.L2 + eps))
    else:
        bad = ((points[:, 0] <= 0) | (points[:, 0] >= geometry.L1)
               | (points[:, 1] <= 0) | (points[:, 1] >= geometry.L2))
    if np.any(bad):
        first = points[np.argmax(bad)]
        raise GeometryError(
            "Point outside the waveguide cross-section",
            {"point": [float(first[0]), float(first[1])], "L1": geometry.L1, "L2": geometry.L2},
        )


def eigenfunction(n1: int, n2: int, s: int, x: Sequence[float],
                  geometry: WaveguideGeometry) -> np.ndarray:
    """Real 3-vector ``Phi_n^(s)(x)`` at a cross-range point of the closed section."""
    _check_index(n1, n2, s)
    check_cross_section(np.asarray(x), geometry)
    fields = mode_fields(np.array([n1]), np.array([n2]), np.asarray(x, dtype=float), geometry)
    return fields[0, 0, s - 1].copy()


def quadrature_inner_product(first: Tuple[int, int, int], second: Tuple[int, int, int],
                             geometry: WaveguideGeometry, samples: int = 401) -> float:
    """Tensor-product composite Simpson quadrature of ``<Phi_a, Phi_b>`` over the section."""
    _check_index(*first)
    _check_index(*second)
    x1 = np.linspace(0.0, geometry.L1, samples)
    x2 = np.linspace(0.0, geometry.L2, samples)
    grid = np.stack(np.meshgrid(x1, x2, indexing="ij"), axis=-1).reshape(-1, 2)
    pairs = mode_fields(np.array([first[0], second[0]]), np.array([first[1], second[1]]),
                        grid, geometry)
    product = np.einsum("pc,pc->p", pairs[:, 0, first[2] - 1], pairs[:, 1, second[2] - 1])
    product = product.reshape(samples, samples)
    return float(simpson(simpson(product, x=x2, axis=1), x=x1))


def make_mode_entry(n1: int, n2: int, geometry: WaveguideGeometry, k: float,
                    tolerance: float = 1e-9) -> ModeEntry:
    lam = eigenvalue(n1, n2, geometry)
    m = multiplicity(n1, n2)
    norms = tuple(norm_squared(n1, n2, s, geometry) for s in range(1, m + 1))
    return ModeEntry(n1, n2, lam, axial_wavenumber(k, lam, tolerance), m, norms)


def _index_pairs_below(geometry: WaveguideGeometry, lambda_max: float) -> List[Tuple[float, int, int]]:
    n1_max = int(math.floor(geometry.L1 * math.sqrt(lambda_max) / math.pi)) + 1
    n2_max = int(math.floor(geometry.L2 * math.sqrt(lambda_max) / math.pi)) + 1
    pairs = []
    for n1 in range(n1_max + 1):
        for n2 in range(n2_max + 1):
            if n1 == 0 and n2 == 0:
                continue
            lam = eigenvalue(n1, n2, geometry)
            if lam < lambda_max:
                pairs.append((lam, n1, n2))
    pairs.sort()
    return pairs


def _check_distinct(pairs: Sequence[Tuple[float, int, int]]) -> None:
    for (lam_a, a1, a2), (lam_b, b1, b2) in zip(pairs, pairs[1:]):
        if abs(lam_b - lam_a) <= DISTINCT_RTOL * lam_b:
            raise ValidationError(
                "Two enumerated eigenvalues coincide; the cross-section ratio is degenerate",
                {"first": (a1, a2), "second": (b1, b2), "eigenvalue": lam_a},
            )


def enumerate_modes(geometry: WaveguideGeometry, k: float, lambda_max: float,
                    tolerance: float = 1e-9) -> List[ModeEntry]:
    """All modes with ``lambda_n < lambda_max`` in ascending eigenvalue order.

    Modes within the cutoff tolerance of ``k**2`` are skipped with a warning.
    """
    pairs = _index_pairs_below(geometry, lambda_max)
    _check_distinct(pairs)
    entries = []
    for lam, n1, n2 in pairs:
        try:
            entries.append(make_mode_entry(n1, n2, geometry, k, tolerance))
        except CutoffError as e:
            log_warning("modes", "Skipping mode at cutoff", {"n": (n1, n2), **e.details})
    return entries


def enumerate_propagating(scenario: Scenario) -> ModeSet:
    """Propagating modes of the scenario, ascending eigenvalue, ties by (n1, n2)."""
    geometry, k = scenario.geometry, scenario.k
    tolerance = scenario.modes.cutoff_tolerance
    k2 = k * k
    entries = tuple(
        e for e in enumerate_modes(geometry, k, k2, tolerance) if e.propagating
    )
    lattice_count = len(_index_pairs_below(geometry, k2)) + 1
    log_operation("modes", "enumerate_propagating",
                  {"modes": len(entries), "lattice_count": lattice_count})
    return ModeSet(entries, lattice_count)


def select_first_arriving(modes: Iterable[ModeEntry], M: int) -> Tuple[ModeEntry, ...]:
    """The M modes with the smallest eigenvalues (largest axial wavenumbers)."""
    ordered = tuple(modes)
    if M < 1 or M > len(ordered):
        raise ValidationError(
            f"Mode budget {M} outside 1..{len(ordered)}",
            {"budget": M, "available": len(ordered)},
        )
    return ordered[:M]


def scenario_modes(scenario: Scenario) -> Tuple[ModeEntry, ...]:
    """The retained propagating modes of a scenario."""
    return select_first_arriving(enumerate_propagating(scenario).entries, scenario.mode_budget)


def evanescent_modes(scenario: Scenario) -> Tuple[ModeEntry, ...]:
    """Propagating and evanescent modes with ``lambda_n < evanescent_cutoff * k**2``."""
    lambda_max = scenario.modes.evanescent_cutoff * scenario.k ** 2
    return tuple(enumerate_modes(scenario.geometry, scenario.k, lambda_max,
                                 scenario.modes.cutoff_tolerance))


def verify_norms(entries: Iterable[ModeEntry], geometry: WaveguideGeometry,
                 samples: int = 401) -> float:
    """Largest relative deviation between closed-form norms and the quadrature oracle."""
    worst = 0.0
    for entry in entries:
        for s, closed in enumerate(entry.norms, start=1):
            index = (entry.n1, entry.n2, s)
            oracle = quadrature_inner_product(index, index, geometry, samples)
            worst = max(worst, abs(oracle - closed) / closed)
    logger.debug(f"Norm verification worst relative deviation: {worst:.3e}")
    return worst


@dataclass(frozen=True)
class ModeTable:
    """Column view of a mode list used by the vectorized kernels."""

    n1: np.ndarray
    n2: np.ndarray
    eigenvalue: np.ndarray
    beta: np.ndarray
    multiplicity: np.ndarray
    inv_norms: np.ndarray
    geometry: WaveguideGeometry

    @classmethod
    def from_entries(cls, entries: Sequence[ModeEntry], geometry: WaveguideGeometry) -> "ModeTable":
        if len(entries) == 0:
            raise ValidationError("Mode set is empty")
        inv_norms = np.zeros((len(entries), 3))
        for p, entry in enumerate(entries):
            inv_norms[p, :entry.multiplicity] = 1.0 / np.asarray(entry.norms)
        return cls(
            n1=np.array([e.n1 for e in entries]),
            n2=np.array([e.n2 for e in entries]),
            eigenvalue=np.array([e.eigenvalue for e in entries]),
            beta=np.array([e.beta for e in entries], dtype=complex),
            multiplicity=np.array([e.multiplicity for e in entries]),
            inv_norms=inv_norms,
            geometry=geometry,
        )

    def __len__(self) -> int:
        return int(self.n1.shape[0])

    def evaluate(self, points: np.ndarray) -> np.ndarray:
        """(points, modes, 3, 3) eigenfunction values, see :func:`mode_fields`."""
        return mode_fields(self.n1, self.n2, points, self.geometry)
