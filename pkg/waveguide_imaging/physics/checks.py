"""Property checks of the mode basis and the Green's tensor.

Each check returns a :class:`CheckResult`; ``run_greens_checks`` and
``run_mode_checks`` gather the suites printed by the ``greens-check`` and
``modes --verify`` commands.
"""

import dataclasses
import math
from dataclasses import dataclass
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np

from ..models import Scenario
from ..utils.logger import get_logger, log_operation
from .greens import (
    GreensRequest, axial_profile_derivatives, dyadic_green, dyadic_green_coefficient_form,
    grad_div_closed_form, grad_div_finite_difference, mode_term,
)
from .modes import enumerate_propagating, make_mode_entry, multiplicity, \
    quadrature_inner_product, scenario_modes, verify_norms
from .reference_field import compute_amplitudes

logger = get_logger("checks")

RECIPROCITY_TOL = 1e-10
WALL_TOL = 1e-10
GAUGE_TOL = 1e-10
GRAD_DIV_TOL = 1e-5
KERNEL_TOL = 1e-6
SLOPE_TARGET = 2.0
SLOPE_TOL = 0.1
NORM_TOL = 1e-10
ORTHOGONALITY_TOL = 1e-8
ORTHOGONALITY_PAIRS = 12
EVANESCENT_TOL = 1e-6
# h = 1e-4 sits at the round-off floor of the three-point stencil
FD_STEPS = (1e-2, 3e-3, 1e-3)
RECIPROCITY_MODES = 50


@dataclass(frozen=True)
class CheckResult:
    name: str
    value: float
    tolerance: float
    passed: bool
    detail: str = ""


def _result(name: str, value: float, tolerance: float, detail: str = "") -> CheckResult:
    return CheckResult(name, float(value), tolerance, bool(value <= tolerance), detail)


def _with_budget(scenario: Scenario, budget: int) -> Scenario:
    available = len(enumerate_propagating(scenario))
    modes = dataclasses.replace(scenario.modes, budget=min(budget, available))
    return dataclasses.replace(scenario, modes=modes)


def _interior_points(scenario: Scenario, rng: np.random.Generator, count: int,
                     x3: Optional[float] = None) -> np.ndarray:
    geometry = scenario.geometry
    lo = np.array([0.02 * geometry.L1, 0.02 * geometry.L2, -0.95 * scenario.source.L])
    hi = np.array([0.98 * geometry.L1, 0.98 * geometry.L2, -0.05 * scenario.source.L])
    points = lo + (hi - lo) * rng.random((count, 3))
    if x3 is not None:
        points[:, 2] = x3
    return points


def reciprocity_check(scenario: Scenario, pairs: int = 100, seed: int = 0) -> CheckResult:
    """``G(x, y) = G(y, x)^T`` on random interior pairs."""
    request = GreensRequest.for_scenario(_with_budget(scenario, RECIPROCITY_MODES))
    rng = np.random.default_rng(seed)
    xs = _interior_points(scenario, rng, pairs)
    ys = _interior_points(scenario, rng, pairs)
    worst = 0.0
    for x, y in zip(xs, ys):
        forward = dyadic_green(x, y, request)
        backward = dyadic_green(y, x, request)
        worst = max(worst, np.linalg.norm(forward - backward.T) / np.linalg.norm(forward))
    return _result("reciprocity", worst, RECIPROCITY_TOL, f"{pairs} pairs, M={len(request.table)}")


def _tangential_ratio(tensor: np.ndarray, tangential: Sequence[int]) -> float:
    worst = 0.0
    scale = max(float(np.linalg.norm(tensor, axis=0).max()), np.finfo(float).tiny)
    for l in range(3):
        column = tensor[:, l]
        worst = max(worst, float(np.linalg.norm(column[list(tangential)])) / scale)
    return worst


def end_wall_check(scenario: Scenario, pairs: int = 20, seed: int = 1) -> CheckResult:
    """Tangential components of every column vanish on the end wall."""
    request = GreensRequest.for_scenario(scenario, terminating=True)
    rng = np.random.default_rng(seed)
    xs = _interior_points(scenario, rng, pairs, x3=0.0)
    ys = _interior_points(scenario, rng, pairs)
    worst = max(_tangential_ratio(dyadic_green(x, y, request), (0, 1)) for x, y in zip(xs, ys))
    return _result("end wall", worst, WALL_TOL, f"{pairs} pairs")


def side_wall_check(scenario: Scenario, pairs: int = 20, seed: int = 2) -> CheckResult:
    """Tangential components vanish on the four side walls."""
    request = GreensRequest.for_scenario(scenario)
    geometry = scenario.geometry
    rng = np.random.default_rng(seed)
    walls = ((0, 0.0, (1, 2)), (0, geometry.L1, (1, 2)), (1, 0.0, (0, 2)), (1, geometry.L2, (0, 2)))
    worst = 0.0
    for axis, position, tangential in walls:
        xs = _interior_points(scenario, rng, pairs)
        xs[:, axis] = position
        ys = _interior_points(scenario, rng, pairs)
        for x, y in zip(xs, ys):
            worst = max(worst, _tangential_ratio(dyadic_green(x, y, request), tangential))
    return _result("side walls", worst, WALL_TOL, f"{4 * pairs} pairs")


def _second_difference(f, x0: np.ndarray, h: float) -> np.ndarray:
    """Sum over axes of the three-point second difference, using the realized offsets."""
    total = 0.0
    center = f(x0)
    for a in range(3):
        plus, minus = x0.copy(), x0.copy()
        plus[a] += h
        minus[a] -= h
        hp, hm = plus[a] - x0[a], x0[a] - minus[a]
        total = total + 2.0 * ((f(plus) - center) / hp - (center - f(minus)) / hm) / (hp + hm)
    return total


def helmholtz_residuals(scenario: Scenario, steps: Sequence[float] = FD_STEPS,
                        seed: int = 3, terms: int = 4) -> List[Tuple[str, List[float]]]:
    """Relative ``(Delta + k**2)`` residual of single mode terms per finite-difference step."""
    request = GreensRequest.for_scenario(scenario)
    entries = scenario_modes(scenario)
    rng = np.random.default_rng(seed)
    k2 = scenario.k ** 2
    picks = [entries[int(i)] for i in np.linspace(0, len(entries) - 1, terms)]
    out = []
    for entry in picks:
        for s in range(1, entry.multiplicity + 1):
            # small coordinates keep the phase round-off well below the truncation error
            x0 = np.array([0.5, 0.5, -1.5]) + rng.random(3)
            y0 = np.array([0.5, 0.5, -0.5]) + rng.random(3)
            y0[2] = x0[2] - 1.0
            for j in (1, 2, 3):

                def f(point: np.ndarray) -> np.ndarray:
                    return mode_term(entry, s, j, point[None, :], y0, request)[0]

                scale = k2 * np.linalg.norm(f(x0))
                if scale == 0.0:
                    continue
                residuals = [float(np.linalg.norm(_second_difference(f, x0, h) + k2 * f(x0))
                                   / scale) for h in steps]
                out.append((f"n=({entry.n1},{entry.n2}) s={s} j={j}", residuals))
                break
    return out


def helmholtz_check(scenario: Scenario, steps: Sequence[float] = FD_STEPS) -> CheckResult:
    """Worst deviation of the log-log convergence slope from 2."""
    worst, label = 0.0, ""
    logs = np.log10(np.asarray(steps))
    for name, residuals in helmholtz_residuals(scenario, steps):
        slope = np.polyfit(logs, np.log10(residuals), 1)[0]
        if abs(slope - SLOPE_TARGET) >= worst:
            worst, label = abs(slope - SLOPE_TARGET), f"{name} slope {slope:.3f}"
    return _result("helmholtz slope", worst, SLOPE_TOL, label)


def kernel_derivative_check(scenario: Scenario, samples: int = 10, seed: int = 4,
                            h: float = 1e-5) -> CheckResult:
    """Closed-form axial kernel derivative against a central difference."""
    entries = scenario_modes(scenario)
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(samples):
        entry = entries[int(rng.integers(len(entries)))]
        s = int(rng.integers(1, entry.multiplicity + 1))
        x3, y3 = -scenario.source.L * rng.random(2)
        if abs(x3 - y3) < 10 * h:
            continue
        terminating = scenario.geometry.terminating
        _, derivative, _ = axial_profile_derivatives(entry, s, x3, y3, terminating)
        up, _, _ = axial_profile_derivatives(entry, s, x3 + h, y3, terminating)
        down, _, _ = axial_profile_derivatives(entry, s, x3 - h, y3, terminating)
        scale = max(abs(entry.beta), 1.0)
        worst = max(worst, abs((up - down) / (2 * h) - derivative) / scale)
    return _result("kernel derivative", worst, KERNEL_TOL, f"h={h}")


def grad_div_check(scenario: Scenario, pairs: int = 3, seed: int = 5,
                   h: float = 1e-4) -> CheckResult:
    """Closed-form grad-div assembly against nested central differences."""
    request = GreensRequest.for_scenario(_with_budget(scenario, RECIPROCITY_MODES))
    rng = np.random.default_rng(seed)
    worst = 0.0
    for x, y in zip(_interior_points(scenario, rng, pairs), _interior_points(scenario, rng, pairs)):
        closed = grad_div_closed_form(x, y, request)
        numeric = grad_div_finite_difference(x, y, request, h)
        worst = max(worst, np.linalg.norm(closed - numeric) / np.linalg.norm(closed))
    return _result("grad div", worst, GRAD_DIV_TOL, f"h={h}")


def gauge_check(scenario: Scenario, pairs: int = 20, seed: int = 6,
                shift: complex = 0.37 - 0.21j) -> CheckResult:
    """Coefficient-form assembly with a shifted free parameter against the bracket form."""
    request = GreensRequest.for_scenario(_with_budget(scenario, RECIPROCITY_MODES),
                                         terminating=True)
    rng = np.random.default_rng(seed)
    worst = 0.0
    for x, y in zip(_interior_points(scenario, rng, pairs), _interior_points(scenario, rng, pairs)):
        bracket = dyadic_green(x, y, request)
        shifted = dyadic_green_coefficient_form(x, y, request, gauge_shift=shift)
        worst = max(worst, np.linalg.norm(bracket - shifted) / np.linalg.norm(bracket))
    return _result("gauge", worst, GAUGE_TOL, f"shift={shift}")


def evanescent_decay_check(scenario: Scenario, pairs: int = 5, seed: int = 7,
                           separation: float = 1.5, cutoffs: Tuple[float, float] = (9.0, 16.0)
                           ) -> CheckResult:
    """Raising the evanescent cutoff leaves the tensor at axial distance ``separation`` unchanged."""
    requests = []
    for cutoff in cutoffs:
        modes = dataclasses.replace(scenario.modes, evanescent_cutoff=cutoff)
        requests.append(GreensRequest.for_scenario(dataclasses.replace(scenario, modes=modes),
                                                   evanescent=True))
    rng = np.random.default_rng(seed)
    worst = 0.0
    for x, y in zip(_interior_points(scenario, rng, pairs), _interior_points(scenario, rng, pairs)):
        y[2] = x[2] - separation if x[2] - separation > -scenario.source.L else x[2] + separation
        low, high = (dyadic_green(x, y, r) for r in requests)
        worst = max(worst, np.linalg.norm(high - low) / np.linalg.norm(high))
    return _result("evanescent decay", worst, EVANESCENT_TOL,
                   f"|x3-y3|={separation}, cutoffs {cutoffs[0]}k^2 vs {cutoffs[1]}k^2")


def run_greens_checks(scenario: Scenario, pairs: int = 100, seed: int = 0,
                      evanescent: bool = False) -> List[CheckResult]:
    """The Green's tensor property suite."""
    results = [
        reciprocity_check(scenario, pairs, seed),
        side_wall_check(scenario),
        helmholtz_check(scenario),
        kernel_derivative_check(scenario),
        grad_div_check(scenario),
    ]
    if scenario.geometry.terminating:
        results.insert(1, end_wall_check(scenario))
        results.append(gauge_check(scenario))
    if evanescent:
        results.append(evanescent_decay_check(scenario))
    log_operation("checks", "run_greens_checks",
                  {"passed": sum(r.passed for r in results), "total": len(results)})
    return results


ModeIndex = Tuple[int, int, int]


def _orthogonality_pairs(limit: int, seed: int,
                         count: int = ORTHOGONALITY_PAIRS) -> Iterable[Tuple[ModeIndex, ModeIndex]]:
    """Distinct random ``(n1, n2, s)`` pairs with ``n1, n2 <= limit``."""
    pool = [(n1, n2, s) for n1 in range(limit + 1) for n2 in range(limit + 1)
            if (n1, n2) != (0, 0) for s in range(1, multiplicity(n1, n2) + 1)]
    rng = np.random.default_rng(seed)
    seen = set()
    while len(seen) < min(count, len(pool) * (len(pool) - 1) // 2):
        i, j = sorted(rng.choice(len(pool), size=2, replace=False).tolist())
        if (i, j) in seen:
            continue
        seen.add((i, j))
        yield pool[i], pool[j]


def run_mode_checks(scenario: Scenario, limit: int = 8, samples: int = 401,
                    seed: int = 0) -> List[CheckResult]:
    """Norms and orthogonality against quadrature, and end-wall amplitude identities.

    Orthogonality is measured on random index pairs drawn with ``seed``.
    """
    geometry = scenario.geometry
    entries = [make_mode_entry(n1, n2, geometry, scenario.k)
               for n1 in range(limit + 1) for n2 in range(limit + 1)
               if (n1, n2) != (0, 0) and abs(math.pi ** 2 * ((n1 / geometry.L1) ** 2
                                                             + (n2 / geometry.L2) ** 2)
                                             - scenario.k ** 2) > 1e-6]
    norms = verify_norms(entries, geometry, samples)
    orthogonality = 0.0
    for first, second in _orthogonality_pairs(limit, seed):
        scale = math.sqrt(quadrature_inner_product(first, first, geometry, samples)
                          * quadrature_inner_product(second, second, geometry, samples))
        orthogonality = max(orthogonality,
                            abs(quadrature_inner_product(first, second, geometry, samples)) / scale)
    results = [
        _result("norms", norms, NORM_TOL, f"n1, n2 <= {limit}"),
        _result("orthogonality", orthogonality, ORTHOGONALITY_TOL,
                f"{ORTHOGONALITY_PAIRS} pairs, {samples} samples, seed {seed}"),
    ]
    if geometry.terminating:
        amplitudes = compute_amplitudes(scenario, scenario_modes(scenario))
        scale = max(float(np.abs(amplitudes.a_plus_te).max()),
                    float(np.abs(amplitudes.a_plus_tm).max()), np.finfo(float).tiny)
        te = np.abs(amplitudes.a_plus_te + amplitudes.b_plus_te).max() / scale
        tm = np.abs(amplitudes.a_plus_tm + amplitudes.b_plus_tm).max() / scale
        results.append(_result("end-wall amplitudes", max(te, tm), 1e-15, "a+ + b+ = 0"))
    logger.debug(f"Mode checks: {[(r.name, r.value) for r in results]}")
    return results
