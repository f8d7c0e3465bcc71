"""Sparse l1 inversion of the Born sensing matrix.

Unknowns are real. The complex system ``F v = d`` is split into stacked real
and imaginary rows, and the penalized problem

    min_v 0.5 * ||F_r v - d_r||^2 + lam * ||v||_1

is solved by monotone FISTA with soft thresholding. The constrained form
``||d - F v|| <= epsilon`` is reached by continuation, halving ``lam`` from
``||F_r^T d_r||_inf`` (where ``v = 0`` is optimal) until the residual fits.
"""

import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from ..models import DataVector, ImageVolume, SensingMatrix, SolverReport
from ..utils import (
    get_logger, log_operation, log_warning, ConvergenceError, ValidationError,
)

logger = get_logger("sparse")

STEP_SAFETY = 0.9
POWER_ITERATIONS = 50
CONTINUATION_FACTOR = 0.5
LAMBDA_MIN_RATIO = 1e-9
CERTIFICATE_FLOOR = 1e-10


@dataclass(frozen=True)
class L1Params:
    """Solver settings.

    ``epsilon`` is an absolute residual bound for the constrained form; ``lam``
    selects the penalized form and wins when both are given. ``strict`` turns
    non-convergence into an error.
    """

    epsilon: Optional[float] = 0.0
    lam: Optional[float] = None
    max_iter: int = 5000
    tol: float = 1e-6
    nonneg: bool = False
    strict: bool = False
    continuation: float = CONTINUATION_FACTOR
    lambda_min_ratio: float = LAMBDA_MIN_RATIO
    power_iterations: int = POWER_ITERATIONS
    seed: int = 0


@dataclass
class MfistaResult:
    x: np.ndarray
    iterations: int
    converged: bool
    objectives: List[float] = field(default_factory=list)


def soft_threshold(x: np.ndarray, threshold: float, nonneg: bool = False) -> np.ndarray:
    """Proximal map of ``threshold * ||x||_1`` (restricted to ``x >= 0`` when ``nonneg``)."""
    x = np.asarray(x, dtype=float)
    if nonneg:
        return np.maximum(x - threshold, 0.0)
    return np.sign(x) * np.maximum(np.abs(x) - threshold, 0.0)


def stack_real(matrix: np.ndarray, data: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    matrix = np.asarray(matrix)
    data = np.asarray(data).ravel()
    if matrix.shape[0] != data.shape[0]:
        raise ValidationError("Sensing matrix and data have different lengths",
                              {"rows": int(matrix.shape[0]), "data": int(data.shape[0])})
    if np.iscomplexobj(matrix) or np.iscomplexobj(data):
        return (np.concatenate([matrix.real, matrix.imag], axis=0),
                np.concatenate([data.real, data.imag]))
    return matrix.astype(float), data.astype(float)


def operator_norm_squared(matrix: np.ndarray, iterations: int = POWER_ITERATIONS,
                          seed: int = 0) -> float:
    """Power-method estimate of ``||F||_2^2``."""
    rng = np.random.default_rng(seed)
    x = rng.standard_normal(matrix.shape[1])
    x /= np.linalg.norm(x)
    estimate = 0.0
    for _ in range(iterations):
        y = matrix.T @ (matrix @ x)
        estimate = float(np.linalg.norm(y))
        if estimate == 0.0:
            return 0.0
        x = y / estimate
    return estimate


def objective(matrix: np.ndarray, data: np.ndarray, x: np.ndarray, lam: float) -> float:
    r = matrix @ x - data
    return 0.5 * float(r @ r) + lam * float(np.abs(x).sum())


def mfista(matrix: np.ndarray, data: np.ndarray, lam: float, step: float,
           x0: Optional[np.ndarray] = None, max_iter: int = 5000, tol: float = 1e-6,
           nonneg: bool = False) -> MfistaResult:
    """Monotone FISTA on real data; the objective never increases between iterates.

    Converged means the relative objective decrease fell to ``tol`` and the
    optimality certificate holds at ``max(tol, CERTIFICATE_FLOOR)``.
    """
    certificate_tol = max(tol, CERTIFICATE_FLOOR)
    x = np.zeros(matrix.shape[1]) if x0 is None else np.asarray(x0, dtype=float).copy()
    y = x.copy()
    t = 1.0
    current = objective(matrix, data, x, lam)
    objectives = [current]
    for it in range(1, max_iter + 1):
        gradient = matrix.T @ (matrix @ y - data)
        u = soft_threshold(y - step * gradient, step * lam, nonneg)
        candidate = objective(matrix, data, u, lam)
        previous_x, previous = x, current
        accepted = candidate <= current
        if accepted:
            x, current = u, candidate
        t_next = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * t * t))
        y = x + (t / t_next) * (u - x) + ((t - 1.0) / t_next) * (x - previous_x)
        t = t_next
        objectives.append(current)
        if accepted and previous - current <= tol * max(previous, np.finfo(float).tiny):
            if lam <= 0.0 or l1_certificate(matrix, data, x, lam, certificate_tol, nonneg)[0]:
                return MfistaResult(x, it, True, objectives)
    return MfistaResult(x, max_iter, False, objectives)


def l1_certificate(matrix: np.ndarray, data: np.ndarray, x: np.ndarray, lam: float,
                   tol: float = 1e-6, nonneg: bool = False) -> Tuple[bool, float, float]:
    """Optimality conditions of the penalized problem.

    Returns (satisfied, worst zero-set ratio ``|g| / lam``, worst support
    deviation ``|g + lam sign(x)| / lam``).
    """
    gradient = matrix.T @ (matrix @ x - data)
    support = x != 0
    if nonneg:
        zero_ratio = float(np.max(-gradient[~support] / lam, initial=0.0))
    else:
        zero_ratio = float(np.max(np.abs(gradient[~support]) / lam, initial=0.0))
    support_dev = float(np.max(np.abs(gradient[support] + lam * np.sign(x[support])) / lam,
                               initial=0.0))
    return zero_ratio <= 1.0 + tol and support_dev <= tol, zero_ratio, support_dev


def _stage(name: str, lam: float, result: MfistaResult, residual: float) -> Dict[str, Any]:
    return {"stage": name, "lambda": lam, "iterations": result.iterations,
            "converged": result.converged, "residual": residual}


def solve_l1(matrix: np.ndarray, data: np.ndarray,
             params: L1Params = L1Params()) -> Tuple[np.ndarray, SolverReport]:
    """Real l1 solution of ``matrix v ~ data`` (complex inputs are row-stacked)."""
    a, b = stack_real(matrix, data)
    report = SolverReport()
    lam_max = float(np.max(np.abs(a.T @ b), initial=0.0))
    if lam_max == 0.0:
        report.converged = True
        report.residual = float(np.linalg.norm(b))
        return np.zeros(a.shape[1]), report
    norm2 = operator_norm_squared(a, params.power_iterations, params.seed)
    step = STEP_SAFETY / norm2
    report.step_size = step

    if params.lam is not None:
        schedule = [params.lam]
        epsilon = None
    else:
        lam_min = lam_max * params.lambda_min_ratio
        schedule = []
        lam = lam_max * params.continuation
        while lam > lam_min:
            schedule.append(lam)
            lam *= params.continuation
        schedule.append(lam_min)
        epsilon = params.epsilon or 0.0

    x = np.zeros(a.shape[1])
    total = 0
    lam = schedule[0]
    for lam in schedule:
        result = mfista(a, b, lam, step, x, params.max_iter, params.tol, params.nonneg)
        x = result.x
        total += result.iterations
        residual = float(np.linalg.norm(a @ x - b))
        report.stages.append(_stage("continuation", lam, result, residual))
        logger.debug(f"l1 stage lambda={lam:.3e}: {result.iterations} iterations, "
                     f"residual {residual:.3e}")
        if epsilon is not None and residual <= epsilon:
            break

    report.iterations = total
    report.lam = lam
    report.residual = float(np.linalg.norm(a @ x - b))
    report.objective = objective(a, b, x, lam)
    unconverged = [stage["lambda"] for stage in report.stages if not stage["converged"]]
    report.converged = not unconverged
    if unconverged:
        report.warning = (f"max_iter={params.max_iter} reached at lambda="
                          + ", ".join(f"{value:.3e}" for value in unconverged))
        if params.strict:
            raise ConvergenceError("l1 solver did not converge", report.to_dict())
        log_warning("sparse", "l1 solver did not converge", report.to_dict())
    elif epsilon is not None and report.residual > epsilon > 0:
        report.warning = f"residual {report.residual:.3e} above epsilon {epsilon:.3e}"
    return x, report


def l1_reconstruct(data: DataVector, sensing: SensingMatrix,
                   params: L1Params = L1Params()) -> Tuple[ImageVolume, SolverReport]:
    """l1 image on the sensing-matrix grid (real values stored as complex)."""
    if data.values.size != sensing.shape[0]:
        raise ValidationError("Data and sensing matrix dimensions differ",
                              {"data": int(data.values.size), "rows": sensing.shape[0]})
    if (data.receivers.shape != sensing.receivers.shape
            or not np.allclose(data.receivers, sensing.receivers, rtol=0.0, atol=1e-9)
            or tuple(data.components) != tuple(sensing.components)):
        raise ValidationError("Data were recorded on a different receiver set than the matrix")
    x, report = solve_l1(sensing.matrix, data.as_vector(), params)
    log_operation("sparse", "l1_reconstruct",
                  {"unknowns": int(x.size), "nonzeros": int(np.count_nonzero(x)),
                   **report.to_dict()})
    image = ImageVolume(sensing.grid, sensing.parameterization, x.astype(complex),
                        sensing.scenario_hash)
    return image, report
