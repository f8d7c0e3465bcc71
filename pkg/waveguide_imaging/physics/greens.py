"""Modal vector Green's functions and the dyadic Green's tensor.

Per mode the axial kernel is

    K_s(x3, y3) = exp(i beta |x3 - y3|) + sigma_s exp(-i beta (x3 + y3))

with ``sigma_s = -1`` for the transverse branches, ``+1`` for the longitudinal
one and ``0`` in the infinite waveguide. The tensor
``(G_1, G_2, G_3) + k**-2 grad div (G_1, G_2, G_3)`` is assembled from the
closed-form identities

    grad div (g Phi1) = 0
    grad div (g Phi2) = -lambda g Phi2 - lambda g' Phi3
    grad div (g Phi3) = g' Phi2 + g'' Phi3

so no numerical differentiation is involved.

Everything is organised as ``G_ql(x, y) = sum_{p,s} Phi^(s)_q(x) W_{p,s,l}(x3, y)``:
eigenfunction values at the evaluation points times per-source factors, which
lets the sensing matrix factor as a product of two dense blocks.
"""

from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from ..models import ModeEntry, Scenario
from ..utils.exceptions import GeometryError, ValidationError
from ..utils.logger import get_logger
from .modes import ModeTable, _check_index, evanescent_modes, mode_fields, scenario_modes

logger = get_logger("greens")

TRANSVERSE_SIGN = -1.0
LONGITUDINAL_SIGN = 1.0


@dataclass(frozen=True)
class GreensRequest:
    """Mode set and variant used to evaluate Green's functions.

    ``min_separation`` is the smallest admissible distance between the
    evaluation and source points of a full-tensor evaluation.
    """

    table: ModeTable
    k: float
    terminating: bool = True
    min_separation: float = 0.0

    @classmethod
    def for_scenario(cls, scenario: Scenario, evanescent: bool = False,
                     terminating: Optional[bool] = None) -> "GreensRequest":
        """Propagating-only request (``G^P``) or the evanescent-augmented one."""
        modes: Sequence[ModeEntry]
        modes = evanescent_modes(scenario) if evanescent else scenario_modes(scenario)
        if terminating is None:
            terminating = scenario.geometry.terminating
        return cls(ModeTable.from_entries(modes, scenario.geometry), scenario.k, terminating)

    def signs(self) -> Tuple[float, float]:
        if not self.terminating:
            return 0.0, 0.0
        return TRANSVERSE_SIGN, LONGITUDINAL_SIGN


def _kernels(beta: np.ndarray, x3: np.ndarray, y3: np.ndarray,
             sigma: float) -> Tuple[np.ndarray, np.ndarray]:
    """Axial kernel and its x3-derivative; ``sign(0) = 0`` on the diagonal."""
    gap = x3 - y3
    direct = np.exp(1j * beta * np.abs(gap))
    image = np.exp(-1j * beta * (x3 + y3))
    kernel = direct + sigma * image
    derivative = 1j * beta * (np.sign(gap) * direct - sigma * image)
    return kernel, derivative


def green_factors(request: GreensRequest, x3: float, points: np.ndarray) -> np.ndarray:
    """Per-source factors ``W`` of shape (sources, modes, 3, 3) indexed [y, p, s - 1, l]."""
    table, k = request.table, request.k
    pts = np.asarray(points, dtype=float).reshape(-1, 3)
    phi = table.evaluate(pts[:, :2])
    beta = table.beta[None, :]
    lam = table.eigenvalue[None, :]
    y3 = pts[:, 2:3]
    sigma_t, sigma_l = request.signs()
    k12, dk12 = _kernels(beta, x3, y3, sigma_t)
    k3, dk3 = _kernels(beta, x3, y3, sigma_l)
    scale = table.inv_norms[None, :, :] / (2j * beta[..., None])
    k2 = k * k

    factors = np.empty(phi.shape, dtype=complex)
    factors[:, :, 0, :] = phi[:, :, 0, :] * (k12 * scale[..., 0])[..., None]
    factors[:, :, 1, :] = (
        phi[:, :, 1, :] * ((1.0 - lam / k2) * k12 * scale[..., 1])[..., None]
        + phi[:, :, 2, :] * (dk3 * scale[..., 2] / k2)[..., None]
    )
    factors[:, :, 2, :] = (
        -phi[:, :, 1, :] * (lam / k2 * dk12 * scale[..., 1])[..., None]
        + phi[:, :, 2, :] * (lam / k2 * k3 * scale[..., 2])[..., None]
    )
    return factors


def receiver_factors(request: GreensRequest, points: np.ndarray,
                     components: Sequence[int] = (1, 2, 3)) -> np.ndarray:
    """Eigenfunction table ``A`` of shape (points * |components|, 3 * modes).

    Rows are ordered (point, component), columns (mode, branch).
    """
    pts = np.asarray(points, dtype=float)
    phi = request.table.evaluate(pts.reshape(-1, pts.shape[-1])[:, :2])
    picked = phi[..., [q - 1 for q in components]]
    return picked.transpose(0, 3, 1, 2).reshape(picked.shape[0] * len(components), -1)


def dyadic_green_block(request: GreensRequest, x_points: np.ndarray,
                       y_points: np.ndarray) -> np.ndarray:
    """Tensor between evaluation points sharing one x3 and arbitrary sources.

    Returns shape (Nx, 3, Ny, 3).
    """
    x = np.asarray(x_points, dtype=float).reshape(-1, 3)
    if not np.allclose(x[:, 2], x[0, 2], rtol=0.0, atol=1e-12):
        raise ValidationError("Evaluation points of a block must share x3")
    a = receiver_factors(request, x[:, :2])
    w = green_factors(request, float(x[0, 2]), y_points)
    b = w.transpose(1, 2, 0, 3).reshape(a.shape[1], -1)
    return (a @ b).reshape(x.shape[0], 3, w.shape[0], 3)


def _check_pair(x: np.ndarray, y: np.ndarray, request: GreensRequest) -> None:
    geometry = request.table.geometry
    for point in (x, y):
        if not (0.0 <= point[0] <= geometry.L1 and 0.0 <= point[1] <= geometry.L2):
            raise GeometryError("Point outside the waveguide", {"point": point.tolist()})
    distance = float(np.linalg.norm(x - y))
    if distance == 0.0 or distance < request.min_separation:
        raise GeometryError("Green's tensor evaluated at coincident points",
                            {"x": x.tolist(), "y": y.tolist(),
                             "min_separation": request.min_separation})


def axial_profile_derivatives(entry: ModeEntry, s: int, x3: float, y3: float,
                              terminating: bool = True) -> Tuple[complex, complex, complex]:
    """Kernel ``K_s`` of one mode with its first and second x3-derivatives."""
    _check_index(entry.n1, entry.n2, s)
    if x3 == y3:
        raise GeometryError("Axial kernel derivatives need x3 != y3", {"x3": x3})
    if terminating:
        sigma = LONGITUDINAL_SIGN if s == 3 else TRANSVERSE_SIGN
    else:
        sigma = 0.0
    beta = np.array(entry.beta, dtype=complex)
    kernel, derivative = _kernels(beta, np.array(x3), np.array(y3), sigma)
    return complex(kernel), complex(derivative), complex(-entry.beta ** 2 * kernel)


def vector_green(j: int, x: Sequence[float], y: Sequence[float],
                 request: GreensRequest) -> np.ndarray:
    """Column ``G_j(x, y)`` of the modal Green's function (no grad-div term)."""
    if j not in (1, 2, 3):
        raise ValidationError(f"Column index {j} outside 1..3")
    xv, yv = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    _check_pair(xv, yv, request)
    table = request.table
    phi_x = table.evaluate(xv[:2])[0]
    phi_y = table.evaluate(yv[:2])[0]
    sigma_t, sigma_l = request.signs()
    k12, _ = _kernels(table.beta, xv[2], yv[2], sigma_t)
    k3, _ = _kernels(table.beta, xv[2], yv[2], sigma_l)
    kernels = np.stack([k12, k12, k3], axis=1)
    weights = phi_y[:, :, j - 1] * table.inv_norms * kernels / (2j * table.beta[:, None])
    return np.einsum("ps,psc->c", weights, phi_x)


def dyadic_green(x: Sequence[float], y: Sequence[float], request: GreensRequest) -> np.ndarray:
    """3x3 tensor ``G(x, y)`` (``G^P`` when the request holds propagating modes only)."""
    xv, yv = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    _check_pair(xv, yv, request)
    return dyadic_green_block(request, xv[None, :], yv[None, :])[0, :, 0, :]


def _coefficients(beta: complex, y3: float, w2: float, w3: float,
                  gauge_shift: complex) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Solution (a, b, c) of the jump and end-wall system, one entry per branch."""
    a = np.full(3, np.exp(-1j * beta * y3) / (2j * beta))
    b = np.array([-a[0], -a[1], a[2]])
    if w2 == 0.0:
        b[1] += gauge_shift
    else:
        b[2] += gauge_shift
        b[1] += 1j * gauge_shift * w3 / (beta * w2)
    c = b + np.exp(1j * beta * y3) / (2j * beta)
    return a, b, c


def dyadic_green_coefficient_form(x: Sequence[float], y: Sequence[float],
                                  request: GreensRequest, gauge_shift: complex = 0.0) -> np.ndarray:
    """Terminating-waveguide tensor from the explicit coefficient solution.

    The end-wall condition leaves one free parameter per mode and column;
    ``gauge_shift`` moves it away from the convenient choice ``a3 = b3``.
    Intended for propagating mode sets.
    """
    if not request.terminating:
        raise ValidationError("Coefficient form is defined for the terminating waveguide")
    xv, yv = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    _check_pair(xv, yv, request)
    table, k2 = request.table, request.k ** 2
    phi_x = table.evaluate(xv[:2])[0]
    phi_y = table.evaluate(yv[:2])[0]
    tensor = np.zeros((3, 3), dtype=complex)
    for p in range(len(table)):
        beta, lam = complex(table.beta[p]), float(table.eigenvalue[p])
        above = xv[2] > yv[2]
        for l in range(3):
            w = phi_y[p, :, l] * table.inv_norms[p]
            if not np.any(w):
                continue
            a, b, c = _coefficients(beta, yv[2], float(w[1]), float(w[2]), gauge_shift)
            up, down = np.exp(1j * beta * xv[2]), np.exp(-1j * beta * xv[2])
            if above:
                g = w * (a * up + b * down)
                dg = w * 1j * beta * (a * up - b * down)
            else:
                g = w * c * down
                dg = -1j * beta * g
            d2g = -beta ** 2 * g
            column = (g[0] * phi_x[p, 0] + g[1] * phi_x[p, 1] + g[2] * phi_x[p, 2]
                      + (-lam * g[1] * phi_x[p, 1] - lam * dg[1] * phi_x[p, 2]
                         + dg[2] * phi_x[p, 1] + d2g[2] * phi_x[p, 2]) / k2)
            tensor[:, l] += column
    return tensor


def grad_div_finite_difference(x: Sequence[float], y: Sequence[float], request: GreensRequest,
                               h: float) -> np.ndarray:
    """``grad div (G_1, G_2, G_3)`` by second-order central differences, columnwise."""
    xv = np.asarray(x, dtype=float)

    def columns(point: np.ndarray) -> np.ndarray:
        return np.stack([vector_green(j, point, y, request) for j in (1, 2, 3)], axis=1)

    def divergence(point: np.ndarray) -> np.ndarray:
        total = np.zeros(3, dtype=complex)
        for a in range(3):
            step = np.zeros(3)
            step[a] = h
            total += (columns(point + step)[a] - columns(point - step)[a]) / (2 * h)
        return total

    out = np.zeros((3, 3), dtype=complex)
    for a in range(3):
        step = np.zeros(3)
        step[a] = h
        out[a] = (divergence(xv + step) - divergence(xv - step)) / (2 * h)
    return out


def grad_div_closed_form(x: Sequence[float], y: Sequence[float],
                         request: GreensRequest) -> np.ndarray:
    """``grad div (G_1, G_2, G_3)`` from the per-mode identities."""
    tensor = dyadic_green(x, y, request)
    direct = np.stack([vector_green(j, x, y, request) for j in (1, 2, 3)], axis=1)
    return request.k ** 2 * (tensor - direct)


def mode_term(entry: ModeEntry, s: int, j: int, x: np.ndarray, y: np.ndarray,
              request: GreensRequest) -> np.ndarray:
    """Single (mode, branch) term of ``G_j`` at the points ``x`` of shape (N, 3)."""
    _check_index(entry.n1, entry.n2, s)
    geometry = request.table.geometry
    pts = np.asarray(x, dtype=float).reshape(-1, 3)
    phi_x = mode_fields(np.array([entry.n1]), np.array([entry.n2]), pts[:, :2], geometry)[:, 0, s - 1]
    phi_y = mode_fields(np.array([entry.n1]), np.array([entry.n2]), np.asarray(y)[:2], geometry)
    weight = phi_y[0, 0, s - 1, j - 1] / entry.norms[s - 1]
    sigma_t, sigma_l = request.signs()
    kernel, _ = _kernels(np.array(entry.beta), pts[:, 2], np.asarray(y)[2],
                         sigma_l if s == 3 else sigma_t)
    return weight * kernel[:, None] * phi_x / (2j * entry.beta)
