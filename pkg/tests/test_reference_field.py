"""Tests for the unperturbed dipole field."""

import dataclasses

import numpy as np
import pytest

from waveguide_imaging.physics import (
    compute_amplitudes, eval_reference_field, scenario_amplitudes, scenario_modes, source_projection,
)
from waveguide_imaging.utils import GeometryError, ModeIndexError

POINT = np.array([1.0, 0.9, -2.3])


def _unit(a):
    e = np.zeros(3)
    e[a] = 1.0
    return e


def test_shapes(small_scenario):
    """Single points give a 3-vector, point sets an (N, 3) array."""
    amplitudes = scenario_amplitudes(small_scenario)
    single = eval_reference_field(POINT, amplitudes)
    many = eval_reference_field(np.stack([POINT, POINT + 0.1]), amplitudes)
    assert single.shape == (3,)
    assert many.shape == (2, 3)
    assert np.allclose(many[0], single)
    assert np.abs(single).max() > 0


def test_end_wall_tangential_zero(small_scenario):
    """E1 and E2 vanish on the terminating wall."""
    amplitudes = scenario_amplitudes(small_scenario)
    points = np.array([[0.4, 0.3, 0.0], [1.7, 1.2, 0.0], [2.0, 0.5, 0.0]])
    field = eval_reference_field(points, amplitudes)
    scale = np.abs(eval_reference_field(POINT, amplitudes)).max()
    assert np.abs(field[:, :2]).max() <= 1e-12 * scale


def test_side_walls_tangential_zero(small_scenario):
    """Tangential components vanish on x1 = 0 and x2 = L2."""
    amplitudes = scenario_amplitudes(small_scenario)
    on_x1 = eval_reference_field(np.array([0.0, 0.8, -1.5]), amplitudes)
    on_x2 = eval_reference_field(np.array([1.3, 2.1, -1.5]), amplitudes)
    scale = np.abs(eval_reference_field(POINT, amplitudes)).max()
    assert abs(on_x1[1]) <= 1e-12 * scale and abs(on_x1[2]) <= 1e-12 * scale
    assert abs(on_x2[0]) <= 1e-12 * scale and abs(on_x2[2]) <= 1e-12 * scale


def test_end_wall_amplitude_identity(small_scenario):
    """Outgoing and reflected amplitudes cancel at the wall."""
    amplitudes = scenario_amplitudes(small_scenario)
    assert np.all(amplitudes.a_plus_te + amplitudes.b_plus_te == 0)
    assert np.all(amplitudes.a_plus_tm + amplitudes.b_plus_tm == 0)


def test_infinite_guide_has_no_reflection(infinite_scenario):
    """The infinite waveguide keeps the direct waves only."""
    amplitudes = compute_amplitudes(infinite_scenario, scenario_modes(infinite_scenario))
    assert amplitudes.reflection == 0.0
    assert np.all(amplitudes.b_plus_te == 0)
    assert np.all(amplitudes.b_plus_tm == 0)
    points = np.array([[1.0, 0.9, 0.5], [1.0, 0.9, 3.0]])
    field = eval_reference_field(points, amplitudes)
    assert np.all(np.isfinite(field))


def test_terminating_differs_from_infinite(small_scenario, infinite_scenario):
    """The wall reflection changes the field between source and wall."""
    near = eval_reference_field(POINT, scenario_amplitudes(small_scenario))
    free = eval_reference_field(POINT, scenario_amplitudes(infinite_scenario))
    assert not np.allclose(near, free)


def test_divergence_free(small_scenario):
    """Away from the source the field is solenoidal."""
    amplitudes = scenario_amplitudes(small_scenario)
    h = 1e-5
    divergence = 0.0
    for a in range(3):
        plus = eval_reference_field(POINT + h * _unit(a), amplitudes)[a]
        minus = eval_reference_field(POINT - h * _unit(a), amplitudes)[a]
        divergence += (plus - minus) / (2 * h)
    scale = small_scenario.k * np.abs(eval_reference_field(POINT, amplitudes)).max()
    assert abs(divergence) <= 1e-6 * scale


def test_helmholtz(small_scenario):
    """Laplacian plus k^2 annihilates the field away from the source."""
    amplitudes = scenario_amplitudes(small_scenario)
    h = 1e-3
    center = eval_reference_field(POINT, amplitudes)
    laplacian = np.zeros(3, dtype=complex)
    for a in range(3):
        plus = eval_reference_field(POINT + h * _unit(a), amplitudes)
        minus = eval_reference_field(POINT - h * _unit(a), amplitudes)
        laplacian += (plus - 2 * center + minus) / h ** 2
    k2 = small_scenario.k ** 2
    residual = np.abs(laplacian + k2 * center).max()
    assert residual <= 1e-4 * k2 * np.abs(center).max()


def test_transverse_continuity_across_source_plane(small_scenario):
    """Without a longitudinal dipole moment the transverse field is continuous at x3 = -L."""
    transverse = dataclasses.replace(small_scenario.source, polarization=(0.3, 1.0, 0.0))
    scenario = dataclasses.replace(small_scenario, source=transverse)
    amplitudes = scenario_amplitudes(scenario)
    x3 = -scenario.source.L
    above = eval_reference_field(np.array([1.0, 0.9, x3 + 1e-9]), amplitudes)
    below = eval_reference_field(np.array([1.0, 0.9, x3 - 1e-9]), amplitudes)
    assert np.allclose(above[:2], below[:2], rtol=1e-6, atol=1e-9 * np.abs(above).max())


def test_geometry_errors(small_scenario):
    """Source plane, points beyond the wall and outside the section are rejected."""
    amplitudes = scenario_amplitudes(small_scenario)
    with pytest.raises(GeometryError):
        eval_reference_field(np.array([1.0, 0.9, -small_scenario.source.L]), amplitudes)
    with pytest.raises(GeometryError):
        eval_reference_field(np.array([1.0, 0.9, 0.5]), amplitudes)
    with pytest.raises(GeometryError):
        eval_reference_field(np.array([3.0, 0.9, -1.0]), amplitudes)


def test_evanescent_field_option(small_scenario):
    """Evanescent terms add a correction that fades away from the source."""
    modes = dataclasses.replace(small_scenario.modes, evanescent_field=True)
    with_evanescent = dataclasses.replace(small_scenario, modes=modes)
    plain = scenario_amplitudes(small_scenario)
    full = scenario_amplitudes(with_evanescent)
    assert len(full.table) > len(plain.table)
    x3 = -small_scenario.source.L
    near = np.array([1.0, 0.9, x3 + 0.05])
    far = np.array([1.0, 0.9, x3 + 3.0])
    near_gap = np.abs(eval_reference_field(near, full) - eval_reference_field(near, plain)).max()
    far_gap = np.abs(eval_reference_field(far, full) - eval_reference_field(far, plain)).max()
    assert far_gap < near_gap
    assert np.all(np.isfinite(eval_reference_field(far, full)))


def test_source_projection(small_scenario):
    """Projections onto each branch set the TE and TM amplitudes."""
    modes = scenario_modes(small_scenario)
    amplitudes = compute_amplitudes(small_scenario, modes)
    i, entry = next((i, e) for i, e in enumerate(modes) if e.multiplicity == 3)
    source, geometry, k = small_scenario.source, small_scenario.geometry, small_scenario.k
    p = [source_projection(entry.n1, entry.n2, s, source, geometry) / entry.norms[s - 1]
         for s in (1, 2, 3)]
    assert amplitudes.te[i] == pytest.approx(k * p[0] / (2.0 * entry.beta), rel=1e-12)
    assert amplitudes.tm_curl_free[i] == pytest.approx(entry.beta * p[1] / (2.0 * k), rel=1e-12)
    assert amplitudes.tm_longitudinal[i] == pytest.approx(
        1j * k * p[2] / (2.0 * entry.eigenvalue), rel=1e-12)
    with pytest.raises(ModeIndexError):
        source_projection(entry.n1, 0, 2, source, geometry)
    with pytest.raises(ModeIndexError):
        source_projection(0, 0, 1, source, geometry)


def test_field_below_source_uses_lower_amplitudes(small_scenario, infinite_scenario):
    """Below the source plane each mode is ``b- e^{-i beta x3}``."""
    from waveguide_imaging.physics.reference_field import axial_coefficients

    for scenario in (small_scenario, infinite_scenario):
        amplitudes = scenario_amplitudes(scenario)
        x3 = -amplitudes.L - 0.7
        g, _ = axial_coefficients(amplitudes, x3)
        phase = np.exp(-1j * amplitudes.table.beta * x3)
        assert np.allclose(g[:, 0], amplitudes.b_minus_te * phase, rtol=1e-12, atol=0)
        assert np.allclose(g[:, 1], amplitudes.b_minus_tm * phase, rtol=1e-12, atol=0)
