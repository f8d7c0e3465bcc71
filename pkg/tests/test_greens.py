"""Tests for the modal Green's tensor and its property suites."""

import numpy as np
import pytest

from waveguide_imaging.physics import (
    GreensRequest, axial_profile_derivatives, dyadic_green, dyadic_green_coefficient_form,
    run_greens_checks, run_mode_checks, scenario_modes, vector_green,
)
from waveguide_imaging.physics.checks import (
    ORTHOGONALITY_PAIRS, _orthogonality_pairs, helmholtz_check, helmholtz_residuals,
)
from waveguide_imaging.physics.greens import dyadic_green_block, mode_term
from waveguide_imaging.physics.modes import multiplicity
from waveguide_imaging.utils import GeometryError, ValidationError

X = np.array([0.7, 1.3, -2.2])
Y = np.array([1.6, 0.4, -3.1])


def test_reciprocity(small_scenario):
    """G(x, y) equals the transpose of G(y, x)."""
    request = GreensRequest.for_scenario(small_scenario)
    forward = dyadic_green(X, Y, request)
    backward = dyadic_green(Y, X, request)
    assert np.linalg.norm(forward - backward.T) <= 1e-10 * np.linalg.norm(forward)


def test_reciprocity_infinite(infinite_scenario):
    """Reciprocity also holds without the end wall."""
    request = GreensRequest.for_scenario(infinite_scenario)
    forward = dyadic_green(X, Y, request)
    assert np.allclose(forward, dyadic_green(Y, X, request).T, rtol=1e-10, atol=0)


def test_end_wall(small_scenario, infinite_scenario):
    """Tangential columns vanish on the terminating wall only."""
    wall = np.array([1.1, 0.6, 0.0])
    tensor = dyadic_green(wall, Y, GreensRequest.for_scenario(small_scenario))
    assert np.abs(tensor[:2]).max() <= 1e-12 * np.abs(tensor).max()
    open_end = dyadic_green(wall, Y, GreensRequest.for_scenario(infinite_scenario))
    assert np.abs(open_end[:2]).max() > 1e-6 * np.abs(open_end).max()


def test_coefficient_form_gauge_invariant(small_scenario):
    """The explicit coefficient solution matches for any free-parameter choice."""
    request = GreensRequest.for_scenario(small_scenario)
    bracket = dyadic_green(X, Y, request)
    for shift in (0.0, 0.37 - 0.21j, 2.0j):
        coefficient = dyadic_green_coefficient_form(X, Y, request, gauge_shift=shift)
        assert np.linalg.norm(coefficient - bracket) <= 1e-10 * np.linalg.norm(bracket)
    below = dyadic_green_coefficient_form(Y, X, request)
    assert np.allclose(below, dyadic_green(Y, X, request), rtol=1e-10, atol=0)


def test_coefficient_form_needs_wall(infinite_scenario):
    """The coefficient form is defined for the terminating waveguide."""
    request = GreensRequest.for_scenario(infinite_scenario)
    with pytest.raises(ValidationError):
        dyadic_green_coefficient_form(X, Y, request)


def test_block_matches_pointwise(small_scenario):
    """Block evaluation equals the pointwise tensor."""
    request = GreensRequest.for_scenario(small_scenario)
    xs = np.array([[0.7, 1.3, -2.2], [1.9, 0.2, -2.2]])
    ys = np.array([[1.6, 0.4, -3.1], [0.3, 1.8, -1.0], [1.0, 1.0, -5.0]])
    block = dyadic_green_block(request, xs, ys)
    assert block.shape == (2, 3, 3, 3)
    for i, x in enumerate(xs):
        for j, y in enumerate(ys):
            assert np.allclose(block[i, :, j, :], dyadic_green(x, y, request), rtol=1e-12)
    with pytest.raises(ValidationError):
        dyadic_green_block(request, np.array([[0.7, 1.3, -2.2], [0.7, 1.3, -2.0]]), ys)


def test_vector_green_is_sum_of_mode_terms(small_scenario):
    """Each column is the sum of the single mode-branch terms."""
    request = GreensRequest.for_scenario(small_scenario)
    for j in (1, 2, 3):
        total = np.zeros(3, dtype=complex)
        for entry in scenario_modes(small_scenario):
            for s in range(1, entry.multiplicity + 1):
                total += mode_term(entry, s, j, X[None, :], Y, request)[0]
        assert np.allclose(total, vector_green(j, X, Y, request), rtol=1e-12, atol=1e-14)
    with pytest.raises(ValidationError):
        vector_green(4, X, Y, request)


def test_coincident_and_outside_points(small_scenario):
    """Coincident points and points outside the section raise geometry errors."""
    request = GreensRequest.for_scenario(small_scenario)
    with pytest.raises(GeometryError):
        dyadic_green(X, X, request)
    with pytest.raises(GeometryError):
        dyadic_green(np.array([2.5, 1.0, -1.0]), Y, request)


def test_axial_profile_derivatives(small_scenario):
    """The kernel solves the one-dimensional Helmholtz equation off the diagonal."""
    entry = scenario_modes(small_scenario)[2]
    assert entry.multiplicity == 3
    for s in range(1, entry.multiplicity + 1):
        kernel, derivative, second = axial_profile_derivatives(entry, s, -1.2, -2.0)
        assert second == pytest.approx(-entry.beta ** 2 * kernel)
        h = 1e-6
        up, _, _ = axial_profile_derivatives(entry, s, -1.2 + h, -2.0)
        down, _, _ = axial_profile_derivatives(entry, s, -1.2 - h, -2.0)
        assert (up - down) / (2 * h) == pytest.approx(derivative, rel=1e-6)
    with pytest.raises(GeometryError):
        axial_profile_derivatives(entry, 1, -1.0, -1.0)


def test_greens_suite_passes(small_scenario):
    """Every property check of the terminating guide passes."""
    results = run_greens_checks(small_scenario, pairs=20)
    names = [r.name for r in results]
    assert "end wall" in names and "gauge" in names
    failed = [(r.name, r.value) for r in results if not r.passed]
    assert failed == []


def test_greens_suite_infinite(infinite_scenario):
    """The infinite guide skips the end-wall and gauge checks."""
    results = run_greens_checks(infinite_scenario, pairs=20)
    names = [r.name for r in results]
    assert "end wall" not in names and "gauge" not in names
    assert all(r.passed for r in results)


def test_evanescent_decay(small_scenario):
    """Evanescent modes beyond the cutoff are negligible at the tested separation."""
    results = run_greens_checks(small_scenario, pairs=10, evanescent=True)
    decay = [r for r in results if r.name == "evanescent decay"]
    assert len(decay) == 1 and decay[0].passed


def test_mode_suite_passes(small_scenario):
    """Norms, orthogonality and end-wall amplitude identities hold."""
    results = run_mode_checks(small_scenario, limit=4)
    assert [r.name for r in results] == ["norms", "orthogonality", "end-wall amplitudes"]
    assert all(r.passed for r in results)


def test_helmholtz_residuals_are_truncation_dominated(small_scenario):
    """Over one decade of steps every residual falls by about a hundred."""
    residuals = helmholtz_residuals(small_scenario, steps=(1e-2, 1e-3))
    assert residuals
    for name, (coarse, fine) in residuals:
        assert 10 ** 1.9 <= coarse / fine <= 10 ** 2.1, name
    assert helmholtz_check(small_scenario).value <= 0.1


def test_orthogonality_pairs_are_seeded_and_distinct():
    """The same seed draws the same distinct, admissible index pairs."""
    first = list(_orthogonality_pairs(4, seed=11))
    assert first == list(_orthogonality_pairs(4, seed=11))
    assert first != list(_orthogonality_pairs(4, seed=12))
    assert len(first) == ORTHOGONALITY_PAIRS
    assert len({tuple(sorted(pair)) for pair in first}) == len(first)
    for pair in first:
        assert pair[0] != pair[1]
        for n1, n2, s in pair:
            assert max(n1, n2) <= 4 and (n1, n2) != (0, 0)
            assert 1 <= s <= multiplicity(n1, n2)
    assert len(list(_orthogonality_pairs(1, seed=0))) == 10
