"""End-to-end checks on the reference configurations.

The imaging checks run at receiver spacing lambda/2 (every ninth receiver of
the lambda/18 grid) to keep them at desk scale.
"""

import numpy as np
import pytest

from waveguide_imaging.controllers import preset, with_decimation, with_mode_budget, with_variant
from waveguide_imaging.imaging import (
    L1Params, count_above, energy_fraction, l1_certificate, l1_reconstruct, peak_location,
    peak_sidelobe_ratio, rtm_image, shell_rear_mask, solve_l1, support_estimate,
)
from waveguide_imaging.imaging.sparse import objective
from waveguide_imaging.models import VoxelGrid
from waveguide_imaging.physics import (
    assemble_sensing_matrix, born_series_field, enumerate_propagating, run_greens_checks,
    run_mode_checks, synthesize_data,
)
from waveguide_imaging.physics.forward_model import sensing_operator

HALF_WAVELENGTH_DECIMATION = 9


def _desk_scale(name, budget=350):
    scenario, reflector = preset(name)
    scenario = with_decimation(scenario, HALF_WAVELENGTH_DECIMATION)
    return with_mode_budget(scenario, budget), reflector


def _true_index(grid, reflector):
    return np.array([grid.nearest_index(a, reflector.center[a]) for a in range(3)])


def _within_one_voxel(found, expected):
    return bool(np.all(np.abs(np.asarray(found) - expected) <= 1))


def test_propagating_mode_count():
    """The reference cross-section counts 648 lattice points, (0, 0) included."""
    scenario, _ = preset("point")
    mode_set = enumerate_propagating(scenario)
    assert mode_set.lattice_count == 648
    assert len(mode_set) == 647


def test_receiver_count_of_reference_aperture():
    """A 10.5 x 10.65 aperture at spacing 1/2 holds 22 x 22 receivers."""
    scenario, _ = _desk_scale("point")
    from waveguide_imaging.models import receiver_points

    points = receiver_points(scenario)
    assert points.shape == (22 * 22, 2)
    assert np.allclose(np.diff(np.unique(points[:, 0])), 0.5)


@pytest.mark.slow
def test_point_reflector_rtm_localization():
    """Normalized RTM peaks within a voxel of the reflector, sharper with more modes."""
    ratios = {}
    for budget in (100, 350):
        scenario, reflector = _desk_scale("point", budget)
        grid = VoxelGrid.from_spec(scenario.imaging.window_grid())
        data = synthesize_data(scenario)
        image = rtm_image(data, scenario, grid, normalize=True)
        assert _within_one_voxel(peak_location(image), _true_index(grid, reflector)), budget
        ratios[budget] = peak_sidelobe_ratio(image)
    assert ratios[350] >= ratios[100]


@pytest.mark.slow
def test_l1_point_recovery():
    """l1 isolates the reflector voxel and suppresses the faint RTM peaks."""
    scenario, reflector = _desk_scale("point")
    grid = VoxelGrid.from_spec(scenario.imaging.l1_grid())
    data = synthesize_data(scenario)
    sensing = assemble_sensing_matrix(scenario, grid)
    epsilon = 1e-3 * float(np.linalg.norm(data.values))
    image, _ = l1_reconstruct(data, sensing, L1Params(epsilon=epsilon, tol=1e-8))
    support = support_estimate(image, 0.1)
    assert support.tolist() == [_true_index(grid, reflector).tolist()]
    rtm = rtm_image(data, scenario, grid)
    assert count_above(image, 0.1) < count_above(rtm, 0.1)


@pytest.mark.slow
def test_anisotropic_channels():
    """Each normalized diagonal RTM channel peaks at the anisotropic reflector."""
    scenario, reflector = _desk_scale("anisotropic")
    grid = VoxelGrid.from_spec(scenario.imaging.window_grid())
    image = rtm_image(synthesize_data(scenario), scenario, grid, "diagonal", normalize=True)
    expected = _true_index(grid, reflector)
    for channel in range(3):
        assert _within_one_voxel(peak_location(image, channel), expected), image.channels[channel]


@pytest.mark.slow
def test_end_wall_illuminates_rear_of_shell():
    """The terminating guide puts more image energy on the back of the shell."""
    fractions = {}
    for terminating in (True, False):
        scenario, reflector = _desk_scale("shell")
        scenario = with_variant(scenario, terminating)
        grid = VoxelGrid.from_spec(scenario.imaging.window_grid())
        image = rtm_image(synthesize_data(scenario), scenario, grid)
        fractions[terminating] = energy_fraction(image, shell_rear_mask(grid, reflector))
    assert fractions[True] > fractions[False]


def test_adjoint_identity(small_scenario, window_grid):
    """<F v, d> equals <v, F^H d> for random draws."""
    operator = sensing_operator(small_scenario, window_grid, "diagonal")
    rng = np.random.default_rng(2024)
    for _ in range(20):
        v = rng.standard_normal(operator.cols)
        d = rng.standard_normal(operator.rows) + 1j * rng.standard_normal(operator.rows)
        fv = operator.apply(v)
        gap = abs(np.vdot(d, fv) - np.vdot(operator.adjoint(d), v))
        assert gap <= 1e-12 * np.linalg.norm(fv) * np.linalg.norm(d)


@pytest.mark.slow
def test_greens_suite_on_reference_guide():
    """Reciprocity, wall conditions and second-order Helmholtz convergence."""
    scenario, _ = preset("point")
    results = {r.name: r for r in run_greens_checks(scenario, pairs=100)}
    assert results["reciprocity"].value <= 1e-10
    assert results["end wall"].value <= 1e-10
    assert results["helmholtz slope"].value <= 0.1
    assert all(r.passed for r in results.values()), {n: r.value for n, r in results.items()}


def test_mode_suite_on_reference_guide():
    """Norms, orthogonality and amplitude identities up to n1, n2 = 8."""
    scenario, _ = preset("point")
    results = {r.name: r for r in run_mode_checks(scenario, limit=8)}
    assert results["norms"].value <= 1e-10
    assert results["orthogonality"].value <= 1e-8
    assert results["end-wall amplitudes"].value == 0.0


def test_l1_solver_against_exhaustive_search():
    """Objective within 1e-6 of the exhaustive optimum with a satisfied certificate."""
    from .test_sparse import _brute_force, _small_problem

    matrix, data = _small_problem(seed=5)
    lam = 0.8
    x, _ = solve_l1(matrix, data, L1Params(lam=lam, tol=1e-14, max_iter=100000))
    best = _brute_force(matrix, data, lam)
    assert objective(matrix, data, x, lam) - objective(matrix, data, best, lam) <= 1e-6
    satisfied, _, _ = l1_certificate(matrix, data, x, lam, tol=1e-6)
    assert satisfied


@pytest.mark.slow
def test_born_series_sanity():
    """One term equals the Born data; the second-order correction is quadratic in contrast."""
    import dataclasses

    scenario, reflector = _desk_scale("point")
    assert np.array_equal(born_series_field(scenario, iterations=1).data.values,
                          synthesize_data(scenario).values)
    pitch = (1.0 / 36.0, 1.0 / 12.0)
    corrections = []
    for value in (0.01, 0.02):
        weak = dataclasses.replace(reflector, value=value)
        first = born_series_field(scenario, weak, 1, pitch).data.as_vector()
        second = born_series_field(scenario, weak, 2, pitch).data.as_vector()
        corrections.append(np.linalg.norm(second - first) / np.linalg.norm(first))
    assert corrections[1] / corrections[0] == pytest.approx(2.0, abs=0.2)
