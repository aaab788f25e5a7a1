from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wbflux.errors import GridError, QuadratureFailure
from wbflux.grid import (
    Discretization,
    SolverState,
    boundary_averages,
    integrate_intervals,
    project_initial,
    project_topography,
)
from wbflux.model import Problem, burgers_hopf, constant, cos_bump, sin_jump, zero_topography


def problem(u0=constant(0.0), ul=constant(0.0), ur=constant(0.0), domain=(0.0, 4.0), topo=None, jumps=()):
    return Problem(burgers_hopf(), topo or cos_bump(), domain, 3.0, u0, ul, ur, initial_jumps=jumps)


def test_uniform_grid_geometry():
    d = Discretization.uniform(0.0, 4.0, 0.1)
    assert d.n_cells == 40 and d.j_l == 0 and d.j_r == 39
    assert d.dx * d.n_cells == pytest.approx(4.0, rel=1e-15)
    np.testing.assert_allclose(d.centers, 0.05 + 0.1 * np.arange(40), atol=1e-14)
    assert d.faces[0] == 0.0 and d.faces[-1] == 4.0


def test_uniform_grid_rejects_non_integral_ratio():
    with pytest.raises(GridError):
        Discretization.uniform(0.0, 4.0, 0.3)


def test_grid_arrays_are_read_only():
    d = Discretization.uniform(0.0, 1.0, 0.25)
    with pytest.raises(ValueError):
        d.centers[0] = 1.0


def test_refinement_relation():
    coarse = Discretization(0.0, 4.0, 4)
    assert Discretization(0.0, 4.0, 8).is_refinement_of(coarse)
    assert not Discretization(0.0, 4.0, 6).is_refinement_of(coarse)
    assert not Discretization(0.0, 3.0, 8).is_refinement_of(coarse)


def test_project_initial_linear_average():
    p = problem(u0=lambda x: x, domain=(0.0, 1.0))
    d = Discretization.uniform(0.0, 1.0, 0.1)
    s = project_initial(p, d)
    assert s.interior[0] == pytest.approx(0.05, abs=1e-15)


def test_project_initial_zero():
    s = project_initial(problem(), Discretization.uniform(0.0, 4.0, 0.1))
    assert np.all(s.interior == 0.0)


def test_project_initial_equilibrium_is_discrete_equilibrium():
    z = cos_bump()
    p = problem(u0=lambda x: 2.0 - z(x))
    d = Discretization.uniform(0.0, 4.0, 0.1)
    s = project_initial(p, d)
    topo = project_topography(z, d)
    np.testing.assert_allclose(s.interior + topo.interior, 2.0, atol=1e-13)


def test_project_initial_domain_mismatch():
    with pytest.raises(GridError):
        project_initial(problem(), Discretization.uniform(0.0, 2.0, 0.1))


def test_project_initial_rejects_nan():
    with pytest.raises(QuadratureFailure):
        project_initial(problem(u0=lambda x: np.full(np.shape(x), np.nan)), Discretization(0.0, 4.0, 4))


def test_boundary_averages_examples():
    p = problem(ul=lambda t: t, ur=constant(2.0))
    ul, ur = boundary_averages(p, 0, 0.1)
    assert ul == pytest.approx(0.05, abs=1e-14) and ur == pytest.approx(2.0, abs=1e-14)
    p2 = problem(ur=np.sin)
    _, ur = boundary_averages(p2, 0, math.pi)
    assert ur == pytest.approx(2 / math.pi, abs=1e-4)  # 5-point Gauss on one half period


def test_project_topography_cell_value_and_ghosts():
    d = Discretization.uniform(0.0, 4.0, 0.1)
    topo = project_topography(cos_bump(), d)
    j = 15  # cell [1.5, 1.6]
    exact = (math.sin(1.6 * math.pi) - math.sin(1.5 * math.pi)) / (0.1 * math.pi)
    assert topo.interior[j] == pytest.approx(exact, abs=1e-12)
    assert topo.cell_values[0] == topo.cell_values[1]
    assert topo.cell_values[-1] == topo.cell_values[-2]
    assert project_topography(zero_topography(), d).is_flat


def test_jump_split_integration_is_exact_for_piecewise_polynomials():
    def step(x):
        return np.where(np.asarray(x) < 0.35, 1.0, 3.0)

    plain = integrate_intervals(step, np.array([0.3]), np.array([0.4]))
    split = integrate_intervals(step, np.array([0.3]), np.array([0.4]), jumps=(0.35,))
    assert split[0] == pytest.approx(0.2, abs=1e-15)
    assert abs(plain[0] - 0.2) > 1e-6


def test_sin_jump_slopes_use_one_sided_limits():
    d = Discretization.uniform(0.0, 4.0, 0.1)
    topo = project_topography(sin_jump(), d)
    assert np.all(np.isfinite(topo.slopes))
    assert np.max(np.abs(topo.slopes)) <= math.pi + 1e-6


def test_solver_state_read_only_and_extended():
    s = SolverState(0, 0.0, np.array([1.0, -3.0]), 0.5, 2.0)
    assert s.extended.tolist() == [0.5, 1.0, -3.0, 2.0]
    assert s.max_abs() == 3.0
    with pytest.raises(ValueError):
        s.interior[0] = 0.0


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 50), st.floats(-3, 3), st.floats(-3, 3))
def test_projection_preserves_mass_of_affine_data(n, a, b):
    p = problem(u0=lambda x: a + b * np.asarray(x))
    d = Discretization(0.0, 4.0, n)
    s = project_initial(p, d)
    assert d.dx * s.interior.sum() == pytest.approx(4 * a + 8 * b, abs=1e-11)


def test_jensen_for_projection():
    z = cos_bump()
    p = problem(u0=lambda x: 2.0 - 3 * z(x))
    d = Discretization(0.0, 4.0, 16)
    s = project_initial(p, d)
    avg_sq = integrate_intervals(lambda x: (2.0 - 3 * z(x)) ** 2, d.faces[:-1], d.faces[1:]) / d.dx
    assert np.all(s.interior**2 <= avg_sq + 1e-12)
