import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.integrate import quad

from nonlocal_lwr import initial_data as idata
from nonlocal_lwr.grid import GridSpec
from nonlocal_lwr.reference import (ReferenceKind, ReferenceSolution, exact_riemann, exact_riemann_averages,
                                    local_step, reference_solution)
from nonlocal_lwr.velocity import CLIPPED_GREENSHIELDS, GREENSHIELDS, UNDERWOOD


def test_local_step_example():
    rho = np.full(9, 0.4)
    rho[4] = 0.6
    assert local_step(rho, GREENSHIELDS, 0.25)[4] == pytest.approx(0.55, abs=1e-15)
    with pytest.raises(ValueError, match="cfl-violation"):
        local_step(rho, GREENSHIELDS, 0.6)


def test_shock_speed():
    # Rankine-Hugoniot: (f(0.7) - f(0)) / 0.7 = 0.3
    x = np.array([0.29, 0.31])
    np.testing.assert_array_equal(exact_riemann(0.0, 0.7, 1.0, x), [0.0, 0.7])
    np.testing.assert_array_equal(exact_riemann(0.0, 0.7, 2.0, [0.59, 0.61]), [0.0, 0.7])


def test_rarefaction_fan():
    assert exact_riemann(0.65, 0.35, 1.0, 0.0) == 0.5
    np.testing.assert_allclose(exact_riemann(0.65, 0.35, 1.0, [-0.31, -0.3, 0.1, 0.3, 0.31]),
                               [0.65, 0.65, 0.45, 0.35, 0.35])
    with pytest.raises(ValueError):
        exact_riemann(1.2, 0.1, 1.0, 0.0)


@given(st.floats(0.0, 1.0), st.floats(0.0, 1.0), st.floats(0.05, 1.0))
def test_exact_averages_match_quadrature(rl, rr, t):
    grid = GridSpec(-1.0, 1.0, 0.1)
    avg = exact_riemann_averages(rl, rr, t, grid.edges)
    for j in range(0, grid.num_cells, 3):
        a, b = grid.edges[j], grid.edges[j + 1]
        if rl < rr:
            brk = [(1 - rl - rr) * t]
        else:
            brk = [(1 - 2 * rl) * t, (1 - 2 * rr) * t]
        pts = [p for p in brk if a < p < b] or None
        ref = quad(lambda x: float(exact_riemann(rl, rr, t, x)), a, b, points=pts)[0] / 0.1
        assert avg[j] == pytest.approx(ref, abs=1e-10)


def test_exact_averages_conserve_mass():
    grid = GridSpec(-2.0, 2.0, 0.01)
    avg = exact_riemann_averages(0.65, 0.35, 1.0, grid.edges)
    assert avg.sum() * 0.01 == pytest.approx(0.65 * 2 + 0.35 * 2, abs=1e-12)


def test_reference_dispatch():
    assert reference_solution(idata.riemann_shock(), GREENSHIELDS).kind is ReferenceKind.EXACT_RIEMANN
    assert reference_solution(idata.riemann_shock(), CLIPPED_GREENSHIELDS).kind is ReferenceKind.EXACT_RIEMANN
    assert reference_solution(idata.bell_shaped(), GREENSHIELDS).kind is ReferenceKind.FINE_MESH
    assert reference_solution(idata.riemann_shock(), UNDERWOOD).kind is ReferenceKind.FINE_MESH
    with pytest.raises(ValueError):
        reference_solution(idata.bell_shaped(), GREENSHIELDS, refine=1)


def test_fine_mesh_reference_tracks_exact_solution():
    grid = GridSpec(-1.0, 1.0, 0.01)
    fine = reference_solution(idata.riemann_shock(), UNDERWOOD, refine=4)
    a = fine.cell_averages(0.5, grid)
    assert a.shape == (200,)
    assert fine.cell_averages(0.5, grid) is a  # cached
    # against Greenshields the fine mesh run converges to the closed form
    ref = reference_solution(idata.riemann(0.65, 0.35), GREENSHIELDS)
    fine_g = ReferenceSolution(ReferenceKind.FINE_MESH, {"refine": 4},
                               _data=idata.riemann(0.65, 0.35), _velocity=GREENSHIELDS)
    err = np.abs(fine_g.cell_averages(0.5, grid) - ref.cell_averages(0.5, grid)).sum() * 0.01
    assert err < 5e-3
