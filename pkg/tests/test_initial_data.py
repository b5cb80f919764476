import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.integrate import quad

from nonlocal_lwr import initial_data as idata
from nonlocal_lwr.grid import GridSpec
from nonlocal_lwr.velocity import CLIPPED_GREENSHIELDS, GREENSHIELDS, KRYSTEK, UNDERWOOD, get_velocity


def test_grid_basics():
    g = GridSpec(-2.0, 2.0, 2e-3)
    assert g.num_cells == 2000
    assert g.edges[0] == -2.0 and g.edges[-1] == pytest.approx(2.0)
    assert g.centers[0] == pytest.approx(-2.0 + 1e-3)
    assert g.refined(8).num_cells == 16000
    assert g.index_of(0.0) == 1000
    with pytest.raises(ValueError):
        GridSpec(0.0, 1.0, 0.3)
    with pytest.raises(ValueError):
        GridSpec(1.0, 0.0, 0.1)


def test_shock_and_rarefaction_averages():
    g = GridSpec(-1.0, 1.0, 0.25)
    np.testing.assert_array_equal(idata.discretize_initial(idata.riemann_shock(), g),
                                  [0.0] * 4 + [0.7] * 4)
    np.testing.assert_array_equal(idata.discretize_initial(idata.riemann_rarefaction(), g),
                                  [0.65] * 4 + [0.35] * 4)


def test_jump_inside_cell_is_averaged():
    g = GridSpec(-0.5, 0.5, 0.5)
    d = idata.riemann(0.2, 0.6)
    shifted = idata.PiecewiseConstantData("piecewise_constant", (-0.125,), (0.2, 0.6))
    np.testing.assert_allclose(idata.discretize_initial(shifted, g), [0.2 * 0.75 + 0.6 * 0.25, 0.6])
    assert d.riemann_states == (0.2, 0.6)
    assert shifted.riemann_states is None


def test_bell_cell_average():
    # frozen from scipy.integrate.quad of 0.4 + 0.4 exp(-100 x^2) over [-5e-4, 5e-4]
    g = GridSpec(-5e-4, 5e-4, 1e-3)
    assert idata.discretize_initial(idata.bell_shaped(), g)[0] == pytest.approx(
        0.7999966666916665, abs=1e-15)


@given(st.floats(-1.9, 1.9), st.sampled_from([1e-2, 5e-3, 2e-2]))
def test_bell_matches_adaptive_quadrature(x0, h):
    g = GridSpec(-2.0, 2.0, h)
    j = g.index_of(x0)
    a, b = g.edges[j], g.edges[j + 1]
    ref = quad(idata.bell_shaped(), a, b, epsabs=1e-14)[0] / h
    assert idata.discretize_initial(idata.bell_shaped(), g)[j] == pytest.approx(ref, abs=1e-12)


def test_tv_increase_datum():
    d = idata.tv_increase(0.2)
    assert d.total_variation == 2.0
    g = GridSpec(-1.5, 2.5, 2e-3)
    rho = idata.discretize_initial(d, g)
    assert np.abs(np.diff(rho)).sum() == pytest.approx(2.0, abs=1e-12)
    with pytest.raises(idata.InitialDataError):
        idata.tv_increase(0.0)


def test_out_of_range():
    with pytest.raises(idata.InitialDataError, match="data-out-of-range"):
        idata.discretize_initial(idata.constant(1.5), GridSpec(0.0, 1.0, 0.5))


@pytest.mark.parametrize("d", [idata.riemann_shock(), idata.riemann_rarefaction(), idata.bell_shaped(),
                               idata.tv_increase(0.1), idata.constant(0.3), idata.riemann(0.1, 0.9)])
def test_from_dict_round_trip(d):
    back = idata.from_dict(d.to_dict())
    g = GridSpec(-1.0, 1.0, 0.01)
    np.testing.assert_array_equal(idata.discretize_initial(back, g), idata.discretize_initial(d, g))


@pytest.mark.parametrize("model,sup,lip", [(GREENSHIELDS, 1, 1), (KRYSTEK, 1, 4), (UNDERWOOD, 1, 1),
                                           (CLIPPED_GREENSHIELDS, 1, 1)])
def test_velocity_norms(model, sup, lip):
    xi = np.linspace(0.0, 1.0, 2001)
    v = model(xi)
    assert np.all(np.diff(v) <= 0.0)
    assert np.max(np.abs(v)) == pytest.approx(sup)
    assert np.max(np.abs(model.derivative(xi))) <= lip + 1e-12
    assert get_velocity(model.name) is model


def test_clipped_greenshields_stays_nonnegative():
    assert CLIPPED_GREENSHIELDS(np.array([1.5]))[0] == 0.0
    assert CLIPPED_GREENSHIELDS(0.25) == 0.75
