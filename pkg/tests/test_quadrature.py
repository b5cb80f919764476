import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.integrate import quad

from nonlocal_lwr.kernels import CONSTANT, EXPONENTIAL, LINEAR, evaluate
from nonlocal_lwr.quadrature import (QuadratureError, WeightFamily, build_weights, exact_weights,
                                     geometric_weights, normalized_riemann_weights,
                                     riemann_weights, verify_weight_conditions)

E = math.e


def test_exact_exponential_eps_equals_h():
    w = exact_weights(EXPONENTIAL, 1e-2, 1e-2)
    assert w.weights[0] == pytest.approx(1 - 1 / E, rel=1e-15)
    assert w.weights[1] == pytest.approx((1 - 1 / E) / E, rel=1e-15)
    # truncation: smallest K with exp(-(K+1)) <= 1e-12
    assert w.K == 27
    assert w.tail_mass <= 1e-12 < math.exp(-w.K)
    assert abs(w.total - 1.0) < 1e-15


@pytest.mark.parametrize("kernel,eps,h,expected", [
    (LINEAR, 1.0, 0.5, [0.75, 0.25]),
    (CONSTANT, 1.0, 0.25, [0.25, 0.25, 0.25, 0.25]),
    # frozen from scipy.integrate.quad over each cell
    (LINEAR, 1.0, 0.3, [0.51, 0.33, 0.15, 0.01]),
    (EXPONENTIAL, 0.3, 0.1, [0.2834686894262107, 0.2031141915411972,
                             0.14553767786114974, 0.10428230305571554]),
])
def test_exact_weights_frozen(kernel, eps, h, expected):
    w = exact_weights(kernel, eps, h)
    np.testing.assert_allclose(w.weights[:len(expected)], expected, rtol=1e-13, atol=1e-15)


@given(st.sampled_from([EXPONENTIAL, LINEAR, CONSTANT]),
       st.floats(0.05, 2.0), st.floats(0.01, 1.0))
def test_exact_weights_are_cell_integrals(kernel, eps, h):
    w = exact_weights(kernel, eps, h)
    r = h / eps
    for k in range(min(w.K + 1, 6)):
        ref = quad(lambda z: float(evaluate(kernel, z)), -(k + 1) * r, -k * r,
                   points=[-1.0] if -(k + 1) * r < -1.0 < -k * r else None)[0]
        assert w.weights[k] == pytest.approx(ref, abs=1e-11)
    assert abs(w.total - 1.0) < 1e-12


def test_riemann_weights():
    lin = riemann_weights(LINEAR, 0.01, 0.01)
    np.testing.assert_array_equal(lin.weights, [2.0, 0.0])
    assert lin.total == 2.0  # 1 + h / eps
    const = riemann_weights(CONSTANT, 1.0, 0.25)
    np.testing.assert_array_equal(const.weights, [0.25] * 4 + [0.0])
    assert const.total == 1.0
    ex = riemann_weights(EXPONENTIAL, 1.0, 1.0)
    np.testing.assert_allclose(ex.weights[:3], [1.0, 1 / E, 1 / E**2], rtol=1e-15)
    assert ex.total == pytest.approx(1 / (1 - 1 / E), rel=1e-12)  # 1.5819767...
    assert not ex.fold_tail


def test_normalized_riemann():
    np.testing.assert_array_equal(normalized_riemann_weights(LINEAR, 0.01, 0.01).weights, [1.0, 0.0])
    nr = normalized_riemann_weights(EXPONENTIAL, 0.05, 0.05)
    ex = exact_weights(EXPONENTIAL, 0.05, 0.05)
    np.testing.assert_allclose(nr.weights, ex.weights, rtol=1e-14)
    assert abs(nr.total - 1.0) < 1e-14


def test_geometric():
    eps, h = 0.07, 0.01
    g = geometric_weights(-math.expm1(-h / eps), epsilon=eps, h=h)
    ex = exact_weights(EXPONENTIAL, eps, h)
    assert g.K == ex.K
    np.testing.assert_allclose(g.weights, ex.weights, rtol=1e-12)
    big = geometric_weights(0.999)
    assert big.K <= 4
    assert abs(big.total - 1.0) <= 1e-12
    with pytest.raises(QuadratureError):
        geometric_weights(1.0)


@given(st.floats(1e-3, 0.999))
def test_geometric_recursion_and_mass(gamma0):
    g = geometric_weights(gamma0)
    w = g.weights
    np.testing.assert_array_equal(w[1:], (1 - gamma0) * w[:-1])
    assert abs(g.total - 1.0) <= 1e-12


def test_build_weights_dispatch():
    assert build_weights(LINEAR, "exact", 1.0, 0.5).family is WeightFamily.EXACT
    assert build_weights(LINEAR, "normalized_riemann", 1.0, 0.5).family is WeightFamily.NORMALIZED_RIEMANN
    geo = build_weights(EXPONENTIAL, "geometric", 0.1, 0.1)
    assert geo.gamma0_parameter == pytest.approx(1 - 1 / E)
    with pytest.raises(QuadratureError):
        exact_weights(LINEAR, -1.0, 0.1)


def test_conditions_exponential_all_pass():
    rep = verify_weight_conditions(exact_weights(EXPONENTIAL, 0.02, 0.01), 1.0)
    assert all([rep.nonneg_monotone, rep.normalized, rep.convex, rep.localized_proxy,
                rep.moment_bounded])


def test_conditions_constant_not_convex():
    rep = verify_weight_conditions(exact_weights(CONSTANT, 1.0, 0.25), 0.5)
    assert not rep.convex
    # w_2 + w_4 - 2 w_3 = 0.25 + 0 - 0.5
    assert rep.worst_convexity_defect == pytest.approx(-0.25)
    assert rep.normalized and rep.nonneg_monotone


def test_conditions_riemann_linear():
    assert not verify_weight_conditions(riemann_weights(LINEAR, 0.01, 0.01), 1 / 3).normalized
    rep = verify_weight_conditions(normalized_riemann_weights(LINEAR, 1.0, 0.25), 2 / 3)
    assert rep.moment_bounded and rep.normalized


@pytest.mark.parametrize("kernel,c", [(EXPONENTIAL, 1.0), (LINEAR, 1 / 3), (CONSTANT, 0.5)])
@pytest.mark.parametrize("ratio", [0.1, 0.5, 1.0, 3.0])
def test_exact_moment_ratio_within_kernel_moment_plus_half_cell(kernel, c, ratio):
    # sum k w_k h / eps underestimates the kernel moment by at most h / (2 eps)
    rep = verify_weight_conditions(exact_weights(kernel, 1.0, ratio), c)
    assert rep.measured_moment_ratio <= c + 1e-12
    assert rep.measured_moment_ratio >= c - ratio / 2 - 1e-12
