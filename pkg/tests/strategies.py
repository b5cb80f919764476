"""Hypothesis strategies shared by the property suites."""

import numpy as np
from hypothesis import strategies as st

from nonlocal_lwr.grid import GridSpec
from nonlocal_lwr.kernels import CONSTANT, EXPONENTIAL, LINEAR
from nonlocal_lwr.quadrature import exact_weights
from nonlocal_lwr.scheme import CFLVariant, SchemeConfig, max_cfl_ratio
from nonlocal_lwr.velocity import GREENSHIELDS, KRYSTEK, UNDERWOOD

H = 0.01


@st.composite
def bv_profiles(draw, max_pieces=10, max_len=6):
    """Piecewise constant cell values in [0, 1]."""
    n = draw(st.integers(1, max_pieces))
    values = draw(st.lists(st.floats(0.0, 1.0), min_size=n, max_size=n))
    lengths = draw(st.lists(st.integers(1, max_len), min_size=n, max_size=n))
    return np.repeat(values, lengths)


@st.composite
def scheme_setups(draw, kernels=(EXPONENTIAL, LINEAR, CONSTANT),
                  variant=CFLVariant.MAX_PRINCIPLE, steps=8):
    """A padded profile, a scheme config and a step count.

    The profile is padded with enough constant cells on both sides that the
    finite grid with constant extension reproduces the infinite-grid scheme
    for ``steps`` steps, so whole-line estimates can be checked exactly.
    """
    kernel = draw(st.sampled_from(kernels))
    ratio = draw(st.floats(0.3, 3.0))
    velocity = draw(st.sampled_from([GREENSHIELDS, UNDERWOOD, KRYSTEK]))
    lam = draw(st.floats(0.05, 1.0)) * max_cfl_ratio(velocity, variant)
    core = draw(bv_profiles())
    eps = ratio * H
    weights = exact_weights(kernel, eps, H)
    left = (weights.K + 1) * steps + 2
    right = steps + 2
    rho = np.concatenate([np.full(left, core[0]), core, np.full(right, core[-1])])
    grid = GridSpec(0.0, len(rho) * H, H)
    cfg = SchemeConfig(grid, weights, velocity, lam, eps, variant)
    return rho, cfg, steps
