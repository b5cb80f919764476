"""
Quadrature weight families for the discrete nonlocal impact.

The weights ``w_k`` approximate the mass of the rescaled kernel on the cell
``]-(k+1)h, -kh]``, so that ``W_j = sum_k w_k rho_{j+k}``.  Infinite sequences
are truncated at the smallest ``K`` whose closed-form tail is below
``tail_tol``; the remaining mass is kept in ``tail_mass``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .kernels import Kernel, KernelFamily, evaluate, interval_mass

DEFAULT_TAIL_TOL = 1e-12
# radius (in units of epsilon) for the finite localization proxy
LOCALIZATION_RADIUS = 40.0


class QuadratureError(ValueError):
    pass


class WeightFamily(str, enum.Enum):
    EXACT = "exact"
    RIEMANN = "riemann"
    NORMALIZED_RIEMANN = "normalized_riemann"
    GEOMETRIC = "geometric"


@dataclass(frozen=True, eq=False)
class QuadratureWeights:
    weights: np.ndarray
    tail_mass: float
    epsilon: float
    h: float
    family: WeightFamily
    gamma0_parameter: float | None = None
    kernel_name: str | None = None
    # whether the tail is added to W through the right constant extension
    fold_tail: bool = True
    analytic_total: float = 1.0
    tail_tol: float = DEFAULT_TAIL_TOL
    # sum of the weights beyond the truncation, by index, when known in closed form
    _tail_fn: object = field(default=None, repr=False)

    def __post_init__(self):
        w = np.ascontiguousarray(self.weights, dtype=float)
        w.flags.writeable = False
        object.__setattr__(self, "weights", w)

    @property
    def K(self) -> int:
        return len(self.weights) - 1

    @property
    def total(self) -> float:
        return math.fsum(self.weights) + self.tail_mass

    def mass_beyond(self, k: int) -> float:
        """Mass of all weights with index ``>= k`` (tail included)."""
        if k <= 0:
            return self.total
        if k > self.K:
            if self._tail_fn is not None:
                return self._tail_fn(k)
            return self.tail_mass
        return math.fsum(self.weights[k:]) + self.tail_mass

    def to_dict(self) -> dict:
        return {
            "family": self.family.value,
            "kernel": self.kernel_name,
            "epsilon": self.epsilon,
            "h": self.h,
            "K": self.K,
            "tail_mass": self.tail_mass,
            "gamma0": self.gamma0_parameter,
            "tail_tol": self.tail_tol,
        }


@dataclass(frozen=True)
class WeightConditionReport:
    nonneg_monotone: bool
    normalized: bool
    convex: bool
    localized_proxy: bool
    moment_bounded: bool
    measured_moment_ratio: float
    worst_convexity_defect: float

    def as_dict(self) -> dict:
        return {
            "nonneg_monotone": self.nonneg_monotone,
            "normalized": self.normalized,
            "convex": self.convex,
            "localized_proxy": self.localized_proxy,
            "moment_bounded": self.moment_bounded,
            "measured_moment_ratio": self.measured_moment_ratio,
            "worst_convexity_defect": self.worst_convexity_defect,
        }


def _check_positive(**kw):
    for name, val in kw.items():
        if not (val > 0.0 and math.isfinite(val)):
            raise QuadratureError(f"{name} must be positive and finite, got {val}")


def _exp_truncation(ratio: float, tail_tol: float) -> int:
    # smallest K with exp(-(K+1) ratio) <= tail_tol
    K = max(0, math.ceil(-math.log(tail_tol) / ratio) - 1)
    while K > 0 and math.exp(-K * ratio) <= tail_tol:
        K -= 1
    while math.exp(-(K + 1) * ratio) > tail_tol:
        K += 1
    return K


def _compact_cells(kernel: Kernel, ratio: float) -> int:
    # number of cells needed to cover ]support_left, 0] when each cell spans
    # ``ratio`` in kernel coordinates
    n = math.ceil(-kernel.support_left / ratio - 1e-12)
    return max(n, 1)


def exact_weights(kernel: Kernel, epsilon: float, h: float,
                  tail_tol: float = DEFAULT_TAIL_TOL) -> QuadratureWeights:
    """Cell masses of the rescaled kernel, ``w_k = int_{-(k+1)h/eps}^{-kh/eps} gamma``."""
    _check_positive(epsilon=epsilon, h=h, tail_tol=tail_tol)
    ratio = h / epsilon
    if kernel.family is KernelFamily.EXPONENTIAL:
        K = _exp_truncation(ratio, tail_tol)
        k = np.arange(K + 1)
        w = np.exp(-k * ratio) * -math.expm1(-ratio)
        tail = math.exp(-(K + 1) * ratio)
        return QuadratureWeights(w, tail, epsilon, h, WeightFamily.EXACT,
                                 kernel_name=kernel.name, tail_tol=tail_tol,
                                 _tail_fn=lambda m: math.exp(-m * ratio))
    if not kernel.compact:
        raise QuadratureError("non-compact custom kernels are not supported")
    n = _compact_cells(kernel, ratio)
    w = np.array([interval_mass(kernel, -(k + 1) * ratio, -k * ratio) for k in range(n)])
    return QuadratureWeights(w, 0.0, epsilon, h, WeightFamily.EXACT,
                             kernel_name=kernel.name, tail_tol=tail_tol,
                             analytic_total=kernel.total_mass)


def riemann_weights(kernel: Kernel, epsilon: float, h: float,
                    tail_tol: float = DEFAULT_TAIL_TOL) -> QuadratureWeights:
    """Unnormalized point samples ``w_k = (h/eps) gamma(-kh/eps)``, ``gamma(0-)`` at ``k = 0``.

    These generally sum to more than one; the tail is not folded into ``W``.
    """
    _check_positive(epsilon=epsilon, h=h, tail_tol=tail_tol)
    ratio = h / epsilon
    if kernel.family is KernelFamily.EXPONENTIAL:
        # total is ratio / (1 - exp(-ratio)); truncate on the relative tail
        K = _exp_truncation(ratio, tail_tol)
        k = np.arange(K + 1)
        w = ratio * np.exp(-k * ratio)
        scale = ratio / -math.expm1(-ratio)
        tail = scale * math.exp(-(K + 1) * ratio)
        return QuadratureWeights(w, tail, epsilon, h, WeightFamily.RIEMANN,
                                 kernel_name=kernel.name, fold_tail=False,
                                 analytic_total=scale, tail_tol=tail_tol,
                                 _tail_fn=lambda m: scale * math.exp(-m * ratio))
    if not kernel.compact:
        raise QuadratureError("non-compact custom kernels are not supported")
    # samples up to and including the left end of the support
    n = math.floor(-kernel.support_left / ratio + 1e-12) + 1
    z = -np.arange(n) * ratio
    # snap the last sample onto the (excluded) left end of the support
    z = np.where(np.abs(z - kernel.support_left) <= 1e-12, kernel.support_left, z)
    vals = evaluate(kernel, z)
    vals = np.atleast_1d(vals).astype(float)
    vals[0] = _left_limit_at_zero(kernel)
    w = ratio * vals
    return QuadratureWeights(w, 0.0, epsilon, h, WeightFamily.RIEMANN,
                             kernel_name=kernel.name, fold_tail=False,
                             analytic_total=math.fsum(w), tail_tol=tail_tol)


def _left_limit_at_zero(kernel: Kernel) -> float:
    if kernel.family is KernelFamily.CUSTOM_TABLE:
        last = kernel.table[-1]
        return last[2] if last[1] == 0.0 else 0.0
    return float(evaluate(kernel, 0.0))


def normalized_riemann_weights(kernel: Kernel, epsilon: float, h: float,
                               tail_tol: float = DEFAULT_TAIL_TOL) -> QuadratureWeights:
    """Riemann samples divided by their (tail-corrected) total."""
    raw = riemann_weights(kernel, epsilon, h, tail_tol)
    total = raw.analytic_total
    if not total > 0.0:
        raise QuadratureError("degenerate-kernel: Riemann samples sum to zero")
    if kernel.family is KernelFamily.EXPONENTIAL:
        ratio = h / epsilon
        # normalized samples are exactly the geometric cell masses
        w = raw.weights * (-math.expm1(-ratio) / ratio)
        tail = math.exp(-(raw.K + 1) * ratio)
        tail_fn = lambda m: math.exp(-m * ratio)  # noqa: E731
    else:
        w = raw.weights / total
        tail = 0.0
        tail_fn = None
    return QuadratureWeights(w, tail, epsilon, h, WeightFamily.NORMALIZED_RIEMANN,
                             kernel_name=kernel.name, tail_tol=tail_tol,
                             _tail_fn=tail_fn)


def geometric_weights(gamma0: float, tail_tol: float = DEFAULT_TAIL_TOL, *,
                      epsilon: float = 1.0, h: float = 1.0) -> QuadratureWeights:
    """Geometric sequence ``w_k = gamma0 (1 - gamma0)^k``.

    ``epsilon`` and ``h`` are only recorded (the moment check needs them).
    """
    if not 0.0 < gamma0 < 1.0:
        raise QuadratureError(f"gamma0 must lie in (0, 1), got {gamma0}")
    _check_positive(epsilon=epsilon, h=h, tail_tol=tail_tol)
    q = 1.0 - gamma0
    K = 0
    while q ** (K + 1) > tail_tol:
        K += 1
    # build by the recursion so that w[k+1] = q * w[k] holds exactly
    w = np.empty(K + 1)
    w[0] = gamma0
    for k in range(K):
        w[k + 1] = q * w[k]
    return QuadratureWeights(w, q ** (K + 1), epsilon, h, WeightFamily.GEOMETRIC,
                             gamma0_parameter=gamma0, tail_tol=tail_tol,
                             _tail_fn=lambda m: q ** m)


def build_weights(kernel: Kernel, family: WeightFamily | str, epsilon: float, h: float,
                  tail_tol: float = DEFAULT_TAIL_TOL) -> QuadratureWeights:
    family = WeightFamily(family)
    if family is WeightFamily.EXACT:
        return exact_weights(kernel, epsilon, h, tail_tol)
    if family is WeightFamily.RIEMANN:
        return riemann_weights(kernel, epsilon, h, tail_tol)
    if family is WeightFamily.NORMALIZED_RIEMANN:
        return normalized_riemann_weights(kernel, epsilon, h, tail_tol)
    # geometric weights matching the exponential cell masses
    return geometric_weights(-math.expm1(-h / epsilon), tail_tol, epsilon=epsilon, h=h)


def verify_weight_conditions(w: QuadratureWeights, c_gamma: float, *,
                             radius: float = LOCALIZATION_RADIUS,
                             tol: float = 1e-12) -> WeightConditionReport:
    """Check the five structural conditions on a truncated weight sequence.

    Monotonicity, normalization, discrete convexity (second differences, the
    tail counted as a zero continuation), first-moment bound
    ``sum k w_k <= c_gamma eps / h``, and the localization proxy: mass beyond
    ``radius * eps`` is below ``tol``.
    """
    if not c_gamma > 0.0:
        raise QuadratureError("c_gamma must be positive")
    mono = bool(np.all(w.weights >= 0.0) and np.all(np.diff(w.weights) <= 1e-15)
                and w.tail_mass >= 0.0)
    normalized = abs(w.total - 1.0) <= tol
    if w.tail_mass == 0.0:
        # the sequence continues with zeros
        seq = np.concatenate([w.weights, [0.0, 0.0]])
    else:
        seq = w.weights
    if len(seq) >= 3:
        second = seq[:-2] + seq[2:] - 2.0 * seq[1:-1]
        worst = float(min(second.min(), 0.0))
    else:
        worst = 0.0
    convex = worst >= -1e-14
    k = np.arange(w.K + 1)
    moment = math.fsum(k * w.weights)
    if w._tail_fn is not None:
        # sum_{k > K} k w_k = sum_{m > K} mass_beyond(m) + K * mass_beyond(K+1)
        m = w.K + 1
        extra = (w.K) * w._tail_fn(m)
        while True:
            t = w._tail_fn(m)
            if t < 1e-18 * max(moment, 1.0):
                break
            extra += t
            m += 1
        moment += extra
    ratio = moment * w.h / w.epsilon
    cutoff = math.ceil(radius * w.epsilon / w.h)
    localized = w.mass_beyond(cutoff) <= tol
    return WeightConditionReport(
        nonneg_monotone=mono,
        normalized=normalized,
        convex=convex,
        localized_proxy=localized,
        moment_bounded=ratio <= c_gamma * (1.0 + 1e-12),
        measured_moment_ratio=ratio,
        worst_convexity_defect=worst,
    )
