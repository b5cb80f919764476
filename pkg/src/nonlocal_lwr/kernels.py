"""
Nonlocal kernels supported on the nonpositive half-line.

A kernel is a probability density ``gamma(z)`` vanishing for ``z > 0``.  The
scheme never samples it pointwise except for Riemann-type quadrature; what it
really consumes are interval masses, which are computed here in closed form.

Built-in families:

* ``EXPONENTIAL``: ``exp(z)`` on ``]-inf, 0]``
* ``LINEAR``: ``2 (z + 1)`` on ``]-1, 0]``
* ``CONSTANT``: ``1`` on ``]-1, 0]``
* ``CUSTOM_TABLE``: piecewise constant, loaded from a table or CSV file
"""

from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


class KernelError(ValueError):
    """Raised for invalid kernel definitions or queries."""


class KernelFamily(str, enum.Enum):
    EXPONENTIAL = "exponential"
    LINEAR = "linear"
    CONSTANT = "constant"
    CUSTOM_TABLE = "custom"


@dataclass(frozen=True)
class Kernel:
    """Immutable description of a kernel ``gamma``.

    ``table`` holds ``(z_left, z_right, value)`` rows for custom kernels; the
    density equals ``value`` on ``]z_left, z_right]``.
    """

    family: KernelFamily
    support_left: float
    convex_on_support: bool
    nondecreasing_on_support: bool
    total_mass: float
    first_moment: float
    table: tuple[tuple[float, float, float], ...] | None = field(default=None, repr=False)

    @property
    def name(self) -> str:
        return self.family.value

    @property
    def compact(self) -> bool:
        return math.isfinite(self.support_left)

    def __call__(self, z):
        return evaluate(self, z)


@dataclass(frozen=True)
class AdmissibilityReport:
    supported_in_nonpositive: bool
    nonnegative: bool
    nondecreasing: bool
    convex: bool
    normalized: bool

    @property
    def admissible(self) -> bool:
        return all(
            (self.supported_in_nonpositive, self.nonnegative, self.nondecreasing,
             self.convex, self.normalized)
        )


EXPONENTIAL = Kernel(KernelFamily.EXPONENTIAL, -math.inf, True, True, 1.0, 1.0)
LINEAR = Kernel(KernelFamily.LINEAR, -1.0, True, True, 1.0, 1.0 / 3.0)
# the upward jump at z = -1 onto a flat plateau rules out convexity
CONSTANT = Kernel(KernelFamily.CONSTANT, -1.0, False, True, 1.0, 0.5)

_BUILTINS = {k.family: k for k in (EXPONENTIAL, LINEAR, CONSTANT)}


def get_kernel(name: str | KernelFamily) -> Kernel:
    """Look up a built-in kernel by name (``"exponential"``, ``"linear"``, ``"constant"``)."""
    try:
        family = KernelFamily(name)
    except ValueError:
        raise KernelError(f"unknown kernel family {name!r}") from None
    if family not in _BUILTINS:
        raise KernelError("custom kernels must be built with table_kernel() or load_kernel_csv()")
    return _BUILTINS[family]


def _table_convex(rows) -> bool:
    # Second divided differences of the values at the breakpoints, with the
    # density taken as 0 at the left end of the support.  This is convexity of
    # the piecewise-linear interpolant, a sufficient proxy for tables.
    xs = np.array([rows[0][0]] + [b for _, b, _ in rows])
    ys = np.array([0.0] + [v for _, _, v in rows])
    slopes = np.diff(ys) / np.diff(xs)
    return bool(np.all(np.diff(slopes) >= -1e-14))


def table_kernel(rows, *, moment: float | None = None) -> Kernel:
    """Build a piecewise-constant kernel from ``(z_left, z_right, value)`` rows.

    Rows must be sorted, contiguous, and lie in ``]-inf, 0]``.  ``moment`` may
    be passed as ``math.inf`` to declare an unbounded first moment.
    """
    rows = tuple((float(a), float(b), float(v)) for a, b, v in rows)
    if not rows:
        raise KernelError("empty kernel table")
    for i, (a, b, v) in enumerate(rows):
        if not (math.isfinite(a) and math.isfinite(b)) or a >= b:
            raise KernelError(f"row {i}: need finite z_left < z_right")
        if b > 0.0:
            raise KernelError(f"row {i}: support must lie in ]-inf, 0]")
        if v < 0.0:
            raise KernelError(f"row {i}: negative density")
        if i and a != rows[i - 1][1]:
            raise KernelError(f"row {i}: rows must tile a contiguous interval")
    mass = math.fsum((b - a) * v for a, b, v in rows)
    if moment is None:
        # integral of |z| over ]a, b] is (a^2 - b^2) / 2 for a < b <= 0
        moment = math.fsum(v * (a * a - b * b) / 2.0 for a, b, v in rows)
    values = [v for _, _, v in rows]
    return Kernel(
        family=KernelFamily.CUSTOM_TABLE,
        support_left=rows[0][0],
        convex_on_support=_table_convex(rows),
        nondecreasing_on_support=bool(np.all(np.diff(values) >= 0.0)),
        total_mass=mass,
        first_moment=moment,
        table=rows,
    )


def load_kernel_csv(path) -> Kernel:
    """Read a custom kernel from a CSV with header ``z_left,z_right,value``."""
    path = Path(path)
    rows = []
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["z_left", "z_right", "value"]:
            raise KernelError(f"{path}:1: expected header z_left,z_right,value")
        for lineno, rec in enumerate(reader, start=2):
            if not rec or all(not c.strip() for c in rec):
                continue
            if len(rec) != 3:
                raise KernelError(f"{path}:{lineno}: expected 3 columns, got {len(rec)}")
            try:
                row = tuple(float(c) for c in rec)
            except ValueError:
                raise KernelError(f"{path}:{lineno}: non-numeric value") from None
            try:
                table_kernel(rows + [row])
            except KernelError as exc:
                raise KernelError(f"{path}:{lineno}: {exc}") from None
            rows.append(row)
    if not rows:
        raise KernelError(f"{path}: no data rows")
    return table_kernel(rows)


def evaluate(kernel: Kernel, z):
    """Pointwise density ``gamma(z)``; zero outside the support.

    The support is taken left-open (``]-1, 0]`` for the compact families), and
    the exponential takes its left limit 1 at ``z = 0``.
    """
    z = np.asarray(z, dtype=float)
    fam = kernel.family
    if fam is KernelFamily.EXPONENTIAL:
        out = np.where(z <= 0.0, np.exp(np.minimum(z, 0.0)), 0.0)
    elif fam is KernelFamily.LINEAR:
        out = np.where((z > -1.0) & (z <= 0.0), 2.0 * (z + 1.0), 0.0)
    elif fam is KernelFamily.CONSTANT:
        out = np.where((z > -1.0) & (z <= 0.0), 1.0, 0.0)
    else:
        out = np.zeros_like(z)
        for a, b, v in kernel.table:
            out = np.where((z > a) & (z <= b), v, out)
    return out[()] if out.ndim == 0 else out


def interval_mass(kernel: Kernel, a: float, b: float) -> float:
    """Exact ``int_a^b gamma(z) dz`` for ``a <= b``."""
    if a > b:
        raise KernelError(f"invalid-interval: a={a} > b={b}")
    b = min(b, 0.0)
    if a >= b:
        return 0.0
    fam = kernel.family
    if fam is KernelFamily.EXPONENTIAL:
        if a == -math.inf:
            return math.exp(b)
        # exp(b) - exp(a) without cancellation
        return -math.exp(b) * math.expm1(a - b)
    if fam is KernelFamily.CUSTOM_TABLE:
        total = 0.0
        for za, zb, v in kernel.table:
            lo, hi = max(a, za), min(b, zb)
            if hi > lo:
                total += v * (hi - lo)
        return total
    if fam is KernelFamily.CONSTANT:
        return max(0.0, b - max(a, -1.0))
    # linear: (b+1)^2 - (a+1)^2 = (b - a)(a + b + 2), clipped to the support
    a = max(a, -1.0)
    if a >= b:
        return 0.0
    return (b - a) * (a + b + 2.0)


def first_moment(kernel: Kernel) -> float:
    """First absolute moment ``int |z| gamma(z) dz``."""
    if not math.isfinite(kernel.first_moment):
        raise KernelError("infinite-moment: kernel declares an unbounded first moment")
    return kernel.first_moment


def check_admissibility(kernel: Kernel, *, tol: float = 1e-12) -> AdmissibilityReport:
    """Check the structural assumptions the convergence theory places on ``gamma``."""
    if kernel.family is KernelFamily.CUSTOM_TABLE:
        values = np.array([v for _, _, v in kernel.table])
        supported = kernel.table[-1][1] <= 0.0
        nonneg = bool(np.all(values >= 0.0))
    else:
        supported = nonneg = True
    return AdmissibilityReport(
        supported_in_nonpositive=supported,
        nonnegative=nonneg,
        nondecreasing=kernel.nondecreasing_on_support,
        convex=kernel.convex_on_support and kernel.nondecreasing_on_support,
        normalized=abs(kernel.total_mass - 1.0) <= tol,
    )
