"""
Runtime stability metrics for discrete solutions.

Everything here is a pure function of arrays.  Index windows are Python
``slice`` objects (``None`` means the whole grid).  Out-of-grid neighbours
are supplied by constant extension, as in the scheme.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

DIAGNOSTICS_COLUMNS = ("n", "t", "rho_min", "rho_max", "mass", "tv_rho", "tv_W",
                       "tv_time_increment", "entropy_pos_rho", "entropy_pos_W")


class EmptyWindow(ValueError):
    pass


@dataclass
class DiagnosticsRecord:
    n: int
    t: float
    rho_min: float
    rho_max: float
    mass: float
    tv_rho: float
    tv_W: float
    tv_time_increment: float
    entropy_pos_rho: float
    entropy_pos_W: float

    def as_row(self) -> list:
        return [getattr(self, c) for c in DIAGNOSTICS_COLUMNS]

    as_dict = asdict


@dataclass(frozen=True)
class EntropyResidualConfig:
    c: float = 0.5
    window: slice | None = None

    def __post_init__(self):
        if not 0.0 <= self.c <= 1.0:
            raise ValueError("Kruzhkov constant must lie in [0, 1]")


def _window(n: int, window) -> slice:
    if window is None:
        return slice(0, n)
    start, stop, _ = window.indices(n)
    return slice(start, stop)


def tv(values, window=None) -> float:
    """Total variation ``sum |u_{j+1} - u_j|`` over the cells in ``window``."""
    u = np.asarray(values, dtype=float)
    sl = _window(len(u), window)
    seg = u[sl]
    if seg.size == 0:
        raise EmptyWindow("empty-window")
    return float(np.sum(np.abs(np.diff(seg))))


def tv_extended_W(rho, weights) -> float:
    """Total variation over the whole line of ``W`` built from constant-extended ``rho``.

    Left of the grid ``W`` relaxes to ``rho_0`` and right of it equals
    ``rho_{N-1}``; both tails are included, so this is the quantity the
    infinite-grid TV estimate controls.
    """
    from .scheme import compute_W

    rho = np.asarray(rho, dtype=float)
    ext = np.empty(len(rho) + weights.K + 1)
    ext[: weights.K + 1] = rho[0]
    ext[weights.K + 1:] = rho
    return float(np.sum(np.abs(np.diff(compute_W(ext, weights, extra=1)))))


def boundary_window(num_cells: int, h: float, epsilon: float, T: float,
                    v_max: float = 1.0, radius: float = 40.0) -> slice:
    """Cells farther than ``radius * epsilon + v_max * T`` from either boundary."""
    m = math.ceil((radius * epsilon + v_max * T) / h)
    if 2 * m >= num_cells:
        raise EmptyWindow(f"empty-window: margin of {m} cells leaves nothing of {num_cells}")
    return slice(m, num_cells - m)


def _kruzhkov_flux(u_left, u_right, velocity, c):
    # (u v c) V(w v c) - (u ^ c) V(w ^ c) with w the downstream value
    return (np.maximum(u_left, c) * velocity(np.maximum(u_right, c))
            - np.minimum(u_left, c) * velocity(np.minimum(u_right, c)))


def local_entropy_defect(u_old, u_new, velocity, lam: float, c: float) -> np.ndarray:
    """``tau * E_j`` for one step: ``|u_new - c| - |u_old - c| + lam (Psi_{j+1/2} - Psi_{j-1/2})``."""
    u_old = np.asarray(u_old, dtype=float)
    ext = np.empty(len(u_old) + 2)
    ext[1:-1] = u_old
    ext[0], ext[-1] = u_old[0], u_old[-1]
    psi = _kruzhkov_flux(ext[:-1], ext[1:], velocity, c)
    return (np.abs(u_new - c) - np.abs(u_old - c)) + lam * (psi[1:] - psi[:-1])


def entropy_residual_local(traj, velocity, lam: float, h: float,
                           cfg: EntropyResidualConfig = EntropyResidualConfig()):
    """Local Kruzhkov residuals ``E_{j,n}`` of a trajectory and their aggregate.

    ``traj`` is a sequence of arrays (``rho`` or ``W`` levels).  Returns the
    residual field on the window, shape ``(levels - 1, cells)``, and
    ``tau h sum max(E, 0)``.
    """
    traj = np.asarray(traj, dtype=float)
    if traj.ndim != 2 or traj.shape[0] < 2:
        raise ValueError("trajectory needs at least two time levels")
    tau = lam * h
    sl = _window(traj.shape[1], cfg.window)
    field = np.empty((traj.shape[0] - 1, sl.stop - sl.start))
    total = 0.0
    for n in range(traj.shape[0] - 1):
        d = local_entropy_defect(traj[n], traj[n + 1], velocity, lam, cfg.c)[sl]
        field[n] = d / tau
        total += h * float(np.sum(np.maximum(d, 0.0)))
    return field, total


def local_entropy_positive_part(u_old, u_new, velocity, lam: float, h: float, c: float,
                                window=None) -> float:
    """Contribution of one step to ``tau h sum max(E, 0)``."""
    d = local_entropy_defect(u_old, u_new, velocity, lam, c)[_window(len(u_old), window)]
    return h * float(np.sum(np.maximum(d, 0.0)))


def _nonlocal_defect(rho, w_old, w_new, weights, velocity, lam, c):
    # tau * (entropy residual of W); Psi_{j-1/2} = |W_{j-1} - c| V(c)
    #   - sum_k w_k rho_{j+k-1} |V(W_{j+k}) - V(c)|
    from .scheme import compute_W

    n = len(rho)
    K = weights.K
    # rho on indices -1 .. n + K (one ghost on the left, K + 1 on the right)
    ext = np.empty(n + K + 2)
    ext[0] = rho[0]
    ext[1:n + 1] = rho
    ext[n + 1:] = rho[-1]
    w_ext = compute_W(ext, weights, extra=1)   # W on indices -1 .. n + K + 1
    vc = float(velocity(np.float64(c)))
    g = np.abs(velocity(w_ext) - vc)
    # p_m = rho_m |V(W_{m+1}) - V(c)| on m = -1 .. n + K
    p = ext * g[1:]
    s = compute_W(p, weights)[: n + 1]         # s_i = sum_k w_k p_{i-1+k}, i = 0..n
    psi = np.abs(w_ext[: n + 1] - c) * vc - s  # Psi_{j-1/2} for j = 0..n
    return (np.abs(w_new - c) - np.abs(w_old - c)) + lam * (psi[1:] - psi[:-1])


def nonlocal_entropy_residual_W(rho_traj, w_traj, weights, velocity, lam: float, h: float,
                                c: float = 0.5, window=None, *, return_field: bool = False):
    """Aggregate positive part of the nonlocal discrete entropy residual for ``W``.

    The residual is nonpositive for every cell and step under the
    maximum-principle CFL condition, so the result should vanish up to
    rounding.
    """
    rho_traj = np.asarray(rho_traj, dtype=float)
    w_traj = np.asarray(w_traj, dtype=float)
    tau = lam * h
    sl = _window(rho_traj.shape[1], window)
    total = 0.0
    fields = []
    for n in range(rho_traj.shape[0] - 1):
        d = _nonlocal_defect(rho_traj[n], w_traj[n], w_traj[n + 1], weights, velocity, lam, c)[sl]
        total += h * float(np.sum(np.maximum(d, 0.0)))
        if return_field:
            fields.append(d / tau)
    if return_field:
        return total, np.array(fields)
    return total


def l1_error(field, reference, t: float | None = None, grid=None, window=None) -> float:
    """``sum |u_j - ref_j| h`` over the window.

    ``reference`` is either an array of reference cell averages or an object
    with ``cell_averages(t, grid)``.
    """
    u = np.asarray(field, dtype=float)
    if hasattr(reference, "cell_averages"):
        ref = reference.cell_averages(t, grid)
    else:
        ref = np.asarray(reference, dtype=float)
    if grid is None:
        raise ValueError("grid is required to know the cell width")
    sl = _window(len(u), window)
    return float(np.sum(np.abs(u[sl] - ref[sl])) * grid.h)


def w_rho_deviation(rho, w, h: float) -> float:
    """``sum |W_j - rho_j| h``."""
    return float(np.sum(np.abs(np.asarray(w) - np.asarray(rho))) * h)


def step_record(prev, cur, config, c: float = 0.5, window=None) -> DiagnosticsRecord:
    """Diagnostics for level ``cur``; ``prev`` is the previous level or ``None``."""
    h = config.grid.h
    rho, w = cur.rho, cur.w
    if prev is None:
        dt_inc = ent_rho = ent_w = 0.0
    else:
        dt_inc = float(np.sum(np.abs(w - prev.w)))
        ent_rho = local_entropy_positive_part(prev.rho, rho, config.velocity, config.lam, h, c, window)
        ent_w = local_entropy_positive_part(prev.w, w, config.velocity, config.lam, h, c, window)
    return DiagnosticsRecord(
        n=cur.n, t=cur.t,
        rho_min=float(rho.min()), rho_max=float(rho.max()),
        mass=float(np.sum(rho) * h),
        tv_rho=tv(rho, window),
        tv_W=tv_extended_W(rho, config.weights) if window is None else tv(w, window),
        tv_time_increment=dt_inc,
        entropy_pos_rho=ent_rho, entropy_pos_W=ent_w,
    )
