"""
Godunov-type time stepping for ``rho_t + (rho V(W))_x = 0`` with the
downstream nonlocal impact ``W_j = sum_k w_k rho_{j+k}``.

One step reads only time-level ``n`` data::

    rho_j <- rho_j + lam * (rho_{j-1} V(W_j) - rho_j V(W_{j+1}))

Out-of-domain cells are filled by constant extension of the boundary values.
"""

from __future__ import annotations

import enum
import math
import platform
import time
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .diagnostics import DiagnosticsRecord, step_record
from .grid import GridSpec
from .quadrature import QuadratureWeights
from .velocity import VelocityModel


class CFLViolation(ValueError):
    def __init__(self, msg):
        super().__init__(f"cfl-violation: {msg}")


class CFLVariant(str, enum.Enum):
    MAIN = "main"
    MAX_PRINCIPLE = "max_principle"
    UNCHECKED = "unchecked"


def max_cfl_ratio(velocity: VelocityModel, variant: CFLVariant | str = CFLVariant.MAIN) -> float:
    """Largest admissible ``lam = tau / h``.

    ``MAIN`` guarantees the TV bound on ``W``: ``lam (|V| + 2|V'|) <= 1``.
    ``MAX_PRINCIPLE`` only the invariant bounds: ``lam (|V| + |V'|) <= 1``.
    """
    variant = CFLVariant(variant)
    if variant is CFLVariant.MAIN:
        return 1.0 / (velocity.sup_norm + 2.0 * velocity.lip_norm)
    if variant is CFLVariant.MAX_PRINCIPLE:
        return 1.0 / (velocity.sup_norm + velocity.lip_norm)
    return math.inf


@dataclass(frozen=True, eq=False)
class SchemeConfig:
    grid: GridSpec
    weights: QuadratureWeights
    velocity: VelocityModel
    lam: float
    epsilon: float
    cfl_variant: CFLVariant = CFLVariant.MAIN

    def __post_init__(self):
        object.__setattr__(self, "cfl_variant", CFLVariant(self.cfl_variant))
        if not self.lam > 0.0:
            raise ValueError(f"lambda must be positive, got {self.lam}")
        if not self.epsilon > 0.0:
            raise ValueError(f"epsilon must be positive, got {self.epsilon}")
        limit = max_cfl_ratio(self.velocity, self.cfl_variant)
        if self.lam > limit * (1.0 + 1e-12):
            raise CFLViolation(
                f"lambda={self.lam} exceeds {limit:.6g} for {self.velocity.name} "
                f"under the {self.cfl_variant.value} condition")

    @property
    def tau(self) -> float:
        return self.lam * self.grid.h

    def to_dict(self) -> dict:
        return {
            "grid": self.grid.to_dict(),
            "weights": self.weights.to_dict(),
            "velocity": self.velocity.name,
            "lambda": self.lam,
            "epsilon": self.epsilon,
            "cfl_variant": self.cfl_variant.value,
            "tau": self.tau,
        }


@dataclass
class SolutionField:
    n: int
    t: float
    rho: np.ndarray
    w: np.ndarray


@dataclass
class RunResult:
    snapshots: list[SolutionField]
    diagnostics: list[DiagnosticsRecord]
    manifest: dict
    final: SolutionField
    trajectory: np.ndarray | None = field(default=None, repr=False)
    w_trajectory: np.ndarray | None = field(default=None, repr=False)


def compute_W(rho: np.ndarray, weights: QuadratureWeights, grid: GridSpec | None = None,
              *, extra: int = 0) -> np.ndarray:
    """Nonlocal impact ``W_j = sum_k w_k rho_{j+k}``.

    ``rho`` is extended to the right by its last value; ``extra`` returns that
    many additional values of ``W`` beyond the last cell.  The truncated tail
    mass multiplies the extension value.
    """
    rho = np.asarray(rho, dtype=float)
    w = weights.weights
    pad = len(w) - 1 + extra
    if pad:
        ext = np.empty(len(rho) + pad)
        ext[:len(rho)] = rho
        ext[len(rho):] = rho[-1]
    else:
        ext = rho
    if len(w) == 1:
        out = w[0] * ext
    else:
        out = np.correlate(ext, w, mode="valid")
    if weights.fold_tail and weights.tail_mass:
        out = out + weights.tail_mass * rho[-1]
    return out


def _flux_update(rho: np.ndarray, w_ext: np.ndarray, velocity: VelocityModel,
                 lam: float) -> np.ndarray:
    # w_ext holds W_0 .. W_N; interface fluxes F_{j-1/2} = rho_{j-1} V(W_j), j = 0..N
    up = np.empty(len(rho) + 1)
    up[0] = rho[0]
    up[1:] = rho
    flux = up * velocity(w_ext)
    return rho + lam * (flux[:-1] - flux[1:])


def step(field: SolutionField, config: SchemeConfig) -> SolutionField:
    """Advance one time step and refresh ``W`` from the new densities."""
    rho = field.rho
    w_ext = compute_W(rho, config.weights, extra=1)
    new = _flux_update(rho, w_ext, config.velocity, config.lam)
    n = field.n + 1
    return SolutionField(n, n * config.tau, new, compute_W(new, config.weights))


def _snapshot_indices(times, tau: float, n_steps: int) -> list[int]:
    out = []
    for t in times:
        if t < 0:
            raise ValueError("snapshot times must be nonnegative")
        out.append(min(int(math.floor(t / tau + 1e-9)), n_steps))
    return out


def run(config: SchemeConfig, initial: np.ndarray, T: float, snapshot_times=(),
        *, diagnostics: bool = True, entropy_c: float = 0.5, window=None,
        keep_trajectory: bool = False, initial_spec: dict | None = None) -> RunResult:
    """Advance ``initial`` to ``floor(T / tau)`` steps.

    Snapshots are taken at the last step at or before each requested time.
    With ``diagnostics`` a :class:`DiagnosticsRecord` is kept for every level;
    ``keep_trajectory`` stores all levels of ``rho`` and ``W`` as 2-D arrays.
    """
    if not T > 0.0:
        raise ValueError("T must be positive")
    rho0 = np.array(initial, dtype=float)
    if rho0.shape != (config.grid.num_cells,):
        raise ValueError(f"initial data has shape {rho0.shape}, grid has {config.grid.num_cells} cells")
    tau = config.tau
    n_steps = int(math.floor(T / tau + 1e-9))
    snaps = _snapshot_indices(snapshot_times, tau, n_steps)
    wanted = set(snaps)

    start = time.perf_counter()
    fld = SolutionField(0, 0.0, rho0, compute_W(rho0, config.weights))
    taken = {}
    records = []
    traj = w_traj = None
    if keep_trajectory:
        traj = np.empty((n_steps + 1, len(rho0)))
        w_traj = np.empty_like(traj)
        traj[0], w_traj[0] = fld.rho, fld.w
    if 0 in wanted:
        taken[0] = fld
    if diagnostics:
        records.append(step_record(None, fld, config, entropy_c, window))
    for _ in range(n_steps):
        new = step(fld, config)
        if diagnostics:
            records.append(step_record(fld, new, config, entropy_c, window))
        fld = new
        if keep_trajectory:
            traj[fld.n], w_traj[fld.n] = fld.rho, fld.w
        if fld.n in wanted:
            taken[fld.n] = fld
    wall = time.perf_counter() - start

    manifest = {
        "config": config.to_dict(),
        "initial_data": initial_spec,
        "T_requested": T,
        "n_steps": n_steps,
        "t_final": n_steps * tau,
        "snapshot_times_requested": list(snapshot_times),
        "snapshot_steps": snaps,
        "entropy_c": entropy_c,
        "versions": {"nonlocal_lwr": __version__, "numpy": np.__version__,
                     "python": platform.python_version()},
        "wall_time_s": wall,
    }
    return RunResult([taken[i] for i in snaps], records, manifest, fld, traj, w_traj)
