"""
Experiment orchestration: convergence sweeps along limiting paths, weight
family comparisons, the total-variation study and the entropy table.

Every sweep cell is a pure function of its inputs, so cells can be farmed out
to worker processes; results are always gathered in ``h_list`` order.
"""

from __future__ import annotations

import enum
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import initial_data as idata
from .diagnostics import l1_error, tv, tv_extended_W
from .grid import GridSpec
from .initial_data import InitialDataSpec, discretize_initial
from .kernels import Kernel
from .quadrature import DEFAULT_TAIL_TOL, WeightFamily, build_weights
from .reference import DEFAULT_REFINE, reference_solution
from .scheme import CFLVariant, SchemeConfig, compute_W, run, step, SolutionField
from .velocity import GREENSHIELDS, VelocityModel

DEFAULT_H_LIST = (4e-3, 2e-3, 1e-3, 5e-4, 2.5e-4)


class LimitPath(str, enum.Enum):
    EPS_EQUALS_H = "eps_equals_h"
    EPS_EQUALS_5H = "eps_equals_5h"
    EPS_EQUALS_SQRT_H = "eps_equals_sqrt_h"
    FIXED_EPS = "fixed_eps"


def epsilon_for(path: LimitPath | str, h: float, fixed: float | None = None) -> float:
    path = LimitPath(path)
    if path is LimitPath.EPS_EQUALS_H:
        return h
    if path is LimitPath.EPS_EQUALS_5H:
        return 5.0 * h
    if path is LimitPath.EPS_EQUALS_SQRT_H:
        return math.sqrt(h)
    if fixed is None:
        raise ValueError("fixed_eps path needs a value")
    return fixed


@dataclass(frozen=True)
class StudySpec:
    data: InitialDataSpec
    kernel: Kernel
    weight_family: WeightFamily = WeightFamily.EXACT
    velocity: VelocityModel = GREENSHIELDS
    path: LimitPath = LimitPath.EPS_EQUALS_H
    h_list: tuple[float, ...] = DEFAULT_H_LIST
    lam: float = 0.25
    T: float = 1.0
    domain: tuple[float, float] = (-2.0, 2.0)
    target_field: str = "W"
    fixed_epsilon: float | None = None
    cfl_variant: CFLVariant = CFLVariant.MAIN
    refine: int = DEFAULT_REFINE
    tail_tol: float = DEFAULT_TAIL_TOL
    fit_points: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "weight_family", WeightFamily(self.weight_family))
        object.__setattr__(self, "path", LimitPath(self.path))
        object.__setattr__(self, "cfl_variant", CFLVariant(self.cfl_variant))
        object.__setattr__(self, "h_list", tuple(float(h) for h in self.h_list))
        if len(self.h_list) < 1 or any(b >= a for a, b in zip(self.h_list, self.h_list[1:])):
            raise ValueError("h_list must be strictly decreasing")
        if self.target_field not in ("W", "rho"):
            raise ValueError("target_field must be 'W' or 'rho'")

    def to_dict(self) -> dict:
        return {
            "data": self.data.to_dict(),
            "kernel": self.kernel.name,
            "weight_family": self.weight_family.value,
            "velocity": self.velocity.name,
            "path": self.path.value,
            "fixed_epsilon": self.fixed_epsilon,
            "h_list": list(self.h_list),
            "lambda": self.lam,
            "T": self.T,
            "domain": list(self.domain),
            "target_field": self.target_field,
            "cfl_variant": self.cfl_variant.value,
            "refine": self.refine,
            "tail_tol": self.tail_tol,
            "fit_points": self.fit_points,
        }


@dataclass
class StudyRow:
    h: float
    epsilon: float
    tau: float
    l1_error: float
    wall_time: float


@dataclass
class StudyResult:
    rows: list[StudyRow]
    fitted_slope: float
    manifest: dict

    @property
    def errors(self) -> list[tuple[float, float]]:
        return [(r.h, r.l1_error) for r in self.rows]


def fit_rate(errors, fit_points: int | None = None) -> float:
    """Least-squares slope of ``log e`` against ``log h`` over the last ``fit_points`` pairs."""
    pts = list(errors)
    if fit_points is not None:
        pts = pts[-fit_points:]
    if len(pts) < 2:
        raise ValueError("need at least two points to fit a rate")
    h = np.array([p[0] for p in pts], dtype=float)
    e = np.array([p[1] for p in pts], dtype=float)
    if np.any(e <= 0.0) or np.any(h <= 0.0):
        raise ValueError("nonpositive-error: rates need positive h and errors")
    slope, _ = np.polyfit(np.log(h), np.log(e), 1)
    return float(slope)


def _make_config(spec: StudySpec, h: float) -> SchemeConfig:
    eps = epsilon_for(spec.path, h, spec.fixed_epsilon)
    grid = GridSpec(spec.domain[0], spec.domain[1], h)
    weights = build_weights(spec.kernel, spec.weight_family, eps, h, spec.tail_tol)
    return SchemeConfig(grid, weights, spec.velocity, spec.lam, eps, spec.cfl_variant)


def run_study_cell(spec: StudySpec, h: float) -> StudyRow:
    """Run one ``(h, epsilon)`` cell of a sweep and measure its L1 error at ``T``."""
    start = time.perf_counter()
    try:
        cfg = _make_config(spec, h)
        rho0 = discretize_initial(spec.data, cfg.grid)
        res = run(cfg, rho0, spec.T, diagnostics=False)
        ref = reference_solution(spec.data, spec.velocity, refine=spec.refine, lam=spec.lam)
        t_final = res.final.t
        u = res.final.w if spec.target_field == "W" else res.final.rho
        err = l1_error(u, ref, t_final, cfg.grid)
    except Exception as exc:
        raise RuntimeError(f"study cell h={h}, epsilon={epsilon_for(spec.path, h, spec.fixed_epsilon)} "
                           f"failed: {exc}") from exc
    return StudyRow(h, cfg.epsilon, cfg.tau, err, time.perf_counter() - start)


def _map_cells(func, args, workers: int):
    if workers <= 1 or len(args) <= 1:
        return [func(*a) for a in args]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(func, *a) for a in args]
        return [f.result() for f in futures]


def run_convergence_study(spec: StudySpec, workers: int = 1) -> StudyResult:
    """Sweep ``h_list`` along the limiting path and fit the error decay rate."""
    rows = _map_cells(run_study_cell, [(spec, h) for h in spec.h_list], workers)
    rows.sort(key=lambda r: -r.h)
    slope = fit_rate([(r.h, r.l1_error) for r in rows], spec.fit_points) if len(rows) > 1 else math.nan
    manifest = {"spec": spec.to_dict(), "slope": slope,
                "fit_points": spec.fit_points or len(rows)}
    return StudyResult(rows, slope, manifest)


def run_quadrature_comparison(spec: StudySpec, families=(WeightFamily.EXACT, WeightFamily.RIEMANN,
                                                          WeightFamily.NORMALIZED_RIEMANN),
                              workers: int = 1) -> list[StudyResult]:
    """One convergence study per weight family, all other settings shared."""
    out = []
    for fam in families:
        fam = WeightFamily(fam)
        if fam is WeightFamily.GEOMETRIC:
            raise ValueError("families must be drawn from exact, riemann, normalized_riemann")
        out.append(run_convergence_study(replace(spec, weight_family=fam), workers))
    return out


def kuznetsov_constants(result: StudyResult, tv0: float, T: float | None = None) -> list[float]:
    """Per-cell ``error / ((eps + h + sqrt(eps T) + sqrt(h T)) TV(rho_0))``."""
    T = result.manifest["spec"]["T"] if T is None else T
    out = []
    for r in result.rows:
        bound = (r.epsilon + r.h + math.sqrt(r.epsilon * T) + math.sqrt(r.h * T)) * tv0
        out.append(r.l1_error / bound)
    return out


@dataclass
class TVSeries:
    epsilon: float
    t: np.ndarray
    tv_rho: np.ndarray
    tv_W: np.ndarray
    first_rise_time: float | None
    return_time: float | None

    @property
    def max_tv_W_increase(self) -> float:
        return float(np.max(np.diff(self.tv_W), initial=0.0))


def tv_series(rho0: np.ndarray, cfg: SchemeConfig, T: float, settle: float = 0.05,
              epsilon: float | None = None) -> TVSeries:
    """Track ``TV(rho)`` and whole-line ``TV(W)`` every step up to ``T``.

    ``first_rise_time`` is the first time ``TV(rho)`` exceeds its initial
    value; ``return_time`` the first later time it drops below ``1 + settle``.
    """
    n_steps = int(math.floor(T / cfg.tau + 1e-9))
    fld = SolutionField(0, 0.0, rho0, compute_W(rho0, cfg.weights))
    ts = np.empty(n_steps + 1)
    tr = np.empty(n_steps + 1)
    tw = np.empty(n_steps + 1)
    ts[0], tr[0], tw[0] = 0.0, tv(rho0), tv_extended_W(rho0, cfg.weights)
    for n in range(1, n_steps + 1):
        fld = step(fld, cfg)
        ts[n], tr[n], tw[n] = fld.t, tv(fld.rho), tv_extended_W(fld.rho, cfg.weights)
    rise = np.nonzero(tr > tr[0] + 1e-12)[0]
    first = float(ts[rise[0]]) if rise.size else None
    ret = None
    if rise.size:
        back = np.nonzero((tr < 1.0 + settle) & (np.arange(len(tr)) > rise[0]))[0]
        ret = float(ts[back[0]]) if back.size else None
    return TVSeries(cfg.epsilon if epsilon is None else epsilon, ts, tr, tw, first, ret)


def run_tv_study(epsilons, h: float, kernel: Kernel, T: float = 1.6, *,
                 velocity: VelocityModel = GREENSHIELDS, lam: float = 0.25,
                 domain=(-1.5, 2.5), weight_family=WeightFamily.EXACT,
                 settle: float = 0.05) -> dict[float, TVSeries]:
    """Total variation histories for the TV-increase datum with ``delta = epsilon``."""
    grid = GridSpec(domain[0], domain[1], h)
    out = {}
    for eps in epsilons:
        weights = build_weights(kernel, weight_family, eps, h)
        cfg = SchemeConfig(grid, weights, velocity, lam, eps)
        rho0 = discretize_initial(idata.tv_increase(eps), grid)
        out[eps] = tv_series(rho0, cfg, T, settle)
    return out


@dataclass
class EntropyTable:
    epsilons: list[float]
    kernels: list[str]
    data: list[str]
    h: float
    c: float
    entries: dict = field(default_factory=dict)  # (eps, kernel, data) -> (E_rho, E_W)

    def header(self) -> list[str]:
        cols = ["epsilon"]
        for d in self.data:
            for k in self.kernels:
                cols += [f"E_rho[{d}|{k}]", f"E_W[{d}|{k}]"]
        return cols

    def rows(self) -> list[list[float]]:
        out = []
        for eps in self.epsilons:
            row = [eps]
            for d in self.data:
                for k in self.kernels:
                    row += list(self.entries[(eps, k, d)])
            out.append(row)
        return out

    def column(self, kernel: str, data: str, metric: str = "rho") -> list[float]:
        i = 0 if metric == "rho" else 1
        return [self.entries[(eps, kernel, data)][i] for eps in self.epsilons]


def entropy_metrics(data: InitialDataSpec, kernel: Kernel, epsilon: float, h: float,
                    c: float = 0.5, T: float = 1.0, *, lam: float = 0.25,
                    velocity: VelocityModel = GREENSHIELDS, domain=(-2.0, 2.0),
                    weight_family=WeightFamily.EXACT, window=None) -> tuple[float, float]:
    """``(E_rho, E_W)``: summed positive parts of the local entropy residuals."""
    grid = GridSpec(domain[0], domain[1], h)
    weights = build_weights(kernel, weight_family, epsilon, h)
    cfg = SchemeConfig(grid, weights, velocity, lam, epsilon)
    res = run(cfg, discretize_initial(data, grid), T, diagnostics=True, entropy_c=c,
              window=window)
    e_rho = math.fsum(r.entropy_pos_rho for r in res.diagnostics)
    e_w = math.fsum(r.entropy_pos_W for r in res.diagnostics)
    return e_rho, e_w


def _entropy_cell(data, kernel, eps, h, c, T):
    return entropy_metrics(data, kernel, eps, h, c, T)


def run_entropy_table(epsilons, h: float, kernels, data_list, c: float = 0.5, T: float = 1.0,
                      workers: int = 1) -> EntropyTable:
    """Grid of local entropy violation metrics over ``(epsilon, kernel, data)``."""
    if not 0.0 <= c <= 1.0:
        raise ValueError("c must lie in [0, 1]")
    epsilons = list(epsilons)
    table = EntropyTable(epsilons, [k.name for k in kernels], [d.name for d in data_list], h, c)
    jobs = [(d, k, eps, h, c, T) for eps in epsilons for k in kernels for d in data_list]
    values = _map_cells(_entropy_cell, jobs, workers)
    for (d, k, eps, *_), val in zip(jobs, values):
        table.entries[(eps, k.name, d.name)] = val
    return table
