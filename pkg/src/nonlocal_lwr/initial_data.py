"""
Initial densities and their cell averages.

Piecewise-constant data are averaged exactly by intersecting the pieces with
the cells; smooth data use a fixed 5-point Gauss-Legendre rule per cell.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .grid import GridSpec


class InitialDataError(ValueError):
    pass


_GAUSS_NODES, _GAUSS_WEIGHTS = np.polynomial.legendre.leggauss(5)


@dataclass(frozen=True)
class PiecewiseConstantData:
    """``values[0]`` left of ``breaks[0]``, ``values[i]`` on ``[breaks[i-1], breaks[i])``, ...

    ``values`` has one more entry than ``breaks``.
    """

    name: str
    breaks: tuple[float, ...]
    values: tuple[float, ...]
    params: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if len(self.values) != len(self.breaks) + 1:
            raise InitialDataError("values must have one more entry than breaks")
        if any(b2 <= b1 for b1, b2 in zip(self.breaks, self.breaks[1:])):
            raise InitialDataError("breaks must be strictly increasing")

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        idx = np.searchsorted(np.asarray(self.breaks), x, side="right")
        return np.asarray(self.values)[idx]

    @property
    def riemann_states(self) -> tuple[float, float] | None:
        """``(rho_L, rho_R)`` if this is a single jump at ``x = 0``."""
        if len(self.breaks) == 1 and self.breaks[0] == 0.0:
            return self.values[0], self.values[1]
        return None

    @property
    def total_variation(self) -> float:
        return float(np.sum(np.abs(np.diff(self.values))))

    def to_dict(self) -> dict:
        return {"kind": self.name, **self.params,
                "breaks": list(self.breaks), "values": list(self.values)}


@dataclass(frozen=True)
class SmoothData:
    name: str
    func: Callable[[np.ndarray], np.ndarray] = field(compare=False)
    total_variation: float
    params: dict = field(default_factory=dict, compare=False)
    riemann_states = None

    def __call__(self, x):
        return self.func(np.asarray(x, dtype=float))

    def to_dict(self) -> dict:
        return {"kind": self.name, **self.params}


InitialDataSpec = PiecewiseConstantData | SmoothData


def riemann(rho_left: float, rho_right: float) -> PiecewiseConstantData:
    return PiecewiseConstantData("riemann", (0.0,), (float(rho_left), float(rho_right)),
                                 {"rho_left": rho_left, "rho_right": rho_right})


def riemann_shock() -> PiecewiseConstantData:
    """``0.7`` on ``[0, inf)``, zero elsewhere."""
    return PiecewiseConstantData("riemann_shock", (0.0,), (0.0, 0.7))


def riemann_rarefaction() -> PiecewiseConstantData:
    """``0.65`` left of the origin, ``0.35`` right of it."""
    return PiecewiseConstantData("riemann_rarefaction", (0.0,), (0.65, 0.35))


def constant(c: float) -> PiecewiseConstantData:
    return PiecewiseConstantData("constant", (), (float(c),), {"c": c})


def tv_increase(delta: float) -> PiecewiseConstantData:
    """``0.5`` on ``(-delta, -delta/2)`` plus ``1`` on ``[0, inf)``; total variation 2."""
    if not delta > 0.0:
        raise InitialDataError("delta must be positive")
    return PiecewiseConstantData("tv_increase", (-delta, -delta / 2.0, 0.0),
                                 (0.0, 0.5, 0.0, 1.0), {"delta": delta})


def _bell(x):
    return 0.4 + 0.4 * np.exp(-100.0 * x * x)


def bell_shaped() -> SmoothData:
    """``0.4 + 0.4 exp(-100 x^2)``."""
    return SmoothData("bell_shaped", _bell, total_variation=0.8)


def from_dict(d: dict) -> InitialDataSpec:
    """Rebuild initial data from its manifest representation."""
    kind = d.get("kind")
    if kind == "riemann_shock":
        return riemann_shock()
    if kind == "riemann_rarefaction":
        return riemann_rarefaction()
    if kind == "bell_shaped":
        return bell_shaped()
    if kind == "tv_increase":
        return tv_increase(float(d["delta"]))
    if kind == "constant":
        return constant(float(d["c"]))
    if kind == "riemann":
        return riemann(float(d["rho_left"]), float(d["rho_right"]))
    if kind == "piecewise_constant":
        return PiecewiseConstantData("piecewise_constant", tuple(map(float, d["breaks"])),
                                     tuple(map(float, d["values"])))
    raise InitialDataError(f"unknown initial data kind {kind!r}")


def _piecewise_averages(data: PiecewiseConstantData, edges: np.ndarray) -> np.ndarray:
    xl, xr = edges[:-1], edges[1:]
    width = xr - xl
    lo_bounds = (-math.inf,) + data.breaks
    hi_bounds = data.breaks + (math.inf,)
    avg = np.zeros(len(xl))
    for v, lo, hi in zip(data.values, lo_bounds, hi_bounds):
        overlap = np.clip(np.minimum(xr, hi) - np.maximum(xl, lo), 0.0, None)
        # cells lying entirely in one piece get the value exactly
        frac = np.where(overlap >= width, 1.0, overlap / width)
        avg += v * frac
    return avg


def _gauss_averages(func, edges: np.ndarray) -> np.ndarray:
    xl, xr = edges[:-1], edges[1:]
    mid = 0.5 * (xl + xr)
    half = 0.5 * (xr - xl)
    acc = np.zeros(len(xl))
    for node, weight in zip(_GAUSS_NODES, _GAUSS_WEIGHTS):
        acc += weight * func(mid + half * node)
    return 0.5 * acc


def cell_averages(data: InitialDataSpec, edges: np.ndarray) -> np.ndarray:
    edges = np.asarray(edges, dtype=float)
    if isinstance(data, PiecewiseConstantData):
        return _piecewise_averages(data, edges)
    return _gauss_averages(data, edges)


def discretize_initial(data: InitialDataSpec, grid: GridSpec) -> np.ndarray:
    """Cell averages of ``data`` on ``grid``; values must lie in ``[0, 1]``."""
    rho = cell_averages(data, grid.edges)
    lo, hi = rho.min(), rho.max()
    if lo < -1e-12 or hi > 1.0 + 1e-12:
        raise InitialDataError(
            f"data-out-of-range: cell averages span [{lo}, {hi}], outside [0, 1]")
    return rho
