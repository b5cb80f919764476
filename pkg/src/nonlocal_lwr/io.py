"""
Configuration parsing and output files.

Configs are JSON.  Validation collects every problem before giving up, so a
bad sweep config reports all of its mistakes at once.  Floats are written with
17 significant digits, which round-trips binary64 exactly.
"""

from __future__ import annotations

import csv
import json
import math
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import initial_data as idata
from .diagnostics import DIAGNOSTICS_COLUMNS
from .grid import GridSpec
from .harness import LimitPath, StudySpec
from .kernels import Kernel, KernelError, get_kernel, load_kernel_csv
from .quadrature import DEFAULT_TAIL_TOL, QuadratureWeights, WeightFamily, build_weights, geometric_weights
from .scheme import CFLVariant, SchemeConfig, max_cfl_ratio
from .velocity import VelocityModel, get_velocity

FLOAT_FMT = "{:.17g}"

RUN_KEYS = {"grid", "kernel", "weights", "velocity", "lambda", "epsilon", "initial_data", "T",
            "snapshots", "diagnostics", "output_dir", "cfl_variant"}
RUN_REQUIRED = ("grid", "kernel", "weights", "velocity", "lambda", "epsilon", "initial_data", "T")


class ConfigError(ValueError):
    """Raised with every problem found; ``reasons`` holds one token per problem."""

    def __init__(self, reasons):
        self.reasons = list(reasons)
        super().__init__("; ".join(self.reasons))


def fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return FLOAT_FMT.format(float(x))


def _json_default(o):
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, (np.bool_,)):
        return bool(o)
    if hasattr(o, "value"):
        return o.value
    raise TypeError(f"cannot serialize {type(o).__name__}")


def _finite_only(o):
    # repr of a Python float is already the shortest round-tripping string;
    # non-finite values are written as strings to keep the JSON standard
    if isinstance(o, float):
        return o if math.isfinite(o) else repr(o)
    if isinstance(o, dict):
        return {k: _finite_only(v) for k, v in o.items()}
    if isinstance(o, (list, tuple)):
        return [_finite_only(v) for v in o]
    return o


def write_json(path, obj) -> None:
    text = json.dumps(_finite_only(json.loads(json.dumps(obj, default=_json_default))),
                      indent=2, sort_keys=True)
    Path(path).write_text(text + "\n")


def write_csv(path, header, rows) -> None:
    with open(path, "w", newline="") as f:
        wr = csv.writer(f, lineterminator="\n")
        wr.writerow(header)
        for row in rows:
            wr.writerow([v if isinstance(v, str) else fmt(v) for v in row])


def read_json(path) -> dict:
    try:
        with open(path) as f:
            doc = json.load(f)
    except FileNotFoundError:
        raise ConfigError([f"unreadable-config:{path}"]) from None
    except json.JSONDecodeError as exc:
        raise ConfigError([f"invalid-json:{path}:{exc.lineno}"]) from None
    if not isinstance(doc, dict):
        raise ConfigError(["invalid-config:top level must be an object"])
    return doc


# -- parsing helpers; each appends to ``errs`` instead of raising ----------

def _number(doc, key, errs, *, positive=False, where=""):
    v = doc.get(key)
    name = f"{where}{key}"
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
        errs.append(f"invalid-field:{name}")
        return None
    if positive and not v > 0:
        errs.append(f"invalid-field:{name} must be positive")
        return None
    return float(v)


def _unknown(doc, allowed, errs, where=""):
    for k in sorted(set(doc) - set(allowed)):
        errs.append(f"unknown-field:{where}{k}")


def parse_grid(doc, errs) -> GridSpec | None:
    if not isinstance(doc, dict):
        errs.append("invalid-field:grid")
        return None
    _unknown(doc, {"x_min", "x_max", "h"}, errs, "grid.")
    missing = [k for k in ("x_min", "x_max", "h") if k not in doc]
    for k in missing:
        errs.append(f"missing-field:grid.{k}")
    if missing:
        return None
    lo = _number(doc, "x_min", errs, where="grid.")
    hi = _number(doc, "x_max", errs, where="grid.")
    h = _number(doc, "h", errs, positive=True, where="grid.")
    if None in (lo, hi, h):
        return None
    try:
        return GridSpec(lo, hi, h)
    except ValueError as exc:
        errs.append(f"invalid-grid:{exc}")
        return None


def parse_kernel(doc, errs, base: Path | None = None) -> Kernel | None:
    if isinstance(doc, str):
        doc = {"family": doc}
    if not isinstance(doc, dict):
        errs.append("invalid-field:kernel")
        return None
    _unknown(doc, {"family", "table_csv"}, errs, "kernel.")
    if "table_csv" in doc:
        path = Path(doc["table_csv"])
        if base is not None and not path.is_absolute():
            path = base / path
        try:
            return load_kernel_csv(path)
        except (KernelError, OSError) as exc:
            errs.append(f"invalid-kernel:{exc}")
            return None
    try:
        return get_kernel(doc.get("family"))
    except (KernelError, ValueError):
        errs.append(f"invalid-field:kernel.family={doc.get('family')!r}")
        return None


def parse_velocity(doc, errs) -> VelocityModel | None:
    name = doc.get("family") if isinstance(doc, dict) else doc
    if isinstance(doc, dict):
        _unknown(doc, {"family"}, errs, "velocity.")
    try:
        return get_velocity(name)
    except ValueError:
        errs.append(f"invalid-field:velocity={name!r}")
        return None


@dataclass
class WeightsSpec:
    family: WeightFamily
    tail_tol: float = DEFAULT_TAIL_TOL
    gamma0: float | None = None

    def build(self, kernel: Kernel, epsilon: float, h: float) -> QuadratureWeights:
        if self.family is WeightFamily.GEOMETRIC and self.gamma0 is not None:
            return geometric_weights(self.gamma0, self.tail_tol, epsilon=epsilon, h=h)
        return build_weights(kernel, self.family, epsilon, h, self.tail_tol)


def parse_weights(doc, errs) -> WeightsSpec | None:
    if isinstance(doc, str):
        doc = {"family": doc}
    if not isinstance(doc, dict):
        errs.append("invalid-field:weights")
        return None
    _unknown(doc, {"family", "tail_tol", "gamma0"}, errs, "weights.")
    try:
        fam = WeightFamily(doc.get("family"))
    except ValueError:
        errs.append(f"invalid-field:weights.family={doc.get('family')!r}")
        return None
    spec = WeightsSpec(fam)
    if "tail_tol" in doc:
        tol = _number(doc, "tail_tol", errs, positive=True, where="weights.")
        if tol is not None and tol >= 1.0:
            errs.append("invalid-field:weights.tail_tol must be below 1")
        spec.tail_tol = tol if tol is not None else spec.tail_tol
    if "gamma0" in doc:
        g = _number(doc, "gamma0", errs, where="weights.")
        if g is not None and not 0.0 < g < 1.0:
            errs.append("invalid-field:weights.gamma0 must lie in (0, 1)")
        elif fam is not WeightFamily.GEOMETRIC:
            errs.append("invalid-field:weights.gamma0 only applies to geometric weights")
        spec.gamma0 = g
    return spec


_DATA_KEYS = {
    "riemann_shock": set(), "riemann_rarefaction": set(), "bell_shaped": set(),
    "tv_increase": {"delta"}, "constant": {"c"}, "riemann": {"rho_left", "rho_right"},
    "piecewise_constant": {"breaks", "values"},
}


def parse_initial_data(doc, errs):
    if isinstance(doc, str):
        doc = {"kind": doc}
    if not isinstance(doc, dict) or doc.get("kind") not in _DATA_KEYS:
        kind = doc.get("kind") if isinstance(doc, dict) else doc
        errs.append(f"invalid-field:initial_data.kind={kind!r}")
        return None
    needed = _DATA_KEYS[doc["kind"]]
    _unknown(doc, needed | {"kind"}, errs, "initial_data.")
    missing = sorted(needed - set(doc))
    for k in missing:
        errs.append(f"missing-field:initial_data.{k}")
    if missing:
        return None
    try:
        return idata.from_dict(doc)
    except (ValueError, TypeError) as exc:
        errs.append(f"invalid-initial-data:{exc}")
        return None


def parse_cfl_variant(value, errs) -> CFLVariant | None:
    try:
        return CFLVariant(value)
    except ValueError:
        errs.append(f"invalid-field:cfl_variant={value!r}")
        return None


@dataclass
class RunConfig:
    grid: GridSpec
    kernel: Kernel
    weights_spec: WeightsSpec
    velocity: VelocityModel
    lam: float
    epsilon: float
    data: object
    T: float
    cfl_variant: CFLVariant = CFLVariant.MAIN
    snapshots: list[float] = field(default_factory=list)
    diagnostics: bool = True
    entropy_c: float = 0.5
    output_dir: str | None = None
    raw: dict = field(default_factory=dict)

    def scheme_config(self) -> SchemeConfig:
        weights = self.weights_spec.build(self.kernel, self.epsilon, self.grid.h)
        return SchemeConfig(self.grid, weights, self.velocity, self.lam, self.epsilon,
                            self.cfl_variant)


def parse_run_config(doc: dict, base: Path | None = None) -> RunConfig:
    """Validate a run config exhaustively; raise :class:`ConfigError` listing every problem."""
    errs: list[str] = []
    _unknown(doc, RUN_KEYS, errs)
    for k in RUN_REQUIRED:
        if k not in doc:
            errs.append(f"missing-field:{k}")
    grid = parse_grid(doc["grid"], errs) if "grid" in doc else None
    kernel = parse_kernel(doc["kernel"], errs, base) if "kernel" in doc else None
    wspec = parse_weights(doc["weights"], errs) if "weights" in doc else None
    vel = parse_velocity(doc["velocity"], errs) if "velocity" in doc else None
    lam = _number(doc, "lambda", errs, positive=True) if "lambda" in doc else None
    eps = _number(doc, "epsilon", errs, positive=True) if "epsilon" in doc else None
    T = _number(doc, "T", errs, positive=True) if "T" in doc else None
    data = parse_initial_data(doc["initial_data"], errs) if "initial_data" in doc else None
    variant = parse_cfl_variant(doc.get("cfl_variant", "main"), errs)

    snaps = doc.get("snapshots", [])
    if not isinstance(snaps, list) or not all(
            isinstance(s, (int, float)) and not isinstance(s, bool) and s >= 0 for s in snaps):
        errs.append("invalid-field:snapshots must be a list of nonnegative times")
        snaps = []
    elif T is not None and any(s > T for s in snaps):
        errs.append("invalid-field:snapshots beyond T")

    diag = doc.get("diagnostics", True)
    diag_on, c = True, 0.5
    if isinstance(diag, bool):
        diag_on = diag
    elif isinstance(diag, dict):
        _unknown(diag, {"enabled", "c"}, errs, "diagnostics.")
        diag_on = bool(diag.get("enabled", True))
        if "c" in diag:
            c = _number(diag, "c", errs, where="diagnostics.")
            if c is not None and not 0.0 <= c <= 1.0:
                errs.append("invalid-field:diagnostics.c must lie in [0, 1]")
    else:
        errs.append("invalid-field:diagnostics")

    out = doc.get("output_dir")
    if out is not None and not isinstance(out, str):
        errs.append("invalid-field:output_dir")

    # physical checks that need several sections
    if vel is not None and lam is not None and variant is not None:
        limit = max_cfl_ratio(vel, variant)
        if lam > limit * (1.0 + 1e-12):
            errs.append(f"cfl-violation: lambda={lam} exceeds {limit:.6g} for {vel.name} "
                        f"under the {variant.value} condition")
    if grid is not None and data is not None:
        try:
            idata.discretize_initial(data, grid)
        except ValueError as exc:
            errs.append(str(exc))
    if kernel is not None and wspec is not None and eps is not None and grid is not None:
        try:
            wspec.build(kernel, eps, grid.h)
        except ValueError as exc:
            errs.append(f"invalid-weights:{exc}")
    if errs:
        raise ConfigError(errs)
    return RunConfig(grid, kernel, wspec, vel, lam, eps, data, T, variant,
                     [float(s) for s in snaps], diag_on, c if c is not None else 0.5, out, doc)


STUDY_KEYS = {"study", "data", "kernel", "weights", "velocity", "path", "fixed_epsilon",
              "h_list", "lambda", "T", "domain", "target_field", "cfl_variant", "refine",
              "fit_points", "families", "epsilons", "h", "kernels", "data_list", "c",
              "output_dir"}
STUDIES = ("convergence", "quadrature-comparison", "tv-study", "entropy-table")


def _h_list(doc, errs):
    hl = doc.get("h_list")
    if not isinstance(hl, list) or not hl or not all(
            isinstance(h, (int, float)) and not isinstance(h, bool) and h > 0 for h in hl):
        errs.append("invalid-field:h_list must be a nonempty list of positive numbers")
        return None
    if any(b >= a for a, b in zip(hl, hl[1:])):
        errs.append("invalid-field:h_list must be strictly decreasing")
        return None
    return tuple(float(h) for h in hl)


def parse_study_spec(doc: dict, errs: list, base: Path | None = None) -> StudySpec | None:
    """Convergence and quadrature-comparison settings."""
    for k in ("data", "kernel"):
        if k not in doc:
            errs.append(f"missing-field:{k}")
    data = parse_initial_data(doc["data"], errs) if "data" in doc else None
    kernel = parse_kernel(doc["kernel"], errs, base) if "kernel" in doc else None
    wspec = parse_weights(doc.get("weights", "exact"), errs)
    vel = parse_velocity(doc.get("velocity", "greenshields"), errs)
    variant = parse_cfl_variant(doc.get("cfl_variant", "main"), errs)
    try:
        path = LimitPath(doc.get("path", "eps_equals_h"))
    except ValueError:
        errs.append(f"invalid-field:path={doc.get('path')!r}")
        path = None
    fixed = None
    if path is LimitPath.FIXED_EPS:
        if "fixed_epsilon" not in doc:
            errs.append("missing-field:fixed_epsilon")
        else:
            fixed = _number(doc, "fixed_epsilon", errs, positive=True)
    hl = _h_list(doc, errs) if "h_list" in doc else StudySpec.__dataclass_fields__["h_list"].default
    lam = _number(doc, "lambda", errs, positive=True) if "lambda" in doc else 0.25
    T = _number(doc, "T", errs, positive=True) if "T" in doc else 1.0
    dom = doc.get("domain", [-2.0, 2.0])
    if not (isinstance(dom, list) and len(dom) == 2
            and all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in dom)
            and dom[0] < dom[1]):
        errs.append("invalid-field:domain must be [x_min, x_max]")
        dom = None
    target = doc.get("target_field", "W")
    if target not in ("W", "rho"):
        errs.append(f"invalid-field:target_field={target!r}")
    refine = doc.get("refine", 8)
    if isinstance(refine, bool) or not isinstance(refine, int) or refine < 2:
        errs.append("invalid-field:refine must be an integer >= 2")
    fit = doc.get("fit_points")
    if fit is not None and (isinstance(fit, bool) or not isinstance(fit, int) or fit < 2):
        errs.append("invalid-field:fit_points must be an integer >= 2")
    if vel is not None and lam is not None and variant is not None:
        limit = max_cfl_ratio(vel, variant)
        if lam > limit * (1.0 + 1e-12):
            errs.append(f"cfl-violation: lambda={lam} exceeds {limit:.6g} for {vel.name}")
    if errs:
        return None
    if wspec.family is WeightFamily.GEOMETRIC:
        errs.append("invalid-field:weights.family geometric is not available in sweeps")
        return None
    try:
        return StudySpec(data, kernel, wspec.family, vel, path, hl, lam, T, tuple(map(float, dom)),
                         target, fixed, variant, refine, wspec.tail_tol, fit)
    except ValueError as exc:
        errs.append(f"invalid-study:{exc}")
        return None


# -- outputs ---------------------------------------------------------------

def write_snapshots(path, snapshots, grid: GridSpec) -> None:
    x = grid.centers
    rows = []
    for s in snapshots:
        for xc, r, w in zip(x, s.rho, s.w):
            rows.append((s.t, xc, r, w))
    write_csv(path, ("t", "x_center", "rho", "W"), rows)


def read_snapshots(path):
    """Parse a snapshots CSV into ``{t: (x_center, rho, W)}`` in file order."""
    out: dict[float, list] = {}
    with open(path, newline="") as f:
        rd = csv.reader(f)
        header = next(rd, None)
        if header != ["t", "x_center", "rho", "W"]:
            raise ConfigError([f"invalid-snapshots:{path}:1 header must be t,x_center,rho,W"])
        for lineno, row in enumerate(rd, start=2):
            if len(row) != 4:
                raise ConfigError([f"invalid-snapshots:{path}:{lineno}"])
            try:
                t, x, r, w = map(float, row)
            except ValueError:
                raise ConfigError([f"invalid-snapshots:{path}:{lineno}"]) from None
            out.setdefault(t, []).append((x, r, w))
    return {t: tuple(np.array(col) for col in zip(*vals)) for t, vals in out.items()}


def write_diagnostics(path, records) -> None:
    write_csv(path, DIAGNOSTICS_COLUMNS, [r.as_row() for r in records])


def write_study(out_dir, result, stem: str = "study") -> tuple[Path, Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = out_dir / f"{stem}.csv"
    json_path = out_dir / f"{stem}.json"
    write_csv(csv_path, ("h", "epsilon", "tau", "l1_error", "wall_time_s"),
              [(r.h, r.epsilon, r.tau, r.l1_error, r.wall_time) for r in result.rows])
    write_json(json_path, {"slope": result.fitted_slope, **result.manifest})
    return csv_path, json_path


def ensure_dir(path) -> Path:
    p = Path(path)
    os.makedirs(p, exist_ok=True)
    return p
