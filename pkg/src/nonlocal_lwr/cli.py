"""
Command line entry point: ``nonlocal-lwr {run,sweep,weights,diagnose}``.

Exit status is 0 on success, 2 for invalid input (bad config, CFL violation,
unknown subcommand) and 1 when a computation fails.  Failures print a single
``reason: detail`` line on stderr.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import harness
from . import io as nio
from .diagnostics import step_record
from .initial_data import discretize_initial
from .kernels import first_moment, get_kernel, KernelError
from .quadrature import QuadratureError, WeightFamily, build_weights, geometric_weights, \
    verify_weight_conditions
from .scheme import CFLViolation, SolutionField, compute_W, run

EXIT_OK, EXIT_RUNTIME, EXIT_INVALID = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _one_line(msg: str) -> str:
    return " ".join(str(msg).split())


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="nonlocal-lwr", description="Nonlocal LWR solver lab.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    r = sub.add_parser("run", help="run one simulation from a JSON config")
    r.add_argument("--config", required=True)
    r.add_argument("--output", help="output directory (overrides output_dir)")

    s = sub.add_parser("sweep", help="run a study")
    s.add_argument("study", choices=nio.STUDIES)
    s.add_argument("--config", required=True)
    s.add_argument("--output", help="output directory (overrides output_dir)")
    s.add_argument("--threads", type=int, default=1, help="worker processes for sweep cells")

    w = sub.add_parser("weights", help="print quadrature weights and their condition report")
    w.add_argument("--kernel", required=True)
    w.add_argument("--family", required=True, choices=[f.value for f in WeightFamily])
    w.add_argument("--epsilon", type=float, required=True)
    w.add_argument("--h", type=float, required=True)
    w.add_argument("--gamma0", type=float, help="geometric ratio parameter (geometric family)")
    w.add_argument("--tail-tol", type=float, default=1e-12)
    w.add_argument("--c-gamma", type=float, help="moment bound; defaults to the kernel moment")
    w.add_argument("--output", help="also write weights.csv and report.json here")

    d = sub.add_parser("diagnose", help="recompute diagnostics from a snapshots CSV")
    d.add_argument("--config", required=True, help="run config that produced the snapshots")
    d.add_argument("--snapshots", required=True)
    d.add_argument("--output", required=True)
    return p


def _out_dir(args, doc) -> Path:
    out = args.output or doc.get("output_dir")
    if out is None:
        raise nio.ConfigError(["missing-field:output_dir"])
    return nio.ensure_dir(out)


def cmd_run(args) -> int:
    doc = nio.read_json(args.config)
    cfg = nio.parse_run_config(doc, Path(args.config).parent)
    out = _out_dir(args, doc)
    scheme_cfg = cfg.scheme_config()
    rho0 = discretize_initial(cfg.data, cfg.grid)
    res = run(scheme_cfg, rho0, cfg.T, cfg.snapshots, diagnostics=cfg.diagnostics,
              entropy_c=cfg.entropy_c, initial_spec=cfg.data.to_dict())
    nio.write_snapshots(out / "snapshots.csv", res.snapshots, cfg.grid)
    nio.write_diagnostics(out / "diagnostics.csv", res.diagnostics)
    nio.write_json(out / "manifest.json", {**res.manifest, "run_config": doc})
    return EXIT_OK


def _study_doc(args):
    doc = nio.read_json(args.config)
    errs: list[str] = []
    nio._unknown(doc, nio.STUDY_KEYS, errs)
    if "study" in doc and doc["study"] != args.study:
        errs.append(f"invalid-field:study={doc['study']!r} does not match {args.study}")
    if args.threads < 1:
        errs.append("invalid-field:threads must be at least 1")
    return doc, errs


def _kernels(names, errs):
    out = []
    for n in names if isinstance(names, list) else [names]:
        k = nio.parse_kernel(n, errs)
        if k is not None:
            out.append(k)
    return out


def _epsilons(doc, errs):
    eps = doc.get("epsilons")
    if not isinstance(eps, list) or not eps or not all(
            isinstance(e, (int, float)) and not isinstance(e, bool) and e > 0 for e in eps):
        errs.append("invalid-field:epsilons must be a nonempty list of positive numbers")
        return None
    return [float(e) for e in eps]


def cmd_sweep(args) -> int:
    doc, errs = _study_doc(args)
    base = Path(args.config).parent
    if args.study in ("convergence", "quadrature-comparison"):
        families = doc.get("families", ["exact", "riemann", "normalized_riemann"])
        spec = nio.parse_study_spec(doc, errs, base)
        if args.study == "quadrature-comparison":
            bad = [f for f in families if f not in ("exact", "riemann", "normalized_riemann")]
            if not isinstance(families, list) or bad:
                errs.append(f"invalid-field:families={families!r}")
        if errs:
            raise nio.ConfigError(errs)
        out = _out_dir(args, doc)
        if args.study == "convergence":
            nio.write_study(out, harness.run_convergence_study(spec, args.threads))
        else:
            results = harness.run_quadrature_comparison(spec, families, args.threads)
            for fam, res in zip(families, results):
                nio.write_study(out, res, f"study_{fam}")
        return EXIT_OK

    if args.study == "tv-study":
        eps = _epsilons(doc, errs)
        h = nio._number(doc, "h", errs, positive=True) if "h" in doc else None
        if h is None and "h" not in doc:
            errs.append("missing-field:h")
        kernel = nio.parse_kernel(doc["kernel"], errs, base) if "kernel" in doc else None
        if "kernel" not in doc:
            errs.append("missing-field:kernel")
        vel = nio.parse_velocity(doc.get("velocity", "greenshields"), errs)
        T = nio._number(doc, "T", errs, positive=True) if "T" in doc else 1.6
        lam = nio._number(doc, "lambda", errs, positive=True) if "lambda" in doc else 0.25
        dom = doc.get("domain", [-1.5, 2.5])
        if errs:
            raise nio.ConfigError(errs)
        out = _out_dir(args, doc)
        series = harness.run_tv_study(eps, h, kernel, T, velocity=vel, lam=lam, domain=tuple(dom))
        summary = {}
        for e, s in series.items():
            nio.write_csv(out / f"tv_eps_{e:.6g}.csv", ("t", "tv_rho", "tv_W"),
                          zip(s.t, s.tv_rho, s.tv_W))
            summary[f"{e:.17g}"] = {"first_rise_time": s.first_rise_time,
                                    "return_time": s.return_time,
                                    "max_tv_rho": float(s.tv_rho.max()),
                                    "max_tv_W_increase": s.max_tv_W_increase}
        nio.write_json(out / "tv_study.json", {"config": doc, "series": summary})
        return EXIT_OK

    # entropy-table
    eps = _epsilons(doc, errs)
    h = nio._number(doc, "h", errs, positive=True) if "h" in doc else 2e-3
    kernels = _kernels(doc.get("kernels", ["exponential", "linear", "constant"]), errs)
    data = [nio.parse_initial_data(d, errs)
            for d in doc.get("data_list", ["riemann_shock", "riemann_rarefaction", "bell_shaped"])]
    c = nio._number(doc, "c", errs) if "c" in doc else 0.5
    if c is not None and not 0.0 <= c <= 1.0:
        errs.append("invalid-field:c must lie in [0, 1]")
    T = nio._number(doc, "T", errs, positive=True) if "T" in doc else 1.0
    if errs:
        raise nio.ConfigError(errs)
    out = _out_dir(args, doc)
    table = harness.run_entropy_table(eps, h, kernels, data, c, T, args.threads)
    nio.write_csv(out / "entropy_table.csv", table.header(), table.rows())
    nio.write_json(out / "entropy_table.json", {"config": doc, "h": h, "c": c, "T": T})
    return EXIT_OK


def cmd_weights(args) -> int:
    errs = []
    try:
        kernel = get_kernel(args.kernel)
    except KernelError:
        errs.append(f"invalid-field:kernel={args.kernel!r}")
        kernel = None
    for name in ("epsilon", "h", "tail_tol"):
        v = getattr(args, name)
        if not (v > 0 and math.isfinite(v)):
            errs.append(f"invalid-field:{name.replace('_', '-')} must be positive")
    if errs:
        raise nio.ConfigError(errs)
    try:
        if args.family == "geometric" and args.gamma0 is not None:
            w = geometric_weights(args.gamma0, args.tail_tol, epsilon=args.epsilon, h=args.h)
        else:
            w = build_weights(kernel, args.family, args.epsilon, args.h, args.tail_tol)
    except QuadratureError as exc:
        raise nio.ConfigError([f"invalid-weights:{exc}"]) from None
    c_gamma = args.c_gamma if args.c_gamma is not None else first_moment(kernel)
    report = verify_weight_conditions(w, c_gamma)
    lines = ["k,weight"] + [f"{k},{nio.fmt(v)}" for k, v in enumerate(w.weights)]
    payload = {"weights": w.to_dict(), "report": report.as_dict(), "c_gamma": c_gamma}
    sys.stdout.write("\n".join(lines) + "\n")
    sys.stdout.write(json.dumps(payload, sort_keys=True) + "\n")
    if args.output:
        out = nio.ensure_dir(args.output)
        nio.write_csv(out / "weights.csv", ("k", "weight"), enumerate(w.weights))
        nio.write_json(out / "report.json", payload)
    return EXIT_OK


def cmd_diagnose(args) -> int:
    """Diagnostics per snapshot.

    Step-to-step quantities (time increment, entropy parts) are only defined
    when two consecutive snapshots are one time step apart; otherwise they
    are written as ``nan``.  ``W`` is recomputed from ``rho`` and its largest
    deviation from the stored column is reported in ``diagnose.json``.
    """
    doc = nio.read_json(args.config)
    cfg = nio.parse_run_config(doc, Path(args.config).parent)
    scheme_cfg = cfg.scheme_config()
    snaps = nio.read_snapshots(args.snapshots)
    out = nio.ensure_dir(args.output)
    grid = cfg.grid
    records = []
    prev = None
    w_dev = 0.0
    for t in sorted(snaps):
        x, rho, w_stored = snaps[t]
        if len(rho) != grid.num_cells or not np.allclose(x, grid.centers, rtol=0, atol=1e-9 * grid.h):
            raise nio.ConfigError([f"invalid-snapshots:t={t} does not match the configured grid"])
        w = compute_W(rho, scheme_cfg.weights)
        w_dev = max(w_dev, float(np.max(np.abs(w - w_stored))))
        n = int(math.floor(t / scheme_cfg.tau + 1e-9))
        cur = SolutionField(n, t, rho, w)
        adjacent = prev is not None and cur.n - prev.n == 1
        rec = step_record(prev if adjacent else None, cur, scheme_cfg, cfg.entropy_c)
        if not adjacent and prev is not None:
            rec.tv_time_increment = rec.entropy_pos_rho = rec.entropy_pos_W = math.nan
        records.append(rec)
        prev = cur
    nio.write_diagnostics(out / "diagnostics.csv", records)
    nio.write_json(out / "diagnose.json", {"snapshots": str(args.snapshots),
                                           "n_snapshots": len(records),
                                           "max_abs_W_deviation": w_dev})
    return EXIT_OK


COMMANDS = {"run": cmd_run, "sweep": cmd_sweep, "weights": cmd_weights, "diagnose": cmd_diagnose}


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print(f"usage-error: {_one_line(exc)}", file=sys.stderr)
        return EXIT_INVALID
    try:
        return COMMANDS[args.command](args)
    except nio.ConfigError as exc:
        print(_one_line(exc), file=sys.stderr)
        return EXIT_INVALID
    except CFLViolation as exc:
        print(_one_line(exc), file=sys.stderr)
        return EXIT_INVALID
    except Exception as exc:  # noqa: BLE001
        print(f"runtime-error: {_one_line(exc)}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
