import csv
import json

import numpy as np
import pytest

from nonlocal_lwr.cli import main
from nonlocal_lwr.io import ConfigError, parse_run_config, read_snapshots

RUN = {
    "grid": {"x_min": -1.0, "x_max": 1.0, "h": 0.01},
    "kernel": "linear",
    "weights": {"family": "exact"},
    "velocity": "greenshields",
    "lambda": 0.25,
    "epsilon": 0.05,
    "initial_data": {"kind": "riemann_shock"},
    "T": 0.2,
    "snapshots": [0.0, 0.1, 0.2],
}


def _write(tmp_path, doc, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(doc))
    return str(p)


def _rows(path):
    with open(path) as f:
        return list(csv.reader(f))


def test_run_writes_three_files(tmp_path):
    out = tmp_path / "out"
    assert main(["run", "--config", _write(tmp_path, RUN), "--output", str(out)]) == 0
    assert sorted(p.name for p in out.iterdir()) == ["diagnostics.csv", "manifest.json", "snapshots.csv"]
    snap = _rows(out / "snapshots.csv")
    assert snap[0] == ["t", "x_center", "rho", "W"]
    assert len(snap) == 1 + 3 * 200
    diag = _rows(out / "diagnostics.csv")
    assert diag[0][:3] == ["n", "t", "rho_min"]
    assert len(diag) == 1 + 81
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["n_steps"] == 80
    assert manifest["run_config"] == RUN


def test_run_is_byte_stable(tmp_path):
    cfg = _write(tmp_path, RUN)
    main(["run", "--config", cfg, "--output", str(tmp_path / "a")])
    main(["run", "--config", cfg, "--output", str(tmp_path / "b")])
    for name in ("snapshots.csv", "diagnostics.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_snapshot_round_trip_is_lossless(tmp_path):
    out = tmp_path / "out"
    main(["run", "--config", _write(tmp_path, RUN), "--output", str(out)])
    snaps = read_snapshots(out / "snapshots.csv")
    x, rho, w = snaps[0.0]
    np.testing.assert_array_equal(rho[:100], 0.0)
    np.testing.assert_array_equal(rho[100:], 0.7)


def test_cfl_violation_exit_2(tmp_path, capsys):
    doc = dict(RUN, **{"lambda": 0.6})
    assert main(["run", "--config", _write(tmp_path, doc), "--output", str(tmp_path / "o")]) == 2
    err = capsys.readouterr().err
    assert "cfl-violation" in err
    assert err.count("\n") == 1
    assert not (tmp_path / "o").exists()


def test_missing_kernel_exit_2(tmp_path, capsys):
    doc = {k: v for k, v in RUN.items() if k != "kernel"}
    assert main(["run", "--config", _write(tmp_path, doc), "--output", str(tmp_path / "o")]) == 2
    assert "missing-field:kernel" in capsys.readouterr().err


def test_validation_reports_everything():
    doc = dict(RUN, velocity="nope", bogus=1, grid={"x_min": 0, "x_max": 1, "h": 0.3})
    with pytest.raises(ConfigError) as info:
        parse_run_config(doc)
    reasons = info.value.reasons
    assert "unknown-field:bogus" in reasons
    assert any(r.startswith("invalid-field:velocity") for r in reasons)
    assert any(r.startswith("invalid-grid") for r in reasons)


def test_data_out_of_range(tmp_path, capsys):
    doc = dict(RUN, initial_data={"kind": "constant", "c": 1.4})
    assert main(["run", "--config", _write(tmp_path, doc), "--output", str(tmp_path / "o")]) == 2
    assert "data-out-of-range" in capsys.readouterr().err


def test_unreadable_config(tmp_path, capsys):
    assert main(["run", "--config", str(tmp_path / "missing.json"), "--output", str(tmp_path)]) == 2
    assert "unreadable-config" in capsys.readouterr().err


def test_unknown_subcommand(capsys):
    assert main(["frobnicate"]) == 2
    assert main(["sweep", "bogus", "--config", "x.json"]) == 2
    assert capsys.readouterr().err.startswith("usage-error")


def test_weights_command(capsys):
    assert main(["weights", "--kernel", "exponential", "--family", "exact",
                 "--epsilon", "0.01", "--h", "0.01"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "k,weight"
    assert float(lines[1].split(",")[1]) == pytest.approx(0.6321206, abs=1e-7)
    report = json.loads(lines[-1])["report"]
    assert report["normalized"] and report["convex"]


def test_weights_constant_and_riemann(capsys, tmp_path):
    main(["weights", "--kernel", "constant", "--family", "exact", "--epsilon", "1", "--h", "0.25",
          "--output", str(tmp_path)])
    lines = capsys.readouterr().out.splitlines()
    assert lines[1:5] == [f"{k},0.25" for k in range(4)]
    assert len(_rows(tmp_path / "weights.csv")) == 5
    main(["weights", "--kernel", "linear", "--family", "riemann", "--epsilon", "0.01", "--h", "0.01"])
    assert json.loads(capsys.readouterr().out.splitlines()[-1])["report"]["normalized"] is False
    assert main(["weights", "--kernel", "linear", "--family", "exact", "--epsilon", "-1",
                 "--h", "0.01"]) == 2


def test_sweep_convergence(tmp_path):
    doc = {"data": "riemann_shock", "kernel": "linear", "h_list": [0.02, 0.01, 0.005, 0.004, 0.002]}
    out = tmp_path / "s"
    assert main(["sweep", "convergence", "--config", _write(tmp_path, doc), "--output", str(out)]) == 0
    rows = _rows(out / "study.csv")
    assert rows[0] == ["h", "epsilon", "tau", "l1_error", "wall_time_s"]
    assert len(rows) == 6
    meta = json.loads((out / "study.json").read_text())
    assert 0.8 < meta["slope"] < 1.2
    assert meta["spec"]["path"] == "eps_equals_h"


def test_sweep_quadrature_comparison(tmp_path):
    doc = {"data": "riemann_shock", "kernel": "linear", "velocity": "clipped_greenshields",
           "h_list": [0.02, 0.01], "families": ["exact", "riemann"]}
    out = tmp_path / "q"
    assert main(["sweep", "quadrature-comparison", "--config", _write(tmp_path, doc),
                 "--output", str(out), "--threads", "2"]) == 0
    assert {p.name for p in out.iterdir()} == {"study_exact.csv", "study_exact.json",
                                               "study_riemann.csv", "study_riemann.json"}


def test_sweep_tv_and_entropy(tmp_path):
    tv = {"epsilons": [0.2], "h": 0.01, "kernel": "linear", "T": 0.2}
    out = tmp_path / "tv"
    assert main(["sweep", "tv-study", "--config", _write(tmp_path, tv), "--output", str(out)]) == 0
    assert _rows(out / "tv_eps_0.2.csv")[0] == ["t", "tv_rho", "tv_W"]
    ent = {"epsilons": [0.2, 0.02], "h": 0.02, "kernels": ["linear", "constant"],
           "data_list": ["riemann_shock"], "T": 0.2}
    out = tmp_path / "ent"
    assert main(["sweep", "entropy-table", "--config", _write(tmp_path, ent, "e.json"),
                 "--output", str(out)]) == 0
    rows = _rows(out / "entropy_table.csv")
    assert len(rows) == 3 and len(rows[0]) == 5


def test_sweep_rejects_bad_config(tmp_path, capsys):
    doc = {"data": "riemann_shock", "h_list": [0.01, 0.02], "oops": 1}
    assert main(["sweep", "convergence", "--config", _write(tmp_path, doc), "--output", str(tmp_path)]) == 2
    err = capsys.readouterr().err
    assert "missing-field:kernel" in err and "unknown-field:oops" in err and "decreasing" in err


def test_diagnose_reproduces_run(tmp_path):
    doc = dict(RUN, snapshots=[0.0, 0.0025, 0.1])
    cfg = _write(tmp_path, doc)
    main(["run", "--config", cfg, "--output", str(tmp_path / "r")])
    assert main(["diagnose", "--config", cfg, "--snapshots", str(tmp_path / "r" / "snapshots.csv"),
                 "--output", str(tmp_path / "d")]) == 0
    run_rows = _rows(tmp_path / "r" / "diagnostics.csv")
    diag_rows = _rows(tmp_path / "d" / "diagnostics.csv")
    assert diag_rows[1] == run_rows[1]
    assert diag_rows[2] == run_rows[2]
    assert diag_rows[3][7:] == ["nan", "nan", "nan"]
    assert json.loads((tmp_path / "d" / "diagnose.json").read_text())["max_abs_W_deviation"] == 0.0
