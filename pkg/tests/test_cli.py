"""Command-line interface, sweep configuration, CSV round trip and SVG output."""

import json
import math
import os

import pytest
from hypothesis import given
from hypothesis import strategies as st

from synthamp.cli import SweepConfigError, main, run_sweep_config, verify_rows
from synthamp.results import SweepResult, config_hash, format_value, read_csv, write_svg


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def run_json(capsys, *argv):
    code, out, err = run(capsys, *argv, "--json")
    assert code == 0, err
    return json.loads(out)


# --- bound ----------------------------------------------------------------


def test_bound_amplified(capsys):
    rep = run_json(capsys, "bound", "--alpha", "2", "--C", "2", "--d", "50", "--k", "1", "--delta", "1", "--method", "min")
    assert rep["value"] < 1.0 and rep["regime"] == "amplified"


def test_bound_zero_delta(capsys):
    assert run_json(capsys, "bound", "--alpha", "2", "--C", "2", "--d", "50", "--delta", "0")["value"] == 0.0


def test_bound_domain_error_exit(capsys):
    code, _, err = run(capsys, "bound", "--alpha", "2", "--C", "2", "--d", "2", "--delta", "1")
    assert code == 3 and "domain error" in err


def test_usage_error_exit(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["bound", "--alpha", "2"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        main(["bound", "--alpha", "2", "--C", "1", "--d", "5", "--delta", "1", "--threads", "0"])
    assert exc.value.code == 2


def test_bound_table_output(capsys):
    code, out, _ = run(capsys, "bound", "--alpha", "2", "--C", "1", "--d", "103", "--delta", "0.1", "--method", "global_k1")
    assert code == 0 and "global_k1" in out and "0.0140098" in out


# --- fisher / renyi / prior / counterexample ------------------------------


def test_fisher_inside_bounds(capsys):
    row = run_json(capsys, "fisher", "--d", "10", "--theta", "2", "--samples", "2000")
    assert 0.4444 <= row["quadrature"] <= 0.5334 and row["status"] == "ok"


def test_fisher_zero_theta_and_clamp(capsys):
    rows = run_json(capsys, "fisher", "--d", "3", "--theta", "0", "1", "--samples", "1000")
    zero, one = rows
    assert all(zero[k] == 0 for k in ("lower", "quadrature", "mc_score", "mc_rician", "upper"))
    assert one["upper"] == 1.0


def test_renyi_methods(capsys):
    q = run_json(capsys, "renyi", "--alpha", "2", "--d", "5", "--theta-v", "2", "--theta-w", "1")
    assert q["value"] == pytest.approx(0.5590314961867262, rel=1e-10)
    f = run_json(capsys, "renyi", "--method", "finite-n", "--n-syn", "8", "--alpha", "2", "--d", "5",
                 "--theta-v", "2", "--theta-w", "1")
    assert 0 < f["value"] < q["value"]


def test_renyi_flag_conflicts(capsys):
    code, _, err = run(capsys, "renyi", "--method", "finite-n", "--alpha", "2", "--d", "5", "--theta-v", "2", "--theta-w", "1")
    assert code == 2 and "--n-syn" in err
    code, _, _ = run(capsys, "renyi", "--family", "wishart", "--alpha", "2", "--d", "5", "--theta-v", "2", "--theta-w", "1")
    assert code == 2


def test_prior_and_counterexample(capsys):
    row = run_json(capsys, "prior")
    assert row["amplified"] and row["z_plus"] == pytest.approx(1.41, abs=0.01)
    assert row["l_alpha"] == pytest.approx(row["l_alpha_direct"], rel=1e-6)
    ce = run_json(capsys, "counterexample")
    assert ce["fisher_order"] and ce["divergence_order"]


# --- figures --------------------------------------------------------------


def test_figures_gauss_criterion(tmp_path, capsys):
    code, _, err = run(capsys, "figures", "--which", "gauss-criterion", "--out", str(tmp_path))
    assert code == 0, err
    meta, rows = read_csv(tmp_path / "gauss-criterion.csv")
    assert meta["figure"] == "gauss-criterion"
    exact = {r["delta"]: float(r["value"]) for r in rows if r["method"] == "exact"}
    crit = {r["delta"]: float(r["value"]) for r in rows if r["method"] == "criterion"}
    assert len(exact) == 30 and all(crit[k] >= exact[k] for k in exact)
    svg = (tmp_path / "gauss-criterion.svg").read_text()
    assert svg.startswith("<svg") and svg.count("<polyline") == 3


def test_figures_unwritable_directory(tmp_path, capsys):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    code, _, err = run(capsys, "figures", "--which", "prior-tradeoff", "--out", str(blocker / "sub"))
    assert code != 0 and err


def test_figures_then_verify(tmp_path, capsys):
    assert run(capsys, "figures", "--which", "fig3", "--out", str(tmp_path))[0] == 0
    code, out, _ = run(capsys, "verify", str(tmp_path / "fig3.csv"))
    assert code == 0 and "mismatches=0" in out


def test_verify_detects_tampering(tmp_path, capsys):
    assert run(capsys, "figures", "--which", "prior-tradeoff", "--out", str(tmp_path))[0] == 0
    path = tmp_path / "prior-tradeoff.csv"
    lines = path.read_text().splitlines(keepends=True)
    idx = next(i for i, l in enumerate(lines) if ",l_alpha," in l)
    parts = lines[idx].split(",")
    parts[10] = repr(float(parts[10]) + 1e-6)
    lines[idx] = ",".join(parts)
    path.write_text("".join(lines))
    code, _, err = run(capsys, "verify", str(path))
    assert code == 4 and "l_alpha" in err


# --- sweep ----------------------------------------------------------------

MIXED = {
    "experiments": [
        {"name": "q", "method": "quadrature", "alpha": 2, "C": 2, "d_list": [5, 10], "k": 1,
         "delta_grid": [0.5, 1.0], "seed": 0},
        {"name": "v", "method": "variational", "alpha": 2, "C": 2, "d": 5, "k": 1, "delta": 1.0, "seed": 4,
         "train": {"steps": 60, "eval_every": 30, "n_runs": 2, "n_eval": 1000, "n_final": 1000}},
    ]
}


def test_sweep_stderr_only_on_variational():
    res = run_sweep_config(MIXED)
    for r in res.rows:
        assert (r["stderr"] is not None) == (r["method"] == "variational")


def test_sweep_cli_deterministic(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps(MIXED))
    outs = []
    for name in ("a.csv", "b.csv"):
        code, _, err = run(capsys, "sweep", str(cfg), "--out", str(tmp_path / name))
        assert code == 0, err
        outs.append((tmp_path / name).read_text())
    bodies = ["".join(l for l in o.splitlines(keepends=True) if not l.startswith("#")) for o in outs]
    assert bodies[0] == bodies[1]
    meta, rows = read_csv(tmp_path / "a.csv")
    assert meta["config_hash"] == config_hash(MIXED) and meta["seed"] == "0" and "version" in meta
    checked, skipped, failures = verify_rows(rows)
    assert checked == 4 and skipped == 1 and not failures


def test_sweep_empty_is_header_only(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text('{"experiments": []}')
    code, out, _ = run(capsys, "sweep", str(cfg))
    assert code == 0
    body = [l for l in out.splitlines() if not l.startswith("#")]
    assert body == ["experiment,alpha,C,d,k,delta,n_syn,theta_v,theta_w,method,value,stderr,seed,notes"]


@pytest.mark.parametrize(
    "cfg, fragment",
    [
        ({"experiments": [], "extra": 1}, "'extra'"),
        ({"experiments": [{"name": "x", "method": "quadrature", "alpha": 2, "C": 1, "d": 5, "delta": 1, "oops": 0}]}, "'oops'"),
        ({"experiments": [{"name": "x", "method": "magic", "alpha": 2, "C": 1, "d": 5, "delta": 1}]}, "method"),
        ({"experiments": [{"name": "x", "method": "quadrature", "alpha": 2, "C": 1, "delta": 1}]}, "'d'"),
        ({"experiments": [{"name": "x", "method": "variational", "alpha": 2, "C": 1, "d": 5, "delta": 1,
                           "train": {"epochs": 3}}]}, "'epochs'"),
    ],
)
def test_sweep_schema_violations(tmp_path, capsys, cfg, fragment):
    with pytest.raises(SweepConfigError, match=fragment):
        run_sweep_config(cfg)
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(cfg))
    code, _, err = run(capsys, "sweep", str(path))
    assert code == 2 and fragment.strip("'") in err


# --- results module -------------------------------------------------------


@given(st.floats(allow_nan=False))
def test_format_value_round_trips(x):
    text = format_value(x)
    assert float(text) == x


def test_format_value_specials():
    import numpy as np

    assert format_value(None) == "" and format_value(True) == "true"
    assert format_value(np.float64(0.1)) == "0.1" and format_value(np.int64(3)) == "3"
    assert format_value(math.inf) == "inf"


def test_csv_round_trip(tmp_path):
    res = SweepResult()
    res.add("e", "m", 0.1 + 0.2, alpha=2.0, d=5, delta=1.0, notes="a=1;b=2")
    res.add("e", "m", 1e-300, alpha=2.0, d=5, delta=1.0, n_syn=8, stderr=0.5, seed=3)
    path = tmp_path / "r.csv"
    res.to_csv(str(path), {"seed": 3})
    meta, rows = read_csv(str(path))
    assert meta == {"seed": "3"}
    assert float(rows[0]["value"]) == 0.1 + 0.2 and rows[0]["n_syn"] == "inf"
    assert rows[1]["n_syn"] == "8" and rows[1]["stderr"] == "0.5"
    assert not [f for f in os.listdir(tmp_path) if f.startswith(".tmp")]


def test_svg_writer(tmp_path):
    path = tmp_path / "x.svg"
    text = write_svg(str(path), [("a", [1, 2, 4], [0.1, 0.2, 0.3]), ("b", [1, 4], [0.3, 0.3])],
                     title="t <x>", xlabel="n", ylabel="D", logx=True, dashed=["b"])
    assert path.read_text() == text
    assert text.count("<polyline") == 2 and "stroke-dasharray" in text and "t &lt;x&gt;" in text


def test_sweep_thread_count_does_not_change_output():
    assert run_sweep_config(MIXED, threads=1).body() == run_sweep_config(MIXED, threads=3).body()


def test_sweep_fisher_and_bound_methods():
    cfg = {"experiments": [
        {"name": "f", "method": "fisher", "alpha": 2, "C": 2, "d": 6, "delta": 1.0, "samples": 2000, "seed": 1},
        {"name": "b", "method": "bound", "alpha": 2, "C": 2, "d": 200, "delta": 1.0},
        {"name": "g", "method": "global", "alpha": 2, "C": 2, "d": 20, "k": 2, "delta": 0.5},
        {"name": "p", "method": "post_processing", "alpha": 3, "C": 2, "d": 20, "delta": 0.5},
    ]}
    res = run_sweep_config(cfg)
    assert len(res.select(method="mc_score")) == 2
    assert res.select(method="minimum")[0]["value"] < 1.0
    assert res.select(method="post_processing")[0]["value"] == 0.375
    checked, skipped, failures = verify_rows([{k: ("" if v is None else str(v)) for k, v in r.items()} for r in res.rows])
    assert not failures and checked == 5 and skipped == 2
