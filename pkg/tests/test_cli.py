import json

import numpy as np
import pytest

import surplus_consensus as sc
from surplus_consensus import cli


def run(argv):
    return cli.main(argv)


def parse_summary(captured):
    line = captured.strip().splitlines()[-1]
    return dict(item.split("=", 1) for item in line.split())


def test_parse_range():
    grid = cli.parse_range("0.2:0.1:0.5")
    assert np.allclose(grid, [0.2, 0.3, 0.4, 0.5])
    with pytest.raises(sc.InvalidParameter):
        cli.parse_range("1:2")
    with pytest.raises(sc.InvalidParameter):
        cli.parse_range("0.5:0.1:0.2")


def test_analyze_demo(capsys):
    code = run(["analyze", "--graph", sc.demo_graph_path(), "--eps", "1.1"])
    assert code == 0
    summary = parse_summary(capsys.readouterr().out)
    assert summary["n"] == "6"
    assert summary["balanced"] == "false"
    assert summary["delta_bar"] == "3"
    assert summary["null_count_m0"] == "2"
    assert float(summary["tau_tilde"]) == pytest.approx(0.098000, abs=1e-5)
    assert float(summary["tau_c"]) == pytest.approx(0.205783, abs=1e-5)


def test_analyze_two_node(tmp_path, capsys):
    path = tmp_path / "g.edges"
    path.write_text("n 2\n1 2\n2 1\n")
    assert run(["analyze", "--graph", str(path)]) == 0
    summary = parse_summary(capsys.readouterr().out)
    assert float(summary["tau_tilde"]) == pytest.approx(0.5536, abs=1e-3)


def test_analyze_bad_file(tmp_path, capsys):
    path = tmp_path / "bad.edges"
    path.write_text("garbage\n")
    assert run(["analyze", "--graph", str(path)]) == 2
    assert run(["analyze", "--graph", str(tmp_path / "missing.edges")]) == 2


def test_analyze_not_strongly_connected(tmp_path, capsys):
    path = tmp_path / "weak.edges"
    path.write_text("n 2\n1 2\n")
    assert run(["analyze", "--graph", str(path)]) == 3


def test_simulate_demo(tmp_path, capsys):
    out = tmp_path / "run"
    code = run(["simulate", "--graph", sc.demo_graph_path(), "--eps", "1.3",
                "--tau", "0.18", "--seed", "42", "--out", str(out)])
    assert code == 0
    summary = parse_summary(capsys.readouterr().out)
    assert summary["verdict"] == "converged"
    assert summary["convergence_time"] != "none"
    meta = json.loads((out / "trajectory.json").read_text())
    rng = np.random.RandomState(42)
    assert meta["consensus_target"] == pytest.approx(rng.uniform(0, 1, 6).mean())
    assert (out / "trajectory.csv").exists()


def test_simulate_misaligned_dt(capsys):
    code = run(["simulate", "--graph", sc.demo_graph_path(), "--eps", "1.3",
                "--tau", "0.18", "--dt", "0.007"])
    assert code == 4


def test_simulate_deterministic(tmp_path, capsys):
    outs = []
    for name in ("a", "b"):
        out = tmp_path / name
        assert run(["simulate", "--graph", sc.demo_graph_path(), "--eps", "1.3",
                    "--tau", "0.18", "--seed", "7", "--t-final", "5.0",
                    "--out", str(out)]) == 0
        outs.append((out / "trajectory.csv").read_bytes())
    capsys.readouterr()
    assert outs[0] == outs[1]


def test_sweep_eps(tmp_path, capsys):
    out = tmp_path / "sweep"
    code = run(["sweep", "--mode", "eps", "--graph", sc.demo_graph_path(),
                "--eps-range", "0.2:0.1:1.8", "--out", str(out)])
    assert code == 0
    summary = parse_summary(capsys.readouterr().out)
    assert float(summary["argmin_eps"]) == pytest.approx(1.1)
    assert (out / "sweep_eps.csv").read_text().splitlines()[0] == \
        "eps,tau,re_lambda_r,im_lambda_r,source_index,branch,residual"


def test_sweep_tau_requires_eps(tmp_path, capsys):
    code = run(["sweep", "--mode", "tau", "--graph", sc.demo_graph_path(),
                "--tau-range", "0:0.01:0.1", "--out", str(tmp_path / "s")])
    assert code == 4


def test_sweep_tau(tmp_path, capsys):
    out = tmp_path / "sweep"
    code = run(["sweep", "--mode", "tau", "--graph", sc.demo_graph_path(),
                "--eps", "1.1", "--tau-range", "0:0.05:0.3", "--jobs", "2",
                "--out", str(out)])
    assert code == 0
    summary = parse_summary(capsys.readouterr().out)
    assert summary["warnings"] == "0"
    rows = [l for l in (out / "sweep_tau.csv").read_text().splitlines()
            if l and not l.startswith(("#", "eps"))]
    assert len(rows) == 7


def test_sweep_tau_c(tmp_path, capsys):
    out = tmp_path / "sweep"
    code = run(["sweep", "--mode", "tau_c", "--graph", sc.demo_graph_path(),
                "--eps-range", "0.2:0.4:1.8", "--out", str(out)])
    assert code == 0
    text = (out / "sweep_tau_c.csv").read_text()
    assert text.splitlines()[0] == "eps,tau_c,limiting_index,omega"


def test_sweep_two_d(tmp_path, capsys):
    out = tmp_path / "sweep"
    code = run(["sweep", "--mode", "two_d", "--graph", sc.demo_graph_path(),
                "--eps-range", "0.9:0.2:1.3", "--tau-range", "0:0.1:0.3",
                "--out", str(out)])
    assert code == 0
    summary = parse_summary(capsys.readouterr().out)
    assert float(summary["min_re_lambda_r"]) < 0
    assert (out / "stability_map.csv").exists()


def test_verify_demo(capsys):
    assert run(["verify", "--graph", sc.demo_graph_path(), "--seed", "1"]) == 0
    summary = parse_summary(capsys.readouterr().out)
    assert summary["oracle_agreement"] == "pass"
    assert summary["crossing_bisection"] == "pass"
    assert summary["conservation"] == "pass"


def test_verify_random_graph(tmp_path, capsys):
    g = sc.random_strongly_connected(5, extra_edges=3, seed=12)
    path = tmp_path / "r.edges"
    sc.save_edge_list(g, str(path))
    assert run(["verify", "--graph", str(path), "--seed", "2"]) == 0


def test_verify_corrupted_graph(tmp_path, capsys):
    path = tmp_path / "c.edges"
    path.write_text("n 3\n1 2\nBROKEN\n")
    assert run(["verify", "--graph", str(path)]) == 2
