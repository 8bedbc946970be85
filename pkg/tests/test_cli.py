import json
import subprocess
import sys

import pytest

from signedbc import cli, load_graph
from signedbc.files import read_trajectory
from signedbc.verify import CheckReport


@pytest.fixture(autouse=True)
def _cwd(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)


def out_lines(capsys):
    return capsys.readouterr().out.splitlines()


def test_generate_writes_graph(capsys):
    assert cli.main(["generate", "--sbm", "--n", "30", "--k", "3", "--p1", "0.6", "--p2", "0.2",
                     "--rho", "0.5", "--seed", "4", "--out", "g.txt"]) == 0
    assert out_lines(capsys)[0] == "seed=4"
    g = load_graph("g.txt")
    assert g.n == 30 and g.group_of.k == 3


def test_topology_flag_equivalent_to_shortcut(tmp_path):
    cli.main(["generate", "--er", "--n", "20", "--seed", "1", "--out", "a.txt"])
    cli.main(["generate", "--topology", "er", "--n", "20", "--seed", "1", "--out", "b.txt"])
    assert (tmp_path / "a.txt").read_bytes() == (tmp_path / "b.txt").read_bytes()


def test_simulate_hk_example_is_polarized(capsys):
    argv = ["simulate", "--er", "--n", "100", "--p1", "0.25", "--p2", "0", "--c", "0.2", "--seed", "1"]
    assert cli.main(argv) == 0
    out = "\n".join(out_lines(capsys))
    assert "seed=1" in out and "regime=polarization" in out
    traj, meta = read_trajectory("trajectory.csv")
    assert traj.converged and meta["seed"] == 1 and meta["graph"]["topology"] == "er"


def test_simulate_from_graph_file_then_metrics(tmp_path, capsys):
    cli.main(["generate", "--sbm", "--n", "40", "--k", "4", "--p1", "0.8", "--p2", "0.2",
              "--rho", "0.2", "--seed", "2", "--out", "g.txt"])
    assert cli.main(["simulate", "--graph", "g.txt", "--c", "0.4", "--seed", "2", "--out", "t.csv"]) == 0
    assert cli.main(["metrics", "--trajectory", "t.csv", "--graph", "g.txt", "--out", "m.json"]) == 0
    report = json.loads((tmp_path / "m.json").read_text())
    assert report["proportional_spread"] is not None
    assert report["regime"] in {"consensus", "polarization", "fragmentation"}


def test_metrics_over_several_trajectories(tmp_path):
    for s in ("1", "2"):
        cli.main(["simulate", "--er", "--n", "20", "--c", "0.3", "--seed", s, "--out", f"t{s}.csv"])
    assert cli.main(["metrics", "--trajectory", "t1.csv", "t2.csv", "--out", "m.csv"]) == 0
    assert len((tmp_path / "m.csv").read_text().splitlines()) == 3


def test_identical_argv_and_seed_give_identical_files(tmp_path):
    argv = ["simulate", "--er", "--n", "40", "--p1", "0.4", "--p2", "0.3", "--c", "0.5", "--seed", "9"]
    cli.main(argv + ["--out", "a.csv"])
    cli.main(argv + ["--out", "b.csv"])
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()
    strip = lambda p: (tmp_path / p).read_text()  # noqa: E731
    assert strip("a.meta.json") == strip("b.meta.json")


def test_missing_seed_is_drawn_and_printed(capsys):
    assert cli.main(["generate", "--er", "--n", "10", "--out", "g.txt"]) == 0
    line = out_lines(capsys)[0]
    assert line.startswith("seed=") and int(line[5:]) >= 0


def test_verify_writes_report(tmp_path, capsys):
    assert cli.main(["verify", "--suite", "two_node,naive_nonconvergence", "--seed", "7"]) == 0
    report = json.loads((tmp_path / "verify_report.json").read_text())
    assert report["seed"] == 7 and not report["failed"]
    assert any("PASS" in ln for ln in out_lines(capsys))


def test_verify_failure_exits_2(monkeypatch):
    def broken(seed):
        rep = CheckReport("broken")
        rep.add(reason="forced")
        return rep

    monkeypatch.setitem(cli.SUITE, "broken", broken)
    assert cli.main(["verify", "--suite", "broken", "--seed", "0"]) == 2


def test_conjecture_finding_does_not_fail_verify(monkeypatch):
    def finding(seed):
        rep = CheckReport("finding", proven=False)
        rep.add(reason="counterexample")
        return rep

    monkeypatch.setitem(cli.SUITE, "finding", finding)
    assert cli.main(["verify", "--suite", "finding", "--seed", "0"]) == 0


def test_sweep_from_config_file(tmp_path, capsys):
    cfg = {"topology": "er", "n": 15, "p1_grid": [0.5], "p2_grid": [0.0, 0.4], "c_grid": [0.3],
           "trials": 2, "master_seed": 21}
    (tmp_path / "cfg.json").write_text(json.dumps(cfg))
    assert cli.main(["sweep", "--config", "cfg.json", "--out", "sw"]) == 0
    assert out_lines(capsys)[0] == "seed=21"
    assert (tmp_path / "sw" / "records.csv").read_text().count("\n") == 5


def test_sweep_overrides_and_json(tmp_path):
    cfg = {"topology": "er", "n": 15, "p1_grid": [0.5], "p2_grid": [0.4], "c_grid": [0.3],
           "trials": 5, "master_seed": 21}
    (tmp_path / "cfg.json").write_text(json.dumps(cfg))
    assert cli.main(["sweep", "--config", "cfg.json", "--trials", "1", "--seed", "3", "--format", "json",
                     "--group-by", "c", "--out", "sw"]) == 0
    payload = json.loads((tmp_path / "sw" / "sweep.json").read_text())
    assert len(payload["records"]) == 1 and payload["config"]["master_seed"] == 3
    assert payload["group_by"] == ["c"]


@pytest.mark.parametrize(
    "argv",
    [
        [],
        ["dance"],
        ["generate", "--out", "g.txt"],
        ["generate", "--er", "--p1", "1.5", "--out", "g.txt"],
        ["generate", "--er", "--n", "0", "--out", "g.txt"],
        ["simulate", "--er", "--c", "-1"],
        ["simulate", "--c", "0.3"],
        ["simulate", "--er", "--graph", "g.txt", "--c", "0.3"],
        ["simulate", "--er", "--c", "0.3", "--init-lo", "1", "--init-hi", "0"],
        ["sweep", "--preset", "nope"],
        ["sweep", "--preset", "er-paper", "--group-by", "colour", "--trials", "1", "--n", "5"],
        ["verify", "--suite", "nope"],
        ["verify", "--seed", "-3"],
    ],
)
def test_usage_and_validation_errors_exit_1(argv, capsys):
    assert cli.main(argv) == 1
    assert capsys.readouterr().err


def test_file_errors_name_the_path(capsys):
    assert cli.main(["metrics", "--trajectory", "nowhere.csv"]) == 1
    assert "nowhere.csv" in capsys.readouterr().err
    assert cli.main(["simulate", "--graph", "nograph.txt", "--c", "0.3"]) == 1
    assert "nograph.txt" in capsys.readouterr().err


def test_help_exits_0(capsys):
    assert cli.main(["--help"]) == 0
    assert "simulate" in capsys.readouterr().out


def test_help_documents_paper_symbols(capsys):
    cli.main(["generate", "--help"])
    text = capsys.readouterr().out
    for flag in ("--p1", "--p2", "--rho", "--k", "--seed"):
        assert flag in text


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "signedbc", "generate", "--er", "--n", "5",
                           "--seed", "1", "--out", str(tmp_path / "g.txt")],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout.startswith("seed=1")
