import json
import math

import pytest

from htrl import cli
from htrl.config import ConfigError, RunConfig, build_config, parse_override

SMALL = {
    "fn-en": ["experiment.instances=4", "experiment.n_max=30", "experiment.grid_points=201"],
    "mep-growth": ["experiment.n_grid=[16, 32, 64, 128]", "experiment.reps=20"],
    "lse-rate": ["experiment.n_grid=[32, 64, 128, 256]", "experiment.reps=10",
                 "experiment.min_n=32"],
    "phase-diagram": ["experiment.n_grid=[32, 64, 128, 256]", "experiment.reps=5",
                      "experiment.min_n=32", "experiment.ps=[2.0, inf]"],
    "lasso": ["experiment.d=6", "experiment.n_grid=[32, 64, 128, 256]", "experiment.reps=5"],
    "counterexample": ["experiment.n_grid=[16, 32, 64, 128]", "experiment.reps=20"],
    "bound-check": ["experiment.n_grid=[8, 16, 32]", "experiment.reps=20",
                    "experiment.majorant_reps=20",
                    'experiment.laws=[{kind = "pareto", tail_index = 3.0}]'],
}


def _run(tmp_path, command, *extra, name="out", threads=1, check=False, capsys=None):
    out = tmp_path / name
    code = cli.run(command, overrides=SMALL[command] + list(extra), out_dir=str(out),
                   threads=threads, check=check)
    return code, out


def _files(out):
    return {p.name: p.read_bytes() for p in sorted(out.iterdir())}


@pytest.mark.parametrize("command", sorted(SMALL))
def test_every_command_writes_valid_outputs(tmp_path, command):
    code, out = _run(tmp_path, command)
    assert code == 0
    stem = command.replace("-", "_")
    doc = json.loads((out / f"{stem}.json").read_text())
    assert doc["command"] == command
    assert set(doc) >= {"command", "config_echo", "config_hash", "seeds", "tables", "criteria"}
    for c in doc["criteria"]:
        assert set(c) == {"name", "target", "measured", "tolerance", "pass"}
    for t in doc["tables"]:
        csv = (out / f"{stem}__{t['name']}.csv").read_bytes()
        assert b"\r" not in csv
        assert csv.splitlines()[0].decode() == ",".join(t["columns"])
        assert len(csv.splitlines()) == len(t["rows"]) + 1


@pytest.mark.parametrize("command", ["fn-en", "lse-rate", "lasso", "counterexample"])
def test_reruns_are_byte_identical(tmp_path, command):
    _, a = _run(tmp_path, command, name="a", threads=1)
    _, b = _run(tmp_path, command, name="b", threads=3)
    assert _files(a) == _files(b)


def test_seed_changes_output(tmp_path):
    cli.run("fn-en", overrides=SMALL["fn-en"], out_dir=str(tmp_path / "a"), seed=1)
    cli.run("fn-en", overrides=SMALL["fn-en"], out_dir=str(tmp_path / "b"), seed=2)
    assert _files(tmp_path / "a") != _files(tmp_path / "b")


def test_missing_config_exits_2(tmp_path, capsys):
    assert cli.main(["run", "fn-en", "--config", str(tmp_path / "nope.toml")]) == 2
    assert "not found" in capsys.readouterr().err


def test_unknown_key_exits_2(tmp_path, capsys):
    cfg = tmp_path / "c.toml"
    cfg.write_text("[experiment]\ninstances = 3\nbogus = 1\n")
    assert cli.main(["run", "fn-en", "--config", str(cfg), "--out", str(tmp_path)]) == 2
    assert "experiment.bogus" in capsys.readouterr().err


def test_bad_usage_exits_2(capsys):
    assert cli.main(["run", "no-such-command"]) == 2
    assert cli.main([]) == 2
    assert cli.main(["run", "fn-en", "--set", "noequals"]) == 2


def test_check_flag(tmp_path):
    fail = ["criteria.slope_min=5.0", "criteria.slope_max=6.0"]
    code, _ = _run(tmp_path, "mep-growth", *fail, name="f")
    assert code == 0
    code, _ = _run(tmp_path, "mep-growth", *fail, name="g", check=True)
    assert code == 1
    code, _ = _run(tmp_path, "fn-en", name="h", check=True)
    assert code == 0


def test_config_file_and_main(tmp_path):
    cfg = tmp_path / "c.toml"
    cfg.write_text('command = "fn-en"\nseed = 5\n[experiment]\ninstances = 3\nn_max = 20\n'
                   "grid_points = 101\n")
    out = tmp_path / "o"
    assert cli.main(["run", "fn-en", "--config", str(cfg), "--out", str(out), "--check"]) == 0
    doc = json.loads((out / "fn_en.json").read_text())
    assert doc["seeds"]["master"] == 5
    assert len(doc["tables"][0]["rows"]) == 3
    cfg.write_text('command = "lasso"\n')
    assert cli.main(["run", "fn-en", "--config", str(cfg), "--out", str(out)]) == 2


def test_echo_round_trip(tmp_path):
    _, out = _run(tmp_path, "phase-diagram")
    doc = json.loads((out / "phase_diagram.json").read_text())
    rc = RunConfig.from_echo(doc["config_echo"])
    assert rc.echo() == doc["config_echo"]
    assert rc.content_hash() == doc["config_hash"]
    assert math.isinf(rc.experiment["ps"][-1])


def test_phase_diagram_one_criterion_per_cell(tmp_path):
    _, out = _run(tmp_path, "phase-diagram")
    doc = json.loads((out / "phase_diagram.json").read_text())
    # alphas {1e-9, 1} x ps {2, inf}: every cell maps to a class
    assert len(doc["criteria"]) == 4
    assert len(doc["tables"][0]["rows"]) == 4


def test_bound_check_rows(tmp_path):
    _, out = _run(tmp_path, "bound-check")
    doc = json.loads((out / "bound_check.json").read_text())
    table = next(t for t in doc["tables"] if t["name"] == "bound_check")
    assert table["columns"] == ["law", "tail_index", "n", "mc_mean", "mc_stderr",
                                "theorem_bound", "satisfied"]
    assert [r[2] for r in table["rows"]] == [8, 16, 32]


def test_empty_criteria_is_valid_json():
    rc = build_config("fn-en")
    doc = json.loads(cli.emit_summary(rc, [], []))
    assert doc["criteria"] == [] and doc["tables"] == []


def test_full_precision_csv(tmp_path):
    table = {"name": "t", "columns": ["a"], "rows": [[0.1], [1 / 3]]}
    cli.write_csv(tmp_path / "t.csv", table)
    lines = (tmp_path / "t.csv").read_text().splitlines()
    assert float(lines[2]) == 1 / 3
    assert lines[1] == "0.10000000000000001"


def test_override_parsing():
    assert parse_override("experiment.reps=5") == {"experiment": {"reps": 5}}
    assert parse_override("experiment.noise={kind='gaussian', sigma=2.0}") == {
        "experiment": {"noise": {"kind": "gaussian", "sigma": 2.0}}}
    assert parse_override("experiment.design=uniform") == {"experiment": {"design": "uniform"}}
    with pytest.raises(ConfigError):
        parse_override("=3")
    rc = build_config("lse-rate", overrides=["experiment.noise.sigma=2.0"])
    assert rc.experiment["noise"] == {"kind": "gaussian", "sigma": 2.0}
    with pytest.raises(ConfigError, match="experiment"):
        build_config("lse-rate", overrides=["experiment=3"])


def test_truth_kinds():
    assert cli.truth_from_config({"kind": "zero"}).levels.tolist() == [0.0]
    st = cli.truth_from_config({"kind": "staircase", "steps": 4})
    assert st.levels.tolist() == pytest.approx([-0.6, -0.2, 0.2, 0.6])
    steps = cli.truth_from_config({"kind": "steps", "breakpoints": [0, 0.5, 1],
                                   "levels": [0.1, -0.1]})
    assert steps(0.7) == -0.1
    with pytest.raises(ValueError):
        cli.truth_from_config({"kind": "spline"})
