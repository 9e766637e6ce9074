import os

import pytest

from rtss.cli import main
from rtss.domains import airspace, racetrack


def run_cli(*argv):
    return main(list(argv))


def test_generate_and_reload(tmp_path):
    out = tmp_path / "inst.txt"
    code = run_cli("generate", "--domain", "airspace", "--length", "30",
                   "--max-altitude", "4", "--p-obs", "0.2", "--seed", "5",
                   "--out", str(out))
    assert code == 0
    inst = airspace.load_instance(str(out))
    assert inst.length == 30 and inst.seed == 5
    regenerated = airspace.generate(30, 4, 0.2, 5)
    assert regenerated.to_text() == inst.to_text()


def test_adhoc_run_reaches_goal(tmp_path, capsys):
    inst_path = tmp_path / "inst.txt"
    run_cli("generate", "--domain", "airspace", "--length", "40",
            "--max-altitude", "3", "--p-obs", "0.05", "--seed", "2",
            "--out", str(inst_path))
    csv_path = tmp_path / "run.csv"
    code = run_cli("run", "--domain", str(inst_path), "--algorithm", "safe-rts",
                   "--bound", "20", "--out", str(csv_path))
    assert code == 0
    out = capsys.readouterr().out
    assert "outcome=goal" in out
    assert csv_path.exists()


def test_adhoc_run_on_racetrack_map(tmp_path):
    map_path = tmp_path / "track.txt"
    map_path.write_text(racetrack.RIGHT_TURN_TRACK)
    code = run_cli("run", "--domain", str(map_path), "--algorithm", "rtfs",
                   "--bound", "50", "--ratio", "0.5")
    assert code == 0


def test_ratio_of_one_is_a_usage_error(tmp_path):
    map_path = tmp_path / "track.txt"
    map_path.write_text(racetrack.RIGHT_TURN_TRACK)
    with pytest.raises(SystemExit) as err:
        run_cli("run", "--domain", str(map_path), "--algorithm", "rtfs",
                "--bound", "50", "--ratio", "1.0")
    assert err.value.code == 2


def test_unknown_flag_is_a_usage_error():
    with pytest.raises(SystemExit) as err:
        run_cli("generate", "--domain", "airspace", "--nonsense", "1")
    assert err.value.code == 2


def test_failed_episode_exits_one(tmp_path):
    # the start cell is walled off from the goal: the search exhausts and fails
    map_path = tmp_path / "boxed.txt"
    map_path.write_text("racetrack v1\n"
                        "width 3 height 4\n"
                        "###\n"
                        "#*#\n"
                        "###\n"
                        "#@#\n")
    code = run_cli("run", "--domain", str(map_path), "--algorithm", "lss-lrta",
                   "--bound", "20", "--max-iterations", "40")
    assert code == 1


def test_stats_writes_altitude_rows(tmp_path):
    inst_path = tmp_path / "inst.txt"
    run_cli("generate", "--domain", "airspace", "--length", "400",
            "--max-altitude", "5", "--p-obs", "0.05", "--seed", "3",
            "--out", str(inst_path))
    out = tmp_path / "stats.csv"
    code = run_cli("stats", "--instance", str(inst_path), "--samples", "40",
                   "--seed", "1", "--out", str(out))
    assert code == 0
    lines = out.read_text().splitlines()
    assert lines[0].startswith("altitude,samples,safetyProbability")
    assert len(lines) == 1 + 3  # altitudes 3..5


def test_run_config_grid_and_plot(tmp_path):
    import json
    csv_path = tmp_path / "grid.csv"
    configef = tmp_path / "exp.json"
    config = {
        "domain": {"type": "airspace", "length": 50, "maxAltitude": 3,
                   "pObs": 0.1, "seeds": [1, 2]},
        "algorithms": [{"name": "lss-lrta"}, {"name": "safe-rts"}],
        "bounds": [10, 20],
        "repetitions": 1,
        "configSeed": 3,
        "output": str(csv_path),
    }
    config_path = tmp_path / "exp.json"
    config_path.write_text(json.dumps(config))
    assert run_cli("run", "--config", str(config_path)) == 0
    assert len(csv_path.read_text().splitlines()) == 1 + 2 * 2 * 2
    svg_path = tmp_path / "v.svg"
    code = run_cli("plot", "--csv", str(csv_path), "--x", "iterationBound",
                   "--y", "velocity", "--series", "algorithm",
                   "--out", str(svg_path))
    assert code == 0
    assert svg_path.read_text().startswith("<svg")


def test_verify_suite_passes_on_small_seed_count(capsys):
    code = run_cli("verify", "--suite", "theorems", "--seeds", "6")
    assert code == 0
    out = capsys.readouterr().out
    assert "closure-completeness" in out


def test_env_seed_is_used_as_default(tmp_path, monkeypatch):
    monkeypatch.setenv("RTSS_SEED", "99")
    out = tmp_path / "env.txt"
    run_cli("generate", "--domain", "airspace", "--length", "12",
            "--max-altitude", "3", "--p-obs", "0.3", "--out", str(out))
    inst = airspace.load_instance(str(out))
    assert inst.seed == 99


def test_missing_instance_file_reports_error(tmp_path, capsys):
    code = run_cli("stats", "--instance", str(tmp_path / "nope.txt"),
                   "--samples", "5", "--out", str(tmp_path / "s.csv"))
    assert code == 2
    assert "error:" in capsys.readouterr().err
