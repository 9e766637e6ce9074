import json
import math
import os

import pytest

from conftest import ListDomain, chain_domain
from rtss.domains import airspace
from rtss.harness import (CSV_COLUMNS, ExperimentConfig, RunRecord,
                          measure_reexpansion_ratio, replay_actions,
                          run_experiment, simulate_episode,
                          simulate_offline_astar, write_csv)
from rtss.planners import PlannerConfig


def test_chain_episode_has_gat_four():
    domain = chain_domain(5)
    record, _ = simulate_episode(PlannerConfig("lss-lrta", 10), domain, 0)
    assert record.outcome == "goal"
    assert record.gat == 4.0
    assert record.iterations == 1


def test_safe_rts_on_clear_airspace_reaches_goal_safely():
    inst = airspace.generate(20, 2, 0.0, 1)
    record, result = simulate_episode(PlannerConfig("safe-rts", 30), inst, inst.start)
    assert record.outcome == "goal"
    final, entered = replay_actions(inst, inst.start, result.actions)
    assert not entered and inst.is_goal(final)


def test_identity_stalemate_hits_the_iteration_guard():
    succ = {f"n{k}": [("fwd", f"n{k+1}", 1.0)] for k in range(500)}
    succ["n500"] = []
    domain = ListDomain(succ, identity={"n0"},
                        h={f"n{k}": 0.0 for k in range(501)})
    record, result = simulate_episode(PlannerConfig("safe-rts", 10), domain, "n0",
                                      max_iterations=25)
    assert record.outcome == "max_iterations"
    assert result.iterations == 25


def test_lss_lrta_walking_into_a_trap_is_recorded_as_dead_end():
    succ = {"r": [("a", "trap", 1.0), ("b", "slow", 2.0)],
            "trap": [("c", "t", 1.0)], "t": [],
            "slow": [("d", "g", 1.0)], "g": []}
    domain = ListDomain(succ, goals={"g"},
                        h={"r": 1.0, "trap": 0.5, "t": 10.0, "slow": 1.0, "g": 0.0})
    record, _ = simulate_episode(PlannerConfig("lss-lrta", 1), domain, "r",
                                 max_iterations=20)
    assert record.outcome == "dead_end"


def test_velocity_times_gat_recovers_distance():
    inst = airspace.generate(50, 3, 0.0, 2)
    record, _ = simulate_episode(PlannerConfig("lss-lrta", 20), inst, inst.start)
    assert record.outcome == "goal"
    assert record.velocity * record.gat == pytest.approx(50.0)


def test_accounting_identity_and_report_sums():
    inst = airspace.generate(200, 6, 0.1, 3)
    record, result = simulate_episode(PlannerConfig("safe-rts", 25), inst, inst.start)
    assert record.total_expansions == sum(r.expansions_goal + r.expansions_proof
                                          for r in result.reports)
    assert record.proof_expansions == sum(r.expansions_proof for r in result.reports)


def test_reexpansion_ratio_zero_without_exhausted_proofs():
    inst = airspace.generate(100, 4, 0.0, 1)
    ratio = measure_reexpansion_ratio(PlannerConfig("safe-rts", 20), inst, inst.start)
    assert ratio == 0.0


def test_offline_astar_record_dominates_realtime_gat():
    for seed in (1, 2, 3):
        inst = airspace.generate(150, 5, 0.1, seed)
        oracle = simulate_offline_astar(inst, inst.start)
        assert oracle.outcome == "goal"
        for bound in (10, 40):
            record, _ = simulate_episode(PlannerConfig("safe-rts", bound),
                                         inst, inst.start)
            if record.outcome == "goal":
                assert oracle.gat <= record.gat


def _config(tmp_path, **kw):
    base = dict(domain={"type": "airspace", "length": 60, "maxAltitude": 3,
                        "pObs": 0.1, "seeds": [1, 2, 3, 4, 5]},
                algorithms=[{"name": "lss-lrta"}, {"name": "safe-rts"}],
                bounds=[10, 20, 30],
                repetitions=1,
                config_seed=9,
                output=str(tmp_path / "out.csv"))
    base.update(kw)
    return ExperimentConfig(**base)


def test_grid_cardinality(tmp_path):
    config = _config(tmp_path, domain={"type": "airspace", "length": 60,
                                       "maxAltitude": 3, "pObs": 0.1,
                                       "seeds": [1, 2, 3, 4, 5]},
                     bounds=[10, 20, 30])
    records = run_experiment(config)
    assert len(records) == 5 * 2 * 3
    with open(config.output) as f:
        lines = f.read().splitlines()
    assert lines[0] == ",".join(CSV_COLUMNS)
    assert len(lines) == 31


def test_rejects_empty_grids(tmp_path):
    with pytest.raises(ValueError):
        _config(tmp_path, repetitions=0).validate()
    with pytest.raises(ValueError):
        _config(tmp_path, bounds=[]).validate()
    with pytest.raises(ValueError):
        _config(tmp_path, algorithms=[]).validate()


def test_csv_is_byte_identical_across_runs(tmp_path):
    c1 = _config(tmp_path, output=str(tmp_path / "a.csv"))
    c2 = _config(tmp_path, output=str(tmp_path / "b.csv"))
    run_experiment(c1)
    run_experiment(c2)
    assert open(c1.output, "rb").read() == open(c2.output, "rb").read()


def test_parallel_grid_matches_serial_byte_for_byte(tmp_path):
    c1 = _config(tmp_path, output=str(tmp_path / "serial.csv"),
                 bounds=[10, 20])
    c2 = _config(tmp_path, output=str(tmp_path / "parallel.csv"),
                 bounds=[10, 20])
    run_experiment(c1, jobs=1)
    run_experiment(c2, jobs=3)
    assert open(c1.output, "rb").read() == open(c2.output, "rb").read()


def test_csv_rows_always_have_the_declared_column_count(tmp_path):
    config = _config(tmp_path,
                     domain={"type": "racetrack", "path": "builtin:right-turn",
                             "startSamples": 3, "startSeed": 1},
                     algorithms=[{"name": "safe-rts"}], bounds=[30])
    run_experiment(config)
    lines = open(config.output).read().splitlines()
    for line in lines:
        assert len(line.split(",")) == len(CSV_COLUMNS), line


def test_config_json_roundtrip(tmp_path):
    path = tmp_path / "exp.json"
    path.write_text(json.dumps({
        "domain": {"type": "racetrack", "path": "builtin:right-turn",
                   "startSamples": 2, "startSeed": 4},
        "algorithms": [{"name": "rtfs", "ratio": 0.5, "carryover": False}],
        "bounds": [30],
        "repetitions": 1,
        "configSeed": 5,
        "output": str(tmp_path / "rt.csv"),
    }))
    config = ExperimentConfig.from_json(str(path))
    records = run_experiment(config)
    assert len(records) == 2
    assert all(r.outcome == "goal" for r in records)
    assert all(r.exploration_ratio == 0.5 for r in records)


def test_ground_truth_replay_audits_every_goal_record(tmp_path):
    config = _config(tmp_path)
    records = run_experiment(config)
    assert any(r.outcome == "goal" for r in records)
    for record in records:
        assert not record.outcome.startswith("error")


def test_partial_failure_becomes_a_row(tmp_path):
    # a racetrack map with an immediately boxed start still yields a row
    config = _config(tmp_path, domain={"type": "airspace", "length": 10,
                                       "maxAltitude": 1, "pObs": 0.0,
                                       "seeds": [1]},
                     algorithms=[{"name": "safe-rts"}], bounds=[5])
    records = run_experiment(config)
    assert len(records) == 1


def test_commit_mode_full_flows_through_the_grid(tmp_path):
    config = _config(tmp_path, domain={"type": "airspace", "length": 40,
                                       "maxAltitude": 3, "pObs": 0.0,
                                       "seeds": [1]},
                     algorithms=[{"name": "lss-lrta", "commit": "full"}],
                     bounds=[50])
    records = run_experiment(config)
    # full-path commits with a generous bound solve the corridor in one go
    assert records[0].outcome == "goal" and records[0].iterations == 1


def test_fuzzed_configs_are_run_to_run_deterministic():
    from rtss.rng import SplitMix64
    from rtss.search import Evaluator
    rng = SplitMix64(404)
    evaluators = ("astar", "wastar:1.1", "wastar:3", "greedy")
    for trial in range(12):
        algo = ("lss-lrta", "safe-rts", "rtfs")[rng.randrange(3)]
        config = PlannerConfig(
            algo, 10 + rng.randrange(60),
            exploration_ratio=0.2 + 0.6 * rng.uniform(),
            evaluator=Evaluator.parse(evaluators[rng.randrange(4)]),
            allow_budget_carryover=bool(rng.randrange(2)))
        inst = airspace.generate(150 + rng.randrange(150), 4 + rng.randrange(5),
                                 0.05 + 0.1 * rng.uniform(), rng.u64())
        cache_on = bool(rng.randrange(2))
        runs = [simulate_episode(config, inst, inst.start, seed=trial,
                                 cache_enabled=cache_on, max_iterations=400)[0]
                for _ in range(2)]
        assert runs[0] == runs[1]


def test_safe_lss_grid_on_racetrack_builds_its_own_oracle(tmp_path):
    config = _config(tmp_path,
                     domain={"type": "racetrack", "path": "builtin:right-turn",
                             "startSamples": 2, "startSeed": 3},
                     algorithms=[{"name": "safe-lss-lrta"}], bounds=[50])
    records = run_experiment(config)
    assert len(records) == 2
    assert all(r.outcome == "goal" for r in records)


def test_offline_astar_rows_join_the_grid(tmp_path):
    config = _config(tmp_path, algorithms=[{"name": "astar-offline"}],
                     bounds=[1],
                     domain={"type": "airspace", "length": 60, "maxAltitude": 3,
                             "pObs": 0.1, "seeds": [1, 2]})
    records = run_experiment(config)
    assert len(records) == 2
    assert all(r.algorithm == "astar-offline" and r.outcome == "goal"
               for r in records)
