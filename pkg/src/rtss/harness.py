"""Episode simulator, metrics, and the experiment grid runner.

Time is modeled in expansions: one planner iteration buys one action
duration, so an episode's goal achievement time (GAT) is simply its
committed action count and velocity is ground distance over GAT. Every
record is backed by an independent replay of the committed actions against
the domain dynamics, which is also what detects dead-end entry; planners
never certify their own trajectories.
"""
from __future__ import annotations

import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Any, Optional

from .domains import airspace, racetrack
from .planners import (ALGORITHMS, RTFS, SAFE_LSS_LRTA, EpisodeResult,
                       PlannerConfig, SafeFilteredDomain, apply_action,
                       offline_astar, run_episode)
from .rng import mix64
from .safety import DeadEndCache
from .search import Evaluator

OFFLINE_ASTAR = "astar-offline"

CSV_COLUMNS = ("instanceId", "algorithm", "iterationBound", "explorationRatio",
               "evaluator", "seed", "outcome", "gat", "velocity",
               "totalExpansions", "proofExpansions", "deadEndReexpansionRatio",
               "meanTargetOpenRank", "iterations")


@dataclass
class RunRecord:
    instance_id: str
    algorithm: str
    iteration_bound: int
    exploration_ratio: Optional[float]
    evaluator: str
    seed: int
    outcome: str
    gat: float
    velocity: float
    total_expansions: int
    proof_expansions: int
    dead_end_reexpansion_ratio: float
    mean_target_open_rank: Optional[float]
    iterations: int

    def row(self) -> list:
        return [self.instance_id, self.algorithm, self.iteration_bound,
                self.exploration_ratio, self.evaluator, self.seed, self.outcome,
                self.gat, self.velocity, self.total_expansions,
                self.proof_expansions, self.dead_end_reexpansion_ratio,
                self.mean_target_open_rank, self.iterations]


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        if math.isnan(value):
            return ""
        return format(value, ".10g")
    return str(value)


def write_csv(path: str, records: list[RunRecord]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(",".join(CSV_COLUMNS) + "\n")
        for rec in records:
            f.write(",".join(_fmt(v) for v in rec.row()) + "\n")


def replay_actions(domain, start, actions) -> tuple[Any, bool]:
    """Re-apply an action log against the dynamics; returns (final state,
    entered_dead_end). A dead end is a terminal or successor-free non-goal."""
    state = start
    for action in actions:
        state = apply_action(domain, state, action)
        if domain.is_goal(state):
            continue
        if domain.is_terminal(state) or not domain.successors(state):
            return state, True
    return state, False


def simulate_episode(config: PlannerConfig, domain, start,
                     instance_id: str = "", seed: int = 0,
                     cache_enabled: bool = True,
                     max_iterations: int = 100_000,
                     safe_states: Optional[set] = None) -> tuple[RunRecord, EpisodeResult]:
    """Run one planner episode and audit it into a RunRecord."""
    planning_domain = domain
    if config.algorithm == SAFE_LSS_LRTA:
        if safe_states is None:
            raise ValueError("safe-lss-lrta needs the ground-truth safe set")
        planning_domain = SafeFilteredDomain(domain, safe_states)
    cache = DeadEndCache(enabled=cache_enabled)
    result = run_episode(planning_domain, start, config, cache=cache,
                         max_iterations=max_iterations)
    final, entered_dead_end = replay_actions(domain, start, result.actions)
    outcome = result.outcome
    if entered_dead_end:
        outcome = "dead_end"
    gat = float(len(result.actions))
    distance = domain.travel_distance(start, final)
    velocity = distance / gat if gat > 0 else 0.0
    total = sum(r.expansions_goal + r.expansions_proof for r in result.reports)
    proof = sum(r.expansions_proof for r in result.reports)
    ranks = [r.target_open_rank for r in result.reports
             if r.target_open_rank is not None]
    record = RunRecord(
        instance_id=instance_id or getattr(domain, "instance_id", "instance"),
        algorithm=config.algorithm,
        iteration_bound=config.iteration_bound,
        exploration_ratio=(config.exploration_ratio
                           if config.algorithm == RTFS else None),
        evaluator=(config.evaluator.name if config.algorithm == RTFS else "astar"),
        seed=seed,
        outcome=outcome,
        gat=gat,
        velocity=velocity,
        total_expansions=total,
        proof_expansions=proof,
        dead_end_reexpansion_ratio=(cache.dead_reexpansions / total if total else 0.0),
        mean_target_open_rank=(sum(ranks) / len(ranks) if ranks else None),
        iterations=result.iterations,
    )
    return record, result


def simulate_offline_astar(domain, start, instance_id: str = "",
                           seed: int = 0) -> RunRecord:
    """The perfect-agent reference: plan offline, then execute; planning
    effort does not count toward GAT."""
    solved = offline_astar(domain, start)
    if solved is None:
        return RunRecord(instance_id or getattr(domain, "instance_id", "instance"),
                         OFFLINE_ASTAR, 0, None, "astar", seed, "failure",
                         0.0, 0.0, 0, 0, 0.0, None, 0)
    actions, _cost, expansions = solved
    final, entered = replay_actions(domain, start, actions)
    gat = float(len(actions))
    distance = domain.travel_distance(start, final)
    return RunRecord(instance_id or getattr(domain, "instance_id", "instance"),
                     OFFLINE_ASTAR, 0, None, "astar", seed,
                     "dead_end" if entered else "goal", gat,
                     distance / gat if gat else 0.0, expansions, 0, 0.0, None, 0)


def measure_reexpansion_ratio(config: PlannerConfig, domain, start,
                              max_iterations: int = 100_000) -> float:
    """Fraction of expansions spent on states an exhausted proof had already
    condemned, with the cache off (the avoidable work the cache removes)."""
    record, _ = simulate_episode(config, domain, start, cache_enabled=False,
                                 max_iterations=max_iterations)
    return record.dead_end_reexpansion_ratio


# -- experiment grids ---------------------------------------------------------

@dataclass
class ExperimentConfig:
    domain: dict
    algorithms: list[dict]
    bounds: list[int]
    repetitions: int = 1
    config_seed: int = 0
    cache_enabled: bool = True
    max_iterations: int = 100_000
    output: str = "results.csv"

    @staticmethod
    def from_json(path: str) -> "ExperimentConfig":
        with open(path, "r", encoding="utf-8") as f:
            raw = json.load(f)
        return ExperimentConfig(
            domain=raw["domain"],
            algorithms=raw["algorithms"],
            bounds=raw["bounds"],
            repetitions=raw.get("repetitions", 1),
            config_seed=raw.get("configSeed", 0),
            cache_enabled=raw.get("cacheEnabled", True),
            max_iterations=raw.get("maxIterations", 100_000),
            output=raw.get("output", "results.csv"),
        )

    def validate(self) -> None:
        if not self.algorithms:
            raise ValueError("algorithm grid is empty")
        if not self.bounds:
            raise ValueError("bound grid is empty")
        if self.repetitions < 1:
            raise ValueError("repetitions must be >= 1")
        kind = self.domain.get("type")
        if kind == "airspace":
            for key in ("length", "maxAltitude", "pObs", "seeds"):
                if key not in self.domain:
                    raise ValueError(f"airspace domain spec is missing {key!r}")
        elif kind == "airspace_files":
            for p in self.domain.get("paths", []):
                if not os.path.exists(p):
                    raise ValueError(f"instance file not found: {p}")
        elif kind == "racetrack":
            path = self.domain.get("path")
            if path != "builtin:right-turn" and not (path and os.path.exists(path)):
                raise ValueError(f"racetrack map not found: {path}")
        else:
            raise ValueError(f"unknown domain type {kind!r}")
        for spec in self.algorithms:
            name = spec.get("name")
            if name not in ALGORITHMS and name != OFFLINE_ASTAR:
                raise ValueError(f"unknown algorithm {name!r}")


def _build_instances(config: ExperimentConfig) -> list[tuple[str, Any, Any]]:
    """Materialize (instance_id, domain, start) triples for the grid."""
    spec = config.domain
    kind = spec["type"]
    out = []
    if kind == "airspace":
        for seed in spec["seeds"]:
            inst = airspace.generate(spec["length"], spec["maxAltitude"],
                                     spec["pObs"], seed)
            out.append((inst.instance_id, inst, inst.start))
    elif kind == "airspace_files":
        for path in spec["paths"]:
            inst = airspace.load_instance(path)
            out.append((inst.instance_id, inst, inst.start))
    elif kind == "racetrack":
        path = spec["path"]
        if path == "builtin:right-turn":
            inst = racetrack.right_turn_track()
        else:
            inst = racetrack.load(path)
        count = spec.get("startSamples", len(inst.starts))
        starts = inst.sample_starts(count, spec.get("startSeed", config.config_seed))
        for i, cell in enumerate(starts):
            out.append((f"{inst.instance_id}#start{i}@{cell[0]}-{cell[1]}",
                        inst, inst.start_state(cell)))
    else:
        raise ValueError(f"unknown domain type {kind!r}")
    return out


def _planner_config(spec: dict, bound: int) -> Optional[PlannerConfig]:
    name = spec["name"]
    if name == OFFLINE_ASTAR:
        return None
    return PlannerConfig(
        algorithm=name,
        iteration_bound=bound,
        exploration_ratio=spec.get("ratio", 0.5),
        evaluator=Evaluator.parse(spec.get("evaluator", "astar")),
        commit_mode=spec.get("commit", "single"),
        allow_budget_carryover=spec.get("carryover", True),
    )


def _run_cell(args) -> RunRecord:
    (run_index, instance_id, domain, start, algo_spec, bound,
     config_seed, cache_enabled, max_iterations, safe_states) = args
    seed = mix64(config_seed ^ run_index)
    try:
        if algo_spec["name"] == OFFLINE_ASTAR:
            return simulate_offline_astar(domain, start, instance_id, seed)
        planner = _planner_config(algo_spec, bound)
        record, _ = simulate_episode(planner, domain, start, instance_id, seed,
                                     cache_enabled=cache_enabled,
                                     max_iterations=max_iterations,
                                     safe_states=safe_states)
        return record
    except Exception as exc:  # a failed run becomes a row, never aborts the grid
        return RunRecord(instance_id, algo_spec["name"], bound,
                         algo_spec.get("ratio"), algo_spec.get("evaluator", "astar"),
                         seed, f"error:{type(exc).__name__}", 0.0, 0.0, 0, 0,
                         0.0, None, 0)


def run_experiment(config: ExperimentConfig, jobs: int = 1) -> list[RunRecord]:
    """Run the full instance x algorithm x bound x repetition grid and write
    the CSV. Per-run seeds derive from the config seed and the run index, so
    execution order (or parallelism) cannot change any result."""
    config.validate()
    instances = _build_instances(config)
    needs_oracle = any(s["name"] == SAFE_LSS_LRTA for s in config.algorithms)
    safe_sets: dict[str, set] = {}
    if needs_oracle:
        from .domains.oracles import true_safe_set
        for instance_id, domain, start in instances:
            if instance_id not in safe_sets:
                safe_sets[instance_id] = true_safe_set(domain, roots=[start])
    cells = []
    run_index = 0
    for _rep in range(config.repetitions):
        for instance_id, domain, start in instances:
            for algo_spec in config.algorithms:
                for bound in config.bounds:
                    cells.append((run_index, instance_id, domain, start,
                                  algo_spec, bound, config.config_seed,
                                  config.cache_enabled, config.max_iterations,
                                  safe_sets.get(instance_id)))
                    run_index += 1
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            records = list(pool.map(_run_cell, cells))
    else:
        records = [_run_cell(c) for c in cells]
    if config.output:
        write_csv(config.output, records)
    return records
