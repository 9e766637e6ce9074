"""The planning algorithms: LSS-LRTA*, SafeRTS, and the RTFS scheme.

Each planner exposes a single-iteration step working on a shared
SearchGraph plus an episode driver that loops iterations, applies the
committed actions, and carries learned heuristics, safety marks, and the
dead-end cache from one iteration to the next. Two reference oracles ride
along: offline A* (the velocity upper bound) and Safe-LSS-LRTA*, an
LSS-LRTA* handed an ideal dead-end detector.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from heapq import heappop, heappush
from typing import Any, Optional

from .safety import (BudgetOut, DeadEndCache, Exhausted, ProofResult, Proven,
                     cache_dead_ends, propagate_dead_ends, propagate_safety,
                     prove_safety, prune_exhausted)
from .search import (FCOST, Evaluator, ExpansionBudget, SafetyStatus,
                     SearchGraph, dijkstra_h_update, expand_best_first,
                     path_to, select_best_f)

LSS_LRTA = "lss-lrta"
SAFE_RTS = "safe-rts"
RTFS = "rtfs"
SAFE_LSS_LRTA = "safe-lss-lrta"

ALGORITHMS = (LSS_LRTA, SAFE_RTS, RTFS, SAFE_LSS_LRTA)


@dataclass(frozen=True)
class PlannerConfig:
    algorithm: str = LSS_LRTA
    iteration_bound: int = 100
    exploration_ratio: float = 0.5          # RTFS only
    evaluator: Evaluator = FCOST            # RTFS exploration strategy
    commit_mode: str = "single"             # 'single' | 'full'
    allow_budget_carryover: bool = True     # RTFS only
    initial_proof_budget: int = 10          # SafeRTS alternation seed

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"unknown algorithm {self.algorithm!r}")
        if self.iteration_bound < 1:
            raise ValueError("iteration_bound must be >= 1")
        if self.algorithm == RTFS and not 0.0 < self.exploration_ratio < 1.0:
            raise ValueError("exploration_ratio must lie strictly inside (0, 1)")
        if self.commit_mode not in ("single", "full"):
            raise ValueError("commit_mode must be 'single' or 'full'")


@dataclass
class IterationReport:
    outcome: str = "advanced"               # advanced | goal | failure | terminated
    bound: int = 0
    expansions_goal: int = 0
    expansions_proof: int = 0
    proofs_attempted: int = 0
    proofs_succeeded: int = 0
    proofs_exhausted: int = 0
    proofs_budget_out: int = 0
    committed_actions: tuple = ()
    target_open_rank: Optional[int] = None  # 1 = top of open
    identity_action_taken: bool = False
    unused_budget: int = 0
    phases: tuple = ()                      # (('explore', n) | ('proof', n), ...)


@dataclass
class EpisodeResult:
    outcome: str                            # goal | failure | terminated | max_iterations
    final_state: Any
    actions: list
    reports: list
    start: Any

    @property
    def iterations(self) -> int:
        return len(self.reports)


def evaluator_for(config: PlannerConfig) -> Evaluator:
    return config.evaluator if config.algorithm == RTFS else FCOST


def safe_toward_best(graph: SearchGraph,
                     frontier_order: str = "fcost") -> Optional[tuple[Any, int]]:
    """Pick the commit target under the safe-toward-best rule.

    Open nodes are scanned best-first; the first whose root path carries a
    safe node decides the outcome, and the target is the deepest safe node
    on that path (the node itself, when it is safe). Returns (target,
    1-based open rank) or None. A path whose only safe node is the root
    offers no progress and does not qualify.

    The scan runs in plain f order by default; frontier_order="evaluator"
    ranks the open list by the iteration's own exploration evaluator
    instead, so a weighted or greedy search commits toward the frontier it
    actually built (identical to f order for the astar evaluator).
    """
    nodes = graph.nodes
    root = graph.root
    ordered = (graph.open_nodes_in_key_order() if frontier_order == "evaluator"
               else graph.open_nodes_in_f_order())
    for rank, node in enumerate(ordered, start=1):
        cur = node
        while cur is not None and cur.state != root:
            if cur.safety in (SafetyStatus.EXPLICITLY_SAFE, SafetyStatus.IMPLICITLY_SAFE):
                return cur.state, rank
            cur = nodes[cur.parent[0]] if cur.parent is not None else None
    return None


def allocate_proofs_rtfs0(graph: SearchGraph, budget_limit: int, domain,
                          cache: DeadEndCache) -> tuple[list[ProofResult], int, list]:
    """The RTFS-0 proof allocator: prove the best open node, prune on
    exhaustion and move to the next best, stop on success or budget out.

    Returns (results, expansions_used, proven_paths). A target already
    marked safe is secured at zero cost.
    """
    results: list[ProofResult] = []
    proven_paths: list = []
    used = 0
    while used < budget_limit:
        ordered = graph.open_nodes_in_key_order()
        if not ordered:
            break
        target = ordered[0].state
        node = graph.nodes[target]
        if node.safety in (SafetyStatus.EXPLICITLY_SAFE, SafetyStatus.IMPLICITLY_SAFE):
            results.append(Proven((target,), 0))
            proven_paths.append((target,))
            break
        res = prove_safety(target, ExpansionBudget(budget_limit - used), domain,
                           cache, known_safe=graph.safety_lookup)
        used += res.expansions
        results.append(res)
        if isinstance(res, Proven):
            proven_paths.append(res.path)
            break
        if isinstance(res, BudgetOut):
            break
        cache_dead_ends(cache, res, graph)
        prune_exhausted(graph, res)
        propagate_dead_ends(graph, domain, cache)
    return results, used, proven_paths


def _commit(graph: SearchGraph, target, config: PlannerConfig,
            full: bool = False) -> tuple:
    actions = path_to(graph, target)
    if not full and config.commit_mode == "single":
        actions = actions[:1]
    return tuple(actions)


def lss_lrta_iteration(graph: SearchGraph, config: PlannerConfig, domain,
                       cache: Optional[DeadEndCache] = None,
                       bound: Optional[int] = None) -> IterationReport:
    """One LSS-LRTA* iteration: bounded A*, heuristic backup, commit toward
    the best frontier node (or straight to a popped goal)."""
    bound = bound or config.iteration_bound
    report = IterationReport(bound=bound)
    budget = ExpansionBudget(bound)
    outcome = expand_best_first(graph, graph.evaluator, budget, domain,
                                stop_on_goal=True, cache=cache)
    report.expansions_goal = budget.used
    report.unused_budget = bound - budget.used
    report.phases = (("explore", budget.used),)
    if outcome.goal_found:
        dijkstra_h_update(graph, domain, cache)
        report.outcome = "goal"
        report.committed_actions = _commit(graph, outcome.goal, config, full=True)
        return report
    target = select_best_f(graph)
    if target is None:
        report.outcome = "failure"
        return report
    dijkstra_h_update(graph, domain, cache)
    report.committed_actions = _commit(graph, target, config)
    report.target_open_rank = 1
    return report


def safe_rts_iteration(graph: SearchGraph, config: PlannerConfig, domain,
                       cache: DeadEndCache,
                       bound: Optional[int] = None) -> IterationReport:
    """One SafeRTS iteration.

    Goal search and safety proofs alternate inside one shared expansion
    bound: explore for b expansions, then try to prove the node currently
    on top of open with the same allowance. A success resets b to its
    initial value and remembers the proven path; any failure doubles b.
    When the bound is spent, safety is propagated, the target is chosen by
    safe-toward-best, falling back to the identity action and finally to
    termination when no safe move exists.
    """
    bound = bound or config.iteration_bound
    report = IterationReport(bound=bound)
    b = config.initial_proof_budget
    proven_paths: list = []
    phases: list = []
    goal_state = None
    open_emptied = False
    while report.expansions_goal + report.expansions_proof < bound:
        remaining = bound - report.expansions_goal - report.expansions_proof
        budget = ExpansionBudget(min(b, remaining))
        outcome = expand_best_first(graph, FCOST, budget, domain,
                                    stop_on_goal=True, cache=cache)
        report.expansions_goal += budget.used
        phases.append(("explore", budget.used))
        if outcome.goal_found:
            goal_state = outcome.goal
            break
        if outcome.kind == "open_empty":
            open_emptied = True
            break
        remaining = bound - report.expansions_goal - report.expansions_proof
        if remaining <= 0:
            break
        target = select_best_f(graph)
        if target is None:
            open_emptied = True
            break
        report.proofs_attempted += 1
        tnode = graph.nodes[target]
        if tnode.safety in (SafetyStatus.EXPLICITLY_SAFE, SafetyStatus.IMPLICITLY_SAFE):
            res: ProofResult = Proven((target,), 0)
        else:
            res = prove_safety(target, ExpansionBudget(min(b, remaining)), domain,
                               cache, known_safe=graph.safety_lookup)
        report.expansions_proof += res.expansions
        phases.append(("proof", res.expansions))
        if isinstance(res, Proven):
            report.proofs_succeeded += 1
            proven_paths.append(res.path)
            b = config.initial_proof_budget
        else:
            if isinstance(res, Exhausted):
                report.proofs_exhausted += 1
                cache_dead_ends(cache, res, graph)
            else:
                report.proofs_budget_out += 1
            b *= 2
    report.phases = tuple(phases)
    report.unused_budget = bound - report.expansions_goal - report.expansions_proof
    if goal_state is not None:
        dijkstra_h_update(graph, domain, cache)
        report.outcome = "goal"
        report.committed_actions = _commit(graph, goal_state, config, full=True)
        return report
    propagate_safety(graph, domain, proven_paths)
    selection = safe_toward_best(graph)
    if selection is not None:
        target, rank = selection
        dijkstra_h_update(graph, domain, cache)
        report.committed_actions = _commit(graph, target, config)
        report.target_open_rank = rank
        return report
    identity = domain.identity_action(graph.root)
    if identity is not None and not open_emptied:
        dijkstra_h_update(graph, domain, cache)
        report.committed_actions = (identity,)
        report.identity_action_taken = True
        return report
    report.outcome = "failure" if open_emptied else "terminated"
    return report


def rtfs_iteration(graph: SearchGraph, config: PlannerConfig, domain,
                   cache: DeadEndCache,
                   bound: Optional[int] = None) -> IterationReport:
    """One RTFS iteration: build the whole local search space first, then
    spend the rest of the bound on safety proofs, then propagate h, dead
    ends, and safety before picking the safe-toward-best target.

    The exploration ratio splits the bound; with carryover enabled the
    unused remainder is reported so the driver can add it to the next
    iteration, otherwise it is re-split by the same ratio within this one.
    """
    bound = bound or config.iteration_bound
    report = IterationReport(bound=bound)
    phases: list = []
    proven_paths: list = []
    goal_state = None
    open_emptied = False

    def run_slice(explore_budget: int, safety_budget: int) -> None:
        nonlocal goal_state, open_emptied
        if explore_budget > 0:
            budget = ExpansionBudget(explore_budget)
            outcome = expand_best_first(graph, graph.evaluator, budget, domain,
                                        stop_on_goal=True, cache=cache)
            report.expansions_goal += budget.used
            phases.append(("explore", budget.used))
            if outcome.goal_found:
                goal_state = outcome.goal
                return
            if outcome.kind == "open_empty":
                open_emptied = True
                return
        if safety_budget > 0:
            results, used, paths = allocate_proofs_rtfs0(graph, safety_budget,
                                                         domain, cache)
            report.expansions_proof += used
            proven_paths.extend(paths)
            phases.append(("proof", used))
            for res in results:
                report.proofs_attempted += 1
                if isinstance(res, Proven):
                    report.proofs_succeeded += 1
                elif isinstance(res, Exhausted):
                    report.proofs_exhausted += 1
                else:
                    report.proofs_budget_out += 1

    explore_budget = int(bound * config.exploration_ratio)
    run_slice(explore_budget, bound - explore_budget)
    if goal_state is None and not open_emptied and not config.allow_budget_carryover:
        # re-split the remainder by the same ratio until it is gone or stuck
        while True:
            leftover = bound - report.expansions_goal - report.expansions_proof
            if leftover <= 0:
                break
            before = report.expansions_goal + report.expansions_proof
            e = int(leftover * config.exploration_ratio)
            run_slice(e, leftover - e)
            if goal_state is not None or open_emptied:
                break
            if report.expansions_goal + report.expansions_proof == before:
                break
    report.phases = tuple(phases)
    report.unused_budget = bound - report.expansions_goal - report.expansions_proof
    if goal_state is not None:
        dijkstra_h_update(graph, domain, cache)
        report.outcome = "goal"
        report.committed_actions = _commit(graph, goal_state, config, full=True)
        return report
    if open_emptied and select_best_f(graph) is None:
        report.outcome = "failure"
        return report
    dijkstra_h_update(graph, domain, cache)
    propagate_dead_ends(graph, domain, cache)
    propagate_safety(graph, domain, proven_paths)
    selection = safe_toward_best(graph, frontier_order="evaluator")
    if selection is None:
        report.outcome = "terminated"
        return report
    target, rank = selection
    report.committed_actions = _commit(graph, target, config)
    report.target_open_rank = rank
    return report


class SafeFilteredDomain:
    """Domain wrapper hiding successors an ideal detector knows are dead."""

    def __init__(self, domain, safe_states: set):
        self._domain = domain
        self._safe = safe_states

    def successors(self, state):
        return [(a, s2, c) for a, s2, c in self._domain.successors(state)
                if s2 in self._safe]

    def __getattr__(self, name):
        return getattr(self._domain, name)


def safe_lss_lrta_iteration(graph: SearchGraph, config: PlannerConfig, domain,
                            safe_states: set,
                            cache: Optional[DeadEndCache] = None,
                            bound: Optional[int] = None) -> IterationReport:
    """LSS-LRTA* with an ideal dead-end detector: successors outside the
    ground-truth safe set are never generated."""
    return lss_lrta_iteration(graph, config, SafeFilteredDomain(domain, safe_states),
                              cache, bound)


def iteration_step(graph: SearchGraph, config: PlannerConfig, domain,
                   cache: DeadEndCache, bound: Optional[int] = None) -> IterationReport:
    if config.algorithm in (LSS_LRTA, SAFE_LSS_LRTA):
        return lss_lrta_iteration(graph, config, domain, cache, bound)
    if config.algorithm == SAFE_RTS:
        return safe_rts_iteration(graph, config, domain, cache, bound)
    return rtfs_iteration(graph, config, domain, cache, bound)


def apply_action(domain, state, action):
    for a, s2, _cost in domain.successors(state):
        if a == action:
            return s2
    raise ValueError(f"action {action!r} is not applicable in state {state!r}")


def run_episode(domain, start, config: PlannerConfig,
                cache: Optional[DeadEndCache] = None,
                max_iterations: int = 100_000,
                graph: Optional[SearchGraph] = None) -> EpisodeResult:
    """Drive planner iterations from start until goal, failure, termination,
    or the iteration guard trips. Committed actions are applied against the
    domain dynamics as the agent moves."""
    if max_iterations < 1:
        raise ValueError("max_iterations must be positive")
    if cache is None:
        cache = DeadEndCache()
    if graph is None:
        graph = SearchGraph()
    evaluator = evaluator_for(config)
    state = start
    actions: list = []
    reports: list = []
    carryover = 0
    while True:
        if domain.is_goal(state):
            return EpisodeResult("goal", state, actions, reports, start)
        if len(reports) >= max_iterations:
            return EpisodeResult("max_iterations", state, actions, reports, start)
        bound = config.iteration_bound
        if config.algorithm == RTFS and config.allow_budget_carryover:
            bound += carryover
        graph.begin_iteration(state, evaluator, domain, cache)
        report = iteration_step(graph, config, domain, cache, bound)
        reports.append(report)
        if report.outcome in ("failure", "terminated"):
            return EpisodeResult(report.outcome, state, actions, reports, start)
        for action in report.committed_actions:
            state = apply_action(domain, state, action)
            actions.append(action)
        carryover = report.unused_budget if config.algorithm == RTFS else 0


def offline_astar(domain, start, expansion_limit: int = 10_000_000
                  ) -> Optional[tuple[list, float, int]]:
    """Full A* to the goal; returns (actions, cost, expansions) or None when
    the space exhausts without one. Same tie-breaking as the online search."""
    g_best = {start: 0.0}
    parent: dict = {start: None}
    heap = [(domain.h(start), 0.0, 0, start)]
    seq = 0
    expansions = 0
    while heap:
        f, neg_g, _, state = heappop(heap)
        g = -neg_g
        if g > g_best.get(state, math.inf):
            continue
        expansions += 1
        if domain.is_goal(state):
            path = []
            cur = state
            while parent[cur] is not None:
                prev, action = parent[cur]
                path.append(action)
                cur = prev
            path.reverse()
            return path, g, expansions
        if expansions >= expansion_limit:
            raise RuntimeError("offline A* expansion limit exceeded")
        for action, s2, cost in domain.successors(state):
            g2 = g + cost
            if g2 < g_best.get(s2, math.inf):
                g_best[s2] = g2
                parent[s2] = (state, action)
                seq += 1
                heappush(heap, (g2 + domain.h(s2), -g2, seq, s2))
    return None
