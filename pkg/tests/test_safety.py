import math

import pytest

from conftest import ListDomain, chain_domain, funnel_domain
from rtss.domains import airspace
from rtss.domains.oracles import reachable_states
from rtss.safety import (BudgetOut, DeadEndCache, Exhausted, Proven,
                         cache_dead_ends, propagate_dead_ends, propagate_safety,
                         prove_safety)
from rtss.search import (FCOST, ExpansionBudget, SafetyStatus, SearchGraph,
                         expand_best_first)


def build(domain, root, budget, cache=None, stop_on_goal=True):
    graph = SearchGraph()
    graph.begin_iteration(root, FCOST, domain, cache)
    expand_best_first(graph, FCOST, ExpansionBudget(budget), domain,
                      stop_on_goal=stop_on_goal, cache=cache)
    return graph


# -- prove_safety --------------------------------------------------------------

def test_explicitly_safe_target_costs_nothing():
    inst = airspace.generate(50, 5, 0.0, 1)
    for state in ((7, 1), (3, 0)):
        res = prove_safety(state, ExpansionBudget(100), inst, DeadEndCache())
        assert isinstance(res, Proven)
        assert res.path == (state,)
        assert res.expansions == 0


def test_clear_column_descent_from_altitude_three():
    inst = airspace.generate(200, 5, 0.0, 1)
    res = prove_safety((10, 3), ExpansionBudget(100), inst, DeadEndCache())
    assert isinstance(res, Proven)
    # descent 3 -> 2 -> 1: three states, two transitions, safe endpoint
    assert res.path == ((10, 3), (12, 2), (13, 1))
    assert inst.f_safe(res.path[-1])


def test_funnel_exhausts_with_full_reachable_set():
    domain = funnel_domain()
    res = prove_safety("r", ExpansionBudget(100), domain, DeadEndCache())
    assert isinstance(res, Exhausted)
    # oracle: full forward reachability
    assert set(res.visited) == set(reachable_states(domain, ["r"]))


def test_budget_out_when_proof_is_too_deep():
    domain = chain_domain(30)  # goal far down the line counts as safe endpoint
    res = prove_safety(0, ExpansionBudget(5), domain, DeadEndCache())
    assert isinstance(res, BudgetOut)
    assert res.expansions == 5


def test_proof_rejects_flagged_target():
    cache = DeadEndCache(enabled=True)
    cache.flag("r")
    with pytest.raises(ValueError):
        prove_safety("r", ExpansionBudget(5), funnel_domain(), cache)


def test_proof_never_generates_flagged_states():
    domain = funnel_domain()
    cache = DeadEndCache(enabled=True)
    cache.flag("m1")
    res = prove_safety("r", ExpansionBudget(100), domain, cache)
    assert isinstance(res, Exhausted)
    assert "m1" not in res.visited
    assert cache.avoided_reexpansions == 1


def test_known_safe_lookup_ends_proof_early():
    domain = chain_domain(30)
    res = prove_safety(0, ExpansionBudget(50), domain, DeadEndCache(),
                       known_safe=lambda s: s == 3)
    assert isinstance(res, Proven)
    assert res.path == (0, 1, 2, 3)
    assert res.expansions == 3


# -- propagate_safety ------------------------------------------------------------

def test_single_path_marks_exactly_its_nodes():
    domain = chain_domain(10)
    graph = build(domain, 0, 3)
    path = (5, 6, 7)
    marked = propagate_safety(graph, domain, [path])
    assert marked == 3
    for s in path:
        assert graph.nodes[s].safety in (SafetyStatus.IMPLICITLY_SAFE,
                                         SafetyStatus.EXPLICITLY_SAFE)


def test_closure_marks_all_ancestor_chains():
    # safe node z reached by two discovered chains of lengths 3 and 5
    succ = {"a1": [("x", "a2", 1.0)], "a2": [("x", "a3", 1.0)],
            "a3": [("x", "z", 1.0)],
            "b1": [("x", "b2", 1.0)], "b2": [("x", "b3", 1.0)],
            "b3": [("x", "b4", 1.0)], "b4": [("x", "b5", 1.0)],
            "b5": [("x", "z", 1.0)],
            "r": [("x", "a1", 1.0), ("x", "b1", 1.0)],
            "z": []}
    domain = ListDomain(succ, safe={"z"})
    graph = build(domain, "r", 10, stop_on_goal=False)
    propagate_safety(graph, domain, [])
    marked = {n.state for n in graph.touched if n.is_safe()}
    assert marked == {"r", "a1", "a2", "a3", "b1", "b2", "b3", "b4", "b5", "z"}


def test_subsumed_ancestor_proof_changes_nothing():
    # x = 3 is a graph ancestor of y = 6 and proof(x) extends proof(y); with
    # the x-to-y stretch inside the search graph, the closure from proof(y)
    # alone already covers everything proof(x) would add
    domain = chain_domain(12)
    proof_y = (6, 7, 8)
    proof_x = (3, 4, 5) + proof_y

    def marked_with(paths):
        graph = build(domain, 0, 9)  # expands 0..8, so 3..6 edges are discovered
        propagate_safety(graph, domain, paths)
        return {s for s, n in graph.nodes.items() if n.is_safe()}

    assert marked_with([proof_x, proof_y]) == marked_with([proof_y])


def test_dead_nodes_are_never_marked_safe():
    domain = chain_domain(6)
    graph = build(domain, 0, 2)
    graph.nodes[2].safety = SafetyStatus.DEAD_END
    propagate_safety(graph, domain, [(2, 3)])
    assert graph.nodes[2].safety == SafetyStatus.DEAD_END


# -- propagate_dead_ends ---------------------------------------------------------

def test_terminal_non_goal_is_flagged():
    domain = ListDomain({"r": [("a", "t", 1.0)], "t": []})
    graph = build(domain, "r", 2, stop_on_goal=False)
    cache = DeadEndCache()
    count = propagate_dead_ends(graph, domain, cache)
    assert count == 2  # the terminal and then the root
    assert graph.nodes["t"].safety == SafetyStatus.DEAD_END
    assert graph.nodes["r"].safety == SafetyStatus.DEAD_END


def test_one_live_successor_prevents_flagging():
    domain = ListDomain({"r": [("a", "t", 1.0), ("b", "live", 1.0)],
                         "t": [], "live": [("c", "more", 1.0)]})
    graph = build(domain, "r", 2, stop_on_goal=False)  # expands r, t
    cache = DeadEndCache()
    propagate_dead_ends(graph, domain, cache)
    assert graph.nodes["t"].safety == SafetyStatus.DEAD_END
    assert graph.nodes["r"].safety != SafetyStatus.DEAD_END


def test_full_binary_tree_collapses():
    succ = {}
    for depth in range(3):
        for i in range(2 ** depth):
            node = (depth, i)
            succ[node] = [("l", (depth + 1, 2 * i), 1.0),
                          ("r", (depth + 1, 2 * i + 1), 1.0)]
    for i in range(8):
        succ[(3, i)] = []
    domain = ListDomain(succ)
    graph = build(domain, (0, 0), 15, stop_on_goal=False)
    cache = DeadEndCache()
    count = propagate_dead_ends(graph, domain, cache)
    assert count == 15
    # oracle: brute-force backward closure over the explicit tree
    dead = {s for s, edges in succ.items() if not edges}
    changed = True
    while changed:
        changed = False
        for s, edges in succ.items():
            if s not in dead and edges and all(s2 in dead for _a, s2, _c in edges):
                dead.add(s)
                changed = True
    assert {n.state for n in graph.touched if n.safety == SafetyStatus.DEAD_END} == dead


def test_known_terminal_flagged_without_expansion():
    domain = ListDomain({"r": [("a", "crash", 1.0), ("b", "x", 1.0)],
                         "x": [("c", "y", 1.0)]},
                        terminal={"crash"})
    graph = build(domain, "r", 1, stop_on_goal=False)  # expands only r
    propagate_dead_ends(graph, domain, DeadEndCache())
    assert graph.nodes["crash"].safety == SafetyStatus.DEAD_END
    assert not graph.nodes["crash"].expanded


def test_goals_are_never_flagged():
    domain = ListDomain({"r": [("a", "g", 1.0)], "g": []}, goals={"g"})
    graph = build(domain, "r", 2, stop_on_goal=False)
    propagate_dead_ends(graph, domain, DeadEndCache())
    assert graph.nodes["g"].safety != SafetyStatus.DEAD_END
    assert graph.nodes["r"].safety != SafetyStatus.DEAD_END


# -- cache_dead_ends --------------------------------------------------------------

def test_flagging_is_idempotent_set_semantics():
    cache = DeadEndCache()
    exhausted = Exhausted(frozenset(range(7)), expansions=7)
    assert cache_dead_ends(cache, exhausted) == 7
    assert cache_dead_ends(cache, exhausted) == 0
    assert len(cache.flags) == 7


def test_flagged_state_skipped_and_counted_by_goal_search():
    domain = chain_domain(6)
    cache = DeadEndCache(enabled=True)
    cache_dead_ends(cache, Exhausted(frozenset({3}), 1))
    graph = build(domain, 0, 10, cache=cache)
    assert all(n.state != 3 or n.stamp != graph.stamp for n in graph.touched)
    assert cache.avoided_reexpansions >= 1


def test_disabled_cache_records_but_does_not_block():
    domain = chain_domain(6)
    cache = DeadEndCache(enabled=False)
    cache_dead_ends(cache, Exhausted(frozenset({3}), 1))
    graph = build(domain, 0, 10, cache=cache)
    assert graph.nodes[3].expanded
    assert cache.dead_reexpansions == 1


def test_paired_cache_runs_identical_when_nothing_is_flagged():
    from rtss.harness import simulate_episode
    from rtss.planners import PlannerConfig
    for seed in (1, 2, 3):
        inst = airspace.generate(200, 6, 0.0, seed)  # obstacle free: no flags
        off, roff = simulate_episode(PlannerConfig("safe-rts", 30), inst,
                                     inst.start, seed=seed, cache_enabled=False)
        on, ron = simulate_episode(PlannerConfig("safe-rts", 30), inst,
                                   inst.start, seed=seed, cache_enabled=True)
        assert roff.actions == ron.actions
        assert on.total_expansions == off.total_expansions
        assert on.dead_end_reexpansion_ratio == off.dead_end_reexpansion_ratio == 0.0


def test_paired_cache_bookkeeping_with_flags():
    from rtss.harness import simulate_episode
    from rtss.planners import PlannerConfig
    inst = airspace.generate(300, 10, 0.1, 5)
    off, _ = simulate_episode(PlannerConfig("safe-rts", 50), inst, inst.start,
                              cache_enabled=False)
    on, _ = simulate_episode(PlannerConfig("safe-rts", 50), inst, inst.start,
                             cache_enabled=True)
    assert off.outcome == "goal" and on.outcome == "goal"
    # with the cache off the ratio numerator is observed; with it on the
    # blocked states never reach expansion
    assert off.dead_end_reexpansion_ratio > 0.0
    assert on.dead_end_reexpansion_ratio == 0.0
