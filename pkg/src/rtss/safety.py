"""Safety proofs, safety and dead-end propagation, and the dead-end cache.

A safety proof is a successor path from a node to one the likely-safe
predicate accepts (goals count: they are trivially safe). Proofs run as a
best-first search keyed on the domain's safety distance estimate; their
nodes never join the goal-search tree because proof g values are not
rooted at the agent. Three things can happen: the proof succeeds, the
reachable space exhausts without touching safety (the whole visited set is
then provably dead), or the budget runs out and nothing is learned.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from heapq import heappop, heappush
from typing import Callable, Optional, Union

from .search import INF, ExpansionBudget, SafetyStatus, SearchGraph

_SAFE = (SafetyStatus.EXPLICITLY_SAFE, SafetyStatus.IMPLICITLY_SAFE)


@dataclass(frozen=True)
class Proven:
    path: tuple            # successor path, target first, safe state last
    expansions: int


@dataclass(frozen=True)
class Exhausted:
    visited: frozenset     # proof root plus every generated descendant
    expansions: int


@dataclass(frozen=True)
class BudgetOut:
    expansions: int


ProofResult = Union[Proven, Exhausted, BudgetOut]


@dataclass
class DeadEndCache:
    """One bit of dead-end knowledge per state, plus instrumentation.

    Flags are only ever set within an episode, never cleared. When the
    cache is disabled the flags are still recorded (so the avoidable work
    can be measured) but nothing is blocked: `dead_reexpansions` counts
    expansions of states an exhausted proof had already condemned, and is
    the numerator of the re-expansion ratio.
    """

    enabled: bool = True
    flags: set = field(default_factory=set)
    exhausted_marks: set = field(default_factory=set)
    avoided_reexpansions: int = 0
    dead_reexpansions: int = 0

    def blocks(self, state) -> bool:
        return self.enabled and state in self.flags

    def flag(self, state, origin: str = "exhausted") -> bool:
        if origin == "exhausted":
            self.exhausted_marks.add(state)
        new = state not in self.flags
        self.flags.add(state)
        return new

    def note_expansion(self, state) -> None:
        if state in self.exhausted_marks:
            self.dead_reexpansions += 1


def prove_safety(target, budget: ExpansionBudget, domain, cache: DeadEndCache,
                 known_safe: Optional[Callable] = None) -> ProofResult:
    """Attempt a budgeted safety proof of target.

    Best-first on (safety distance, base h, insertion order). A popped
    state succeeds if the predicate accepts it, it is a goal, or the
    caller-supplied known_safe lookup vouches for it; the success pop is
    free, every other pop costs one expansion. Cache-flagged states are
    never generated. On exhaustion every visited state is provably dead
    and the caller is expected to hand the set to cache_dead_ends.
    """
    if cache is not None and cache.blocks(target):
        raise ValueError("prove_safety called on a cache-flagged target")
    d_safe = domain.d_safe
    base_h = domain.h
    parent: dict = {target: None}
    closed: set = set()
    heap = [(d_safe(target), base_h(target), 0, target)]
    seq = 0
    expansions = 0
    while heap:
        _, _, _, state = heappop(heap)
        if state in closed:
            continue
        if (domain.f_safe(state) or domain.is_goal(state)
                or (known_safe is not None and known_safe(state))):
            path = []
            cur = state
            while cur is not None:
                path.append(cur)
                cur = parent[cur]
            path.reverse()
            return Proven(tuple(path), expansions)
        if budget.used >= budget.limit:
            return BudgetOut(expansions)
        budget.used += 1
        expansions += 1
        if cache is not None:
            cache.note_expansion(state)
        closed.add(state)
        for _action, s2, _cost in domain.successors(state):
            if s2 in parent:
                continue
            if cache is not None and cache.blocks(s2):
                cache.avoided_reexpansions += 1
                continue
            parent[s2] = state
            if domain.is_terminal(s2) and not domain.is_goal(s2):
                # a known terminal can never end a proof; it stays in the
                # visited set but costs nothing to discard
                continue
            seq += 1
            heappush(heap, (d_safe(s2), base_h(s2), seq, s2))
    # open emptied: every generated state was expanded and none was safe
    return Exhausted(frozenset(parent), expansions)


def cache_dead_ends(cache: DeadEndCache, exhausted: Exhausted,
                    graph: Optional[SearchGraph] = None) -> int:
    """Flag every state an exhausted proof visited; returns new flags.

    With the cache enabled, flagged states currently in the graph are also
    pruned (marked dead, dropped from open) so neither search touches them
    again this episode.
    """
    count = 0
    for state in exhausted.visited:
        if cache.flag(state, origin="exhausted"):
            count += 1
    if graph is not None and cache.enabled:
        _prune_states(graph, exhausted.visited)
    return count


def _prune_states(graph: SearchGraph, states) -> None:
    for state in states:
        node = graph.nodes.get(state)
        if node is not None and node.stamp == graph.stamp:
            node.safety = SafetyStatus.DEAD_END
            node.on_open = False
            node.h = INF


def prune_exhausted(graph: SearchGraph, exhausted: Exhausted) -> None:
    """Drop an exhausted proof's states from the current search tree
    unconditionally (within-iteration pruning, independent of the cache)."""
    _prune_states(graph, exhausted.visited)


def propagate_safety(graph: SearchGraph, domain, proven_paths) -> int:
    """Mark proven paths safe and close safety backwards over the graph.

    Path states are cached on their node records (created on demand when
    the proof ran outside the search tree): the last state explicitly safe
    when the predicate accepts it, the rest implicitly safe. Afterwards any
    node with a safe successor among its discovered edges becomes
    implicitly safe, to fixpoint. Returns how many nodes went from unknown
    to safe; dead-flagged nodes are never marked.
    """
    stamp = graph.stamp
    nodes = graph.nodes
    newly = 0
    worklist: deque = deque()

    def mark(node, status) -> int:
        nonlocal newly
        if node.safety == SafetyStatus.DEAD_END:
            return 0
        if node.safety == SafetyStatus.UNKNOWN:
            node.safety = status
            newly += 1
            worklist.append(node)
            return 1
        if status == SafetyStatus.EXPLICITLY_SAFE:
            node.safety = status
        return 0

    for path in proven_paths:
        for i, state in enumerate(path):
            node = graph.ensure_node(state)
            last = i == len(path) - 1
            explicit = last and (domain.f_safe(state) or domain.is_goal(state))
            mark(node, SafetyStatus.EXPLICITLY_SAFE if explicit
                 else SafetyStatus.IMPLICITLY_SAFE)
            if node.safety in _SAFE:
                worklist.append(node)

    for node in graph.touched:
        if node.safety in _SAFE:
            worklist.append(node)

    seen = set()
    while worklist:
        node = worklist.popleft()
        if node.state in seen:
            continue
        seen.add(node.state)
        if node.stamp != stamp:
            continue
        for pred_state, _cost in node.preds:
            pred = nodes[pred_state]
            if pred.stamp != stamp or pred.safety != SafetyStatus.UNKNOWN:
                continue
            pred.safety = SafetyStatus.IMPLICITLY_SAFE
            newly += 1
            worklist.append(pred)
    return newly


def propagate_dead_ends(graph: SearchGraph, domain, cache: DeadEndCache) -> int:
    """Flag dead ends through the current search tree, to fixpoint.

    A node is dead when it is a generated terminal non-goal, or when it was
    expanded and every successor is dead (zero successors included). Dead
    nodes leave the open list and, through the cache, stay dead for the
    rest of the episode.
    """
    stamp = graph.stamp
    nodes = graph.nodes

    def succ_all_dead(node) -> bool:
        for _a, s2, _c in node.succs:
            child = nodes.get(s2)
            if child is not None and child.stamp == stamp:
                dead = child.safety == SafetyStatus.DEAD_END
            else:
                # never generated this iteration: only a blocking cache flag
                # can account for that, and a flagged state is dead
                dead = cache is not None and cache.blocks(s2)
            if not dead:
                return False
        return True

    def is_dead(node) -> bool:
        if node.expanded:
            return not node.succs or succ_all_dead(node)
        return domain.is_terminal(node.state)

    count = 0
    worklist = deque()
    for node in graph.touched:
        if node.safety == SafetyStatus.DEAD_END or domain.is_goal(node.state):
            continue
        if is_dead(node):
            worklist.append(node)
    while worklist:
        node = worklist.popleft()
        if node.safety == SafetyStatus.DEAD_END:
            continue
        node.safety = SafetyStatus.DEAD_END
        node.on_open = False
        node.h = INF
        if cache is not None:
            cache.flag(node.state, origin="derived")
        count += 1
        for pred_state, _cost in node.preds:
            pred = nodes[pred_state]
            if (pred.stamp == stamp and pred.safety != SafetyStatus.DEAD_END
                    and pred.expanded and not domain.is_goal(pred_state)
                    and succ_all_dead(pred)):
                worklist.append(pred)
    return count
