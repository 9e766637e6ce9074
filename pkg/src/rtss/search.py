"""Budgeted best-first search infrastructure shared by every planner.

One SearchGraph lives for a whole planner episode. Starting a new iteration
does not erase the node store: nodes carry an iteration stamp, and touching
a node under a fresh stamp lazily resets its root-relative fields (g,
parent, discovered edges, open/closed membership) while learned heuristic
values and safety knowledge survive, which is exactly what the agent is
allowed to keep as it moves.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import IntEnum
from heapq import heappop, heappush
from typing import Any, Callable, Optional

INF = math.inf


class SafetyStatus(IntEnum):
    UNKNOWN = 0
    EXPLICITLY_SAFE = 1
    IMPLICITLY_SAFE = 2
    DEAD_END = 3


_SAFE = (SafetyStatus.EXPLICITLY_SAFE, SafetyStatus.IMPLICITLY_SAFE)


@dataclass(frozen=True)
class Evaluator:
    """Open-list ordering. kind is one of astar | wastar | greedy | dsafe.

    astar keys on g + h, wastar on g + weight * h, greedy on h; all three
    break ties toward larger g and then insertion order, so wastar with
    weight 1.0 expands in exactly the astar order. dsafe (proof search)
    keys on the safety distance with ties broken by lower base h.
    """

    kind: str = "astar"
    weight: float = 1.0

    def __post_init__(self):
        if self.kind not in ("astar", "wastar", "greedy", "dsafe"):
            raise ValueError(f"unknown evaluator kind {self.kind!r}")
        if self.kind == "wastar" and self.weight < 1.0:
            raise ValueError("wastar weight must be >= 1")

    @property
    def name(self) -> str:
        return f"wastar:{self.weight:g}" if self.kind == "wastar" else self.kind

    @staticmethod
    def parse(text: str) -> "Evaluator":
        if text.startswith("wastar:"):
            return Evaluator("wastar", float(text.split(":", 1)[1]))
        return Evaluator(text)


FCOST = Evaluator("astar")


@dataclass
class ExpansionBudget:
    """Expansion allowance; one expansion is one pop with successor generation."""

    limit: int
    used: int = 0

    @property
    def remaining(self) -> int:
        return self.limit - self.used


class SearchNode:
    """Per-state search record; persists across iterations of one episode."""

    __slots__ = ("state", "g", "h", "depth", "parent", "preds", "succs",
                 "safety", "on_open", "expanded", "stamp", "open_seq")

    def __init__(self, state, h: float):
        self.state = state
        self.g = INF
        self.h = h
        self.depth = 0
        self.parent = None          # (parent_state, action, edge_cost)
        self.preds: list = []       # discovered in-edges this iteration
        self.succs = None           # cached successor list once expanded
        self.safety = SafetyStatus.UNKNOWN
        self.on_open = False
        self.expanded = False
        self.stamp = 0
        self.open_seq = -1

    @property
    def f(self) -> float:
        return self.g + self.h

    def is_safe(self) -> bool:
        return self.safety in _SAFE

    def __repr__(self):
        return (f"SearchNode({self.state!r}, g={self.g}, h={self.h}, "
                f"{self.safety.name})")


@dataclass(frozen=True)
class ExpansionOutcome:
    kind: str                      # 'budget' | 'goal' | 'open_empty'
    goal: Any = None

    @property
    def goal_found(self) -> bool:
        return self.kind == "goal"


BUDGET_EXHAUSTED = ExpansionOutcome("budget")
OPEN_EMPTY = ExpansionOutcome("open_empty")


class SearchGraph:
    """Node store plus the open list of the current iteration."""

    def __init__(self):
        self.nodes: dict[Any, SearchNode] = {}
        self.open: list = []
        self.evaluator: Evaluator = FCOST
        self.stamp = 0
        self.root = None
        self.closed_count = 0
        self.touched: list[SearchNode] = []
        self._seq = 0
        self._domain = None
        self._cache = None
        self._key: Callable[[SearchNode], tuple] = _astar_key

    # -- iteration lifecycle -------------------------------------------------

    def begin_iteration(self, root_state, evaluator: Evaluator, domain, cache=None):
        """Reset root-relative state for a fresh planning iteration."""
        self.stamp += 1
        self.open = []
        self.touched = []
        self.closed_count = 0
        self.evaluator = evaluator
        self._key = _key_fn(evaluator)
        self._domain = domain
        self._cache = cache
        self.root = root_state
        node = self.touch(root_state)
        node.g = 0.0
        node.depth = 0
        self._push(node)

    def touch(self, state) -> SearchNode:
        """Fetch the node for a state, stamping it into the current iteration."""
        node = self.nodes.get(state)
        if node is None:
            node = SearchNode(state, self._domain.h(state))
            if self._domain.f_safe(state) or self._domain.is_goal(state):
                node.safety = SafetyStatus.EXPLICITLY_SAFE
            self.nodes[state] = node
        if node.stamp != self.stamp:
            node.stamp = self.stamp
            node.g = INF
            node.depth = 0
            node.parent = None
            node.preds = []
            node.on_open = False
            node.expanded = False
            node.open_seq = -1
            if node.safety == SafetyStatus.DEAD_END:
                cache = self._cache
                if cache is None or not cache.blocks(state):
                    # dead-end knowledge only persists through an enabled cache
                    node.safety = SafetyStatus.UNKNOWN
                    node.h = self._domain.h(state)
            self.touched.append(node)
        return node

    def ensure_node(self, state) -> SearchNode:
        """Node record for safety bookkeeping outside the current search tree."""
        node = self.nodes.get(state)
        if node is None:
            node = SearchNode(state, self._domain.h(state))
            if self._domain.f_safe(state) or self._domain.is_goal(state):
                node.safety = SafetyStatus.EXPLICITLY_SAFE
            self.nodes[state] = node
        return node

    def _push(self, node: SearchNode):
        self._seq += 1
        node.open_seq = self._seq
        node.on_open = True
        heappush(self.open, (*self._key(node), self._seq, node.state))

    def open_nodes_in_f_order(self) -> list[SearchNode]:
        live = [n for n in self.touched if n.on_open]
        live.sort(key=lambda n: (n.g + n.h, -n.g, n.open_seq))
        return live

    def open_nodes_in_key_order(self) -> list[SearchNode]:
        """Open nodes under the iteration's own evaluator ordering."""
        key = self._key
        live = [n for n in self.touched if n.on_open]
        live.sort(key=lambda n: (*key(n), n.open_seq))
        return live

    def safety_lookup(self, state) -> bool:
        node = self.nodes.get(state)
        return node is not None and node.safety in _SAFE


def _astar_key(node: SearchNode) -> tuple:
    return (node.g + node.h, -node.g)


def _key_fn(evaluator: Evaluator) -> Callable[[SearchNode], tuple]:
    if evaluator.kind == "astar":
        return _astar_key
    if evaluator.kind == "wastar":
        w = evaluator.weight
        return lambda n: (n.g + w * n.h, -n.g)
    if evaluator.kind == "greedy":
        return lambda n: (n.h, -n.g)
    raise ValueError(f"evaluator {evaluator.name} cannot drive goal search")


def expand_best_first(graph: SearchGraph, evaluator: Evaluator,
                      budget: ExpansionBudget, domain,
                      stop_on_goal: bool = True, cache=None) -> ExpansionOutcome:
    """Expand evaluator-best open nodes until the budget, the open list, or
    (optionally) a popped goal stops the loop.

    Duplicate reaching relaxes g strictly; reaching a closed node with a
    smaller g reopens it. Cache-flagged dead ends are never generated onto
    the open list, and popping one (possible only while the cache is
    disabled) is what the re-expansion instrumentation counts.
    """
    if evaluator != graph.evaluator:
        raise ValueError("evaluator does not match the one the open list was built with")
    nodes = graph.nodes
    heap = graph.open
    key = graph._key
    stamp = graph.stamp
    while budget.used < budget.limit:
        node = None
        while heap:
            entry = heappop(heap)
            cand = nodes[entry[-1]]
            if cand.open_seq != entry[-2] or not cand.on_open:
                continue
            if cache is not None and cache.blocks(cand.state):
                cand.on_open = False
                cache.avoided_reexpansions += 1
                continue
            node = cand
            break
        if node is None:
            return OPEN_EMPTY
        node.on_open = False
        node.expanded = True
        graph.closed_count += 1
        budget.used += 1
        if cache is not None:
            cache.note_expansion(node.state)
        if stop_on_goal and domain.is_goal(node.state):
            return ExpansionOutcome("goal", node.state)
        succs = node.succs
        if succs is None:
            succs = node.succs = domain.successors(node.state)
        g = node.g
        depth = node.depth
        state = node.state
        for action, s2, cost in succs:
            if cache is not None and cache.blocks(s2):
                cache.avoided_reexpansions += 1
                continue
            child = nodes.get(s2)
            if child is None or child.stamp != stamp:
                child = graph.touch(s2)
            child.preds.append((state, cost))
            if child.safety == SafetyStatus.DEAD_END:
                continue
            g2 = g + cost
            if g2 < child.g:
                child.g = g2
                child.parent = (state, action, cost)
                child.depth = depth + 1
                if child.expanded:
                    child.expanded = False
                    graph.closed_count -= 1
                graph._push(child)
    return BUDGET_EXHAUSTED


def select_best_f(graph: SearchGraph) -> Optional[Any]:
    """FCost-minimal open state regardless of the evaluator in use; ties go
    to larger g, then earlier insertion. None when open is empty."""
    best = None
    best_key = None
    for node in graph.touched:
        if not node.on_open:
            continue
        k = (node.g + node.h, -node.g, node.open_seq)
        if best_key is None or k < best_key:
            best_key = k
            best = node.state
    return best


def dijkstra_h_update(graph: SearchGraph, domain, cache=None) -> int:
    """Back up heuristic values from the frontier through the expanded set.

    Expanded non-goal nodes are reset to infinity, then relaxed backwards
    from the open frontier (and any expanded goal) in increasing h order.
    Expanded nodes left unreachable from the frontier keep h = infinity:
    they provably cannot leave the local search space and are flagged as
    dead ends. h never decreases relative to its pre-update value.
    """
    stamp = graph.stamp
    nodes = graph.nodes
    closed = []
    old_h = {}
    heap = []
    seq = 0
    for node in graph.touched:
        if node.safety == SafetyStatus.DEAD_END:
            continue
        if node.expanded:
            if domain.is_goal(node.state):
                seq += 1
                heappush(heap, (node.h, seq, node.state))
            else:
                old_h[node.state] = node.h
                node.h = INF
                closed.append(node)
        elif node.on_open:
            seq += 1
            heappush(heap, (node.h, seq, node.state))
    if not closed:
        return 0
    finalized = set()
    pending = len(closed)
    while heap and pending:
        hval, _, state = heappop(heap)
        node = nodes[state]
        if hval != node.h or state in finalized:
            continue
        finalized.add(state)
        if state in old_h:
            pending -= 1
        for pred_state, cost in node.preds:
            pred = nodes[pred_state]
            if pred.stamp != stamp or not pred.expanded:
                continue
            if pred.safety == SafetyStatus.DEAD_END or domain.is_goal(pred_state):
                continue
            cand = cost + node.h
            if cand < pred.h:
                pred.h = cand
                seq += 1
                heappush(heap, (cand, seq, pred_state))
    changes = 0
    for node in closed:
        prev = old_h[node.state]
        if node.h < prev:
            node.h = prev
        if node.h != prev:
            changes += 1
        if math.isinf(node.h):
            node.safety = SafetyStatus.DEAD_END
            node.on_open = False
            if cache is not None:
                cache.flag(node.state, origin="derived")
    return changes


def path_to(graph: SearchGraph, target) -> list:
    """Actions along parent pointers from the current root to target."""
    node = graph.nodes.get(target)
    if node is None or node.stamp != graph.stamp:
        raise ValueError(f"target {target!r} is not part of the current iteration")
    actions = []
    guard = len(graph.touched) + 1
    while node.state != graph.root:
        if node.parent is None or guard == 0:
            raise ValueError(f"no parent chain from {target!r} back to the root")
        parent_state, action, _cost = node.parent
        actions.append(action)
        node = graph.nodes[parent_state]
        guard -= 1
    actions.reverse()
    return actions
