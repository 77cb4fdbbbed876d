"""A* with potential heuristics and the explicit-state validators used as
oracles throughout the test suite."""

from __future__ import annotations

import heapq
import itertools
import math
import time
from dataclasses import dataclass
from typing import Callable

from .features import FeatureSet, WeightFunction
from .task import (DEFAULT_STATE_CAP, State, Task, build_transition_system,
                   exact_goal_distances, is_applicable, successor)

VALIDATION_TOL = 1e-6

# Open list order: lowest f, then lowest h, then first-in first-out.  Fixed so
# that expansion counts are reproducible across runs and machines.
TIEBREAK_POLICY = ("f", "h", "fifo")


class NoPlanError(ValueError):
    pass


def tiebreak_key(f: float, h: float, counter: int) -> tuple[float, float, int]:
    return (f, h, counter)


@dataclass
class SearchResult:
    plan: list[int] | None
    cost: float
    expansions: int
    expansions_before_last_f_layer: int
    evaluated: int
    wall_time: float


@dataclass
class ValidationReport:
    goal_aware: bool
    consistent: bool
    admissible: bool
    # (state, operator id) for a consistency violation, a state otherwise
    counterexample: tuple[State, int] | State | None = None

    @property
    def all_ok(self) -> bool:
        return self.goal_aware and self.consistent and self.admissible


class PotentialHeuristic:
    """Potential evaluation indexed by each feature's first fact, so a lookup
    touches only features whose first fact holds instead of scanning all."""

    def __init__(self, task: Task, fs: FeatureSet, w: WeightFunction):
        self.offset = 0.0
        self._index: dict[tuple[int, int], list[tuple[tuple[tuple[int, int], ...], float]]] = {}
        for i, f in enumerate(fs.features):
            weight = w[i]
            if weight == 0.0:
                continue
            first, rest = f.facts[0], f.facts[1:]
            self._index.setdefault(first, []).append((rest, weight))
        self._n_variables = len(task.variables)

    def __call__(self, state: State) -> float:
        total = self.offset
        for var in range(self._n_variables):
            for rest, weight in self._index.get((var, state[var]), ()):
                if all(state[v] == val for v, val in rest):
                    total += weight
        return total


def blind(_state: State) -> float:
    return 0.0


def astar(task: Task, heuristic: Callable[[State], float]) -> SearchResult:
    """A* with duplicate detection and reopening.  With an admissible
    heuristic the returned cost is optimal.  Expansions whose f value equals
    the final plan cost form the last f-layer and are counted separately."""
    start = time.perf_counter()
    counter = itertools.count()
    h_cache: dict[State, float] = {}

    def h(state: State) -> float:
        if state not in h_cache:
            h_cache[state] = heuristic(state)
        return h_cache[state]

    s0 = task.initial_state
    g_best: dict[State, float] = {s0: 0.0}
    open_list: list[tuple[float, float, int, State]] = []
    h0 = h(s0)
    heapq.heappush(open_list, (*tiebreak_key(h0, h0, next(counter)), s0))
    parent: dict[State, tuple[State, int]] = {}
    expansions = 0
    expansion_f: list[float] = []

    while open_list:
        f, _, _, state = heapq.heappop(open_list)
        g = g_best[state]
        if f - h(state) > g + 1e-12:
            continue  # stale entry, a better path has been found since
        if task.is_goal_state(state):
            plan: list[int] = []
            cursor = state
            while cursor in parent:
                cursor, op_id = parent[cursor]
                plan.append(op_id)
            plan.reverse()
            before_last = sum(1 for fv in expansion_f if fv < g - 1e-9)
            return SearchResult(plan, g, expansions, before_last,
                                len(h_cache), time.perf_counter() - start)
        expansions += 1
        expansion_f.append(f)
        for op_id, op in enumerate(task.operators):
            if not is_applicable(op, state):
                continue
            succ = successor(state, op)
            g2 = g + op.cost
            if g2 < g_best.get(succ, math.inf) - 1e-12:
                g_best[succ] = g2
                parent[succ] = (state, op_id)
                heapq.heappush(open_list,
                               (*tiebreak_key(g2 + h(succ), h(succ), next(counter)), succ))
    raise NoPlanError("goal is unreachable from the initial state")


def validate(task: Task, heuristic: Callable[[State], float],
             state_cap: int = DEFAULT_STATE_CAP) -> ValidationReport:
    """Exhaustively check goal-awareness, consistency, and admissibility of a
    heuristic over the full state space, within a 1e-6 tolerance."""
    ts = build_transition_system(task, state_cap)
    values = [heuristic(s) for s in ts.states]

    goal_aware, ga_witness = True, None
    for gi in sorted(ts.goals):
        if values[gi] > VALIDATION_TOL:
            goal_aware, ga_witness = False, ts.states[gi]
            break

    consistent, cons_witness = True, None
    for src, op_id, dst in ts.transitions:
        if values[src] > ts.operator_costs[op_id] + values[dst] + VALIDATION_TOL:
            consistent, cons_witness = False, (ts.states[src], op_id)
            break

    distances = exact_goal_distances(ts)
    admissible, adm_witness = True, None
    for si, d in enumerate(distances):
        if values[si] > d + VALIDATION_TOL:
            admissible, adm_witness = False, ts.states[si]
            break

    # a consistency violation names a transition and is the most useful witness
    counterexample = None
    if not consistent:
        counterexample = cons_witness
    elif not goal_aware:
        counterexample = ga_witness
    elif not admissible:
        counterexample = adm_witness
    return ValidationReport(goal_aware, consistent, admissible, counterexample)
