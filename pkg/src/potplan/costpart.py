"""Projection abstractions and the optimal transition / operator cost
partitioning LPs over an explicit transition system.

These LPs have one cost unknown per (abstraction, transition) — or per
(abstraction, operator) in the operator variant — and exist at desk scale as
oracles for the equivalence with state-maximized potential heuristics.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .features import Feature, FeatureSet, WeightFunction
from .lp import FEASIBILITY_TOL, LinearExpression, LpModel, LpSolution
from .task import State, TransitionSystem, _bellman_ford_to_goal, _dijkstra_to_goal


class AbstractionError(ValueError):
    pass


@dataclass
class Projection:
    """Restriction of every state to a pattern of variables.

    Abstract transitions are kept one per concrete transition (parallel
    lists), so each may carry its own cost unknown in the transition
    partitioning LP; the operator variant collapses them again.
    """

    pattern: tuple[int, ...]
    domain_sizes: tuple[int, ...]
    abstract_states: tuple[tuple[int, ...], ...]
    abstract_transitions: list[tuple[int, int, int]]  # aligned with ts.transitions
    initial: int
    goal: int

    def map_state(self, state: State) -> int:
        index = 0
        for var, dom in zip(self.pattern, self.domain_sizes):
            index = index * dom + state[var]
        return index

    def goal_distances(self, costs: list[float]) -> list[float]:
        """Abstract goal distances under signed per-concrete-transition costs."""
        n = len(self.abstract_states)
        if all(c >= 0 for c in costs):
            return _dijkstra_to_goal(n, self.abstract_transitions, {self.goal}, costs)
        return _bellman_ford_to_goal(n, self.abstract_transitions, {self.goal}, costs)


def project(ts: TransitionSystem, pattern) -> Projection:
    """Project the explicit system onto a (possibly empty) variable pattern."""
    pattern = tuple(sorted(pattern))
    doms = tuple(ts.domain_sizes[v] for v in pattern)
    abstract_states = tuple(itertools.product(*(range(d) for d in doms)))

    def amap(state_index: int) -> int:
        state = ts.states[state_index]
        index = 0
        for var, dom in zip(pattern, doms):
            index = index * dom + state[var]
        return index

    transitions = [(amap(src), op, amap(dst)) for src, op, dst in ts.transitions]
    goals = {amap(g) for g in ts.goals}
    if len(goals) != 1:
        raise AbstractionError("projection needs a single abstract goal state "
                               "(task must be in transition normal form)")
    return Projection(pattern, doms, abstract_states, transitions,
                      amap(ts.initial), goals.pop())


def _h_name(abstraction: int, abstract_state: int) -> str:
    return f"h_a{abstraction}_s{abstract_state}"


@dataclass
class CostPartitioningLp:
    model: LpModel
    projections: list[Projection]
    cost_vars: dict[tuple[int, int], str]  # (abstraction, transition or operator) -> name
    per_transition: bool

    def extract_cost_functions(self, ts: TransitionSystem,
                               solution: LpSolution) -> list[list[float]]:
        """Per abstraction, one cost per concrete transition."""
        values = solution.values
        out = []
        for ai in range(len(self.projections)):
            if self.per_transition:
                out.append([values[self.cost_vars[(ai, ti)]]
                            for ti in range(len(ts.transitions))])
            else:
                out.append([values[self.cost_vars[(ai, op)]]
                            for _, op, _ in ts.transitions])
        return out


def _add_h_unknowns(model: LpModel, projections: list[Projection]) -> None:
    for ai, proj in enumerate(projections):
        for si in range(len(proj.abstract_states)):
            model.add_unknown(_h_name(ai, si))


def _set_state_objective(model: LpModel, projections: list[Projection],
                         state: State) -> None:
    terms: dict[str, float] = {}
    for ai, proj in enumerate(projections):
        name = _h_name(ai, proj.map_state(state))
        terms[name] = terms.get(name, 0.0) + 1.0
    model.set_objective("max", LinearExpression.build(0.0, terms))


def build_tcp_lp(ts: TransitionSystem, patterns, state: State) -> CostPartitioningLp:
    """Transition cost partitioning: per abstraction a zero row for the
    abstract goal and a consistency row per concrete transition against that
    transition's own cost unknown; per transition, the summed cost unknowns
    stay below the operator cost.  Objective: total abstract value of the
    given state."""
    projections = [project(ts, p) for p in patterns]
    model = LpModel()
    _add_h_unknowns(model, projections)
    cost_vars: dict[tuple[int, int], str] = {}
    for ai in range(len(projections)):
        for ti in range(len(ts.transitions)):
            cost_vars[(ai, ti)] = model.add_unknown(f"c_a{ai}_t{ti}")
    for ai, proj in enumerate(projections):
        model.add_row(LinearExpression.term(_h_name(ai, proj.goal)), "=", 0.0,
                      f"goal_a{ai}")
    for ai, proj in enumerate(projections):
        for ti, (asrc, _, adst) in enumerate(proj.abstract_transitions):
            expr = (LinearExpression.term(_h_name(ai, asrc))
                    - LinearExpression.term(_h_name(ai, adst))
                    - LinearExpression.term(cost_vars[(ai, ti)]))
            model.add_row(expr, "<=", 0.0, f"cons_a{ai}_t{ti}")
    for ti, (_, op, _) in enumerate(ts.transitions):
        terms = {cost_vars[(ai, ti)]: 1.0 for ai in range(len(projections))}
        model.add_row(LinearExpression.build(0.0, terms), "<=",
                      float(ts.operator_costs[op]), f"part_t{ti}")
    _set_state_objective(model, projections, state)
    return CostPartitioningLp(model, projections, cost_vars, per_transition=True)


def build_ocp_lp(ts: TransitionSystem, patterns, state: State) -> CostPartitioningLp:
    """Operator cost partitioning: like the transition variant but with one
    cost unknown per (abstraction, operator); parallel abstract transitions
    collapse into a single consistency row."""
    projections = [project(ts, p) for p in patterns]
    n_ops = len(ts.operator_costs)
    model = LpModel()
    _add_h_unknowns(model, projections)
    cost_vars: dict[tuple[int, int], str] = {}
    for ai in range(len(projections)):
        for op in range(n_ops):
            cost_vars[(ai, op)] = model.add_unknown(f"c_a{ai}_o{op}")
    for ai, proj in enumerate(projections):
        model.add_row(LinearExpression.term(_h_name(ai, proj.goal)), "=", 0.0,
                      f"goal_a{ai}")
    for ai, proj in enumerate(projections):
        seen = set()
        for asrc, op, adst in proj.abstract_transitions:
            key = (asrc, op, adst)
            if key in seen:
                continue
            seen.add(key)
            expr = (LinearExpression.term(_h_name(ai, asrc))
                    - LinearExpression.term(_h_name(ai, adst))
                    - LinearExpression.term(cost_vars[(ai, op)]))
            model.add_row(expr, "<=", 0.0, f"cons_a{ai}_s{asrc}_o{op}_s{adst}")
    for op in range(n_ops):
        terms = {cost_vars[(ai, op)]: 1.0 for ai in range(len(projections))}
        model.add_row(LinearExpression.build(0.0, terms), "<=",
                      float(ts.operator_costs[op]), f"part_o{op}")
    _set_state_objective(model, projections, state)
    return CostPartitioningLp(model, projections, cost_vars, per_transition=False)


def validate_partition(ts: TransitionSystem, cost_functions: list[list[float]]
                       ) -> tuple[bool, int | None]:
    """Check the partitioning inequality on every transition; returns the
    first violating transition index, if any."""
    for fn in cost_functions:
        if len(fn) != len(ts.transitions):
            raise AbstractionError("cost function does not cover every transition")
    for ti, (_, op, _) in enumerate(ts.transitions):
        total = sum(fn[ti] for fn in cost_functions)
        if total > ts.operator_costs[op] + FEASIBILITY_TOL:
            return False, ti
    return True, None


def all_patterns(n_variables: int, max_size: int = 2) -> list[tuple[int, ...]]:
    """All variable patterns of size 1..max_size, in lexicographic order."""
    out = []
    for size in range(1, max_size + 1):
        out.extend(itertools.combinations(range(n_variables), size))
    return out


def features_of_abstractions(ts: TransitionSystem, patterns) -> FeatureSet:
    """One conjunction feature per abstract state of each projection.

    The empty pattern is rejected: its only abstract state is the always-true
    conjunction, which features cannot express.
    """
    features = []
    seen = set()
    for pattern in patterns:
        pattern = tuple(sorted(pattern))
        if not pattern:
            raise AbstractionError("empty patterns have no feature representation")
        doms = [range(ts.domain_sizes[v]) for v in pattern]
        for values in itertools.product(*doms):
            f = Feature(tuple(zip(pattern, values)))
            if f not in seen:
                seen.add(f)
                features.append(f)
    return FeatureSet(tuple(features))


def shift_weights_to_goal(ts: TransitionSystem, patterns, fs: FeatureSet,
                          w: WeightFunction) -> WeightFunction:
    """Subtract, from each feature's weight, the weight of its pattern's
    goal-state feature; the shifted potential dominates the original one and
    stays feasible."""
    goal_state = ts.states[next(iter(ts.goals))]
    goal_weight: dict[tuple[int, ...], float] = {}
    for pattern in patterns:
        pattern = tuple(sorted(pattern))
        goal_feature = Feature(tuple((v, goal_state[v]) for v in pattern))
        goal_weight[pattern] = w[fs.index_of(goal_feature)]
    shifted = []
    for i, f in enumerate(fs.features):
        shifted.append(w[i] - goal_weight[f.variables])
    return WeightFunction(shifted)
