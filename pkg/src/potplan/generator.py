"""Seeded random instances: planning tasks, feature sets, and scoped-function
sets.  These are the substrate for the property and acceptance suites, so
everything here is deterministic in the seed."""

from __future__ import annotations

import itertools
import math
import random

from .features import Feature, FeatureSet
from .lp import LinearExpression
from .elimination import ScopedFunction, ScopedFunctionSet
from .task import Operator, Task, Variable, build_transition_system, exact_goal_distances

GENERATOR_STATE_CAP = 200_000


class GenerationError(ValueError):
    pass


def _random_variables(rng: random.Random, n_vars: int, max_dom: int) -> list[Variable]:
    variables = []
    for i in range(n_vars):
        size = rng.randint(2, max_dom) if max_dom > 2 else 2
        variables.append(Variable(i, f"var{i}", size,
                                  tuple(f"val{j}" for j in range(size))))
    return variables


def _random_state(rng: random.Random, variables: list[Variable]) -> tuple[int, ...]:
    return tuple(rng.randrange(v.domain_size) for v in variables)


def random_task(n_vars: int, max_dom: int, n_ops: int, seed: int,
                tnf: bool = True, solvable: bool = True, max_cost: int = 10,
                max_attempts: int = 200) -> Task:
    """A random task; by default in transition normal form with a reachable
    goal (resampled deterministically until one is found)."""
    for attempt in range(max_attempts):
        rng = random.Random(f"task:{seed}:{attempt}")
        variables = _random_variables(rng, n_vars, max_dom)
        if math.prod(v.domain_size for v in variables) > GENERATOR_STATE_CAP:
            raise GenerationError("requested task is too large for explicit oracles")
        operators = []
        for i in range(n_ops):
            scope = sorted(rng.sample(range(n_vars), rng.randint(1, min(n_vars, 3))))
            if tnf:
                pre = {v: rng.randrange(variables[v].domain_size) for v in scope}
                eff = {v: rng.randrange(variables[v].domain_size) for v in scope}
            else:
                pre_scope = sorted(rng.sample(range(n_vars),
                                              rng.randint(0, min(n_vars, 2))))
                pre = {v: rng.randrange(variables[v].domain_size) for v in pre_scope}
                eff = {v: rng.randrange(variables[v].domain_size) for v in scope}
            operators.append(Operator(f"op{i}", pre, eff, rng.randint(0, max_cost)))
        initial = _random_state(rng, variables)
        if tnf:
            goal = {v.id: rng.randrange(v.domain_size) for v in variables}
        else:
            goal_scope = sorted(rng.sample(range(n_vars), rng.randint(1, n_vars)))
            goal = {v: rng.randrange(variables[v].domain_size) for v in goal_scope}
        task = Task(variables, operators, initial, goal)
        if not solvable:
            return task
        ts = build_transition_system(task, GENERATOR_STATE_CAP)
        if exact_goal_distances(ts)[ts.initial] < math.inf:
            return task
    raise GenerationError(f"no solvable task found in {max_attempts} attempts (seed {seed})")


def random_features(task: Task, count: int, max_size: int, seed: int,
                    require_max_size: bool = True) -> FeatureSet:
    """Distinct random conjunctions of up to max_size facts; when requested,
    at least one feature of the maximal size is guaranteed."""
    rng = random.Random(f"features:{seed}")
    n_vars = len(task.variables)
    max_size = min(max_size, n_vars)
    features: list[Feature] = []
    seen = set()
    sizes = [rng.randint(1, max_size) for _ in range(count)]
    if require_max_size and max_size not in sizes and sizes:
        sizes[0] = max_size
    for size in sizes:
        for _ in range(50):
            scope = sorted(rng.sample(range(n_vars), size))
            facts = tuple((v, rng.randrange(task.variables[v].domain_size))
                          for v in scope)
            if facts not in seen:
                seen.add(facts)
                features.append(Feature(facts))
                break
    return FeatureSet(tuple(features))


def random_scoped_set(n_vars: int, max_dom: int, n_functions: int, seed: int,
                      max_scope: int = 3, value_range: float = 10.0) -> ScopedFunctionSet:
    """Constant-valued scoped functions over random variable subsets, used to
    exercise the eliminator against the brute-force maximum."""
    rng = random.Random(f"scoped:{seed}")
    domains = {v: rng.randint(2, max_dom) if max_dom > 2 else 2 for v in range(n_vars)}
    functions = []
    for _ in range(n_functions):
        scope = tuple(sorted(rng.sample(range(n_vars),
                                        rng.randint(1, min(n_vars, max_scope)))))
        table = {}
        for key in itertools.product(*(range(domains[v]) for v in scope)):
            if rng.random() < 0.8:  # leave some entries at (sparse) zero
                value = round(rng.uniform(-value_range, value_range), 3)
                if value:
                    table[key] = LinearExpression.const(value)
        functions.append(ScopedFunction(scope, table))
    return ScopedFunctionSet(domains, functions)
