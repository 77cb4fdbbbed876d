import pytest

from potplan.direct2d import solve_for_state
from potplan.features import generate_features
from potplan.generator import random_task
from potplan.reduction import complete_graph, phi_of_state, reduce_3col
from potplan.search import (NoPlanError, PotentialHeuristic, TIEBREAK_POLICY,
                            astar, blind, tiebreak_key, validate)
from potplan.task import Task, build_transition_system, exact_goal_distances


def optimal_heuristic(task, dim):
    fs = generate_features(task, dim)
    weights = solve_for_state(task, fs, task.initial_state).weights
    return PotentialHeuristic(task, fs, weights)


def test_astar_with_potential(toy1):
    result = astar(toy1, optimal_heuristic(toy1, 1))
    assert result.cost == 2.0
    assert result.expansions_before_last_f_layer <= 2
    assert [toy1.operators[i].name for i in result.plan] in (
        ["oX", "oY"], ["oY", "oX"])


def test_astar_blind(toy1):
    result = astar(toy1, blind)
    assert result.cost == 2.0
    assert result.expansions >= result.expansions_before_last_f_layer


def test_astar_no_plan(toy1):
    task = Task(toy1.variables, [toy1.operators[0]], toy1.initial_state, toy1.goal)
    with pytest.raises(NoPlanError):
        astar(task, blind)


def test_tiebreak_policy():
    assert TIEBREAK_POLICY == ("f", "h", "fifo")
    assert tiebreak_key(5.0, 1.0, 0) < tiebreak_key(5.0, 2.0, 1)
    assert tiebreak_key(5.0, 1.0, 0) < tiebreak_key(5.0, 1.0, 1)
    assert tiebreak_key(4.0, 9.0, 9) < tiebreak_key(5.0, 0.0, 0)


def test_astar_is_deterministic(toy1):
    runs = [astar(toy1, optimal_heuristic(toy1, 1)) for _ in range(3)]
    assert len({tuple(r.plan) for r in runs}) == 1
    assert len({r.expansions for r in runs}) == 1
    assert len({r.expansions_before_last_f_layer for r in runs}) == 1


def test_validate_optimal_weights(toy1):
    report = validate(toy1, optimal_heuristic(toy1, 1))
    assert report.all_ok and report.counterexample is None


def test_validate_k3_reduction():
    red = reduce_3col(complete_graph(3))
    report = validate(red.task, lambda s: phi_of_state(red, s))
    assert not report.consistent
    state, op_id = report.counterexample
    after = tuple(red.task.operators[op_id].eff.get(v, state[v])
                  for v in range(len(state)))
    # the violating transition switches into a proper coloring
    assert state[red.master_var] == 0 and after[red.master_var] == 1
    assert all(after[u] != after[v] for u, v in red.graph.edges)


def test_validate_k4_reduction():
    red = reduce_3col(complete_graph(4))
    report = validate(red.task, lambda s: phi_of_state(red, s))
    assert report.consistent


def test_validate_inadmissible():
    task = random_task(3, 2, 4, 1)
    report = validate(task, lambda s: 100.0)
    assert not report.admissible


def test_potential_heuristic_indexing(toy1):
    fs = generate_features(toy1, 2)
    weights = solve_for_state(toy1, fs, toy1.initial_state).weights
    from potplan.features import evaluate_potential
    fast = PotentialHeuristic(toy1, fs, weights)
    ts = build_transition_system(toy1)
    for s in ts.states:
        assert fast(s) == pytest.approx(evaluate_potential(fs, weights, s), abs=1e-12)


@pytest.mark.parametrize("seed", range(12))
def test_astar_matches_dijkstra(seed):
    task = random_task(4, 3, 6, seed)
    ts = build_transition_system(task)
    expected = exact_goal_distances(ts)[ts.initial]
    for heuristic in (blind, optimal_heuristic(task, 1), optimal_heuristic(task, 2)):
        assert astar(task, heuristic).cost == pytest.approx(expected)


@pytest.mark.parametrize("seed", range(8))
def test_lp_weights_always_validate(seed):
    task = random_task(4, 3, 6, seed)
    for dim in (1, 2):
        fs = generate_features(task, dim)
        weights = solve_for_state(task, fs, task.initial_state).weights
        assert validate(task, PotentialHeuristic(task, fs, weights)).all_ok


def test_expansion_trend_aggregate():
    totals = {"blind": 0, "pot1": 0, "pot2": 0}
    for seed in range(15):
        task = random_task(4, 3, 6, seed)
        totals["blind"] += astar(task, blind).expansions_before_last_f_layer
        totals["pot1"] += astar(
            task, optimal_heuristic(task, 1)).expansions_before_last_f_layer
        totals["pot2"] += astar(
            task, optimal_heuristic(task, 2)).expansions_before_last_f_layer
    assert totals["pot2"] <= totals["pot1"] <= totals["blind"]
