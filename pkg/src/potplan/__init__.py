"""Potential-heuristic linear programs for SAS+ planning tasks, with oracle
validators, cost-partitioning LPs, bucket elimination, and an A* search."""

from .task import (Task, Variable, Operator, TransitionSystem, State,
                   parse_sas, serialize_sas, successor, build_transition_system,
                   exact_goal_distances)
from .tnf import is_tnf, to_tnf, ensure_tnf
from .features import (Feature, FeatureSet, WeightFunction, generate_features,
                       evaluate_potential, classify_features, delta,
                       delta_independent)
from .lp import LinearExpression, LpModel, LpSolution, evaluate, solve, export_lp, parse_lp
from .direct2d import (build_direct2d_lp, build_exhaustive_lp, solve_for_state,
                       solve_exhaustive_for_state)
from .elimination import (ScopedFunction, ScopedFunctionSet, EquationSystem,
                          DependencyGraph, scoped_functions_for_operator,
                          context_dependency_graph, min_fill_order, induced_width,
                          bucket_eliminate, to_lp_constraints, build_general_lp,
                          solve_general_for_state, brute_force_max)
from .costpart import (Projection, project, build_tcp_lp, build_ocp_lp,
                       validate_partition, features_of_abstractions, all_patterns)
from .reduction import Graph, reduce_3col, is_3colorable, phi_of_state
from .search import astar, validate, PotentialHeuristic, SearchResult, ValidationReport

__version__ = "0.1.0"
