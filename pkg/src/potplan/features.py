"""Fact-conjunction features, weight functions, and per-operator bookkeeping.

A feature is a conjunction of facts over pairwise distinct variables.  The
potential of a state is the sum of the weights of all features true in it.
Relative to an operator, features split into three classes: irrelevant
(no variable in common with the operator), context-independent (all variables
touched by the operator), and context-dependent (some in, some out).
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

from .task import Operator, PartialAssignment, State, Task, successor


class FeatureError(ValueError):
    pass


@dataclass(frozen=True, order=True)
class Feature:
    facts: tuple[tuple[int, int], ...]  # sorted by variable id, variables distinct

    def __post_init__(self):
        if not self.facts:
            raise FeatureError("empty feature")
        variables = [var for var, _ in self.facts]
        if sorted(variables) != variables or len(set(variables)) != len(variables):
            raise FeatureError(f"feature facts must be sorted over distinct variables: "
                               f"{self.facts}")

    @classmethod
    def of(cls, facts) -> "Feature":
        facts = tuple(sorted(facts))
        variables = [var for var, _ in facts]
        if len(set(variables)) != len(variables):
            raise FeatureError(f"conjunction mentions a variable twice: {facts}")
        return cls(facts)

    @property
    def size(self) -> int:
        return len(self.facts)

    @property
    def variables(self) -> tuple[int, ...]:
        return tuple(var for var, _ in self.facts)

    def true_in(self, state: State) -> bool:
        return all(state[var] == val for var, val in self.facts)

    def entailed_by(self, assignment: PartialAssignment) -> bool:
        return all(assignment.get(var) == val for var, val in self.facts)


@dataclass
class FeatureSet:
    features: tuple[Feature, ...]

    def __post_init__(self):
        if len(set(self.features)) != len(self.features):
            raise FeatureError("duplicate features")
        self._index = {f: i for i, f in enumerate(self.features)}

    def __len__(self) -> int:
        return len(self.features)

    def __iter__(self):
        return iter(self.features)

    def index_of(self, feature: Feature) -> int:
        return self._index[feature]

    @property
    def dimension(self) -> int:
        return max((f.size for f in self.features), default=0)


@dataclass
class WeightFunction:
    """One real weight per feature, aligned with a FeatureSet's indexing."""

    values: list[float]

    @classmethod
    def zeros(cls, fs: FeatureSet) -> "WeightFunction":
        return cls([0.0] * len(fs))

    def __getitem__(self, index: int) -> float:
        return self.values[index]


@dataclass
class OperatorPartition:
    irrelevant: tuple[int, ...]
    context_independent: tuple[int, ...]
    context_dependent: tuple[int, ...]


def generate_features(task: Task, dimension: int,
                      conjunctions: list[Feature] | None = None) -> FeatureSet:
    """All facts (dimension 1), facts plus cross-variable pairs (dimension 2),
    or exactly an explicit validated list (higher dimensions)."""
    if conjunctions is not None:
        for f in conjunctions:
            for var, val in f.facts:
                if not 0 <= var < len(task.variables):
                    raise FeatureError(f"feature mentions unknown variable {var}")
                if not 0 <= val < task.variables[var].domain_size:
                    raise FeatureError(f"feature value {val} out of range for "
                                       f"variable {task.variables[var].name}")
        return FeatureSet(tuple(conjunctions))
    if dimension < 1:
        raise FeatureError(f"dimension must be positive, got {dimension}")
    if dimension > 2:
        raise FeatureError("dimensions above 2 need an explicit conjunction list")
    atoms = [Feature(((var.id, val),))
             for var in task.variables for val in range(var.domain_size)]
    if dimension == 1:
        return FeatureSet(tuple(atoms))
    pairs = []
    for a, b in combinations(task.variables, 2):
        for va in range(a.domain_size):
            for vb in range(b.domain_size):
                pairs.append(Feature(((a.id, va), (b.id, vb))))
    return FeatureSet(tuple(atoms + pairs))


def evaluate_potential(fs: FeatureSet, w: WeightFunction, state: State) -> float:
    return sum(w[i] for i, f in enumerate(fs.features) if f.true_in(state))


def _require_tnf_operator(op: Operator) -> frozenset[int]:
    if set(op.pre) != set(op.eff):
        raise FeatureError(f"operator {op.name} is not in transition normal form")
    return frozenset(op.eff)


def classify_features(fs: FeatureSet, op: Operator) -> OperatorPartition:
    op_vars = _require_tnf_operator(op)
    irrelevant, independent, dependent = [], [], []
    for i, f in enumerate(fs.features):
        f_vars = set(f.variables)
        if not f_vars & op_vars:
            irrelevant.append(i)
        elif f_vars <= op_vars:
            independent.append(i)
        else:
            dependent.append(i)
    return OperatorPartition(tuple(irrelevant), tuple(independent), tuple(dependent))


def delta(op: Operator, feature: Feature, state: State) -> int:
    """Change of the feature's truth value when applying op in state."""
    after = successor(state, op)  # raises NotApplicableError
    return int(feature.true_in(state)) - int(feature.true_in(after))


def delta_independent(op: Operator, feature: Feature) -> int:
    """State-independent delta of a context-independent feature."""
    op_vars = _require_tnf_operator(op)
    if not set(feature.variables) <= op_vars:
        raise FeatureError(f"feature {feature.facts} is not context-independent "
                           f"for operator {op.name}")
    return int(feature.entailed_by(op.pre)) - int(feature.entailed_by(op.eff))


def format_feature(task: Task, feature: Feature) -> str:
    return " & ".join(
        f"{task.variables[var].name}={task.variables[var].value_names[val]}"
        for var, val in feature.facts)


def parse_feature(task: Task, text: str) -> Feature:
    by_name = {var.name: var for var in task.variables}
    facts = []
    for part in text.split("&"):
        part = part.strip()
        if "=" not in part:
            raise FeatureError(f"expected 'variable=value', found '{part}'")
        var_name, _, val_name = part.partition("=")
        var = by_name.get(var_name.strip())
        if var is None:
            raise FeatureError(f"unknown variable '{var_name.strip()}'")
        val_name = val_name.strip()
        try:
            val = var.value_names.index(val_name)
        except ValueError:
            raise FeatureError(f"unknown value '{val_name}' for variable "
                               f"{var.name}") from None
        facts.append((var.id, val))
    return Feature.of(facts)


def parse_feature_file(task: Task, text: str) -> FeatureSet:
    """One feature per non-empty line, `var=val & var=val & ...`."""
    features = []
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        features.append(parse_feature(task, line))
    return FeatureSet(tuple(features))


def weights_to_strings(task: Task, fs: FeatureSet, w: WeightFunction) -> dict[str, float]:
    return {format_feature(task, f): w[i] for i, f in enumerate(fs.features)}


def weights_from_strings(task: Task, mapping: dict[str, float]) -> tuple[FeatureSet, WeightFunction]:
    features, values = [], []
    for text, weight in mapping.items():
        features.append(parse_feature(task, text))
        values.append(float(weight))
    return FeatureSet(tuple(features)), WeightFunction(values)
