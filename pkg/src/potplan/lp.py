"""Solver-agnostic linear programs: expression algebra, model assembly, a
solve contract backed by scipy's HiGHS, and CPLEX-LP-format text export.

An optional external solver can be plugged in through the environment
variable POTPLAN_LP_SOLVER_CMD; the configured command is invoked with two
arguments (LP file path, solution file path) and must write the solution as
`<name> <value>` lines, or a single line `infeasible` / `unbounded`.
"""

from __future__ import annotations

import math
import os
import re
import shlex
import subprocess
import tempfile
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog
from scipy.sparse import csr_matrix

FEASIBILITY_TOL = 1e-6   # absolute, for row re-checks
OPTIMALITY_TOL = 1e-6    # relative, for optimum comparisons
SOLVER_ENV_VAR = "POTPLAN_LP_SOLVER_CMD"

RELATIONS = ("<=", "=", ">=")

_NAME_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_.()]*$")


class LpError(ValueError):
    pass


class MissingAssignmentError(LpError):
    pass


class SolverFailureError(LpError):
    pass


class LpStatusError(LpError):
    """Raised by callers that require an optimal solution."""

    def __init__(self, status: str):
        super().__init__(f"expected an optimal solution, solver reported '{status}'")
        self.status = status


@dataclass(frozen=True)
class LinearExpression:
    """constant + sum of coefficient * unknown; zero coefficients are dropped."""

    constant: float = 0.0
    terms: tuple[tuple[str, float], ...] = ()

    @classmethod
    def build(cls, constant: float = 0.0, terms: dict[str, float] | None = None) -> "LinearExpression":
        items = tuple(sorted((n, float(c)) for n, c in (terms or {}).items() if c != 0.0))
        return cls(float(constant), items)

    @classmethod
    def term(cls, name: str, coefficient: float = 1.0) -> "LinearExpression":
        return cls.build(0.0, {name: coefficient})

    @classmethod
    def const(cls, value: float) -> "LinearExpression":
        return cls.build(value)

    def coefficients(self) -> dict[str, float]:
        return dict(self.terms)

    def is_zero(self) -> bool:
        return self.constant == 0.0 and not self.terms

    def __add__(self, other):
        if isinstance(other, (int, float)):
            other = LinearExpression.const(other)
        merged = dict(self.terms)
        for name, coef in other.terms:
            merged[name] = merged.get(name, 0.0) + coef
        return LinearExpression.build(self.constant + other.constant, merged)

    __radd__ = __add__

    def __neg__(self):
        return LinearExpression.build(-self.constant,
                                      {n: -c for n, c in self.terms})

    def __sub__(self, other):
        if isinstance(other, (int, float)):
            other = LinearExpression.const(other)
        return self + (-other)

    def __mul__(self, scalar):
        if not isinstance(scalar, (int, float)):
            return NotImplemented
        if scalar == 0:
            return LinearExpression()
        return LinearExpression.build(self.constant * scalar,
                                      {n: c * scalar for n, c in self.terms})

    __rmul__ = __mul__

    def substitute(self, replacements: dict[str, "LinearExpression"]) -> "LinearExpression":
        """Replace whole unknowns by expressions (used to inline aliased unknowns)."""
        result = LinearExpression.const(self.constant)
        for name, coef in self.terms:
            if name in replacements:
                result = result + coef * replacements[name]
            else:
                result = result + LinearExpression.term(name, coef)
        return result


ZERO = LinearExpression()


def evaluate(expression: LinearExpression, assignment: dict[str, float]) -> float:
    """Value of the expression under a total assignment to its unknowns."""
    total = expression.constant
    for name, coef in expression.terms:
        if name not in assignment:
            raise MissingAssignmentError(f"no value for unknown '{name}'")
        total += coef * assignment[name]
    return total


@dataclass
class Row:
    expression: LinearExpression  # constant folded into rhs, see LpModel.add_row
    relation: str
    rhs: float
    name: str = ""


@dataclass
class LpModel:
    unknowns: list[tuple[str, float, float]] = field(default_factory=list)
    rows: list[Row] = field(default_factory=list)
    objective_sense: str = "max"
    objective: LinearExpression = ZERO

    def __post_init__(self):
        self._by_name = {name: i for i, (name, _, _) in enumerate(self.unknowns)}
        self._frozen = False

    def freeze(self) -> "LpModel":
        self._frozen = True
        return self

    def _mutating(self):
        if self._frozen:
            raise LpError("model is frozen")

    def add_unknown(self, name: str, lower: float = -math.inf,
                    upper: float = math.inf) -> str:
        self._mutating()
        if not _NAME_RE.match(name) or name in ("free", "inf"):
            raise LpError(f"unknown name '{name}' is not LP-file safe")
        if name in self._by_name:
            raise LpError(f"unknown '{name}' declared twice")
        if lower > upper:
            raise LpError(f"unknown '{name}': lower bound {lower} above upper {upper}")
        self._by_name[name] = len(self.unknowns)
        self.unknowns.append((name, lower, upper))
        return name

    def has_unknown(self, name: str) -> bool:
        return name in self._by_name

    def index_of(self, name: str) -> int:
        return self._by_name[name]

    def _check_refs(self, expression: LinearExpression, where: str) -> None:
        for name, _ in expression.terms:
            if name not in self._by_name:
                raise LpError(f"{where} references undeclared unknown '{name}'")

    def add_row(self, expression: LinearExpression, relation: str, rhs: float,
                name: str = "") -> None:
        self._mutating()
        if relation not in RELATIONS:
            raise LpError(f"bad relation '{relation}'")
        self._check_refs(expression, "row")
        # Fold the expression constant into the right-hand side.
        folded = LinearExpression.build(0.0, dict(expression.terms))
        self.rows.append(Row(folded, relation, float(rhs) - expression.constant, name))

    def set_objective(self, sense: str, expression: LinearExpression) -> None:
        self._mutating()
        if sense not in ("max", "min"):
            raise LpError(f"bad objective sense '{sense}'")
        self._check_refs(expression, "objective")
        self.objective_sense = sense
        self.objective = expression


@dataclass
class LpSolution:
    status: str  # optimal | infeasible | unbounded
    values: dict[str, float] | None = None
    objective_value: float | None = None
    bound_active: tuple[str, ...] = ()

    def require_optimal(self) -> "LpSolution":
        if self.status != "optimal":
            raise LpStatusError(self.status)
        return self


def check_solution(model: LpModel, values: dict[str, float],
                   tolerance: float = FEASIBILITY_TOL) -> list[str]:
    """Names of rows/bounds the assignment violates beyond the tolerance."""
    violations = []
    for i, row in enumerate(model.rows):
        lhs = evaluate(row.expression, values)
        slack = tolerance * max(1.0, abs(row.rhs))
        ok = {
            "<=": lhs <= row.rhs + slack,
            ">=": lhs >= row.rhs - slack,
            "=": abs(lhs - row.rhs) <= slack,
        }[row.relation]
        if not ok:
            violations.append(row.name or f"c{i + 1}")
    for name, lower, upper in model.unknowns:
        v = values[name]
        if v < lower - tolerance or v > upper + tolerance:
            violations.append(f"bound:{name}")
    return violations


def solve(model: LpModel) -> LpSolution:
    """Solve the model; dispatches to an external solver when configured."""
    command = os.environ.get(SOLVER_ENV_VAR)
    if command:
        return _solve_external(model, command)
    return _solve_scipy(model)


def _solve_scipy(model: LpModel) -> LpSolution:
    n = len(model.unknowns)
    sense = 1.0 if model.objective_sense == "min" else -1.0
    c = np.zeros(n)
    for name, coef in model.objective.terms:
        c[model.index_of(name)] = sense * coef

    ub_rows, ub_rhs, eq_rows, eq_rhs = [], [], [], []
    for row in model.rows:
        coeffs = [(model.index_of(name), coef) for name, coef in row.expression.terms]
        if row.relation == "=":
            eq_rows.append(coeffs)
            eq_rhs.append(row.rhs)
        elif row.relation == "<=":
            ub_rows.append(coeffs)
            ub_rhs.append(row.rhs)
        else:
            ub_rows.append([(j, -coef) for j, coef in coeffs])
            ub_rhs.append(-row.rhs)

    def sparse(rows):
        data, indices, indptr = [], [], [0]
        for coeffs in rows:
            for j, coef in coeffs:
                indices.append(j)
                data.append(coef)
            indptr.append(len(data))
        return csr_matrix((data, indices, indptr), shape=(len(rows), n))

    kwargs = {}
    if ub_rows:
        kwargs["A_ub"] = sparse(ub_rows)
        kwargs["b_ub"] = np.array(ub_rhs)
    if eq_rows:
        kwargs["A_eq"] = sparse(eq_rows)
        kwargs["b_eq"] = np.array(eq_rhs)
    bounds = [(None if math.isinf(lo) else lo, None if math.isinf(hi) else hi)
              for _, lo, hi in model.unknowns]
    result = linprog(c, bounds=bounds, method="highs", **kwargs)

    if result.status == 2:
        return LpSolution("infeasible")
    if result.status == 3:
        return LpSolution("unbounded")
    if result.status != 0:
        raise SolverFailureError(f"linprog failed (status {result.status}): {result.message}")
    values = {name: float(x) for (name, _, _), x in zip(model.unknowns, result.x)}
    return _finish(model, values)


def _finish(model: LpModel, values: dict[str, float]) -> LpSolution:
    violations = check_solution(model, values)
    if violations:
        raise SolverFailureError(f"solution violates rows: {', '.join(violations[:5])}")
    objective = evaluate(model.objective, values)
    active = tuple(
        name for name, lower, upper in model.unknowns
        if (not math.isinf(lower) and abs(values[name] - lower) <= FEASIBILITY_TOL)
        or (not math.isinf(upper) and abs(values[name] - upper) <= FEASIBILITY_TOL))
    return LpSolution("optimal", values, objective, active)


def _solve_external(model: LpModel, command: str) -> LpSolution:
    with tempfile.TemporaryDirectory(prefix="potplan-lp-") as tmp:
        lp_path = os.path.join(tmp, "model.lp")
        sol_path = os.path.join(tmp, "solution.txt")
        with open(lp_path, "w", encoding="utf-8") as f:
            f.write(export_lp(model))
        argv = shlex.split(command) + [lp_path, sol_path]
        proc = subprocess.run(argv, capture_output=True, text=True)
        if proc.returncode != 0:
            raise SolverFailureError(
                f"external solver exited with {proc.returncode}: {proc.stderr.strip()}")
        if not os.path.exists(sol_path):
            raise SolverFailureError("external solver wrote no solution file")
        with open(sol_path, encoding="utf-8") as f:
            lines = [line.strip() for line in f if line.strip()]
    if lines and lines[0] in ("infeasible", "unbounded"):
        return LpSolution(lines[0])
    values = {name: 0.0 for name, _, _ in model.unknowns}
    for line in lines:
        parts = line.split()
        if len(parts) != 2:
            raise SolverFailureError(f"bad solution line '{line}'")
        name, value = parts
        if name not in values:
            raise SolverFailureError(f"solution names unknown column '{name}'")
        values[name] = float(value)
    return _finish(model, values)


def _format_coefficient(coef: float) -> str:
    if coef == 1.0:
        return "+ "
    if coef == -1.0:
        return "- "
    if coef < 0:
        return f"- {-coef!r} "
    return f"+ {coef!r} "


def _format_expression(expression: LinearExpression, order: dict[str, int]) -> str:
    parts = []
    for name, coef in sorted(expression.terms, key=lambda t: order[t[0]]):
        parts.append(f"{_format_coefficient(coef)}{name}")
    if expression.constant != 0.0:
        c = expression.constant
        parts.append(f"- {-c!r}" if c < 0 else f"+ {c!r}")
    text = " ".join(parts)
    return text[2:] if text.startswith("+ ") else text


def export_lp(model: LpModel) -> str:
    """CPLEX LP text: Maximize/Minimize, Subject To, Bounds, End.

    Every unknown gets a Bounds line, so parse_lp can recover the column list
    (with its order) even for columns that appear in no row.
    """
    order = {name: i for i, (name, _, _) in enumerate(model.unknowns)}
    lines = ["Maximize" if model.objective_sense == "max" else "Minimize"]
    lines.append(f" obj: {_format_expression(model.objective, order)}".rstrip())
    lines.append("Subject To")
    for i, row in enumerate(model.rows):
        name = row.name or f"c{i + 1}"
        lines.append(f" {name}: {_format_expression(row.expression, order)} "
                     f"{row.relation} {row.rhs!r}")
    lines.append("Bounds")
    for name, lower, upper in model.unknowns:
        if math.isinf(lower) and math.isinf(upper):
            lines.append(f" {name} free")
        elif math.isinf(upper):
            lines.append(f" {name} >= {lower!r}")
        elif math.isinf(lower):
            lines.append(f" {name} <= {upper!r}")
        else:
            lines.append(f" {lower!r} <= {name} <= {upper!r}")
    lines.append("End")
    return "\n".join(lines) + "\n"


_TOKEN_RE = re.compile(r"(<=|>=|=|\+|-|:|[A-Za-z_][A-Za-z0-9_.()]*"
                       r"|[0-9]*\.?[0-9]+(?:[eE][+-]?[0-9]+)?|inf)")


def _parse_expression(tokens: list[str]) -> LinearExpression:
    expr = ZERO
    sign = 1.0
    pending: float | None = None
    for token in tokens:
        if token == "+":
            if pending is not None:
                expr = expr + sign * pending
                pending = None
            sign = 1.0
        elif token == "-":
            if pending is not None:
                expr = expr + sign * pending
                pending = None
            sign = -1.0
        elif re.match(r"^[0-9.]|^inf$", token):
            if pending is not None:
                expr = expr + sign * pending
                sign = 1.0
            pending = float(token)
        else:
            coef = sign * (pending if pending is not None else 1.0)
            expr = expr + LinearExpression.term(token, coef)
            pending = None
            sign = 1.0
    if pending is not None:
        expr = expr + sign * pending
    return expr


def parse_lp(text: str) -> LpModel:
    """Parse the LP subset written by export_lp back into a model."""
    section = None
    sense = "max"
    objective_tokens: list[str] = []
    row_specs: list[tuple[str, list[str]]] = []
    bound_lines: list[list[str]] = []
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("\\"):
            continue
        lowered = line.lower()
        if lowered in ("maximize", "minimize"):
            section = "objective"
            sense = "max" if lowered == "maximize" else "min"
            continue
        if lowered == "subject to":
            section = "rows"
            continue
        if lowered == "bounds":
            section = "bounds"
            continue
        if lowered == "end":
            break
        tokens = _TOKEN_RE.findall(line)
        if section == "objective":
            if ":" in tokens:
                tokens = tokens[tokens.index(":") + 1:]
            objective_tokens.extend(tokens)
        elif section == "rows":
            name = ""
            if ":" in tokens:
                name = tokens[tokens.index(":") - 1]
                tokens = tokens[tokens.index(":") + 1:]
            row_specs.append((name, tokens))
        elif section == "bounds":
            bound_lines.append(tokens)
        else:
            raise LpError(f"unexpected line outside any section: '{line}'")

    model = LpModel()
    for tokens in bound_lines:
        if len(tokens) == 2 and tokens[-1] == "free":
            model.add_unknown(tokens[0])
            continue
        segments: list[list[str]] = [[]]
        relations = []
        for token in tokens:
            if token in ("<=", ">="):
                relations.append(token)
                segments.append([])
            else:
                segments[-1].append(token)
        if len(segments) == 3 and relations == ["<=", "<="]:
            model.add_unknown(segments[1][0], _parse_bound(segments[0]),
                              _parse_bound(segments[2]))
        elif len(segments) == 2 and _NAME_RE.match(segments[0][0]):
            name, value = segments[0][0], _parse_bound(segments[1])
            if relations == ["<="]:
                model.add_unknown(name, upper=value)
            else:
                model.add_unknown(name, lower=value)
        elif len(segments) == 2:
            name, value = segments[1][0], _parse_bound(segments[0])
            if relations == ["<="]:
                model.add_unknown(name, lower=value)
            else:
                model.add_unknown(name, upper=value)
        else:
            raise LpError(f"cannot parse bound line {tokens}")
    for name, tokens in row_specs:
        split = None
        for rel in RELATIONS:
            if rel in tokens:
                split = tokens.index(rel)
                relation = rel
        if split is None:
            raise LpError(f"row without relation: {tokens}")
        lhs = _parse_expression(tokens[:split])
        rhs = _parse_expression(tokens[split + 1:])
        if rhs.terms:
            raise LpError("unknowns on the right-hand side are not supported")
        for unk, _ in lhs.terms:
            if not model.has_unknown(unk):
                model.add_unknown(unk)
        model.add_row(lhs, relation, rhs.constant, name)
    objective = _parse_expression(objective_tokens)
    for unk, _ in objective.terms:
        if not model.has_unknown(unk):
            model.add_unknown(unk)
    model.set_objective(sense, objective)
    return model


def _parse_bound(tokens: list[str]) -> float:
    # a possibly signed number, e.g. ['-', '3.0'] or ['3.0']
    value = None
    sign = 1.0
    for token in tokens:
        if token == "-":
            sign = -1.0
        elif token != "+":
            value = math.inf if token == "inf" else float(token)
    if value is None:
        raise LpError(f"cannot parse bound from {tokens}")
    return sign * value
