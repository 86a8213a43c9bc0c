"""
Exact ground truth for small formulas.

``count`` enumerates satisfying assignments by branching with early
clause-violation pruning and splits the residual formula into connected
components, multiplying their counts. ``count_plain`` is an independent
brute-force loop over all 2^n assignments used to cross-check it.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np
from loguru import logger
from pydantic import BaseModel

from bp_engine import BpSettings, StopRule, marginal, run
from exceptions import BudgetExceededError, UnsatisfiableError
from factor_graph import ball, build
from formula import CnfFormula, decimate, evaluate
from settings import settings

SignedClause = tuple[int, ...]


@dataclass(frozen=True)
class CountResult:
    """
    Number of satisfying assignments over the alive variables.

    Attributes:
        total: |S(f)|.
        per_var_true: For every alive x, the number of them with x = 1.
    """

    total: int
    per_var_true: Mapping[int, int] = field(default_factory=dict)

    @property
    def satisfiable(self) -> bool:
        return self.total > 0

    def marginal_exact(self, x: int) -> Fraction:
        if self.total == 0:
            raise UnsatisfiableError("Marginals of an unsatisfiable formula are undefined.")
        return Fraction(self.per_var_true[x], self.total)

    def marginal(self, x: int) -> float:
        return float(self.marginal_exact(x))


def _check_budget(f: CnfFormula, budget: int | None) -> None:
    budget = budget if budget is not None else settings.COUNT_BUDGET
    if len(f.alive) > budget:
        raise BudgetExceededError(
            f"Formula has {len(f.alive)} unassigned variables, counting budget is "
            f"{budget}. Shrink the formula or raise the budget."
        )


def _assign(clauses: Sequence[SignedClause], lit: int) -> list[SignedClause] | None:
    """Make ``lit`` true. None when a clause becomes empty."""
    residual = []
    for clause in clauses:
        if lit in clause:
            continue
        if -lit in clause:
            clause = tuple(v for v in clause if v != -lit)
            if not clause:
                return None
        residual.append(clause)
    return residual


def _components(
    clauses: Sequence[SignedClause],
) -> list[tuple[list[SignedClause], set[int]]]:
    parent: dict[int, int] = {}

    def find(v: int) -> int:
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    for clause in clauses:
        variables = [abs(v) for v in clause]
        for v in variables:
            parent.setdefault(v, v)
        root = find(variables[0])
        for v in variables[1:]:
            other = find(v)
            if other != root:
                parent[other] = root
    groups: dict[int, tuple[list[SignedClause], set[int]]] = {}
    for clause in clauses:
        root = find(abs(clause[0]))
        bucket = groups.setdefault(root, ([], set()))
        bucket[0].append(clause)
        bucket[1].update(abs(v) for v in clause)
    return list(groups.values())


def _branch_variable(clauses: Sequence[SignedClause]) -> int:
    shortest = min(clauses, key=lambda c: (len(c), sorted(abs(v) for v in c)))
    return min(abs(v) for v in shortest)


class _Counter:
    """Component-splitting counter with a per-call memo."""

    def __init__(self) -> None:
        self.memo: dict[frozenset[SignedClause], tuple[int, dict[int, int]]] = {}

    def count(
        self, clauses: list[SignedClause], variables: set[int]
    ) -> tuple[int, dict[int, int]]:
        constrained = {abs(v) for c in clauses for v in c}
        free = variables - constrained
        total = 1
        per_true: dict[int, int] = {}
        parts = [self.component(cs) for cs, _ in _components(clauses)]
        for part_total, _ in parts:
            total *= part_total
        if total == 0:
            return 0, {x: 0 for x in variables}
        for part_total, part_true in parts:
            scale = total // part_total
            for x, c in part_true.items():
                per_true[x] = c * scale
        total_with_free = total << len(free)
        shift = len(free)
        per_true = {x: c << shift for x, c in per_true.items()}
        for x in free:
            per_true[x] = total_with_free // 2
        return total_with_free, per_true

    def component(self, clauses: list[SignedClause]) -> tuple[int, dict[int, int]]:
        key = frozenset(clauses)
        if key in self.memo:
            return self.memo[key]
        variables = {abs(v) for c in clauses for v in c}
        x = _branch_variable(clauses)
        rest = variables - {x}
        total = 0
        per_true = {v: 0 for v in variables}
        for value in (True, False):
            residual = _assign(clauses, x if value else -x)
            if residual is None:
                continue
            sub_total, sub_true = self.count(residual, rest)
            total += sub_total
            if value:
                per_true[x] += sub_total
            for v, c in sub_true.items():
                per_true[v] += c
        self.memo[key] = (total, per_true)
        return total, per_true


def _signed_clauses(f: CnfFormula) -> list[SignedClause]:
    return [tuple(lit.to_int() for lit in c.literals) for c in f.clauses]


def count(f: CnfFormula, budget: int | None = None) -> CountResult:
    """
    Exact number of satisfying assignments of ``f`` over its alive variables.

    Raises:
        BudgetExceededError: more alive variables than the counting budget.

    Examples:
        >>> count(CnfFormula.from_clauses(2, [[1, 2]])).total
        3
    """
    _check_budget(f, budget)
    if f.contradicted:
        return CountResult(total=0, per_var_true={x: 0 for x in f.alive})
    total, per_true = _Counter().count(_signed_clauses(f), set(f.alive))
    if total == 0:
        logger.debug("Formula is unsatisfiable; marginals are undefined")
    return CountResult(total=total, per_var_true=per_true)


def count_plain(f: CnfFormula, limit: int | None = None) -> CountResult:
    """Brute force over every assignment of the alive variables."""
    limit = limit if limit is not None else settings.PLAIN_COUNT_LIMIT
    variables = sorted(f.alive)
    j = len(variables)
    if j > limit:
        raise BudgetExceededError(
            f"Plain enumeration of 2^{j} assignments exceeds the limit 2^{limit}."
        )
    column = {x: i for i, x in enumerate(variables)}
    bits = ((np.arange(2**j)[:, None] >> np.arange(j)) & 1).astype(bool)
    satisfied = np.ones(2**j, dtype=bool)
    for clause in f.clauses:
        hit = np.zeros(2**j, dtype=bool)
        for lit in clause.literals:
            hit |= bits[:, column[lit.var]] == lit.positive
        satisfied &= hit
    per_true = bits[satisfied].sum(axis=0)
    return CountResult(
        total=int(satisfied.sum()),
        per_var_true={x: int(per_true[i]) for i, x in enumerate(variables)},
    )


def local_marginal(f: CnfFormula, x: int, omega: int, budget: int | None = None) -> Fraction:
    """
    Exact marginal of ``x`` in the radius-omega ball around it.

    Raises:
        BudgetExceededError: the ball has too many variables.
        UnsatisfiableError: the ball has no satisfying assignment.
    """
    sub, local = ball(build(f), x, omega).to_formula()
    return count(sub, budget).marginal_exact(local[x])


class IdealStep(BaseModel):
    t: int
    var: int
    marginal: float
    bit: bool


class IdealDecimationResult(BaseModel):
    assignment: dict[int, bool]
    steps: list[IdealStep]


class IdealDecimationSampler:
    """
    Runs the ideal decimation experiment repeatedly on one formula.

    Marginals are cached per decimation prefix, so repeated runs only pay for
    prefixes not seen before.
    """

    def __init__(self, f: CnfFormula, budget: int | None = None) -> None:
        _check_budget(f, budget)
        self.formula = f
        self.budget = budget
        self.order = sorted(f.alive)
        self._cache: dict[tuple[bool, ...], tuple[CnfFormula, Fraction]] = {}
        if not count(f, budget).satisfiable:
            raise UnsatisfiableError(
                "Ideal decimation needs a satisfiable formula, but this one has "
                "no satisfying assignment."
            )

    def _marginal_after(self, prefix: tuple[bool, ...]) -> tuple[CnfFormula, Fraction]:
        if prefix in self._cache:
            return self._cache[prefix]
        if prefix:
            previous, _ = self._marginal_after(prefix[:-1])
            current = decimate(previous, self.order[len(prefix) - 1], prefix[-1])
        else:
            current = self.formula
        result = count(current, self.budget)
        # Every prefix sampled with its marginal stays satisfiable.
        assert result.satisfiable, "ideal decimation reached an unsatisfiable prefix"
        entry = (current, result.marginal_exact(self.order[len(prefix)]))
        self._cache[prefix] = entry
        return entry

    def sample(self, rng: np.random.Generator) -> IdealDecimationResult:
        prefix: tuple[bool, ...] = ()
        steps = []
        for t, x in enumerate(self.order, start=1):
            _, m = self._marginal_after(prefix)
            bit = bool(rng.random() < m)
            steps.append(IdealStep(t=t, var=x, marginal=float(m), bit=bit))
            prefix += (bit,)
        assignment = dict(zip(self.order, prefix))
        return IdealDecimationResult(assignment=assignment, steps=steps)


def ideal_decimation(f: CnfFormula, seed: int, budget: int | None = None) -> IdealDecimationResult:
    """
    Assign the alive variables in index order, each true with its exact marginal.

    The output is uniformly distributed over the satisfying assignments.

    Raises:
        UnsatisfiableError: ``f`` has no satisfying assignment.
    """
    sampler = IdealDecimationSampler(f, budget)
    result = sampler.sample(np.random.default_rng(seed))
    assert evaluate(f, result.assignment)
    return result


def sample_ideal(
    f: CnfFormula, runs: int, seed: int, budget: int | None = None
) -> list[dict[int, bool]]:
    sampler = IdealDecimationSampler(f, budget)
    rng = np.random.default_rng(seed)
    return [sampler.sample(rng).assignment for _ in range(runs)]


class HypothesisRow(BaseModel):
    t: int
    var: int
    m_exact: float
    m_local: float
    mu_bp: float
    dev_local: float
    dev_bp: float


def hypothesis_probe(
    f: CnfFormula,
    omega: int,
    seed: int,
    budget: int | None = None,
    bp_settings: BpSettings | None = None,
) -> list[HypothesisRow]:
    """
    Compare exact, local and BP marginals along one ideal decimation run.

    At every step t the row holds M_x(f_{t-1}), M_x(f_{t-1}, omega) and
    mu_x(f_{t-1}, omega) for the variable being assigned, plus the deviations
    |M - M_local| and |M - mu|.
    """
    bp_settings = bp_settings or BpSettings(omega=omega, stop_rule=StopRule.FIXED_OMEGA)
    sampler = IdealDecimationSampler(f, budget)
    trajectory = sampler.sample(np.random.default_rng(seed))
    rows = []
    current = f
    for step in trajectory.steps:
        exact = step.marginal
        local = float(local_marginal(current, step.var, max(omega, 1), budget))
        g = build(current)
        mu = marginal(run(g, bp_settings).state, g, step.var)
        rows.append(
            HypothesisRow(
                t=step.t,
                var=step.var,
                m_exact=exact,
                m_local=local,
                mu_bp=mu,
                dev_local=abs(exact - local),
                dev_bp=abs(exact - mu),
            )
        )
        current = decimate(current, step.var, step.bit)
    logger.info(
        f"Hypothesis probe: {len(rows)} steps, max BP deviation "
        f"{max((r.dev_bp for r in rows), default=0.0):.3g}"
    )
    return rows
