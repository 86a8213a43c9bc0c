"""
k-CNF formulas: representation, random generation and decimation.

A formula keeps its clauses together with the set of variables that are still
unassigned. Decimation substitutes a value for one variable, deletes the
clauses that became satisfied and drops the falsified literal from all others.
Formulas are immutable; every operation returns a new value.

Four random models are provided:

* ``GenModel.UNIFORM_SET`` - m distinct clauses drawn from the (2n)^k literal
  tuples.
* ``GenModel.BERNOULLI_PRIME`` - every literal tuple included independently
  with probability m / (2n)^k.
* ``GenModel.SEQUENCE_DOUBLE_PRIME`` - m independent literal tuples, repeats of
  variables and of whole clauses allowed.
* ``GenModel.PROPER_UNIFORM`` - m distinct clauses over k distinct variables,
  no tautologies. This is the default for experiments.
"""

from __future__ import annotations

import itertools
import math
from collections import Counter, defaultdict
from dataclasses import dataclass, replace
from enum import StrEnum
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Mapping

import numpy as np
from loguru import logger

from exceptions import InvalidInputError, InvalidParametersError, InvalidVariableError

# Universes up to this size are enumerated and sampled without replacement.
_ENUMERATION_LIMIT = 200_000
# Bernoulli model needs the universe size as a numpy int64.
_BERNOULLI_UNIVERSE_LIMIT = 2**62


class GenModel(StrEnum):
    UNIFORM_SET = "uniform-set"
    BERNOULLI_PRIME = "bernoulli-prime"
    SEQUENCE_DOUBLE_PRIME = "sequence-double-prime"
    PROPER_UNIFORM = "proper"


@dataclass(frozen=True, slots=True)
class Literal:
    var: int
    positive: bool

    @property
    def sign(self) -> int:
        return 1 if self.positive else -1

    def to_int(self) -> int:
        return self.var if self.positive else -self.var

    @classmethod
    def from_int(cls, value: int) -> Literal:
        if value == 0:
            raise InvalidInputError("Literal 0 is not a variable.")
        return cls(var=abs(value), positive=value > 0)

    def __neg__(self) -> Literal:
        return Literal(self.var, not self.positive)

    def __str__(self) -> str:
        return f"x{self.var}" if self.positive else f"¬x{self.var}"


@dataclass(frozen=True, slots=True)
class Clause:
    id: int
    literals: tuple[Literal, ...]

    def __len__(self) -> int:
        return len(self.literals)

    @property
    def variables(self) -> tuple[int, ...]:
        return tuple(lit.var for lit in self.literals)

    def is_tautology(self) -> bool:
        polarities: dict[int, bool] = {}
        for lit in self.literals:
            if polarities.setdefault(lit.var, lit.positive) != lit.positive:
                return True
        return False

    def satisfied_by(self, assignment: Mapping[int, bool]) -> bool:
        return any(assignment[lit.var] == lit.positive for lit in self.literals)

    def __str__(self) -> str:
        return "(" + " ∨ ".join(str(lit) for lit in self.literals) + ")"


@dataclass(frozen=True)
class CnfFormula:
    """
    A possibly decimated CNF.

    Attributes:
        n: Total number of variables x1..xn, assigned or not.
        k: Nominal clause length of the undecimated formula.
        clauses: Residual clauses, each keeping the id of its original clause.
        alive: Variables still unassigned.
        fixed: Substitutions applied so far, in decimation order.
        model: Generator that produced the formula, if any.
        seed: Generator seed, if any.
    """

    n: int
    k: int
    clauses: tuple[Clause, ...]
    alive: frozenset[int]
    fixed: tuple[tuple[int, bool], ...] = ()
    model: GenModel | None = None
    seed: int | None = None

    @classmethod
    def from_clauses(
        cls,
        n: int,
        clauses: Iterable[Iterable[int]],
        k: int | None = None,
        model: GenModel | None = None,
        seed: int | None = None,
        fixed: Iterable[tuple[int, bool]] = (),
    ) -> CnfFormula:
        """
        Build a formula from DIMACS-style signed integer clauses.

        Args:
            n: Number of variables.
            clauses: Clauses as iterables of non-zero signed ints.
            k: Nominal clause length; defaults to the longest clause.
            model: Generator tag carried into serialization.
            seed: Generator seed carried into serialization.
            fixed: Substitutions already applied; their variables are not alive.

        Raises:
            InvalidInputError: A literal is zero, out of range or refers to a
                fixed variable.

        Examples:
            >>> f = CnfFormula.from_clauses(3, [[1, 2, 3], [-1, 2]])
            >>> f.m, sorted(f.alive)
            (2, [1, 2, 3])
        """
        fixed_t = tuple((int(x), bool(v)) for x, v in fixed)
        alive = frozenset(range(1, n + 1)) - {x for x, _ in fixed_t}
        built = []
        for i, raw in enumerate(clauses):
            lits = tuple(Literal.from_int(int(v)) for v in raw)
            for lit in lits:
                if lit.var not in alive:
                    raise InvalidInputError(
                        f"Clause {i} references x{lit.var}, which is not an "
                        f"unassigned variable of a formula on {n} variables."
                    )
            built.append(Clause(id=i, literals=lits))
        if k is None:
            k = max((len(c) for c in built), default=0)
        return cls(
            n=n,
            k=k,
            clauses=tuple(built),
            alive=alive,
            fixed=fixed_t,
            model=model,
            seed=seed,
        )

    @property
    def m(self) -> int:
        return len(self.clauses)

    @property
    def t(self) -> int:
        return len(self.fixed)

    @cached_property
    def contradicted(self) -> bool:
        return any(len(c) == 0 for c in self.clauses)

    @property
    def assignment(self) -> dict[int, bool]:
        return dict(self.fixed)

    def clause(self, clause_id: int) -> Clause:
        for c in self.clauses:
            if c.id == clause_id:
                return c
        raise KeyError(clause_id)

    def literal_count(self) -> int:
        return sum(len(c) for c in self.clauses)

    def to_int_clauses(self) -> list[list[int]]:
        return [[lit.to_int() for lit in c.literals] for c in self.clauses]

    def __str__(self) -> str:
        if not self.clauses:
            return "⊤"
        return " ∧ ".join(str(c) for c in self.clauses)


def clause_universe_size(model: GenModel, n: int, k: int) -> int:
    """Number of distinct clauses the given model draws from."""
    if model is GenModel.PROPER_UNIFORM:
        return math.comb(n, k) * 2**k
    return (2 * n) ** k


def _decode_tuple(key: int, n: int, k: int) -> tuple[Literal, ...]:
    base = 2 * n
    lits = []
    for _ in range(k):
        code = key % base
        key //= base
        lits.append(Literal(var=code // 2 + 1, positive=code % 2 == 0))
    return tuple(lits)


def _codes_to_literals(codes: Iterable[int]) -> tuple[Literal, ...]:
    return tuple(Literal(var=c // 2 + 1, positive=c % 2 == 0) for c in codes)


def _distinct_tuples(
    rng: np.random.Generator, n: int, k: int, count: int
) -> list[tuple[Literal, ...]]:
    universe = (2 * n) ** k
    if universe <= _ENUMERATION_LIMIT:
        keys = rng.choice(universe, size=count, replace=False)
        return [_decode_tuple(int(key), n, k) for key in keys]
    seen: set[tuple[int, ...]] = set()
    drawn: list[tuple[int, ...]] = []
    while len(drawn) < count:
        batch = rng.integers(0, 2 * n, size=(max(16, 2 * (count - len(drawn))), k))
        for row in batch:
            key = tuple(int(c) for c in row)
            if key not in seen:
                seen.add(key)
                drawn.append(key)
                if len(drawn) == count:
                    break
    return [_codes_to_literals(key) for key in drawn]


def _proper_clauses(
    rng: np.random.Generator, n: int, k: int, count: int
) -> list[tuple[Literal, ...]]:
    universe = math.comb(n, k) * 2**k
    if universe <= _ENUMERATION_LIMIT:
        everything = [
            tuple(Literal(v, s) for v, s in zip(vs, signs))
            for vs in itertools.combinations(range(1, n + 1), k)
            for signs in itertools.product((True, False), repeat=k)
        ]
        picks = rng.choice(universe, size=count, replace=False)
        return [everything[int(i)] for i in picks]
    seen: set[tuple[tuple[int, bool], ...]] = set()
    drawn: list[tuple[Literal, ...]] = []
    while len(drawn) < count:
        size = max(16, 2 * (count - len(drawn)))
        variables = np.sort(rng.integers(1, n + 1, size=(size, k)), axis=1)
        signs = rng.integers(0, 2, size=(size, k)).astype(bool)
        distinct = np.all(np.diff(variables, axis=1) > 0, axis=1)
        for vs, ss in zip(variables[distinct], signs[distinct]):
            key = tuple((int(v), bool(s)) for v, s in zip(vs, ss))
            if key not in seen:
                seen.add(key)
                drawn.append(tuple(Literal(v, s) for v, s in key))
                if len(drawn) == count:
                    break
    return drawn


def check_parameters(model: GenModel, n: int, m: int, k: int) -> int:
    """
    Validate generation parameters and return the clause universe size.

    Raises:
        InvalidParametersError: k < 2, m < 0, n < k, or m larger than the
            clause universe of a distinct-clause model.
    """
    model = GenModel(model)
    if k < 2 or m < 0 or n < k:
        raise InvalidParametersError(
            f"Need n >= k >= 2 and m >= 0, got n={n}, m={m}, k={k}."
        )
    universe = clause_universe_size(model, n, k)
    if model in (GenModel.UNIFORM_SET, GenModel.PROPER_UNIFORM) and m > universe:
        raise InvalidParametersError(
            f"Cannot draw {m} distinct clauses from a universe of {universe}."
        )
    if model is GenModel.BERNOULLI_PRIME and m > universe:
        raise InvalidParametersError(
            f"Inclusion probability m/(2n)^k = {m}/{universe} exceeds 1."
        )
    return universe


def generate(model: GenModel, n: int, m: int, k: int, seed: int) -> CnfFormula:
    """
    Draw a random k-CNF from one of the four models.

    The result depends only on (model, n, m, k, seed).

    Raises:
        InvalidParametersError: see ``check_parameters``.
    """
    model = GenModel(model)
    universe = check_parameters(model, n, m, k)
    rng = np.random.default_rng(seed)
    match model:
        case GenModel.PROPER_UNIFORM:
            tuples = _proper_clauses(rng, n, k, m)
        case GenModel.UNIFORM_SET:
            tuples = _distinct_tuples(rng, n, k, m)
        case GenModel.BERNOULLI_PRIME:
            if universe > _BERNOULLI_UNIVERSE_LIMIT:
                raise InvalidParametersError(
                    f"Universe (2n)^k = {universe} is too large for the "
                    "Bernoulli model."
                )
            count = int(rng.binomial(universe, m / universe))
            tuples = _distinct_tuples(rng, n, k, count)
        case GenModel.SEQUENCE_DOUBLE_PRIME:
            codes = rng.integers(0, 2 * n, size=(m, k))
            tuples = [_codes_to_literals(int(c) for c in row) for row in codes]

    clauses = tuple(Clause(id=i, literals=lits) for i, lits in enumerate(tuples))
    logger.debug(f"Generated {model.value} formula n={n} m={len(clauses)} k={k}")
    return CnfFormula(
        n=n,
        k=k,
        clauses=clauses,
        alive=frozenset(range(1, n + 1)),
        model=model,
        seed=seed,
    )


def decimate(f: CnfFormula, x: int, value: bool) -> CnfFormula:
    """
    Substitute ``value`` for ``x`` and simplify.

    Clauses containing the satisfied literal are deleted, the falsified
    literal is removed from the rest. A clause left empty marks the result as
    contradicted; it stays in the formula.

    Raises:
        InvalidVariableError: ``x`` is not alive in ``f``.

    Examples:
        >>> f = CnfFormula.from_clauses(3, [[1, 2, 3], [-1, 2]])
        >>> print(decimate(f, 1, True))
        (x2)
    """
    if x not in f.alive:
        raise InvalidVariableError(f"x{x} is not an unassigned variable.")
    residual = []
    for c in f.clauses:
        if any(lit.var == x and lit.positive == value for lit in c.literals):
            continue
        lits = tuple(lit for lit in c.literals if lit.var != x)
        residual.append(c if len(lits) == len(c.literals) else Clause(c.id, lits))
    return replace(
        f,
        clauses=tuple(residual),
        alive=f.alive - {x},
        fixed=f.fixed + ((x, bool(value)),),
    )


def decimate_many(f: CnfFormula, steps: Iterable[tuple[int, bool]]) -> CnfFormula:
    for x, value in steps:
        f = decimate(f, x, value)
    return f


def redundant_clauses(f: CnfFormula) -> set[tuple[int, int]]:
    """
    Pairs of clause ids (a, b), a < b, sharing at least two variables.

    A clause is redundant iff it appears in some returned pair.
    """
    by_pair: defaultdict[tuple[int, int], list[int]] = defaultdict(list)
    for c in f.clauses:
        for pair in itertools.combinations(sorted(set(c.variables)), 2):
            by_pair[pair].append(c.id)
    pairs: set[tuple[int, int]] = set()
    for ids in by_pair.values():
        for a, b in itertools.combinations(ids, 2):
            pairs.add((min(a, b), max(a, b)))
    return pairs


def redundant_clause_ids(f: CnfFormula) -> set[int]:
    return {cid for pair in redundant_clauses(f) for cid in pair}


def evaluate(f: CnfFormula, assignment: Mapping[int, bool]) -> bool:
    """
    True iff every clause of ``f`` has a satisfied literal.

    Raises:
        InvalidInputError: ``assignment`` misses an alive variable.
    """
    missing = f.alive - assignment.keys()
    if missing:
        raise InvalidInputError(
            f"Assignment is partial, missing {len(missing)} variable(s), "
            f"e.g. x{min(missing)}."
        )
    return all(c.satisfied_by(assignment) for c in f.clauses)


def variable_degrees(f: CnfFormula) -> Counter[int]:
    """Number of clauses each variable occurs in."""
    degrees: Counter[int] = Counter()
    for c in f.clauses:
        degrees.update(set(c.variables))
    return degrees


def clause_length_histogram(f: CnfFormula) -> dict[int, int]:
    return dict(sorted(Counter(len(c) for c in f.clauses).items()))


def pair_collision_probability(n: int, k: int) -> Fraction:
    """
    Probability that two independent proper k-clauses share >= 2 variables.

    Examples:
        >>> pair_collision_probability(4, 2)
        Fraction(1, 6)
    """
    total = math.comb(n, k)
    at_most_one = math.comb(n - k, k) + k * math.comb(n - k, k - 1)
    return 1 - Fraction(at_most_one, total)
