"""
Bias, balancedness and the quasirandomness conditions Q0-Q4.

After t variables have been decimated, a variable is (delta, t)-biased when
its BP marginal differs from 1/2 by more than delta, and the decimated formula
is (delta, t)-balanced when at most delta * (n - t) variables are biased. The
threshold follows the schedule delta_t = exp(-c (1 - t/n) k) up to the horizon
T = (1 - r / 2^k) n.

Q0-Q4 are structural conditions on a decimated formula. Each checker returns a
``ConditionReport`` with the measured quantities, the thresholds they are
compared with and a verdict. Q4 is a bound on the cut norm of the signed
weighted adjacency operator ``lambda_q``; the norm is computed exactly for
small dimensions and bracketed otherwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import AbstractSet, Iterable, Literal

import numpy as np
import pandas as pd
from loguru import logger
from pydantic import BaseModel

from bp_engine import BpSettings, marginals, run
from commons import FLOAT_FORMAT
from custom_types import Verdict
from exceptions import (
    BudgetExceededError,
    InvalidParametersError,
    InvalidVariableError,
    WindowError,
)
from factor_graph import FactorGraph, build
from formula import CnfFormula, redundant_clause_ids, variable_degrees
from service.seeding import derive_seed
from settings import settings

# Rows of the +-1 enumeration evaluated per matrix product.
_CHUNK = 1 << 14


@dataclass(frozen=True)
class DeltaSchedule:
    """
    delta_t = exp(-c (1 - t/n) k) and the horizon T = (1 - r / 2^k) n.

    ``constant`` replaces the formula by a fixed value for every t; 0, 1 and
    ``math.inf`` are the degenerate schedules (everything biased, threshold
    vacuous, nothing ever biased).

    Examples:
        >>> s = DeltaSchedule(c=0.2, k=3, n=100, r=2.0)
        >>> s.delta(100)
        1.0
        >>> s.horizon
        75.0
    """

    c: float
    k: int
    n: int
    r: float
    constant: float | None = None

    def __post_init__(self) -> None:
        if self.constant is None and self.c <= 0:
            raise InvalidParametersError(f"Schedule constant c must be > 0, got {self.c}.")
        if self.n < 1:
            raise InvalidParametersError(f"Schedule needs n >= 1, got {self.n}.")

    @classmethod
    def for_formula(cls, f: CnfFormula, c: float | None = None) -> DeltaSchedule:
        """Schedule for the density of ``f``; for a decimated f that is the residual density."""
        return cls(
            c=c if c is not None else settings.SCHEDULE_C,
            k=f.k,
            n=f.n,
            r=f.m / f.n,
        )

    @classmethod
    def fixed(cls, value: float, n: int, k: int = 3, r: float = 0.0) -> DeltaSchedule:
        return cls(c=settings.SCHEDULE_C, k=k, n=n, r=r, constant=value)

    def delta(self, t: int) -> float:
        if self.constant is not None:
            return self.constant
        return math.exp(-self.c * (1 - t / self.n) * self.k)

    @property
    def horizon(self) -> float:
        return (1 - self.r / 2**self.k) * self.n

    def sum_deltas(self, t: int) -> float:
        """delta_1 + ... + delta_t."""
        return math.fsum(self.delta(s) for s in range(1, t + 1))


def mass_bound(delta: float, n: int, t: int) -> float:
    if math.isinf(delta):
        return math.inf
    return delta * (n - t)


def is_balanced(biased_count: int, delta: float, n: int, t: int) -> bool:
    """At most delta * (n - t) variables are biased."""
    return biased_count <= mass_bound(delta, n, t)


@dataclass(frozen=True)
class BiasReport:
    t: int
    delta: float
    biased_vars: frozenset[int]
    balanced: bool
    n_alive: int
    mass_bound: float

    @property
    def biased_count(self) -> int:
        return len(self.biased_vars)


def biased_variables(g: FactorGraph, mu: np.ndarray, delta: float) -> np.ndarray:
    """Alive variables with |mu_x - 1/2| > delta, ascending."""
    alive = g.alive_vars
    return alive[np.abs(mu[alive] - 0.5) > delta]


def graph_bias_report(
    g: FactorGraph, t: int, delta: float, bp_settings: BpSettings | None = None
) -> BiasReport:
    mu = marginals(run(g, bp_settings).state, g)
    biased = biased_variables(g, mu, delta)
    return BiasReport(
        t=t,
        delta=delta,
        biased_vars=frozenset(int(x) for x in biased),
        balanced=is_balanced(len(biased), delta, g.n, t),
        n_alive=len(g.alive_vars),
        mass_bound=mass_bound(delta, g.n, t),
    )


def bias_report(
    f: CnfFormula,
    bp_settings: BpSettings | None = None,
    sched: DeltaSchedule | None = None,
    t: int | None = None,
) -> BiasReport:
    """
    Classify every alive variable of ``f`` as (delta_t, t)-biased or not.

    ``t`` defaults to the number of variables already decimated in ``f``.

    Examples:
        >>> f = CnfFormula.from_clauses(3, [[1, 2, 3]])
        >>> bias_report(f, sched=DeltaSchedule.fixed(0.1, n=3)).biased_count
        0
    """
    sched = sched or DeltaSchedule.for_formula(f)
    t = f.t if t is None else t
    if t >= f.n:
        raise InvalidParametersError(f"Bias is defined for t < n, got t={t}, n={f.n}.")
    return graph_bias_report(build(f), t, sched.delta(t), bp_settings)


class ProbeRow(BaseModel):
    t: int
    delta: float
    mass_bound: float
    sum_deltas: float
    samples: int
    balanced: int
    frequency: float
    mean_biased: float


def default_probe_times(f: CnfFormula, sched: DeltaSchedule) -> list[int]:
    horizon = int(min(sched.horizon, f.n - 1))
    candidates = {f.t, max(f.t, horizon // 2), max(f.t, horizon)}
    return sorted(t for t in candidates if f.t <= t < f.n)


def balancedness_probe(
    f: CnfFormula,
    sched: DeltaSchedule | None = None,
    bp_settings: BpSettings | None = None,
    samples: int = 100,
    seed: int = 0,
    t_values: Iterable[int] | None = None,
) -> list[ProbeRow]:
    """
    Empirical frequency of (delta_t, t)-balanced decimations.

    Every sample draws a random order of the alive variables and a uniformly
    random assignment, decimates ``f`` along them and tests balancedness at
    each requested t (total number of decimated variables, f.t <= t < n).
    """
    if samples < 1:
        raise InvalidParametersError(f"Probe needs at least one sample, got {samples}.")
    sched = sched or DeltaSchedule.for_formula(f)
    times = sorted(set(t_values)) if t_values is not None else default_probe_times(f, sched)
    for t in times:
        if not f.t <= t < f.n:
            raise InvalidParametersError(
                f"Probe time t={t} outside [{f.t}, {f.n - 1}] for this formula."
            )
    balanced = {t: 0 for t in times}
    biased_total = {t: 0 for t in times}
    base = build(f)
    alive = np.array(sorted(f.alive), dtype=np.int64)
    for sample in range(samples):
        rng = np.random.default_rng(derive_seed(seed, sample))
        order = rng.permutation(alive)
        bits = rng.random(len(order)) < 0.5
        g, done = base, f.t
        for t in times:
            while done < t:
                i = done - f.t
                g = g.decimate(int(order[i]), bool(bits[i]))
                done += 1
            report = graph_bias_report(g, t, sched.delta(t), bp_settings)
            balanced[t] += report.balanced
            biased_total[t] += report.biased_count
    rows = [
        ProbeRow(
            t=t,
            delta=sched.delta(t),
            mass_bound=mass_bound(sched.delta(t), f.n, t),
            sum_deltas=sched.sum_deltas(t),
            samples=samples,
            balanced=balanced[t],
            frequency=balanced[t] / samples,
            mean_biased=biased_total[t] / samples,
        )
        for t in times
    ]
    logger.info(f"Balancedness probe over {samples} samples at t={times}")
    return rows


class ConditionReport(BaseModel):
    condition: str
    parameters: dict[str, float]
    measured: dict[str, float]
    threshold: dict[str, float]
    verdict: Verdict

    def as_row(self) -> dict[str, str]:
        def flat(values: dict[str, float]) -> str:
            return ";".join(f"{key}={value:.17g}" for key, value in values.items())

        return {
            "condition": self.condition,
            "parameters": flat(self.parameters),
            "measured": flat(self.measured),
            "threshold": flat(self.threshold),
            "verdict": self.verdict,
        }


def _check_theta(theta: float) -> None:
    if not 0 < theta <= 1:
        raise InvalidParametersError(f"theta must lie in (0, 1], got {theta}.")


@dataclass(frozen=True)
class _ClauseView:
    """Per-clause data of a factor graph indexed by clause id."""

    length: dict[int, int]
    members: dict[int, frozenset[int]]
    signs: dict[int, list[tuple[int, int]]] = field(repr=False)

    @classmethod
    def of(cls, g: FactorGraph) -> _ClauseView:
        length, members, signs = {}, {}, {}
        for cid, size in zip(g.clause_ids, g.clause_len):
            adj = g.clause_adj(int(cid))
            length[int(cid)] = int(size)
            members[int(cid)] = frozenset(v for v, _ in adj)
            signs[int(cid)] = adj
        return cls(length=length, members=members, signs=signs)

    def sign(self, a: int, x: int) -> int:
        return next(s for v, s in self.signs[a] if v == x)


def _incident(g: FactorGraph, x: int) -> list[int]:
    """Distinct clause ids containing x, in edge order."""
    return list(dict.fromkeys(a for a, _ in g.var_adj(x)))


def _n_leq1(
    g: FactorGraph, view: _ClauseView, x: int, Q: AbstractSet[int], theta: float
) -> list[int]:
    low, high = 0.1 * theta * g.k, 10 * theta * g.k
    return [
        a
        for a in _incident(g, x)
        if len((view.members[a] & Q) - {x}) <= 1 and low <= view.length[a] <= high
    ]


def n_leq1(g: FactorGraph, x: int, Q: AbstractSet[int], theta: float) -> set[int]:
    """
    Clauses b containing x with at most one other member in Q and
    0.1 theta k <= |N(b)| <= 10 theta k.

    Raises:
        InvalidVariableError: ``x`` is not alive.
    """
    if not (0 < x <= g.n and g.alive[x]):
        raise InvalidVariableError(f"x{x} is not an unassigned variable.")
    return set(_n_leq1(g, _ClauseView.of(g), x, Q, theta))


def _n_minus_t(f: CnfFormula) -> int:
    return len(f.alive)


def check_q0(f: CnfFormula) -> ConditionReport:
    """
    Few redundant clauses and few variables of degree above ln n.

    Both counts are compared with ``Q0_THRESHOLD_SCALE * n / ln n``.
    """
    n = max(f.n, 2)
    threshold = settings.Q0_THRESHOLD_SCALE * n / math.log(n)
    redundant = len(redundant_clause_ids(f))
    high_degree = sum(1 for d in variable_degrees(f).values() if d > math.log(n))
    passed = redundant <= threshold and high_degree <= threshold
    return ConditionReport(
        condition="Q0",
        parameters={"n": f.n, "m": f.m, "scale": settings.Q0_THRESHOLD_SCALE},
        measured={"redundant": redundant, "high_degree": high_degree},
        threshold={"redundant": threshold, "high_degree": threshold},
        verdict="pass" if passed else "fail",
    )


def check_q1(f: CnfFormula, delta: float, theta: float) -> ConditionReport:
    """Few variables in clauses of abnormal length, few of heavy clause weight."""
    _check_theta(theta)
    g = build(f)
    view = _ClauseView.of(g)
    tk = theta * g.k
    mass = delta * _n_minus_t(f)
    abnormal = 0
    heavy = 0
    for x in g.alive_vars:
        clauses = _incident(g, int(x))
        if any(view.length[a] < tk / 10 or view.length[a] > 10 * tk for a in clauses):
            abnormal += 1
        weight = math.fsum(2.0 ** -view.length[a] for a in clauses)
        if tk**3 * delta * weight > 1:
            heavy += 1
    passed = abnormal <= 1e-5 * mass and heavy <= 1e-4 * mass
    return ConditionReport(
        condition="Q1",
        parameters={"delta": delta, "theta": theta, "k": g.k},
        measured={"abnormal_length": abnormal, "heavy_weight": heavy},
        threshold={"abnormal_length": 1e-5 * mass, "heavy_weight": 1e-4 * mass},
        verdict="pass" if passed else "fail",
    )


def _check_window(name: str, size: int, low: float, high: float) -> None:
    if not low <= size <= high:
        raise WindowError(f"{name} needs {low:.6g} <= |Q| <= {high:.6g}, got |Q| = {size}.")


@dataclass(frozen=True)
class _Q2Sums:
    single: float
    multiple: float
    signed: float


def _q2_sums(
    g: FactorGraph, view: _ClauseView, x: int, Q: AbstractSet[int], theta: float
) -> _Q2Sums:
    single, multiple = [], []
    for a in _incident(g, x):
        inside = len((view.members[a] & Q) - {x})
        if inside == 1:
            single.append(2.0 ** -view.length[a])
        elif inside > 1:
            multiple.append(2.0 ** (inside - view.length[a]))
    signed = [
        view.sign(a, x) * 2.0 ** -view.length[a] for a in _n_leq1(g, view, x, Q, theta)
    ]
    return _Q2Sums(math.fsum(single), math.fsum(multiple), math.fsum(signed))


def check_q2(
    f: CnfFormula, delta: float, theta: float, Q: AbstractSet[int]
) -> ConditionReport:
    """
    Few variables with a heavy neighbourhood around Q or uncancelled signs.

    Raises:
        WindowError: |Q| > delta * (n - t).
    """
    _check_theta(theta)
    mass = delta * _n_minus_t(f)
    _check_window("Q2", len(Q), 0, mass)
    g = build(f)
    view = _ClauseView.of(g)
    tk = theta * g.k
    counts = {"single": 0, "multiple": 0, "signed": 0, "any": 0}
    for x in g.alive_vars:
        sums = _q2_sums(g, view, int(x), Q, theta)
        flags = {
            "single": sums.single > tk**5 * delta,
            "multiple": sums.multiple > delta / tk,
            "signed": abs(sums.signed) > delta / 1000,
        }
        for key, flagged in flags.items():
            counts[key] += flagged
        counts["any"] += any(flags.values())
    return ConditionReport(
        condition="Q2",
        parameters={"delta": delta, "theta": theta, "k": g.k, "q_size": len(Q)},
        measured={key: float(value) for key, value in counts.items()},
        threshold={"any": 1e-4 * mass},
        verdict="pass" if counts["any"] <= 1e-4 * mass else "fail",
    )


def check_q3(
    f: CnfFormula, delta: float, theta: float, Q: AbstractSet[int], z: float
) -> ConditionReport:
    """
    Clauses with at least a z-fraction of members in Q have small total length.

    Raises:
        WindowError: z outside [0.01, 1] or |Q| outside
            [0.01 delta (n - t), 100 delta (n - t)].
    """
    _check_theta(theta)
    if not 0.01 <= z <= 1:
        raise WindowError(f"Q3 needs 0.01 <= z <= 1, got z = {z}.")
    mass = delta * _n_minus_t(f)
    _check_window("Q3", len(Q), 0.01 * mass, 100 * mass)
    total = 0
    for c in f.clauses:
        members = set(c.variables)
        if len(members & Q) >= z * len(c):
            total += len(c)
    threshold = 1.01 * len(Q) / z
    return ConditionReport(
        condition="Q3",
        parameters={"delta": delta, "theta": theta, "z": z, "q_size": len(Q)},
        measured={"length_sum": total},
        threshold={"length_sum": threshold},
        verdict="pass" if total <= threshold else "fail",
    )


@dataclass(frozen=True)
class LambdaOperator:
    """Square matrix indexed by ``variables`` (ascending alive variables)."""

    matrix: np.ndarray
    variables: tuple[int, ...]

    @property
    def dim(self) -> int:
        return len(self.variables)

    def entry(self, x: int, y: int) -> float:
        index = {v: i for i, v in enumerate(self.variables)}
        return float(self.matrix[index[x], index[y]])

    def is_symmetric(self) -> bool:
        return bool(np.array_equal(self.matrix, self.matrix.T))

    def entrywise_l1(self) -> float:
        return float(np.abs(self.matrix).sum())


def lambda_q(
    f: CnfFormula,
    Q: AbstractSet[int],
    theta: float,
    weight_shift: int | None = None,
) -> LambdaOperator:
    """
    Signed weighted adjacency operator restricted to the N_{<=1}(x, Q) clauses.

    Entry (x, y) sums 2^(shift - |N(b)|) sign(x, b) sign(y, b) over
    b in N_{<=1}(x, Q) containing y != x; shift is ``LAMBDA_WEIGHT_SHIFT``
    unless given (0 or 1).

    Examples:
        >>> f = CnfFormula.from_clauses(2, [[1, -2]])
        >>> lambda_q(f, set(), theta=1.0).matrix.tolist()
        [[0.0, -0.25], [-0.25, 0.0]]
    """
    _check_theta(theta)
    shift = settings.LAMBDA_WEIGHT_SHIFT if weight_shift is None else weight_shift
    g = build(f)
    view = _ClauseView.of(g)
    variables = tuple(int(x) for x in g.alive_vars)
    index = {x: i for i, x in enumerate(variables)}
    matrix = np.zeros((len(variables), len(variables)))
    for x in variables:
        for a in _n_leq1(g, view, x, Q, theta):
            weight = 2.0 ** (shift - view.length[a]) * view.sign(a, x)
            for y, s in view.signs[a]:
                if y != x:
                    matrix[index[x], index[y]] += weight * s
    return LambdaOperator(matrix=matrix, variables=variables)


def _as_matrix(operator: LambdaOperator | np.ndarray) -> np.ndarray:
    matrix = operator.matrix if isinstance(operator, LambdaOperator) else operator
    return np.asarray(matrix, dtype=float)


def _sign_rows(start: int, stop: int, dim: int) -> np.ndarray:
    """Rows of +-1 vectors whose first coordinate is +1, by bit pattern."""
    codes = np.arange(start, stop, dtype=np.int64)[:, None]
    bits = (codes >> np.arange(dim - 1, dtype=np.int64)) & 1
    signs = 1.0 - 2.0 * bits
    return np.hstack([np.ones((stop - start, 1)), signs])


def cutnorm_exact(operator: LambdaOperator | np.ndarray) -> float:
    """
    max over nonzero zeta of ||L zeta||_1 / ||zeta||_inf, by enumerating +-1 vectors.

    Raises:
        BudgetExceededError: dimension above ``CUTNORM_EXACT_MAX_DIM``.

    Examples:
        >>> cutnorm_exact(np.array([[0.0, 1.0], [1.0, 0.0]]))
        2.0
    """
    matrix = _as_matrix(operator)
    dim = matrix.shape[0]
    if dim > settings.CUTNORM_EXACT_MAX_DIM:
        raise BudgetExceededError(
            f"Exact cut norm enumerates 2^{dim} sign vectors; the limit is "
            f"dimension {settings.CUTNORM_EXACT_MAX_DIM}."
        )
    if dim == 0:
        return 0.0
    # zeta and -zeta give the same norm, so fix zeta_0 = +1.
    total = 1 << (dim - 1)
    best = 0.0
    for start in range(0, total, _CHUNK):
        rows = _sign_rows(start, min(total, start + _CHUNK), dim)
        best = max(best, float(np.abs(rows @ matrix.T).sum(axis=1).max()))
    return best


def _subset_rows(codes: np.ndarray, dim: int) -> np.ndarray:
    return ((codes[:, None] >> np.arange(dim, dtype=np.int64)) & 1).astype(float)


def _best_disjoint(matrix: np.ndarray, indicators: np.ndarray) -> float:
    """max over B disjoint from A of |<L 1_A, 1_B>| for every row 1_A."""
    weights = (indicators @ matrix.T) * (1.0 - indicators)
    positive = np.clip(weights, 0.0, None).sum(axis=1)
    negative = np.clip(-weights, 0.0, None).sum(axis=1)
    return float(np.maximum(positive, negative).max(initial=0.0))


def max_bilinear(
    operator: LambdaOperator | np.ndarray,
    mode: Literal["exhaustive", "sampled"] = "exhaustive",
    samples: int | None = None,
    seed: int = 0,
) -> float:
    """
    max over disjoint A, B of |<L 1_A, 1_B>|.

    For each A the optimal B collects either every positive or every negative
    coordinate of L 1_A outside A, so only A is enumerated (all 2^d subsets
    in exhaustive mode, random ones in sampled mode).
    """
    matrix = _as_matrix(operator)
    dim = matrix.shape[0]
    if dim == 0:
        return 0.0
    if mode == "exhaustive":
        if dim > settings.AB_EXHAUSTIVE_MAX_DIM:
            raise BudgetExceededError(
                f"Exhaustive bilinear search enumerates 2^{dim} sets; the limit is "
                f"dimension {settings.AB_EXHAUSTIVE_MAX_DIM}."
            )
        best = 0.0
        for start in range(0, 1 << dim, _CHUNK):
            codes = np.arange(start, min(1 << dim, start + _CHUNK), dtype=np.int64)
            best = max(best, _best_disjoint(matrix, _subset_rows(codes, dim)))
        return best
    rng = np.random.default_rng(seed)
    count = samples if samples is not None else settings.CUTNORM_SAMPLES
    indicators = (rng.random((count, dim)) < 0.5).astype(float)
    # Singletons are cheap and catch single heavy columns.
    indicators = np.vstack([np.eye(dim), indicators])
    return _best_disjoint(matrix, indicators)


def cutnorm_bound(
    operator: LambdaOperator | np.ndarray,
    mode: Literal["exhaustive", "sampled"] = "exhaustive",
    samples: int | None = None,
    seed: int = 0,
) -> float:
    """
    24 times the maximum bilinear form over disjoint indicator pairs.

    For zero-diagonal matrices the exhaustive value bounds the cut norm from
    above. In sampled mode the maximum is only estimated from below, so the
    result is a heuristic.

    Examples:
        >>> cutnorm_bound(np.array([[0.0, 1.0], [1.0, 0.0]]))
        24.0
    """
    if mode == "sampled":
        logger.warning("Sampled cut-norm bound is a heuristic estimate, not a proof")
    return 24 * max_bilinear(operator, mode, samples, seed)


def cutnorm_lower(
    operator: LambdaOperator | np.ndarray, samples: int | None = None, seed: int = 0
) -> float:
    """max of ||L zeta||_1 over random +-1 vectors; never exceeds the cut norm."""
    matrix = _as_matrix(operator)
    dim = matrix.shape[0]
    if dim == 0:
        return 0.0
    rng = np.random.default_rng(seed)
    count = samples if samples is not None else settings.CUTNORM_SAMPLES
    rows = np.where(rng.random((count, dim)) < 0.5, -1.0, 1.0)
    return float(np.abs(rows @ matrix.T).sum(axis=1).max())


def check_q4(
    f: CnfFormula, delta: float, theta: float, Q: AbstractSet[int], seed: int = 0
) -> ConditionReport:
    """
    Cut norm of ``lambda_q`` against delta^4 (n - t).

    The verdict is "proved <=" or "proved >" when the norm is computed exactly
    (dimension up to ``CUTNORM_EXACT_MAX_DIM``). Above that a sampled lower
    bound exceeding the threshold proves ">", the entrywise l1 norm at or
    below it proves "<=", and anything else is "inconclusive".

    Raises:
        WindowError: |Q| > 10 delta (n - t).
    """
    _check_theta(theta)
    mass = delta * _n_minus_t(f)
    _check_window("Q4", len(Q), 0, 10 * mass)
    operator = lambda_q(f, Q, theta)
    threshold = delta**4 * _n_minus_t(f)
    measured: dict[str, float] = {"dim": operator.dim}
    verdict: Verdict
    if operator.dim <= settings.CUTNORM_EXACT_MAX_DIM:
        norm = cutnorm_exact(operator)
        measured["cutnorm"] = norm
        verdict = "proved <=" if norm <= threshold else "proved >"
    else:
        lower = cutnorm_lower(operator, seed=seed)
        upper = operator.entrywise_l1()
        measured.update(lower=lower, upper=upper)
        if lower > threshold:
            verdict = "proved >"
        elif upper <= threshold:
            verdict = "proved <="
        else:
            verdict = "inconclusive"
            logger.warning(
                f"Q4 inconclusive: cut norm in [{lower:.6g}, {upper:.6g}], "
                f"threshold {threshold:.6g}"
            )
    return ConditionReport(
        condition="Q4",
        parameters={"delta": delta, "theta": theta, "q_size": len(Q)},
        measured=measured,
        threshold={"cutnorm": threshold},
        verdict=verdict,
    )


def _not_applicable(condition: str, error: WindowError) -> ConditionReport:
    logger.warning(f"{condition} skipped: {error}")
    return ConditionReport(
        condition=condition,
        parameters={},
        measured={},
        threshold={},
        verdict="inconclusive",
    )


def check_quasirandom(
    f: CnfFormula,
    delta: float,
    theta: float,
    Q: AbstractSet[int] | None = None,
    z: float = 1.0,
    bp_settings: BpSettings | None = None,
    seed: int = 0,
) -> list[ConditionReport]:
    """
    Run Q0-Q4 on ``f``.

    Q defaults to the set of (delta, t)-biased variables. A condition whose
    |Q| window excludes the set is reported as "inconclusive".
    """
    if Q is None:
        Q = bias_report(f, bp_settings, DeltaSchedule.fixed(delta, n=f.n, k=f.k)).biased_vars
    reports = [check_q0(f), check_q1(f, delta, theta)]
    checks = {
        "Q2": lambda: check_q2(f, delta, theta, Q),
        "Q3": lambda: check_q3(f, delta, theta, Q, z),
        "Q4": lambda: check_q4(f, delta, theta, Q, seed),
    }
    for condition, check in checks.items():
        try:
            reports.append(check())
        except WindowError as error:
            reports.append(_not_applicable(condition, error))
    return reports


def write_condition_reports(reports: Iterable[ConditionReport], path: str) -> None:
    frame = pd.DataFrame([r.as_row() for r in reports])
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT)
