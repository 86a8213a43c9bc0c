"""
Decimation drivers.

``bpdec`` assigns the variables one at a time: it runs BP from the all-1/2
state on the current decimated formula, sets the chosen variable to true with
probability equal to its BP marginal, and simplifies. ``bpdec_guarded`` does
the same along a fixed order but falls back to a fair coin whenever the
current formula is not (delta_t, t)-balanced.

Every trial draws from two generators spawned from its seed, one for the
variable order and one for the bits, so changing the order policy does not
shift the bit draws.
"""

from __future__ import annotations

import hashlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from enum import StrEnum
from pathlib import Path
from typing import Annotated, Literal, Mapping, Sequence, Union

import numpy as np
import pandas as pd
from loguru import logger
from pydantic import BaseModel, ConfigDict, Field
from tqdm import tqdm

from bp_engine import BpSettings, marginals, run
from custom_types import PolicyName
from exceptions import InvalidParametersError
from factor_graph import FactorGraph, build
from formula import CnfFormula, GenModel, evaluate, generate
from models import TrialRecord
from quasirandomness import DeltaSchedule, biased_variables, is_balanced
from service.report import write_table
from service.seeding import ALGORITHM_STREAM, FORMULA_STREAM, derive_seed, trial_streams
from service.stats import wilson_interval


class NaturalOrder(BaseModel):
    kind: Literal["natural"] = "natural"


class RandomPermutation(BaseModel):
    """Uniform random order; drawn from the trial's order stream unless ``seed`` is set."""

    kind: Literal["random"] = "random"
    seed: int | None = None


class MaxBias(BaseModel):
    """Pick the alive variable with the largest |mu - 1/2|, lowest index on ties."""

    kind: Literal["max-bias"] = "max-bias"


class GivenOrder(BaseModel):
    kind: Literal["given"] = "given"
    order: tuple[int, ...]


OrderPolicy = Annotated[
    Union[NaturalOrder, RandomPermutation, MaxBias, GivenOrder],
    Field(discriminator="kind"),
]


def policy_from_name(name: PolicyName) -> OrderPolicy:
    policies: dict[str, OrderPolicy] = {
        "natural": NaturalOrder(),
        "random": RandomPermutation(),
        "max-bias": MaxBias(),
    }
    return policies[name]


class Outcome(StrEnum):
    SATISFYING = "satisfying"
    CONTRADICTION = "contradiction"
    COMPLETE_BUT_UNSAT = "complete-but-unsat"


class DecimationStep(BaseModel):
    """
    One assignment.

    ``mu`` and ``biased_count`` are measured on the formula before the step,
    with ``n_alive`` alive variables; clause statistics are taken after it.
    """

    model_config = ConfigDict(frozen=True)

    t: int
    var: int
    mu: float
    bit: bool
    biased_count: int
    n_alive: int
    n_clauses: int
    min_len: int
    max_len: int
    histogram: dict[int, int]
    branch: Literal["bp", "coin"] = "bp"


class DecimationTrace(BaseModel):
    steps: list[DecimationStep]
    outcome: Outcome
    contradiction_t: int | None = None

    def frame(self) -> pd.DataFrame:
        columns = ["t", "var", "mu", "bit", "biased_count", "n_clauses", "min_len", "max_len"]
        frame = pd.DataFrame(
            [step.model_dump(include=set(columns)) for step in self.steps], columns=columns
        )
        frame["bit"] = frame["bit"].astype(int)
        frame["outcome"] = self.outcome.value
        return frame

    def to_csv(self, path: str | Path, meta: Mapping[str, object] = {}) -> Path:
        """One row per step, the run outcome repeated in every row."""
        return write_table(self.frame(), path, meta)


class DecimationResult(BaseModel):
    assignment: dict[int, bool]
    trace: DecimationTrace

    @property
    def success(self) -> bool:
        return self.trace.outcome is Outcome.SATISFYING


def step_key(step: DecimationStep) -> str:
    """Canonical text of a step; floats in hex so equal keys mean equal bits."""
    return ",".join(
        [
            str(step.t),
            str(step.var),
            float(step.mu).hex(),
            str(int(step.bit)),
            str(step.biased_count),
            str(step.n_alive),
            str(step.n_clauses),
            str(step.min_len),
            str(step.max_len),
            step.branch,
        ]
    )


def trace_hash(trace: DecimationTrace) -> str:
    digest = hashlib.sha256()
    for step in trace.steps:
        digest.update(step_key(step).encode())
        digest.update(b"\n")
    digest.update(f"{trace.outcome.value}:{trace.contradiction_t}".encode())
    return digest.hexdigest()


def _initial_order(
    policy: OrderPolicy, alive: list[int], rng: np.random.Generator
) -> list[int] | None:
    match policy:
        case NaturalOrder():
            return alive
        case RandomPermutation(seed=None):
            return [int(x) for x in rng.permutation(alive)]
        case RandomPermutation(seed=seed):
            return [int(x) for x in np.random.default_rng(seed).permutation(alive)]
        case GivenOrder(order=order):
            if sorted(order) != alive:
                raise InvalidParametersError(
                    "Given order must be a permutation of the unassigned variables."
                )
            return list(order)
        case MaxBias():
            return None
    raise InvalidParametersError(f"Unknown order policy {policy!r}.")


def _clause_stats(g: FactorGraph) -> tuple[int, int, dict[int, int]]:
    lengths = g.clause_len
    if len(lengths) == 0:
        return 0, 0, {}
    counts = np.bincount(lengths)
    histogram = {int(length): int(c) for length, c in enumerate(counts) if c}
    return int(lengths.min()), int(lengths.max()), histogram


def _decimate(
    f: CnfFormula,
    bp_settings: BpSettings,
    policy: OrderPolicy,
    seed: int,
    abort_on_contradiction: bool,
    sched: DeltaSchedule,
    guarded: bool,
) -> DecimationResult:
    order_rng, bit_rng = trial_streams(seed)
    g = build(f)
    order = _initial_order(policy, sorted(f.alive), order_rng)
    steps: list[DecimationStep] = []
    contradiction_t: int | None = f.t if g.contradicted else None
    remaining = 0 if contradiction_t is not None and abort_on_contradiction else len(f.alive)
    for i in range(remaining):
        t = f.t + i + 1
        mu = marginals(run(g, bp_settings).state, g)
        delta = sched.delta(t)
        biased = biased_variables(g, mu, delta)
        if order is None:
            alive = g.alive_vars
            x = int(alive[np.argmax(np.abs(mu[alive] - 0.5))])
        else:
            x = order[i]
        branch: Literal["bp", "coin"] = "bp"
        p = float(mu[x])
        if guarded and not is_balanced(len(biased), delta, f.n, t):
            branch, p = "coin", 0.5
        bit = bool(bit_rng.random() < p)
        n_alive = len(g.alive_vars)
        g = g.decimate(x, bit)
        min_len, max_len, histogram = _clause_stats(g)
        steps.append(
            DecimationStep(
                t=t,
                var=x,
                mu=float(mu[x]),
                bit=bit,
                biased_count=len(biased),
                n_alive=n_alive,
                n_clauses=g.num_clauses,
                min_len=min_len,
                max_len=max_len,
                histogram=histogram,
                branch=branch,
            )
        )
        if contradiction_t is None and g.contradicted:
            contradiction_t = t
            logger.debug(f"Empty clause after assigning x{x} at t={t}")
            if abort_on_contradiction:
                break

    assignment = dict(g.fixed[f.t :])
    if contradiction_t is not None:
        outcome = (
            Outcome.CONTRADICTION if abort_on_contradiction else Outcome.COMPLETE_BUT_UNSAT
        )
    elif evaluate(f, assignment):
        outcome = Outcome.SATISFYING
    else:
        outcome = Outcome.COMPLETE_BUT_UNSAT
    trace = DecimationTrace(steps=steps, outcome=outcome, contradiction_t=contradiction_t)
    return DecimationResult(assignment=assignment, trace=trace)


def bpdec(
    f: CnfFormula,
    bp_settings: BpSettings | None = None,
    policy: OrderPolicy | None = None,
    seed: int = 0,
    abort_on_contradiction: bool = True,
    sched: DeltaSchedule | None = None,
) -> DecimationResult:
    """
    BP-guided decimation.

    Args:
        f: Formula to satisfy; already fixed variables stay fixed.
        bp_settings: BP iteration rule per step.
        policy: Variable order, natural by default.
        seed: Trial seed; order and bits use separate substreams.
        abort_on_contradiction: Stop at the first empty clause. Otherwise all
            variables are assigned and the trace records the first
            contradiction time.
        sched: Threshold used for the per-step biased counts in the trace.

    Returns:
        The assignment of the variables alive in ``f`` and the trace. Failure
        is reported through the trace outcome, never raised.

    Examples:
        >>> result = bpdec(CnfFormula.from_clauses(1, [[1]]))
        >>> result.assignment, result.trace.outcome.value
        ({1: True}, 'satisfying')
    """
    return _decimate(
        f,
        bp_settings or BpSettings(),
        policy or NaturalOrder(),
        seed,
        abort_on_contradiction,
        sched or DeltaSchedule.for_formula(f),
        guarded=False,
    )


def bpdec_guarded(
    f: CnfFormula,
    order: Sequence[int],
    sched: DeltaSchedule,
    bp_settings: BpSettings | None = None,
    seed: int = 0,
    abort_on_contradiction: bool = True,
) -> DecimationResult:
    """
    Decimation along ``order`` that uses the BP marginal only while balanced.

    Step t tests the formula before the step: if at most
    delta_t * (n - t) alive variables have |mu - 1/2| > delta_t the bit is
    drawn with the BP marginal, otherwise with probability 1/2. With the same
    order and seed, an infinite schedule reproduces ``bpdec`` exactly.
    """
    return _decimate(
        f,
        bp_settings or BpSettings(),
        GivenOrder(order=tuple(int(x) for x in order)),
        seed,
        abort_on_contradiction,
        sched,
        guarded=True,
    )


class GeneratorParams(BaseModel):
    """Draw a fresh formula per trial."""

    model_config = ConfigDict(frozen=True)

    model: GenModel = GenModel.PROPER_UNIFORM
    n: int = Field(ge=1)
    m: int = Field(ge=0)
    k: int = Field(ge=2)


class AlgorithmSettings(BaseModel):
    model_config = ConfigDict(frozen=True, ser_json_inf_nan="constants")

    bp: BpSettings = BpSettings()
    policy: OrderPolicy = NaturalOrder()
    abort_on_contradiction: bool = True
    guarded: bool = False
    c: float | None = Field(default=None, gt=0)
    delta: float | None = Field(default=None, ge=0)

    def schedule(self, f: CnfFormula) -> DeltaSchedule:
        if self.delta is not None:
            return DeltaSchedule.fixed(self.delta, n=f.n, k=f.k, r=f.m / f.n)
        return DeltaSchedule.for_formula(f, self.c)


def run_trial(
    f: CnfFormula, algorithm: AlgorithmSettings, seed: int
) -> DecimationResult:
    sched = algorithm.schedule(f)
    if not algorithm.guarded:
        return bpdec(
            f, algorithm.bp, algorithm.policy, seed, algorithm.abort_on_contradiction, sched
        )
    if isinstance(algorithm.policy, MaxBias):
        raise InvalidParametersError("The guarded driver needs an order fixed in advance.")
    order_rng, _ = trial_streams(seed)
    order = _initial_order(algorithm.policy, sorted(f.alive), order_rng)
    assert order is not None
    return bpdec_guarded(
        f, order, sched, algorithm.bp, seed, algorithm.abort_on_contradiction
    )


def _biased_fraction(trace: DecimationTrace, t: int) -> float:
    for step in trace.steps:
        if step.t == t:
            return step.biased_count / step.n_alive if step.n_alive else 0.0
    return float("nan")


def horizon_times(f: CnfFormula, sched: DeltaSchedule) -> tuple[int, int]:
    """Steps at which the biased fraction is reported: T/2 and T, clamped to [1, n]."""
    horizon = sched.horizon
    half = min(f.n, max(1, int(horizon // 2)))
    full = min(f.n, max(1, int(horizon)))
    return half, full


@dataclass(frozen=True)
class TrialOutput:
    record: TrialRecord
    formula: CnfFormula | None = None
    result: DecimationResult | None = None


def _trial(
    source: CnfFormula | GeneratorParams,
    algorithm: AlgorithmSettings,
    seed: int,
    index: int,
    keep: bool,
) -> TrialOutput:
    formula_seed = derive_seed(seed, index, FORMULA_STREAM)
    algorithm_seed = derive_seed(seed, index, ALGORITHM_STREAM)
    if isinstance(source, GeneratorParams):
        f = generate(source.model, source.n, source.m, source.k, formula_seed)
    else:
        f, formula_seed = source, -1
    result = run_trial(f, algorithm, algorithm_seed)
    half, full = horizon_times(f, algorithm.schedule(f))
    trace = result.trace
    record = TrialRecord(
        trial=index,
        formula_seed=formula_seed,
        algorithm_seed=algorithm_seed,
        outcome=trace.outcome.value,
        success=result.success,
        steps=len(trace.steps),
        contradiction_t=trace.contradiction_t,
        biased_fraction_half=_biased_fraction(trace, half),
        biased_fraction_horizon=_biased_fraction(trace, full),
        coin_steps=sum(step.branch == "coin" for step in trace.steps),
        trace_hash=trace_hash(trace),
    )
    if keep:
        return TrialOutput(record=record, formula=f, result=result)
    return TrialOutput(record=record)


def _trial_job(args: tuple) -> TrialOutput:
    return _trial(*args)


@dataclass(frozen=True)
class SuccessEstimate:
    trials: int
    successes: int
    rate: float
    ci_low: float
    ci_high: float
    records: list[TrialRecord]
    outputs: list[TrialOutput] = field(default_factory=list)


def estimate_success(
    source: CnfFormula | GeneratorParams,
    algorithm: AlgorithmSettings | None = None,
    trials: int = 1,
    seed: int = 0,
    jobs: int = 1,
    keep_traces: bool = False,
    progress: bool = False,
) -> SuccessEstimate:
    """
    Fraction of trials that end with a satisfying assignment.

    ``source`` is either one fixed formula or generator parameters, in which
    case every trial draws its own formula. Trial i uses seeds derived from
    (seed, i) only, so results do not depend on ``jobs``.
    """
    if trials < 1:
        raise InvalidParametersError(f"Need at least one trial, got {trials}.")
    algorithm = algorithm or AlgorithmSettings()
    tasks = [(source, algorithm, seed, i, keep_traces) for i in range(trials)]
    bar = tqdm(total=trials, disable=not progress, desc="trials", leave=False)
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            outputs = []
            for output in pool.map(_trial_job, tasks):
                outputs.append(output)
                bar.update()
    else:
        outputs = []
        for task in tasks:
            outputs.append(_trial_job(task))
            bar.update()
    bar.close()
    records = [output.record for output in outputs]
    successes = sum(record.success for record in records)
    low, high = wilson_interval(successes, trials)
    logger.debug(f"{successes}/{trials} successful trials")
    return SuccessEstimate(
        trials=trials,
        successes=successes,
        rate=successes / trials,
        ci_low=low,
        ci_high=high,
        records=records,
        outputs=outputs if keep_traces else [],
    )
