from pydantic import BaseModel, ConfigDict, Field

from custom_types import ModelName, PolicyName, StopRuleName


class TrialRecord(BaseModel):
    """
    Outcome of one decimation trial.

    Attributes:
        trial: Index of the trial inside its grid point.
        formula_seed: Seed the trial's formula was generated with, -1 for a
            fixed input formula.
        algorithm_seed: Seed of the decimation run (order and bit streams).
        outcome: "satisfying", "contradiction" or "complete-but-unsat".
        success: Whether the assignment satisfies the formula.
        steps: Number of recorded steps.
        contradiction_t: First step that produced an empty clause.
        biased_fraction_half: Biased fraction of the alive variables at T/2.
        biased_fraction_horizon: Same at T; NaN when the run stopped earlier.
        coin_steps: Steps where the guarded driver used a fair coin.
        trace_hash: sha256 of the canonical trace.
    """

    trial: int
    formula_seed: int
    algorithm_seed: int
    outcome: str
    success: bool
    steps: int
    contradiction_t: int | None = None
    biased_fraction_half: float
    biased_fraction_horizon: float
    coin_steps: int = 0
    trace_hash: str


class TrialRow(TrialRecord):
    """A trial record tagged with its grid point."""

    point: int
    k: int
    n: int
    m: int


class SweepRow(BaseModel):
    """
    Aggregate of one grid point with the full parameter echo.

    ``rate`` is ``successes / trials``; the interval is the 95% Wilson score
    interval. Means skip trials that never reached the step in question.
    """

    point: int
    model: ModelName
    k: int
    n: int
    r: float
    m: int
    omega: int
    c: float
    policy: PolicyName
    guarded: bool
    abort: bool
    stop_rule: StopRuleName
    seed: int
    point_seed: int
    trials: int = Field(ge=1)
    successes: int
    rate: float
    ci_low: float
    ci_high: float
    biased_fraction_half: float
    biased_fraction_horizon: float
    mean_contradiction_t: float


class TraceFile(BaseModel):
    """Everything ``replay`` needs to re-derive a trace."""

    model_config = ConfigDict(ser_json_inf_nan="constants")

    schema_version: str
    dimacs: str
    algorithm: dict
    seed: int
    steps: list[dict]
    outcome: str
    contradiction_t: int | None = None
    trace_hash: str
