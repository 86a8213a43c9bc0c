"""
Experiment configuration, sweeps, probes and replay.

A run is described by ``HarnessSettings``: command-line flags, optionally
preceded by a flat ``key=value`` file given with ``--config`` whose keys are
the flag names. Flags win over the file; process environment variables are
never read. ``to_experiment`` and ``to_grid`` split the settings into the
algorithm side (``ExperimentConfig``) and the cross product of (k, n, r)
values (``SweepGrid``).

Seeds fan out from the master seed by position: grid point p uses
``derive_seed(seed, p)``, and trial i of that point derives its formula and
algorithm seeds from (point seed, i).
"""

from __future__ import annotations

import itertools
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterator, Sequence

import numpy as np
import pandas as pd
from dotenv import dotenv_values
from loguru import logger
from pydantic import (
    BaseModel,
    ConfigDict,
    Field,
    ValidationError,
    field_validator,
    model_validator,
)
from pydantic_settings import (
    BaseSettings,
    PydanticBaseSettingsSource,
    SettingsConfigDict,
    SettingsError,
)
from tqdm import tqdm

from bp_engine import BpSettings, StopRule
from commons import SCHEMA_VERSION, clause_count
from custom_types import LogLevels, ModelName, PolicyName, ProbeKind, StopRuleName
from decimation import (
    AlgorithmSettings,
    DecimationResult,
    DecimationStep,
    GeneratorParams,
    SuccessEstimate,
    TrialOutput,
    estimate_success,
    policy_from_name,
    run_trial,
    step_key,
    trace_hash,
)
from exact_oracle import hypothesis_probe
from exceptions import ConfigError, InvalidParametersError, ReproducibilityError
from formula import CnfFormula, GenModel, check_parameters, decimate_many, generate
from models import SweepRow, TraceFile, TrialRow
from quasirandomness import (
    DeltaSchedule,
    balancedness_probe,
    check_quasirandom,
    default_probe_times,
)
from service.dimacs import read_dimacs, write_dimacs
from service.report import sibling, write_table, write_workbook
from service.seeding import ALGORITHM_STREAM, FORMULA_STREAM, derive_seed
from settings import settings


class HarnessSettings(BaseSettings):
    """Command-line surface of the harness."""

    model: ModelName = "proper"
    k: list[int] = [3]
    n: list[int] = [200]
    r: list[float] | None = None
    m: int | None = Field(default=None, ge=0)
    omega: int | None = Field(default=None, ge=0)
    policy: PolicyName = "natural"
    c: float = Field(default_factory=lambda: settings.SCHEDULE_C, gt=0)
    trials: int = Field(default=10, ge=1)
    seed: int = 0
    out: Path = Path("results.csv")
    jobs: int = Field(default=1, ge=1)
    probe: ProbeKind | None = None
    budget: int = Field(default_factory=lambda: settings.COUNT_BUDGET, ge=1)

    stop_rule: StopRuleName = "fixed-omega"
    tolerance: float = Field(default_factory=lambda: settings.FP_TOLERANCE, gt=0)
    max_iter: int | None = Field(default=None, ge=1)
    abort: bool = True
    guarded: bool = False
    delta: float | None = Field(default=None, ge=0)
    t_values: list[int] | None = None
    samples: int = Field(default=100, ge=1)
    z: float = 1.0
    traces: Path | None = None
    replay: Path | None = None
    config: Path | None = None
    log_level: LogLevels = Field(default_factory=lambda: settings.LOG_LEVEL)

    model_config = SettingsConfigDict(
        cli_prog_name="bpdec-lab",
        cli_implicit_flags=True,
        extra="ignore",
    )

    @classmethod
    def settings_customise_sources(
        cls,
        settings_cls: type[BaseSettings],
        init_settings: PydanticBaseSettingsSource,
        env_settings: PydanticBaseSettingsSource,
        dotenv_settings: PydanticBaseSettingsSource,
        file_secret_settings: PydanticBaseSettingsSource,
    ) -> tuple[PydanticBaseSettingsSource, ...]:
        return (init_settings,)

    @field_validator("k", "n", "r", "t_values", mode="before")
    @classmethod
    def split_list(cls, value: Any) -> Any:
        if isinstance(value, str):
            text = value.strip().strip("[]").replace(" ", ",")
            return [item for item in text.split(",") if item]
        if isinstance(value, (int, float)):
            return [value]
        return value

    @model_validator(mode="after")
    def check_density(self) -> HarnessSettings:
        if self.r is not None and self.m is not None:
            raise ValueError("r and m are mutually exclusive.")
        if not self.k or not self.n or self.r == []:
            raise ValueError("Grid lists must be nonempty.")
        return self

    def to_experiment(self) -> ExperimentConfig:
        bp = BpSettings(
            omega=self.omega,
            stop_rule=StopRule(self.stop_rule),
            tolerance=self.tolerance,
            max_iter=self.max_iter,
        )
        return ExperimentConfig(
            model=GenModel(self.model),
            algorithm=AlgorithmSettings(
                bp=bp,
                policy=policy_from_name(self.policy),
                abort_on_contradiction=self.abort,
                guarded=self.guarded,
                c=self.c,
                delta=self.delta,
            ),
            c=self.c,
            trials=self.trials,
            seed=self.seed,
            out=self.out,
            jobs=self.jobs,
            budget=self.budget,
            samples=self.samples,
            t_values=self.t_values,
            z=self.z,
            traces=self.traces,
        )

    def to_grid(self) -> SweepGrid:
        r = self.r if self.r is not None or self.m is not None else [2.0]
        return SweepGrid(k=self.k, n=self.n, r=r, m=self.m)


def read_config(path: Path) -> dict[str, str]:
    """
    Flat ``key=value`` file; keys must be flag names.

    Raises:
        ConfigError: missing file or unknown key.
    """
    if not path.is_file():
        raise ConfigError(f"Config file {path} does not exist.")
    values = dotenv_values(path)
    known = set(HarnessSettings.model_fields) - {"config"}
    unknown = sorted(set(values) - known)
    if unknown:
        raise ConfigError(f"Unknown keys in {path}: {', '.join(unknown)}.")
    return {key: value for key, value in values.items() if value not in (None, "")}


def load_settings(argv: Sequence[str] | None = None) -> HarnessSettings:
    """
    Resolve flags over the optional config file.

    Raises:
        ConfigError: invalid values or conflicting options.
    """
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        cli = HarnessSettings(_cli_parse_args=argv)
        values: dict[str, Any] = read_config(cli.config) if cli.config else {}
        values.update(cli.model_dump(include=cli.model_fields_set))
        return HarnessSettings(**values)
    except (ValidationError, SettingsError) as error:
        raise ConfigError(str(error)) from error


class ExperimentConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    model: GenModel = GenModel.PROPER_UNIFORM
    algorithm: AlgorithmSettings = AlgorithmSettings()
    c: float = Field(default_factory=lambda: settings.SCHEDULE_C, gt=0)
    trials: int = Field(default=10, ge=1)
    seed: int = 0
    out: Path = Path("results.csv")
    jobs: int = Field(default=1, ge=1)
    budget: int = Field(default_factory=lambda: settings.COUNT_BUDGET, ge=1)
    samples: int = Field(default=100, ge=1)
    t_values: list[int] | None = None
    z: float = 1.0
    traces: Path | None = None


class GridPoint(BaseModel):
    index: int
    k: int
    n: int
    m: int
    r: float


class SweepGrid(BaseModel):
    """Cross product of k, n and r (or a fixed m) values, in that nesting order."""

    k: list[int] = Field(min_length=1)
    n: list[int] = Field(min_length=1)
    r: list[float] | None = None
    m: int | None = None

    @model_validator(mode="after")
    def check_density(self) -> SweepGrid:
        if (self.r is None) == (self.m is None):
            raise ValueError("Exactly one of r and m must be given.")
        if self.r is not None and not self.r:
            raise ValueError("r must be nonempty.")
        return self

    def points(self) -> Iterator[GridPoint]:
        densities: list[float | None] = list(self.r) if self.r is not None else [None]
        for index, (k, n, r) in enumerate(itertools.product(self.k, self.n, densities)):
            m = clause_count(r, n) if r is not None else self.m
            assert m is not None
            yield GridPoint(index=index, k=k, n=n, m=m, r=r if r is not None else m / n)

    def __len__(self) -> int:
        return len(self.k) * len(self.n) * (len(self.r) if self.r is not None else 1)


def validate_grid(cfg: ExperimentConfig, grid: SweepGrid) -> list[GridPoint]:
    points = list(grid.points())
    for point in points:
        try:
            check_parameters(cfg.model, point.n, point.m, point.k)
        except InvalidParametersError as error:
            raise ConfigError(f"Grid point k={point.k} n={point.n} m={point.m}: {error}")
    return points


@dataclass
class SweepResult:
    rows: pd.DataFrame
    trials: pd.DataFrame
    outputs: dict[int, list[TrialOutput]] = field(default_factory=dict)


def _sweep_row(
    cfg: ExperimentConfig,
    point: GridPoint,
    point_seed: int,
    estimate: SuccessEstimate,
    records: pd.DataFrame,
) -> SweepRow:
    algorithm = cfg.algorithm
    return SweepRow(
        point=point.index,
        model=cfg.model.value,
        k=point.k,
        n=point.n,
        r=point.r,
        m=point.m,
        omega=algorithm.bp.resolve_omega(point.n),
        c=cfg.c,
        policy=algorithm.policy.kind,
        guarded=algorithm.guarded,
        abort=algorithm.abort_on_contradiction,
        stop_rule=algorithm.bp.stop_rule.value,
        seed=cfg.seed,
        point_seed=point_seed,
        trials=estimate.trials,
        successes=estimate.successes,
        rate=estimate.rate,
        ci_low=estimate.ci_low,
        ci_high=estimate.ci_high,
        biased_fraction_half=_mean(records["biased_fraction_half"]),
        biased_fraction_horizon=_mean(records["biased_fraction_horizon"]),
        mean_contradiction_t=_mean(records["contradiction_t"]),
    )


def _mean(column: pd.Series) -> float:
    values = pd.to_numeric(column, errors="coerce")
    return float(values.mean()) if values.notna().any() else float("nan")


def run_sweep(cfg: ExperimentConfig, grid: SweepGrid, progress: bool = False) -> SweepResult:
    """
    One aggregate row per grid point, plus all per-trial rows.

    Raises:
        ConfigError: a grid point cannot be generated (e.g. m above the
            clause universe of a distinct-clause model).
    """
    points = validate_grid(cfg, grid)
    rows, trial_rows = [], []
    outputs: dict[int, list[TrialOutput]] = {}
    for point in tqdm(points, desc="grid", disable=not progress):
        point_seed = derive_seed(cfg.seed, point.index)
        source = GeneratorParams(model=cfg.model, n=point.n, m=point.m, k=point.k)
        estimate = estimate_success(
            source,
            cfg.algorithm,
            trials=cfg.trials,
            seed=point_seed,
            jobs=cfg.jobs,
            keep_traces=cfg.traces is not None,
            progress=progress,
        )
        records = [
            TrialRow(point=point.index, k=point.k, n=point.n, m=point.m, **r.model_dump())
            for r in estimate.records
        ]
        frame = pd.DataFrame([r.model_dump() for r in records])
        rows.append(_sweep_row(cfg, point, point_seed, estimate, frame).model_dump())
        trial_rows.extend(r.model_dump() for r in records)
        if estimate.outputs:
            outputs[point.index] = estimate.outputs
        logger.info(
            f"k={point.k} n={point.n} m={point.m}: {estimate.successes}/{estimate.trials} "
            f"successes (rate {estimate.rate:.3f})"
        )
    result = SweepResult(
        rows=pd.DataFrame(rows, columns=list(SweepRow.model_fields)),
        trials=pd.DataFrame(trial_rows, columns=list(TrialRow.model_fields)),
        outputs=outputs,
    )
    if cfg.traces is not None:
        write_traces(cfg, result)
    return result


def output_meta(cfg: ExperimentConfig) -> dict[str, object]:
    return {"c": cfg.c, "seed": cfg.seed, "model": cfg.model.value}


def write_results(result: SweepResult, cfg: ExperimentConfig) -> list[Path]:
    """Aggregate table at ``cfg.out`` and per-trial table next to it (or one workbook)."""
    meta = output_meta(cfg)
    if cfg.out.suffix == ".xlsx":
        return [write_workbook({"sweep": result.rows, "trials": result.trials}, cfg.out, meta)]
    return [
        write_table(result.rows, cfg.out, meta),
        write_table(result.trials, sibling(cfg.out, "trials"), meta),
    ]


def write_trace(
    path: str | Path,
    f: CnfFormula,
    algorithm: AlgorithmSettings,
    seed: int,
    result: DecimationResult,
) -> Path:
    trace = result.trace
    document = TraceFile(
        schema_version=SCHEMA_VERSION,
        dimacs=write_dimacs(f),
        algorithm=algorithm.model_dump(mode="json"),
        seed=seed,
        steps=[step.model_dump(mode="json") for step in trace.steps],
        outcome=trace.outcome.value,
        contradiction_t=trace.contradiction_t,
        trace_hash=trace_hash(trace),
    )
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(document.model_dump_json(indent=1))
    return path


def read_trace(path: str | Path) -> TraceFile:
    return TraceFile.model_validate_json(Path(path).read_text())


def write_traces(cfg: ExperimentConfig, result: SweepResult) -> None:
    assert cfg.traces is not None
    for point, outputs in result.outputs.items():
        for output in outputs:
            assert output.formula is not None and output.result is not None
            base = cfg.traces / f"point{point}_trial{output.record.trial}"
            seed = output.record.algorithm_seed
            write_trace(
                base.with_suffix(".json"), output.formula, cfg.algorithm, seed, output.result
            )
            output.result.trace.to_csv(base.with_suffix(".csv"), {"seed": seed})


def replay(path: str | Path) -> str:
    """
    Re-run a recorded trace and compare it step by step.

    Returns:
        The trace hash, when every step matches.

    Raises:
        ReproducibilityError: the re-derived trace differs; ``step`` is the
            first divergent t.
    """
    document = read_trace(path)
    f = read_dimacs(document.dimacs)
    algorithm = AlgorithmSettings.model_validate(document.algorithm)
    recorded = [DecimationStep.model_validate(step) for step in document.steps]
    fresh = run_trial(f, algorithm, document.seed).trace
    for old, new in zip(recorded, fresh.steps):
        if step_key(old) != step_key(new):
            raise ReproducibilityError(
                f"Trace {path} diverges at t={new.t}: recorded x{old.var}={int(old.bit)} "
                f"(mu {old.mu!r}), replayed x{new.var}={int(new.bit)} (mu {new.mu!r}).",
                step=new.t,
            )
    if len(recorded) != len(fresh.steps):
        shorter = min(len(recorded), len(fresh.steps))
        raise ReproducibilityError(
            f"Trace {path} has {len(recorded)} steps, replay produced {len(fresh.steps)}.",
            step=f.t + shorter + 1,
        )
    digest = trace_hash(fresh)
    if digest != document.trace_hash or fresh.outcome.value != document.outcome:
        raise ReproducibilityError(f"Trace {path}: hash or outcome does not match.")
    logger.info(f"Replay of {path} matches ({digest[:12]})")
    return digest


def _probe_formula(cfg: ExperimentConfig, point: GridPoint) -> tuple[CnfFormula, int]:
    point_seed = derive_seed(cfg.seed, point.index)
    f = generate(cfg.model, point.n, point.m, point.k, derive_seed(point_seed, FORMULA_STREAM))
    return f, derive_seed(point_seed, ALGORITHM_STREAM)


def _decimated_at(f: CnfFormula, t: int, seed: int) -> CnfFormula:
    """``f`` after t random assignments along a random order."""
    rng = np.random.default_rng(seed)
    order = rng.permutation(sorted(f.alive))[:t]
    bits = rng.random(t) < 0.5
    return decimate_many(f, zip((int(x) for x in order), (bool(b) for b in bits)))


def run_probe(kind: ProbeKind, cfg: ExperimentConfig, grid: SweepGrid) -> pd.DataFrame:
    """Dispatch one of the bias, q and hypothesis probes over the grid."""
    points = validate_grid(cfg, grid)
    bp = cfg.algorithm.bp
    frames = []
    for point in points:
        f, seed = _probe_formula(cfg, point)
        sched = DeltaSchedule.for_formula(f, cfg.c)
        echo = {"point": point.index, "k": point.k, "n": point.n, "m": point.m, "r": point.r}
        match kind:
            case "bias":
                rows = [
                    row.model_dump()
                    for row in balancedness_probe(f, sched, bp, cfg.samples, seed, cfg.t_values)
                ]
            case "q":
                rows = []
                for t in cfg.t_values or default_probe_times(f, sched):
                    f_t = _decimated_at(f, t, derive_seed(seed, t))
                    for report in check_quasirandom(
                        f_t, sched.delta(t), 1 - t / f.n, z=cfg.z, bp_settings=bp, seed=seed
                    ):
                        rows.append({"t": t, **report.as_row()})
            case "hypothesis":
                omega = bp.resolve_omega(f.n)
                rows = [
                    row.model_dump()
                    for row in hypothesis_probe(f, omega, seed, cfg.budget, bp)
                ]
        frames.append(pd.DataFrame([{**echo, **row} for row in rows]))
    return pd.concat(frames, ignore_index=True) if frames else pd.DataFrame()


def write_probe(frame: pd.DataFrame, kind: ProbeKind, cfg: ExperimentConfig) -> Path:
    meta = {**output_meta(cfg), "probe": kind}
    if cfg.out.suffix == ".xlsx":
        return write_workbook({kind: frame}, cfg.out, meta)
    return write_table(frame, cfg.out, meta)
