"""
Belief propagation for k-SAT.

A ``MessageState`` stores one number per edge, the log-odds
ln mu_{x->a}(1) - ln mu_{x->a}(0) of the variable-to-clause message, with
+-inf for a message that is exactly 1 or 0. Both probabilities are derived
from it (``expit`` of plus or minus the log-odds), so a message close to 1 is
never rounded into an exact zero factor. Clause-to-variable messages are
recomputed from it on demand:

* mu_{a->x}(z) = 1 when z is the value of x that satisfies a,
* otherwise 1 - prod_{y in N(a)\\x} mu_{y->a}(value of y that violates a).

The product over N(a)\\x is summed in log space column by column over the
clause, exact zeros counted apart, so the 1/2 fallback for a zero denominator
fires on true zeros only. Finite log-odds are kept inside +-700, where no
factor underflows. Updates are synchronous.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import StrEnum
from pathlib import Path
from typing import Literal

import numpy as np
import pandas as pd
from loguru import logger
from pydantic import BaseModel, ConfigDict, Field
from scipy.special import expit, log_expit, logit

from commons import FLOAT_FORMAT, default_max_iter, default_omega
from exceptions import InvalidVariableError
from factor_graph import FactorGraph
from settings import settings


class StopRule(StrEnum):
    FIXED_OMEGA = "fixed-omega"
    FIXED_POINT = "fixed-point"


class BpSettings(BaseModel):
    """
    How many BP iterations to run.

    ``omega`` and ``max_iter`` left as None resolve against the number of
    variables: omega = 10 * ceil(ln n), max_iter = 10 * that.
    """

    model_config = ConfigDict(frozen=True)

    omega: int | None = Field(default=None, ge=0)
    stop_rule: StopRule = StopRule.FIXED_OMEGA
    tolerance: float = Field(default_factory=lambda: settings.FP_TOLERANCE, gt=0)
    max_iter: int | None = Field(default=None, ge=1)
    schedule: Literal["synchronous"] = "synchronous"

    def resolve_omega(self, n: int) -> int:
        return self.omega if self.omega is not None else default_omega(n)

    def resolve_max_iter(self, n: int) -> int:
        return self.max_iter if self.max_iter is not None else default_max_iter(n)


# Largest finite log-odds; e^-700 is still a normal double.
LOG_ODDS_LIMIT = 700.0


@dataclass(frozen=True)
class MessageState:
    log_odds: np.ndarray
    iteration: int = 0

    @classmethod
    def from_mu(cls, mu: np.ndarray, iteration: int = 0) -> MessageState:
        """State holding the messages mu_{x->a}(1) given as probabilities."""
        return cls(log_odds=logit(np.asarray(mu, dtype=float)), iteration=iteration)

    @property
    def mu(self) -> np.ndarray:
        """mu_{x->a}(1) of every edge."""
        return expit(self.log_odds)

    def pair(self, edge: int) -> tuple[float, float]:
        """(mu_{x->a}(0), mu_{x->a}(1)) of one edge."""
        value = float(self.log_odds[edge])
        return float(expit(-value)), float(expit(value))


@dataclass(frozen=True)
class RunResult:
    state: MessageState
    iterations: int
    converged: bool
    max_change: float


def init(g: FactorGraph) -> MessageState:
    return MessageState(log_odds=np.zeros(g.num_edges), iteration=0)


def _violating_log(log_odds: np.ndarray, sign: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # ln mu_{y->a}((1 - sign(y,a)) / 2), with exact zeros flagged apart.
    arg = np.where(sign > 0, -log_odds, log_odds)
    zero = arg == -np.inf
    return np.where(zero, 0.0, log_expit(np.where(zero, 0.0, arg))), zero


def _others(values: np.ndarray, g: FactorGraph) -> np.ndarray:
    """For every edge, the sum of ``values`` over the other edges of its clause."""
    if g.num_edges == 0:
        return np.zeros(0)
    slots = g.clause_slots
    table = np.where(slots >= 0, values[slots], 0.0)
    others = np.empty_like(table)
    for j in range(table.shape[1]):
        others[:, j] = np.delete(table, j, axis=1).sum(axis=1)
    return others[g.edge_clause, g.edge_slot]


def _clause_log_messages(
    log_odds: np.ndarray, g: FactorGraph
) -> tuple[np.ndarray, np.ndarray]:
    """ln mu_{a->x} at the value of x that does not satisfy a, and its exact zeros."""
    log_factor, zero = _violating_log(log_odds, g.edge_sign)
    zeros_other = _others(zero.astype(float), g)
    logs_other = _others(log_factor, g)
    # Every other factor exactly 1 (or none at all): the message is a true zero.
    null = (zeros_other == 0) & (logs_other == 0.0)
    settled = (zeros_other > 0) | null
    log_u = np.log(-np.expm1(np.where(settled, -1.0, logs_other)))
    return np.where(settled, 0.0, log_u), null


def _side_index(g: FactorGraph) -> np.ndarray:
    # Clause messages of a positive occurrence weigh on x=0, negative ones on x=1.
    return 2 * g.edge_var + (g.edge_sign < 0)


def _side_sums(
    log_u: np.ndarray, zero_u: np.ndarray, g: FactorGraph
) -> tuple[np.ndarray, np.ndarray]:
    side = _side_index(g)
    size = 2 * (g.n + 1)
    zeros = np.bincount(side, weights=zero_u, minlength=size)
    logs = np.bincount(side, weights=log_u, minlength=size)
    return zeros, logs


def _log_odds(
    zeros0: np.ndarray, zeros1: np.ndarray, logs0: np.ndarray, logs1: np.ndarray
) -> np.ndarray:
    """ln P1 - ln P0 from zero counts and log sums of the nonzero factors."""
    value = np.clip(logs1 - logs0, -LOG_ODDS_LIMIT, LOG_ODDS_LIMIT)
    value = np.where(zeros0 > 0, np.inf, value)
    value = np.where(zeros1 > 0, -np.inf, value)
    return np.where((zeros0 > 0) & (zeros1 > 0), 0.0, value)


def clause_to_var(
    state: MessageState, g: FactorGraph, a: int, x: int, occurrence: int = 0
) -> tuple[float, float]:
    """
    The clause message (mu_{a->x}(0), mu_{a->x}(1)).

    Args:
        state: Current variable-to-clause messages.
        g: Factor graph the state belongs to.
        a: Clause id.
        x: Member variable of ``a``.
        occurrence: Which occurrence of ``x`` when it repeats inside ``a``.

    Raises:
        InvalidVariableError: ``x`` does not occur in ``a``.

    Examples:
        >>> from formula import CnfFormula
        >>> from factor_graph import build
        >>> g = build(CnfFormula.from_clauses(3, [[1, 2, 3]]))
        >>> clause_to_var(init(g), g, 0, 1)
        (0.75, 1.0)
    """
    edges = g.clause_edges(a)
    own = [e for e in edges if g.edge_var[e] == x]
    if len(own) <= occurrence:
        raise InvalidVariableError(f"x{x} does not occur in clause {a}.")
    edge = own[occurrence]
    product = 1.0
    for e in edges:
        if e != edge:
            zero, one = state.pair(e)
            product *= one if g.edge_sign[e] < 0 else zero
    other = 1.0 - product
    return (other, 1.0) if g.edge_sign[edge] > 0 else (1.0, other)


def step(state: MessageState, g: FactorGraph) -> MessageState:
    """One synchronous application of the BP operator."""
    log_u, zero_u = _clause_log_messages(state.log_odds, g)
    zeros, logs = _side_sums(log_u, zero_u, g)
    negative = g.edge_sign < 0
    base = 2 * g.edge_var
    # Exclude the edge's own clause from its side's product.
    zeros0 = zeros[base] - (zero_u & ~negative)
    zeros1 = zeros[base + 1] - (zero_u & negative)
    logs0 = logs[base] - np.where(negative, 0.0, log_u)
    logs1 = logs[base + 1] - np.where(negative, log_u, 0.0)
    log_odds = _log_odds(zeros0, zeros1, logs0, logs1)
    return MessageState(log_odds=log_odds, iteration=state.iteration + 1)


def run(g: FactorGraph, bp_settings: BpSettings | None = None) -> RunResult:
    """
    Iterate the BP operator from the all-1/2 state.

    ``FIXED_OMEGA`` applies exactly omega steps. ``FIXED_POINT`` stops at the
    first step whose largest edge change is <= tolerance, or after max_iter.
    """
    bp_settings = bp_settings or BpSettings()
    state = init(g)
    change = 0.0
    if bp_settings.stop_rule is StopRule.FIXED_OMEGA:
        for _ in range(bp_settings.resolve_omega(g.n)):
            new = step(state, g)
            change = float(np.max(np.abs(new.mu - state.mu), initial=0.0))
            state = new
        return RunResult(
            state=state,
            iterations=state.iteration,
            converged=change <= bp_settings.tolerance,
            max_change=change,
        )

    limit = bp_settings.resolve_max_iter(g.n)
    for _ in range(limit):
        new = step(state, g)
        change = float(np.max(np.abs(new.mu - state.mu), initial=0.0))
        state = new
        if change <= bp_settings.tolerance:
            return RunResult(state, state.iteration, True, change)
    logger.debug(f"BP did not reach a fixed point in {limit} steps (change {change})")
    return RunResult(state, state.iteration, False, change)


def marginals(state: MessageState, g: FactorGraph) -> np.ndarray:
    """
    BP marginal mu_x of every variable, indexed by variable.

    Entries of assigned variables (and index 0) are NaN. A zero denominator,
    including the empty product of an isolated variable's two sides being
    equal, yields 1/2.
    """
    log_u, zero_u = _clause_log_messages(state.log_odds, g)
    zeros, logs = _side_sums(log_u, zero_u, g)
    values = expit(_log_odds(zeros[0::2], zeros[1::2], logs[0::2], logs[1::2]))
    return np.where(g.alive, values, np.nan)


def marginal(state: MessageState, g: FactorGraph, x: int) -> float:
    if not (0 < x <= g.n and g.alive[x]):
        raise InvalidVariableError(f"x{x} is not an unassigned variable.")
    return float(marginals(state, g)[x])


def dump_csv(state: MessageState, g: FactorGraph, path: str | Path) -> None:
    """Write one row per edge: edge, var, clause, sign, mu."""
    frame = pd.DataFrame(
        {
            "edge": np.arange(g.num_edges),
            "var": g.edge_var,
            "clause": g.clause_ids[g.edge_clause],
            "sign": g.edge_sign,
            "mu": state.mu,
        }
    )
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT)
