import itertools
from collections import Counter
from fractions import Fraction

import numpy as np
import pytest
from scipy.stats import chisquare

from conftest import all_satisfying
from exact_oracle import (
    IdealDecimationSampler,
    count,
    count_plain,
    hypothesis_probe,
    ideal_decimation,
    local_marginal,
    sample_ideal,
)
from exceptions import BudgetExceededError, UnsatisfiableError
from formula import CnfFormula, GenModel, decimate, generate


def test_two_clause_count():
    result = count(CnfFormula.from_clauses(2, [[1, 2]]))
    assert result.total == 3
    assert result.marginal_exact(1) == Fraction(2, 3)


def test_unit_clause_marginal():
    assert count(CnfFormula.from_clauses(1, [[1]])).marginal_exact(1) == 1


def test_empty_formula():
    result = count(CnfFormula.from_clauses(5, []))
    assert result.total == 32
    assert all(result.marginal_exact(x) == Fraction(1, 2) for x in range(1, 6))


def test_unsatisfiable(contradictory):
    result = count(contradictory)
    assert result.total == 0 and not result.satisfiable
    with pytest.raises(UnsatisfiableError):
        result.marginal_exact(1)


def test_decimated_formula_counts_alive_only():
    f = decimate(CnfFormula.from_clauses(3, [[1, 2], [-1, 3]]), 1, True)
    result = count(f)
    assert result.total == 2
    assert set(result.per_var_true) == {2, 3}


def test_contradicted_formula_counts_zero():
    f = decimate(CnfFormula.from_clauses(2, [[1], [2]]), 1, False)
    assert count(f).total == 0


@pytest.mark.parametrize("seed", range(25))
def test_component_count_matches_plain_enumeration(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(4, 17))
    f = generate(GenModel.PROPER_UNIFORM, n=n, m=int(rng.integers(0, 3 * n)), k=3, seed=seed)
    fast, plain = count(f), count_plain(f)
    assert fast.total == plain.total
    assert dict(fast.per_var_true) == dict(plain.per_var_true)


def test_budget():
    f = CnfFormula.from_clauses(30, [[1, 2]])
    with pytest.raises(BudgetExceededError):
        count(f)
    assert count(f, budget=30).total == 3 * 2**28
    with pytest.raises(BudgetExceededError):
        count_plain(f)


def test_local_marginal(single_clause):
    assert local_marginal(single_clause, 1, 1) == Fraction(4, 7)
    isolated = CnfFormula.from_clauses(3, [[2, 3]])
    assert local_marginal(isolated, 1, 3) == Fraction(1, 2)


def test_local_marginal_sees_only_the_ball():
    # x1 - a0 - x2 - a1 - x3 - a2, a2 = (-x3) is outside the radius-1 ball of x1.
    f = CnfFormula.from_clauses(3, [[1, 2], [-2, 3], [-3]])
    assert local_marginal(f, 1, 1) == Fraction(2, 3)
    assert local_marginal(f, 1, 3) == 1


def test_ideal_decimation_is_uniform():
    f = CnfFormula.from_clauses(2, [[1, 2]])
    draws = Counter(
        tuple(a[x] for x in (1, 2)) for a in sample_ideal(f, runs=30_000, seed=1)
    )
    assert set(draws) == {(True, False), (False, True), (True, True)}
    assert chisquare(list(draws.values())).pvalue >= 1e-3


def test_ideal_decimation_forced():
    assert ideal_decimation(CnfFormula.from_clauses(1, [[1]]), seed=0).assignment == {1: True}
    unique = CnfFormula.from_clauses(3, [[1], [-1, 2], [-2, -3]])
    for seed in range(5):
        assert ideal_decimation(unique, seed).assignment == {1: True, 2: True, 3: False}


def test_ideal_decimation_rejects_unsatisfiable(contradictory):
    with pytest.raises(UnsatisfiableError):
        IdealDecimationSampler(contradictory)


@pytest.mark.slow
@pytest.mark.parametrize(
    "clauses, n",
    [
        ([[1, 2], [-1, 3], [2, -3, 4]], 4),
        ([[1, 2, 3], [-1, -2], [-2, -3]], 3),
        ([[1, -2], [2, -3], [3, 4, 5], [-4, -5]], 5),
    ],
)
def test_ideal_decimation_uniform_over_solutions(clauses, n):
    f = CnfFormula.from_clauses(n, clauses)
    solutions = [
        bits
        for bits in itertools.product((False, True), repeat=n)
        if all(any(bits[abs(v) - 1] == (v > 0) for v in c) for c in clauses)
    ]
    assert 3 <= len(solutions) <= 20
    runs = 200_000
    draws = Counter(
        tuple(a[x] for x in range(1, n + 1)) for a in sample_ideal(f, runs=runs, seed=7)
    )
    assert set(draws) <= set(solutions)
    observed = [draws[s] for s in solutions]
    assert chisquare(observed).pvalue >= 1e-3


def test_hypothesis_probe_exact_on_unit_propagation():
    f = CnfFormula.from_clauses(2, [[1], [-1, 2]])
    rows = hypothesis_probe(f, omega=2, seed=0)
    assert rows[0].var == 1
    assert rows[0].m_exact == 1.0
    assert rows[0].dev_bp == 0.0
    assert rows[0].dev_local == 0.0


def test_hypothesis_probe_on_tree(forcing_chain):
    rows = hypothesis_probe(forcing_chain, omega=4, seed=3)
    assert rows[0].dev_local == 0.0
    assert rows[0].dev_bp == pytest.approx(0.0, abs=1e-12)


def test_hypothesis_probe_range():
    f = next(
        f
        for f in (generate(GenModel.PROPER_UNIFORM, 20, 40, 3, seed) for seed in range(20))
        if count(f).satisfiable
    )
    rows = hypothesis_probe(f, omega=3, seed=0)
    assert len(rows) == 20
    assert [r.t for r in rows] == list(range(1, 21))
    assert all(0 <= r.dev_bp <= 1 and 0 <= r.dev_local <= 1 for r in rows)


def test_ideal_samples_satisfy():
    f = CnfFormula.from_clauses(2, [[1, 2]])
    assert all_satisfying(f, sample_ideal(f, runs=20, seed=0))
    assert not all_satisfying(f, [{1: False, 2: False}])
