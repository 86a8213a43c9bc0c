from fractions import Fraction

import networkx as nx
import numpy as np
import pytest

from bp_engine import (
    BpSettings,
    MessageState,
    StopRule,
    clause_to_var,
    dump_csv,
    init,
    marginal,
    marginals,
    run,
    step,
)
from conftest import random_tree_formula
from exact_oracle import count
from exceptions import InvalidVariableError
from factor_graph import build
from formula import CnfFormula, GenModel, generate


def test_init_is_uniform():
    g = build(generate(GenModel.PROPER_UNIFORM, n=20, m=30, k=3, seed=0))
    state = init(g)
    assert state.mu.shape == (g.num_edges,)
    assert np.all(state.mu == 0.5)
    assert init(build(CnfFormula.from_clauses(3, []))).mu.shape == (0,)


def test_clause_message_closed_form(single_clause):
    g = build(single_clause)
    assert clause_to_var(init(g), g, 0, 1) == (0.75, 1.0)


def test_unit_clause_message():
    g = build(CnfFormula.from_clauses(1, [[1]]))
    assert clause_to_var(init(g), g, 0, 1) == (0.0, 1.0)


def test_forced_clause_message():
    # a = (-x1 v x2) with mu_{x2 -> a}(0) = 1
    g = build(CnfFormula.from_clauses(2, [[-1, 2]]))
    state = MessageState.from_mu(np.array([0.5, 0.0]))
    assert clause_to_var(state, g, 0, 1) == (1.0, 0.0)


def test_clause_message_needs_member():
    g = build(CnfFormula.from_clauses(3, [[1, 2]]))
    with pytest.raises(InvalidVariableError):
        clause_to_var(init(g), g, 0, 3)


def test_lone_occurrence_stays_half(single_clause):
    g = build(single_clause)
    assert np.all(step(init(g), g).mu == 0.5)


def test_zero_denominator_message():
    # x1 in (x1)(-x1)(x1 v x2): the message to the third clause is 0 / 0.
    g = build(CnfFormula.from_clauses(2, [[1], [-1], [1, 2]]))
    mu = step(init(g), g).mu
    third = g.clause_edges(2)[0]
    assert mu[third] == 0.5


def test_single_clause_marginal_is_four_sevenths(single_clause):
    g = build(single_clause)
    mu = marginal(run(g, BpSettings(omega=1)).state, g, 1)
    assert mu == pytest.approx(4 / 7, abs=1e-15)
    assert count(single_clause).marginal(1) == pytest.approx(4 / 7, abs=1e-15)


def test_zero_denominator_marginals(contradictory):
    g = build(contradictory)
    assert marginal(run(g).state, g, 1) == 0.5
    isolated = build(CnfFormula.from_clauses(2, [[2]]))
    assert marginal(run(isolated).state, isolated, 1) == 0.5


def test_marginals_are_nan_for_assigned():
    g = build(CnfFormula.from_clauses(3, [[1, 2, 3]])).decimate(2, False)
    mu = marginals(run(g).state, g)
    assert np.isnan(mu[0]) and np.isnan(mu[2])
    with pytest.raises(InvalidVariableError):
        marginal(run(g).state, g, 2)


def test_omega_zero_returns_init():
    g = build(generate(GenModel.PROPER_UNIFORM, n=10, m=20, k=3, seed=1))
    result = run(g, BpSettings(omega=0))
    assert result.iterations == 0
    assert np.all(result.state.mu == 0.5)


def test_messages_stay_normalised():
    g = build(generate(GenModel.PROPER_UNIFORM, n=60, m=250, k=3, seed=2))
    state = init(g)
    for _ in range(15):
        state = step(state, g)
        assert np.all((state.mu >= 0) & (state.mu <= 1))
        zero, one = state.pair(0)
        assert zero + one == pytest.approx(1.0)


def test_fixed_point_on_tree(forcing_chain):
    g = build(forcing_chain)
    result = run(g, BpSettings(stop_rule=StopRule.FIXED_POINT, tolerance=1e-12, max_iter=1000))
    assert result.converged
    assert result.iterations <= 4
    assert marginal(result.state, g, 1) == 1.0


def test_fixed_omega_matches_fixed_point_on_tree(forcing_chain):
    g = build(forcing_chain)
    deep = run(g, BpSettings(omega=10)).state
    settled = run(g, BpSettings(stop_rule=StopRule.FIXED_POINT, tolerance=1e-12)).state
    assert np.array_equal(marginals(deep, g)[1:], marginals(settled, g)[1:])


def test_bp_is_exact_on_trees():
    rng = np.random.default_rng(0)
    worst = 0.0
    for _ in range(200):
        f = random_tree_formula(rng, clauses=int(rng.integers(1, 9)))
        g = build(f)
        exact = count(f)
        mu = marginals(run(g, BpSettings(omega=f.m + 1)).state, g)
        for x in range(1, f.n + 1):
            worst = max(worst, abs(mu[x] - exact.marginal(x)))
    assert worst <= 1e-9


def test_dump_csv(tmp_path, single_clause):
    g = build(single_clause)
    path = tmp_path / "messages.csv"
    dump_csv(init(g), g, path)
    lines = path.read_text().splitlines()
    assert lines[0] == "edge,var,clause,sign,mu"
    assert lines[1] == "0,1,0,1,0.5"


def test_saturated_messages_keep_tree_exactness():
    # x1 and x3 are pushed hard by 140 and 200 private clauses; x2 sits between.
    rows = [[-1, 2], [3, -2]]
    n = 3
    for _ in range(140):
        rows.append([1, n + 1, n + 2])
        n += 2
    for _ in range(200):
        rows.append([-3, n + 1, n + 2])
        n += 2
    g = build(CnfFormula.from_clauses(n, rows))
    on = (4**140 + 3**140) * 3**200
    off = 3**140 * (4**200 + 3**200)
    exact = float(Fraction(on, on + off))
    mu = marginal(run(g, BpSettings(omega=12)).state, g, 2)
    assert exact < 1e-7
    assert mu == pytest.approx(exact, rel=1e-9)
    assert run(g, BpSettings(omega=12)).state.pair(0)[0] > 0.0


def negate_variable(f: CnfFormula, x: int) -> CnfFormula:
    rows = [[-v if abs(v) == x else v for v in clause] for clause in f.to_int_clauses()]
    return CnfFormula.from_clauses(f.n, rows, k=f.k)


def test_negating_a_variable_mirrors_its_marginal():
    f = generate(GenModel.PROPER_UNIFORM, n=30, m=70, k=3, seed=4)
    bp = BpSettings(omega=15)
    g = build(f)
    before = marginals(run(g, bp).state, g)
    for x in (1, 7, 30):
        flipped = build(negate_variable(f, x))
        after = marginals(run(flipped, bp).state, flipped)
        assert after[x] == pytest.approx(1.0 - before[x], abs=1e-12)
        others = [y for y in range(1, f.n + 1) if y != x]
        assert after[others] == pytest.approx(before[others], abs=1e-12)


def test_marginals_follow_variable_relabeling():
    f = generate(GenModel.PROPER_UNIFORM, n=25, m=60, k=3, seed=5)
    perm = np.random.default_rng(3).permutation(f.n) + 1
    rows = [
        [int(np.sign(v)) * int(perm[abs(v) - 1]) for v in clause]
        for clause in f.to_int_clauses()
    ]
    relabeled = CnfFormula.from_clauses(f.n, rows, k=f.k)
    bp = BpSettings(omega=12)
    g, h = build(f), build(relabeled)
    mu, nu = marginals(run(g, bp).state, g), marginals(run(h, bp).state, h)
    for x in range(1, f.n + 1):
        assert nu[perm[x - 1]] == pytest.approx(mu[x], abs=1e-12)


def tree_depth(f: CnfFormula) -> int:
    """Largest number of clause hops between two variables of a tree formula."""
    return (nx.diameter(build(f).to_networkx()) + 1) // 2


@pytest.mark.slow
def test_bp_is_exact_on_trees_at_depth():
    rng = np.random.default_rng(1)
    checked, worst = 0, 0.0
    while checked < 200:
        f = random_tree_formula(rng, clauses=int(rng.integers(1, 20)))
        depth = tree_depth(f)
        if f.n > 40 or depth > 8:
            continue
        g = build(f)
        exact = count(f, budget=40)
        mu = marginals(run(g, BpSettings(omega=depth)).state, g)
        for x in range(1, f.n + 1):
            worst = max(worst, abs(mu[x] - exact.marginal(x)))
        checked += 1
    assert worst <= 1e-9
