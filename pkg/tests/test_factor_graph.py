import networkx as nx
import numpy as np
import pytest

from exceptions import InvalidParametersError, InvalidVariableError
from factor_graph import ball, build, clause_node, is_tree, var_node
from formula import CnfFormula, GenModel, decimate, generate


def test_single_clause_degrees(single_clause):
    g = build(single_clause)
    assert g.num_clauses == 1
    assert g.clause_len.tolist() == [3]
    assert g.var_degree[1:].tolist() == [1, 1, 1]
    assert g.clause_adj(0) == [(1, 1), (2, 1), (3, 1)]


def test_empty_formula_has_isolated_variables():
    g = build(CnfFormula.from_clauses(4, []))
    assert g.num_edges == 0
    assert g.alive_vars.tolist() == [1, 2, 3, 4]
    assert all(g.networkx.degree(var_node(x)) == 0 for x in range(1, 5))


def test_edge_count_is_handshake():
    f = generate(GenModel.PROPER_UNIFORM, n=40, m=70, k=3, seed=9)
    g = build(f)
    assert g.num_edges == 3 * 70
    assert g.var_degree.sum() == g.clause_len.sum() == g.num_edges


def test_repeated_variable_gives_parallel_edges():
    g = build(CnfFormula.from_clauses(2, [[1, 1, 2]]))
    assert g.var_adj(1) == [(0, 1), (0, 1)]
    assert g.networkx.number_of_edges(var_node(1), clause_node(0)) == 2


def test_graph_decimation_matches_formula_decimation():
    f = generate(GenModel.PROPER_UNIFORM, n=30, m=60, k=3, seed=10)
    g = build(f)
    for x, value in [(3, True), (17, False), (8, True)]:
        f = decimate(f, x, value)
        g = g.decimate(x, value)
        assert g.to_formula().to_int_clauses() == f.to_int_clauses()
        assert [int(a) for a in g.clause_ids] == [c.id for c in f.clauses]
    assert g.fixed == f.fixed


def test_decimate_dead_variable():
    g = build(CnfFormula.from_clauses(2, [[1, 2]])).decimate(1, True)
    with pytest.raises(InvalidVariableError):
        g.decimate(1, True)


def test_ball_on_chain():
    # x1 - a0 - x2 - a1 - x3
    g = build(CnfFormula.from_clauses(3, [[1, 2], [2, 3]]))
    b = ball(g, 1, 1)
    assert b.vars == {1, 2}
    assert b.clauses == {0}
    assert b.boundary_vars == {2}
    sub, local = b.to_formula()
    assert sub.n == 2 and sub.to_int_clauses() == [[local[1], local[2]]]


def test_ball_of_isolated_variable():
    g = build(CnfFormula.from_clauses(3, [[2, 3]]))
    b = ball(g, 1, 5)
    assert b.vars == {1}
    assert b.clauses == frozenset()


def test_ball_preconditions():
    g = build(CnfFormula.from_clauses(2, [[1, 2]]))
    with pytest.raises(InvalidParametersError):
        ball(g, 1, 0)
    with pytest.raises(InvalidVariableError):
        ball(g, 3, 1)


def test_is_tree(single_clause):
    assert is_tree(ball(build(single_clause), 1, 1))
    cycle = CnfFormula.from_clauses(2, [[1, 2], [-1, 2]])
    assert not is_tree(ball(build(cycle), 1, 2))


def test_is_tree_agrees_with_edge_count():
    f = CnfFormula.from_clauses(6, [[1, 2, 3], [3, 4], [4, 5, 6]])
    b = ball(build(f), 1, 4)
    graph = b.graph
    assert nx.is_connected(graph)
    assert graph.number_of_edges() == graph.number_of_nodes() - 1
    assert is_tree(b)


@pytest.mark.slow
def test_sparse_balls_are_mostly_trees():
    f = generate(GenModel.PROPER_UNIFORM, n=10_000, m=20_000, k=3, seed=0)
    g = build(f)
    centers = np.random.default_rng(1).choice(np.arange(1, f.n + 1), size=100, replace=False)
    trees = sum(is_tree(ball(g, int(x), 2)) for x in centers)
    assert trees >= 95


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_balls_grow_with_radius(seed):
    f = generate(GenModel.PROPER_UNIFORM, n=60, m=90, k=3, seed=seed)
    g = build(f)
    for x in (1, 17, 42):
        balls = [ball(g, x, omega) for omega in (1, 2, 3, 4)]
        for small, large in zip(balls, balls[1:]):
            assert small.vars <= large.vars
            assert small.clauses <= large.clauses


def has_cycle(b) -> bool:
    nodes = [var_node(v) for v in b.vars] + [clause_node(a) for a in b.clauses]
    parent = {node: node for node in nodes}

    def root(node):
        while parent[node] != node:
            parent[node] = parent[parent[node]]
            node = parent[node]
        return node

    for a in b.clauses:
        for v, _ in b.source.clause_adj(a):
            left, right = root(clause_node(a)), root(var_node(v))
            if left == right:
                return True
            parent[left] = right
    return False


def test_is_tree_matches_union_find():
    verdicts = []
    for seed in range(6):
        f = generate(GenModel.PROPER_UNIFORM, n=60, m=100, k=3, seed=seed)
        g = build(f)
        for x in (1, 20, 40, 60):
            for omega in (1, 2, 3):
                b = ball(g, x, omega)
                tree = is_tree(b)
                assert tree == (not has_cycle(b) and nx.is_connected(b.graph))
                verdicts.append(tree)
    assert True in verdicts and False in verdicts
