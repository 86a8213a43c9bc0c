"""
Factor graph of a CNF formula.

The graph is stored as three parallel edge arrays (variable, clause, sign), one
entry per literal occurrence, ordered by clause and by position inside the
clause. A variable that occurs twice in one clause therefore gives two
parallel edges. Balls and tree tests go through a networkx multigraph whose
nodes are ``("x", var)`` and ``("a", clause_id)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import networkx as nx
import numpy as np

from exceptions import InvalidParametersError, InvalidVariableError
from formula import Clause, CnfFormula, Literal

Node = tuple[str, int]


def var_node(x: int) -> Node:
    return ("x", x)


def clause_node(a: int) -> Node:
    return ("a", a)


def _frozen(array: np.ndarray) -> np.ndarray:
    array.setflags(write=False)
    return array


class FactorGraph:
    """
    Bipartite variable/clause adjacency with literal signs.

    Attributes:
        n: Total number of variables of the underlying formula.
        k: Nominal clause length of the underlying formula.
        alive: Boolean mask of length n + 1, ``alive[x]`` for unassigned x.
        clause_ids: Stable clause id of every local clause index.
        edge_var: Variable of every edge.
        edge_clause: Local clause index of every edge.
        edge_sign: +1 for a positive occurrence, -1 for a negative one.
        fixed: Substitutions applied to reach this graph.
    """

    def __init__(
        self,
        n: int,
        k: int,
        alive: np.ndarray,
        clause_ids: np.ndarray,
        edge_var: np.ndarray,
        edge_clause: np.ndarray,
        edge_sign: np.ndarray,
        fixed: tuple[tuple[int, bool], ...] = (),
    ) -> None:
        self.n = n
        self.k = k
        self.alive = _frozen(alive)
        self.clause_ids = _frozen(clause_ids)
        self.edge_var = _frozen(edge_var)
        self.edge_clause = _frozen(edge_clause)
        self.edge_sign = _frozen(edge_sign)
        self.fixed = fixed

    @property
    def num_clauses(self) -> int:
        return len(self.clause_ids)

    @property
    def num_edges(self) -> int:
        return len(self.edge_var)

    @property
    def t(self) -> int:
        return len(self.fixed)

    @cached_property
    def alive_vars(self) -> np.ndarray:
        return _frozen(np.flatnonzero(self.alive))

    @cached_property
    def clause_len(self) -> np.ndarray:
        return _frozen(np.bincount(self.edge_clause, minlength=self.num_clauses))

    @cached_property
    def var_degree(self) -> np.ndarray:
        return _frozen(np.bincount(self.edge_var, minlength=self.n + 1))

    @property
    def contradicted(self) -> bool:
        return bool(np.any(self.clause_len == 0))

    @cached_property
    def _local_index(self) -> dict[int, int]:
        return {int(cid): i for i, cid in enumerate(self.clause_ids)}

    @cached_property
    def _var_csr(self) -> tuple[np.ndarray, np.ndarray]:
        order = np.argsort(self.edge_var, kind="stable")
        ptr = np.searchsorted(self.edge_var[order], np.arange(self.n + 2))
        return order, ptr

    @cached_property
    def _clause_ptr(self) -> np.ndarray:
        return np.searchsorted(self.edge_clause, np.arange(self.num_clauses + 1))

    @cached_property
    def edge_slot(self) -> np.ndarray:
        """Position of every edge inside its clause."""
        return _frozen(np.arange(self.num_edges) - self._clause_ptr[self.edge_clause])

    @cached_property
    def clause_slots(self) -> np.ndarray:
        """Edge ids per local clause, shape (clauses, longest clause), -1 padded."""
        width = int(self.clause_len.max(initial=0))
        slots = np.full((self.num_clauses, width), -1, dtype=np.int64)
        slots[self.edge_clause, self.edge_slot] = np.arange(self.num_edges)
        return _frozen(slots)

    def var_edges(self, x: int) -> np.ndarray:
        order, ptr = self._var_csr
        return order[ptr[x] : ptr[x + 1]]

    def clause_edges(self, a: int) -> np.ndarray:
        """Edge indices of the clause with stable id ``a``."""
        i = self._local_index[a]
        ptr = self._clause_ptr
        return np.arange(ptr[i], ptr[i + 1])

    def var_adj(self, x: int) -> list[tuple[int, int]]:
        """N(x) as (clause id, sign(x, a)) pairs, one per occurrence."""
        edges = self.var_edges(x)
        return [
            (int(self.clause_ids[self.edge_clause[e]]), int(self.edge_sign[e]))
            for e in edges
        ]

    def clause_adj(self, a: int) -> list[tuple[int, int]]:
        """N(a) as (variable, sign) pairs in literal order."""
        return [
            (int(self.edge_var[e]), int(self.edge_sign[e])) for e in self.clause_edges(a)
        ]

    def decimate(self, x: int, value: bool) -> FactorGraph:
        """
        Substitute ``value`` for ``x`` on the edge arrays.

        Same effect as ``formula.decimate``: satisfied clauses disappear with
        all their edges, the falsified occurrences of ``x`` are dropped.
        """
        if not (0 < x <= self.n and self.alive[x]):
            raise InvalidVariableError(f"x{x} is not an unassigned variable.")
        on_x = self.edge_var == x
        satisfied_edge = on_x & ((self.edge_sign > 0) == bool(value))
        keep_clause = np.ones(self.num_clauses, dtype=bool)
        keep_clause[self.edge_clause[satisfied_edge]] = False
        keep_edge = keep_clause[self.edge_clause] & ~on_x
        remap = np.cumsum(keep_clause) - 1
        alive = self.alive.copy()
        alive[x] = False
        return FactorGraph(
            n=self.n,
            k=self.k,
            alive=alive,
            clause_ids=self.clause_ids[keep_clause].copy(),
            edge_var=self.edge_var[keep_edge].copy(),
            edge_clause=remap[self.edge_clause[keep_edge]],
            edge_sign=self.edge_sign[keep_edge].copy(),
            fixed=self.fixed + ((int(x), bool(value)),),
        )

    def to_formula(self) -> CnfFormula:
        clauses = []
        for i, cid in enumerate(self.clause_ids):
            lo, hi = self._clause_ptr[i], self._clause_ptr[i + 1]
            lits = tuple(
                Literal(int(self.edge_var[e]), bool(self.edge_sign[e] > 0))
                for e in range(lo, hi)
            )
            clauses.append(Clause(id=int(cid), literals=lits))
        return CnfFormula(
            n=self.n,
            k=self.k,
            clauses=tuple(clauses),
            alive=frozenset(int(x) for x in self.alive_vars),
            fixed=self.fixed,
        )

    @cached_property
    def networkx(self) -> nx.MultiGraph:
        graph = nx.MultiGraph()
        graph.add_nodes_from(var_node(int(x)) for x in self.alive_vars)
        graph.add_nodes_from(clause_node(int(a)) for a in self.clause_ids)
        for v, c, s in zip(self.edge_var, self.edge_clause, self.edge_sign):
            graph.add_edge(
                var_node(int(v)), clause_node(int(self.clause_ids[c])), sign=int(s)
            )
        return graph

    def to_networkx(self) -> nx.MultiGraph:
        return self.networkx


def build(f: CnfFormula) -> FactorGraph:
    """
    Factor graph G(f).

    Examples:
        >>> g = build(CnfFormula.from_clauses(3, [[1, 2, 3]]))
        >>> g.num_clauses, g.num_edges
        (1, 3)
    """
    edge_var: list[int] = []
    edge_clause: list[int] = []
    edge_sign: list[int] = []
    for i, clause in enumerate(f.clauses):
        for lit in clause.literals:
            edge_var.append(lit.var)
            edge_clause.append(i)
            edge_sign.append(lit.sign)
    alive = np.zeros(f.n + 1, dtype=bool)
    alive[list(f.alive)] = True
    return FactorGraph(
        n=f.n,
        k=f.k,
        alive=alive,
        clause_ids=np.array([c.id for c in f.clauses], dtype=np.int64),
        edge_var=np.array(edge_var, dtype=np.int64),
        edge_clause=np.array(edge_clause, dtype=np.int64),
        edge_sign=np.array(edge_sign, dtype=np.int8),
        fixed=f.fixed,
    )


@dataclass(frozen=True)
class BallSubformula:
    """
    Subformula induced by all vertices within distance 2*radius of ``center``.

    Only clauses whose every member lies in the ball are kept.
    """

    center: int
    radius: int
    vars: frozenset[int]
    clauses: frozenset[int]
    boundary_vars: frozenset[int]
    graph: nx.MultiGraph
    source: FactorGraph

    def to_formula(self) -> tuple[CnfFormula, dict[int, int]]:
        """
        The ball as a standalone formula with variables renumbered 1..|vars|.

        Returns:
            The formula and the map from original to local variable index.
        """
        local = {x: i for i, x in enumerate(sorted(self.vars), start=1)}
        clauses = []
        for a in sorted(self.clauses):
            lits = tuple(
                Literal(local[v], s > 0) for v, s in self.source.clause_adj(a)
            )
            clauses.append(Clause(id=a, literals=lits))
        formula = CnfFormula(
            n=len(local),
            k=self.source.k,
            clauses=tuple(clauses),
            alive=frozenset(local.values()),
        )
        return formula, local


def ball(g: FactorGraph, x: int, omega: int) -> BallSubformula:
    """
    Radius-omega neighbourhood of ``x``: vertices at distance <= 2*omega.

    Raises:
        InvalidVariableError: ``x`` is not alive.
        InvalidParametersError: ``omega`` < 1.
    """
    if not (0 < x <= g.n and g.alive[x]):
        raise InvalidVariableError(f"x{x} is not an unassigned variable.")
    if omega < 1:
        raise InvalidParametersError(f"Ball radius must be >= 1, got {omega}.")
    graph = g.networkx
    distance = nx.single_source_shortest_path_length(graph, var_node(x), cutoff=2 * omega)
    variables = {v for (kind, v) in distance if kind == "x"}
    clauses = {
        a
        for (kind, a) in distance
        if kind == "a" and all(v in variables for v, _ in g.clause_adj(a))
    }
    boundary = {v for v in variables if distance[var_node(v)] == 2 * omega}
    nodes = [var_node(v) for v in variables] + [clause_node(a) for a in clauses]
    return BallSubformula(
        center=x,
        radius=omega,
        vars=frozenset(variables),
        clauses=frozenset(clauses),
        boundary_vars=frozenset(boundary),
        graph=graph.subgraph(nodes).copy(),
        source=g,
    )


def is_tree(b: BallSubformula) -> bool:
    """True iff the ball's induced multigraph is connected and acyclic."""
    return bool(nx.is_tree(b.graph))
