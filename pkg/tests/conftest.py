import sys
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np
import pytest

# Project root and src/ on the path, the way the entry point sees them.
project_root = Path(__file__).parent.parent
sys.path.insert(0, str(project_root))
if (project_root / "src").exists():
    sys.path.insert(0, str(project_root / "src"))

from formula import CnfFormula, evaluate  # noqa: E402


def random_tree_formula(rng: np.random.Generator, clauses: int, k: int = 3) -> CnfFormula:
    """Satisfiable tree formula: every new clause meets one old variable and brings new ones."""
    rows: list[list[int]] = []
    n = 1
    for _ in range(clauses):
        width = int(rng.integers(2, k + 1))
        anchor = int(rng.integers(1, n + 1))
        members = [anchor, *range(n + 1, n + width)]
        n += width - 1
        signs = rng.choice([-1, 1], size=len(members))
        rows.append([int(s) * v for s, v in zip(signs, members)])
    return CnfFormula.from_clauses(n, rows, k=k)


def all_satisfying(f: CnfFormula, assignments: Iterable[Mapping[int, bool]]) -> bool:
    return all(evaluate(f, a) for a in assignments)


@pytest.fixture
def single_clause() -> CnfFormula:
    return CnfFormula.from_clauses(3, [[1, 2, 3]])


@pytest.fixture
def contradictory() -> CnfFormula:
    return CnfFormula.from_clauses(1, [[1], [-1]])


@pytest.fixture
def forcing_chain() -> CnfFormula:
    """(x1 v x2)(-x2 v x3)(-x3): BP needs two rounds to pin x1."""
    return CnfFormula.from_clauses(3, [[1, 2], [-2, 3], [-3]])


@pytest.fixture
def workdir(tmp_path: Path, monkeypatch: pytest.MonkeyPatch) -> Path:
    """Run inside a temporary directory so log files land there."""
    monkeypatch.chdir(tmp_path)
    return tmp_path
