"""
DIMACS CNF reading and writing.

Besides the standard ``p cnf n m`` header and zero-terminated clause lines the
writer emits comment lines that carry the generator and the decimation
history::

    c model=proper seed=7 k=3
    c fixed=4:1,9:0

Both are optional on input.
"""

from pathlib import Path

from exceptions import InvalidInputError
from formula import CnfFormula, GenModel


class DimacsError(InvalidInputError):
    """Malformed DIMACS input."""

    ...


def write_dimacs(f: CnfFormula) -> str:
    """Serialize ``f``; identical formulas give identical text."""
    lines = []
    meta = []
    if f.model is not None:
        meta.append(f"model={f.model.value}")
    if f.seed is not None:
        meta.append(f"seed={f.seed}")
    meta.append(f"k={f.k}")
    lines.append("c " + " ".join(meta))
    if f.fixed:
        history = ",".join(f"{x}:{int(v)}" for x, v in f.fixed)
        lines.append(f"c fixed={history}")
    lines.append(f"p cnf {f.n} {f.m}")
    for clause in f.clauses:
        lines.append(" ".join([*(str(lit.to_int()) for lit in clause.literals), "0"]))
    return "\n".join(lines) + "\n"


def _parse_meta(text: str, meta: dict[str, str]) -> None:
    for token in text.split():
        if "=" in token:
            key, value = token.split("=", 1)
            meta[key] = value


def read_dimacs(text: str) -> CnfFormula:
    """
    Parse DIMACS text into a formula.

    Raises:
        DimacsError: Missing or malformed header, non-integer tokens, an
            unterminated clause or a clause count that disagrees with the
            header.
    """
    meta: dict[str, str] = {}
    header: tuple[int, int] | None = None
    clauses: list[list[int]] = []
    current: list[int] = []
    for line_number, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("%"):
            continue
        if line.startswith("c"):
            _parse_meta(line[1:], meta)
            continue
        if line.startswith("p"):
            fields = line.split()
            if len(fields) != 4 or fields[1] != "cnf":
                raise DimacsError(f"Line {line_number}: bad header '{line}'.")
            try:
                header = (int(fields[2]), int(fields[3]))
            except ValueError:
                raise DimacsError(f"Line {line_number}: bad header '{line}'.")
            continue
        if header is None:
            raise DimacsError(f"Line {line_number}: clause before 'p cnf' header.")
        try:
            values = [int(token) for token in line.split()]
        except ValueError:
            raise DimacsError(f"Line {line_number}: non-integer field.")
        for value in values:
            if value == 0:
                clauses.append(current)
                current = []
            else:
                current.append(value)
    if header is None:
        raise DimacsError("Missing 'p cnf' header.")
    if current:
        raise DimacsError("Last clause is not terminated by 0.")
    n, m = header
    if len(clauses) != m:
        raise DimacsError(f"Got {len(clauses)} clauses, header announces {m}.")

    fixed: list[tuple[int, bool]] = []
    if history := meta.get("fixed"):
        for item in history.split(","):
            x, v = item.split(":")
            fixed.append((int(x), v == "1"))
    return CnfFormula.from_clauses(
        n,
        clauses,
        k=int(meta["k"]) if "k" in meta else None,
        model=GenModel(meta["model"]) if "model" in meta else None,
        seed=int(meta["seed"]) if "seed" in meta else None,
        fixed=fixed,
    )


def save_dimacs(f: CnfFormula, path: str | Path) -> None:
    Path(path).write_text(write_dimacs(f))


def load_dimacs(path: str | Path) -> CnfFormula:
    return read_dimacs(Path(path).read_text())
