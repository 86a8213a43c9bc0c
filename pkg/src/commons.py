import math

SCHEMA_VERSION = "bpdec-lab/1"

# Round-trips float64 through text exactly.
FLOAT_FORMAT = "%.17g"


def default_omega(n: int) -> int:
    """BP iteration budget used when none is configured: 10 * ceil(ln n)."""
    return 10 * max(1, math.ceil(math.log(max(n, 2))))


def default_max_iter(n: int) -> int:
    return 10 * default_omega(n)


def clause_count(r: float, n: int) -> int:
    """Number of clauses m = ceil(r * n) for clause density r."""
    return math.ceil(r * n)
