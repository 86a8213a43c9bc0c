"""
Result tables on disk.

CSV files start with ``#`` comment lines carrying the schema version and the
run parameters that apply to every row, followed by a pandas-written table.
Workbooks (``.xlsx``) hold the same tables as sheets plus a ``meta`` sheet.
"""

from pathlib import Path
from typing import Mapping

import pandas as pd
from loguru import logger
from openpyxl import load_workbook

from commons import FLOAT_FORMAT, SCHEMA_VERSION


def _header_lines(meta: Mapping[str, object]) -> str:
    lines = [f"# schema={SCHEMA_VERSION}"]
    lines += [f"# {key}={value}" for key, value in meta.items()]
    return "\n".join(lines) + "\n"


def write_table(frame: pd.DataFrame, path: str | Path, meta: Mapping[str, object] = {}) -> Path:
    """Write ``frame`` as CSV with a comment header; identical input gives identical bytes."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as handle:
        handle.write(_header_lines(meta))
        frame.to_csv(handle, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    logger.info(f"Wrote {len(frame)} rows to {path}")
    return path


def read_table(path: str | Path) -> pd.DataFrame:
    return pd.read_csv(path, comment="#")


def read_meta(path: str | Path) -> dict[str, str]:
    """The ``# key=value`` header of a table written by ``write_table``."""
    meta = {}
    with Path(path).open() as handle:
        for line in handle:
            if not line.startswith("#"):
                break
            key, _, value = line[1:].strip().partition("=")
            meta[key] = value
    return meta


def write_workbook(
    sheets: Mapping[str, pd.DataFrame], path: str | Path, meta: Mapping[str, object] = {}
) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    info = pd.DataFrame(
        {"key": ["schema", *meta.keys()], "value": [SCHEMA_VERSION, *map(str, meta.values())]}
    )
    with pd.ExcelWriter(path, engine="openpyxl") as writer:
        for name, frame in sheets.items():
            frame.to_excel(writer, sheet_name=name, index=False)
        info.to_excel(writer, sheet_name="meta", index=False)
    logger.info(f"Wrote workbook {path} with sheets {list(sheets)}")
    return path


def workbook_sheets(path: str | Path) -> list[str]:
    wb = load_workbook(path, read_only=True)
    try:
        return list(wb.sheetnames)
    finally:
        wb.close()


def sibling(path: str | Path, suffix: str, extension: str = ".csv") -> Path:
    """``results.csv`` -> ``results_<suffix>.csv``."""
    path = Path(path)
    return path.with_name(f"{path.stem}_{suffix}{extension}")
