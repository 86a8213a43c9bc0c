import logging
import math

import numpy as np
import pandas as pd
import pytest

from service.logger import logger, setup_logging
from service.report import read_meta, read_table, sibling, workbook_sheets, write_table, write_workbook
from service.seeding import ALGORITHM_STREAM, FORMULA_STREAM, derive_seed, trial_streams
from service.stats import pooled_standard_error, wilson_interval


def test_derive_seed_depends_on_position():
    assert derive_seed(7, 0, FORMULA_STREAM) == derive_seed(7, 0, FORMULA_STREAM)
    seeds = {derive_seed(7, i, s) for i in range(50) for s in (FORMULA_STREAM, ALGORITHM_STREAM)}
    assert len(seeds) == 100
    assert all(0 <= s < 2**63 for s in seeds)
    assert derive_seed(7, 1) != derive_seed(8, 1)


def test_trial_streams_are_independent_and_stable():
    order_a, bits_a = trial_streams(3)
    order_b, bits_b = trial_streams(3)
    assert np.array_equal(order_a.random(5), order_b.random(5))
    assert np.array_equal(bits_a.random(5), bits_b.random(5))
    order_c, bits_c = trial_streams(3)
    assert not np.array_equal(order_c.random(5), bits_c.random(5))


def test_wilson_interval():
    low, high = wilson_interval(5, 10)
    assert (round(low, 4), round(high, 4)) == (0.2366, 0.7634)
    assert wilson_interval(0, 10)[0] == 0.0
    assert wilson_interval(10, 10)[1] == 1.0
    assert wilson_interval(0, 0) == (0.0, 1.0)


def test_pooled_standard_error():
    assert pooled_standard_error(50, 100, 50, 100) == pytest.approx(math.sqrt(0.25 * 0.02))


def test_table_round_trip(tmp_path):
    frame = pd.DataFrame({"a": [1, 2], "b": [0.1, 1 / 3]})
    path = write_table(frame, tmp_path / "out" / "t.csv", {"seed": 4})
    text = path.read_text()
    assert text.startswith("# schema=bpdec-lab/1\n# seed=4\na,b\n")
    assert read_table(path)["b"].tolist() == [0.1, 1 / 3]
    assert read_meta(path) == {"schema": "bpdec-lab/1", "seed": "4"}


def test_workbook(tmp_path):
    path = write_workbook({"rows": pd.DataFrame({"x": [1]})}, tmp_path / "w.xlsx", {"seed": 1})
    assert workbook_sheets(path) == ["rows", "meta"]
    meta = pd.read_excel(path, sheet_name="meta")
    assert meta["key"].tolist() == ["schema", "seed"]


def test_sibling():
    assert sibling("out/results.csv", "trials").as_posix() == "out/results_trials.csv"


def test_library_logs_reach_loguru():
    setup_logging("DEBUG", to_file=False)
    records = []
    sink = logger.add(lambda message: records.append(message.record), level="DEBUG")
    try:
        logging.getLogger("openpyxl.reader").warning("sheet %s has no rows", "meta")
        logging.getLogger("openpyxl.reader").info("below the library threshold")
    finally:
        logger.remove(sink)
        logging.captureWarnings(False)
    (record,) = [r for r in records if r["name"] == "openpyxl.reader"]
    assert record["message"] == "sheet meta has no rows"
    assert record["level"].name == "WARNING"
    assert record["function"] == "test_library_logs_reach_loguru"
