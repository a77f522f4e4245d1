import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from setpar import CountSeries, RegimeParams, SetparParams, simulate
from setpar.io import load_earthquake_counts

REPO_ROOT = Path(__file__).resolve().parent.parent
EARTHQUAKE_FILE = REPO_ROOT / "data" / "earthquakes.csv"


@pytest.fixture(scope="session")
def table1_truth() -> SetparParams:
    return SetparParams(
        r=7, lower=RegimeParams(0.5, 0.7, 0.2), upper=RegimeParams(0.3, 0.4, 0.5)
    )


@pytest.fixture(scope="session")
def table2_truth() -> SetparParams:
    return SetparParams(
        r=6, lower=RegimeParams(0.5, 0.8, 0.7), upper=RegimeParams(0.2, 0.2, 0.1)
    )


@pytest.fixture(scope="session")
def table2_series(table2_truth) -> CountSeries:
    series, _ = simulate(table2_truth, n=1000, seed=20260810)
    return series


@pytest.fixture(scope="session")
def earthquakes():
    """Full earthquake series (1900-2010); skips when the data file is absent."""
    if not EARTHQUAKE_FILE.exists():
        pytest.skip("earthquake dataset not present (data/earthquakes.csv)")
    years, series = load_earthquake_counts(EARTHQUAKE_FILE)
    return years, series


@pytest.fixture(scope="session")
def earthquake_split(earthquakes):
    """(train, test) split used in the published analysis: first 100 / last 11."""
    _, series = earthquakes
    values = series.values
    return CountSeries(values[:100]), CountSeries(values[100:])
