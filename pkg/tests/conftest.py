from pathlib import Path

import numpy as np
import pytest

from ifsmeasures import CoeffVector
from ifsmeasures.fixtures import BANKS, bank

FIXTURES = Path(__file__).resolve().parents[1] / "fixtures"

ALL_BANKS = sorted(BANKS)


@pytest.fixture(scope="session")
def fixtures_dir():
    return FIXTURES


@pytest.fixture(params=ALL_BANKS)
def any_bank(request):
    return bank(request.param)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_vector(rng, support=5, lo=-6, hi=6):
    idx = rng.choice(np.arange(lo, hi + 1), size=support, replace=False)
    vals = rng.normal(size=support) + 1j * rng.normal(size=support)
    return CoeffVector.from_dict(dict(zip(idx.tolist(), vals.tolist())))


# acceptance lines collected by test_acceptance, echoed at the end of the run
ACCEPTANCE_LINES: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[n])
