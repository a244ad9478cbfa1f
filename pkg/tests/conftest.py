import numpy as np
import pytest

from mdsrel import _kernels_py, kernels
from mdsrel.inner_code import InnerCode, OutcomeTable, build_outcome_table

BACKENDS = [pytest.param(_kernels_py, id="python")]
if kernels.BACKEND == "cython":
    BACKENDS.insert(0, pytest.param(kernels._impl, id="cython"))


def random_table(rng, r_max=6):
    rows = rng.dirichlet(np.ones(3), size=r_max + 1)
    rows[0] = (0.0, 0.0, 1.0)
    rows /= rows.sum(axis=1, keepdims=True)
    return OutcomeTable.from_rows(rows)


@pytest.fixture(scope="session")
def storage_code():
    return InnerCode(49, 45, 8)


@pytest.fixture(scope="session")
def storage_table(storage_code):
    return build_outcome_table(storage_code, 0.01, 50)


@pytest.fixture(params=BACKENDS)
def backend(request):
    return request.param


# one summary line per acceptance criterion, printed at the end of the run
ACCEPTANCE_LINES: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[num])
