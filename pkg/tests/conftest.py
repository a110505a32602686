import itertools
from pathlib import Path

import pytest
from hypothesis import settings

from bpcheck.model import Template

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")

FIXTURES = Path(__file__).parent / "fixtures"

UNARY = [t for t in Template if t.arity == 1]
BINARY = [t for t in Template if t.arity == 2]


def bindings(alphabet=("a", "b", "x")):
    """Every template with every admissible parameter choice over ``alphabet``."""
    for t in Template:
        if t.arity == 1:
            for a in alphabet:
                yield t, (a,)
        else:
            for a, b in itertools.permutations(alphabet, 2):
                yield t, (a, b)


@pytest.fixture
def fixtures():
    return FIXTURES


_criteria: dict[int, bool] = {}


def pytest_runtest_logreport(report):
    name = report.nodeid.rsplit("::", 1)[-1]
    if not name.startswith("test_criterion_"):
        return
    number = int(name.split("_")[2])
    if report.when == "call" or report.outcome != "passed":
        _criteria[number] = _criteria.get(number, True) and report.outcome == "passed"


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_criteria):
        terminalreporter.write_line(f"criterion {number}: {'PASS' if _criteria[number] else 'FAIL'}")
