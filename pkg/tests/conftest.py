import pytest

from ncdr.algebra import standard_algebras
from ncdr.forms import OperatorCache


@pytest.fixture(scope="session")
def algebras():
    return standard_algebras()


@pytest.fixture(scope="session")
def caches(algebras):
    return {name: OperatorCache(A) for name, A in algebras.items()}


def pytest_terminal_summary(terminalreporter):
    import sys
    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[n])
