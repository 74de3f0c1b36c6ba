from pathlib import Path

import pytest

from bvterm.dp import dependency_pairs, proc_dg
from bvterm.parser import parse_file
from bvterm.ssr import as_singleton_self_loop

ROOT = Path(__file__).resolve().parent.parent
FIXTURES = ROOT / "fixtures"
DATA = Path(__file__).resolve().parent / "data"


@pytest.fixture(scope="session")
def r1():
    return parse_file(FIXTURES / "cnt.lctrs")


@pytest.fixture(scope="session")
def r1_unguarded():
    return parse_file(FIXTURES / "cnt_unguarded.lctrs")


@pytest.fixture(scope="session")
def p1(r1):
    (part,) = proc_dg(dependency_pairs(r1))
    return part


@pytest.fixture(scope="session")
def p1_view(p1):
    return as_singleton_self_loop(p1)


def pytest_terminal_summary(terminalreporter):
    try:
        import test_acceptance
    except ImportError:
        return
    if test_acceptance.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in test_acceptance.report_lines():
            terminalreporter.write_line(line)
