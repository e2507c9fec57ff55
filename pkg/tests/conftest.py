import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from fglab.groups import build  # noqa: E402
from fglab.perm import Permutation  # noqa: E402


@pytest.fixture(scope="session")
def s3():
    return build("symmetric(3)")


@pytest.fixture(scope="session")
def s4():
    return build("symmetric(4)")


@pytest.fixture(scope="session")
def a5():
    return build("alternating(5)")


@pytest.fixture(scope="session")
def q8():
    return build("quaternion8")


def pid(g, cycles: str) -> int:
    """Id of a permutation given in cycle notation."""
    return g.id_of(Permutation.parse(cycles, g.degree))


# acceptance summary: one line per criterion --------------------------------

_ACCEPTANCE: dict[int, tuple[str, str, float, float]] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("acceptance")
    if mark is None:
        return
    num, title, limit = mark.args
    if rep.when == "call" or (rep.when == "setup" and rep.failed):
        status = "PASS" if rep.passed and rep.duration < limit else "FAIL"
        _ACCEPTANCE[num] = (status, title, rep.duration, limit)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_ACCEPTANCE):
        status, title, dt, limit = _ACCEPTANCE[num]
        terminalreporter.write_line(f"[{status}] {num:2d}. {title} ({dt:.2f}s, limit {limit:g}s)")
