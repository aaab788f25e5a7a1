"""Shared pytest configuration.

Rows that take minutes to hours are marked ``expensive``.  They are not
dropped silently: without ``--expensive`` they are reported as skipped with
an explicit gating reason, and the acceptance summary lists them as GATED.
"""

from __future__ import annotations

from collections.abc import Callable

import pytest

_VERDICTS = pytest.StashKey[list[str]]()


def pytest_addoption(parser: pytest.Parser) -> None:
    parser.addoption(
        "--expensive",
        action="store_true",
        default=False,
        help="run the expensive table rows (minutes to hours each)",
    )


def pytest_configure(config: pytest.Config) -> None:
    config.stash[_VERDICTS] = []


def pytest_collection_modifyitems(config: pytest.Config, items: list[pytest.Item]) -> None:
    if config.getoption("--expensive"):
        return
    gate = pytest.mark.skip(reason="GATED: expensive row, rerun with --expensive")
    for item in items:
        if "expensive" in item.keywords:
            item.add_marker(gate)
            if item.module is not None and item.module.__name__.endswith("test_acceptance"):
                config.stash[_VERDICTS].append(f"GATED {item.name} (rerun with --expensive)")


def pytest_terminal_summary(terminalreporter, exitstatus: int, config: pytest.Config) -> None:
    lines = config.stash.get(_VERDICTS, [])
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for line in lines:
        terminalreporter.write_line(line)


@pytest.fixture
def expensive_enabled(request: pytest.FixtureRequest) -> bool:
    return bool(request.config.getoption("--expensive"))


@pytest.fixture
def verdict(request: pytest.FixtureRequest) -> Callable[[str, bool, str], bool]:
    """Record and print one ``PASS``/``FAIL`` line; the test asserts the result."""
    lines = request.config.stash[_VERDICTS]

    def record(criterion: str, ok: bool, detail: str) -> bool:
        line = f"{'PASS' if ok else 'FAIL'} {criterion}: {detail}"
        lines.append(line)
        print(line)
        return bool(ok)

    return record
