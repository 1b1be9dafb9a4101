from __future__ import annotations

import contextlib

import pytest

from actattr.bridge import BridgeServer

# (number, title, passed) for every acceptance criterion that ran
ACCEPTANCE: dict[int, tuple[str, bool]] = {}


@pytest.fixture
def criterion():
    """Context manager recording an acceptance criterion as PASS or FAIL."""

    @contextlib.contextmanager
    def record(number: int, title: str):
        ACCEPTANCE[number] = (title, False)
        yield
        ACCEPTANCE[number] = (title, True)

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        title, passed = ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number} {title}: {'PASS' if passed else 'FAIL'}")


@pytest.fixture
def bridge():
    """A bridge server on an ephemeral loopback port, started empty."""
    with BridgeServer("127.0.0.1", 0) as server:
        yield server
