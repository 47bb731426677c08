import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

from arqtc.model import NetworkParams  # noqa: E402


@pytest.fixture
def ref():
    """The reference operating point: alpha=3, beta=3, p=0.5, lam=0.1."""
    return NetworkParams(lam=0.1, p=0.5, alpha=3.0, beta=3.0)


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    if module is None or not module.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(module.RESULTS, key=lambda l: int(l.split()[1].rstrip(":"))):
        terminalreporter.write_line(line)
