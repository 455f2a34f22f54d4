import json
from fractions import Fraction
from pathlib import Path

import pytest

from finexch.model import weights_from_atoms

DATA = Path(__file__).parent / "data"
MANIFEST = Path(__file__).parent / "manifest.json"

FIG1 = (3, 2, 0, 5, 0)

_criteria: list[tuple[str, str]] = []


@pytest.fixture(scope="session")
def manifest():
    return json.loads(MANIFEST.read_text())["cases"]


def goldstein(m, k=2):
    """All items share one label, each label equally likely."""
    atoms = {}
    for j in range(k):
        u = [0] * k
        u[j] = m
        atoms[tuple(u)] = Fraction(1, k)
    return weights_from_atoms(m, k, atoms)


def pytest_runtest_logreport(report):
    if report.when == "call" and "test_acceptance.py::test_criterion" in report.nodeid:
        _criteria.append((report.nodeid.split("::")[-1], report.outcome.upper()))


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for name, outcome in _criteria:
        verdict = "PASS" if outcome == "PASSED" else "FAIL"
        terminalreporter.write_line(f"{verdict}  {name}")
