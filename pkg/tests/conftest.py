"""Shared fixtures and acceptance-summary reporting."""

from __future__ import annotations

import numpy as np
import pytest

from sivodmr.spin_model import PhysicalConstants

# One entry per acceptance criterion: (number, passed, one-line description).
# Populated by tests/test_acceptance.py, printed after the run so the final
# report always carries one PASS/FAIL line per criterion.
_ACCEPTANCE_LINES: list[tuple[int, bool, str]] = []


def record_acceptance(num: int, passed: bool, text: str) -> None:
    _ACCEPTANCE_LINES.append((num, passed, text))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _ACCEPTANCE_LINES:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for num, passed, text in sorted(_ACCEPTANCE_LINES):
        status = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"criterion {num:02d} {status}  {text}")


@pytest.fixture(scope="session")
def consts() -> PhysicalConstants:
    """Default physical constants: D = 35 MHz, g = 2.0023."""
    return PhysicalConstants()


@pytest.fixture()
def rng() -> np.random.Generator:
    return np.random.default_rng(20260819)
