"""Shared fixtures and the acceptance criterion report.

Acceptance tests register one line per criterion through
record_criterion; the summary hook prints them after the run so the
verdict survives output capturing.
"""

import numpy as np
import pytest

from qng_coherence import FockSpace, GaussianParams, StateVector, apply_gaussian

_CRITERIA: dict[str, tuple[bool | None, str]] = {}


def record_criterion(num, passed: bool | None, detail: str) -> None:
    """Register a criterion verdict; None marks a skipped criterion."""
    _CRITERIA[str(num)] = (None if passed is None else bool(passed), detail)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for num in sorted(_CRITERIA):
        passed, detail = _CRITERIA[num]
        verdict = "SKIP" if passed is None else ("PASS" if passed else "FAIL")
        terminalreporter.write_line(f"[criterion {num}] {verdict} - {detail}")


def fock_state(k: int, dim: int) -> StateVector:
    amps = np.zeros(dim, dtype=complex)
    amps[k] = 1.0
    return StateVector(amps)


def free_state(xi: complex, alpha: complex, core: StateVector,
               dim_report: int) -> StateVector:
    space = FockSpace.for_params(dim_report, xi, alpha)
    return apply_gaussian(GaussianParams(xi, alpha), core, space)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
