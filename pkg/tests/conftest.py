import numpy as np
import pytest

from hvmeasure import HiddenVarParams, make_lognormal

_ACCEPTANCE = []


def record_criterion(number, title, ok, detail=""):
    """Log a PASS/FAIL line for the acceptance summary, then return ``ok``."""
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {title}"
    if detail:
        line += f" ({detail})"
    print(line, flush=True)
    _ACCEPTANCE.append(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE, key=lambda s: int(s.split("criterion ")[1].split(":")[0])):
            terminalreporter.write_line(line)


@pytest.fixture
def lognormal():
    def make(sigma, hbar=1.0):
        return make_lognormal(HiddenVarParams(hbar=hbar, sigma=sigma))

    return make


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
