from __future__ import annotations

import math
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from omitsense.model import SystemParams  # noqa: E402

TWO_PI = 2 * math.pi

VERDICTS = []


def device(kappa_mhz=50.0, kappa_ex_mhz=25.0, **kw):
    """Reference device; decay rates given as ordinary frequencies in MHz."""
    base = dict(
        m_eff=2.0, omega_m=1.4, gamma_m=TWO_PI * 35e-6, g_coupling=-0.485,
        kappa=TWO_PI * kappa_mhz * 1e-3, kappa_ex=TWO_PI * kappa_ex_mhz * 1e-3,
    )
    base.update(kw)
    return SystemParams(**base)


@pytest.fixture
def bare():
    """Device used for the bistability scan."""
    return device(50.0, 25.0)


@pytest.fixture
def omit():
    """Spectrum device: kappa/2pi = 100 MHz, kappa_ex/2pi = 25 MHz."""
    return device(100.0, 25.0)


@pytest.fixture
def sensing():
    """Weighing-run device at critical coupling."""
    return device(100.0, 50.0)


def pytest_terminal_summary(terminalreporter):
    if VERDICTS:
        terminalreporter.section("acceptance criteria")
        for line in VERDICTS:
            terminalreporter.write_line(line)
