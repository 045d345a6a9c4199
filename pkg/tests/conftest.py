from __future__ import annotations

import numpy as np
import pytest

from ecgscrub.noise import synth_ecg
from ecgscrub.signal import Signal

# (criterion id, title, status, detail) collected by tests/test_acceptance.py
ACCEPTANCE_LINES: list[tuple[str, str, str, str]] = []


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture(scope="session")
def clean_ecg() -> Signal:
    return synth_ecg(10.0, 360.0, 72.0)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for cid, title, status, detail in sorted(ACCEPTANCE_LINES, key=lambda r: int(r[0])):
        tr.write_line(f"{status:4} criterion {cid:>2}: {title} | {detail}")
