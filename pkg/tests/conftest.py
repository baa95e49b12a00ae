"""Shared fixtures for the test suite.

Two pieces live here:

* ``acceptance`` — a per-test recorder used by ``test_acceptance.py``.  Each
  acceptance test reports exactly one ``ACCEPTANCE <n>: PASS/FAIL`` line;
  the lines are replayed in the terminal summary so a plain ``pytest -v``
  run always shows the verdict table, pass or fail.
* ``slack_data`` — the session-wide finite-size calibration.  The two
  single-phase nearest-neighbour fields are swept over 64 directions at
  R = 128; the worst scaled deviation R * |estimate - exact| times a safety
  factor of 4 is the slack constant C.  Downstream sandwich checks allow
  C / R of finite-size error.  Computing it once here keeps the accuracy
  test and the sandwich tests on one shared, frozen constant.
"""

from __future__ import annotations

import math
import time
from typing import Callable

import numpy as np
import pytest

from bondmix import (
    InteractionSet,
    Label,
    Schedule,
    estimate_phi,
    exact_homogeneous_tension,
    homogeneous_field,
)

_ACCEPTANCE_LINES: list[tuple[int, str]] = []

SLACK_RADIUS = 128.0
SLACK_DIRECTIONS = 64
SLACK_SAFETY = 4.0


@pytest.fixture()
def acceptance() -> Callable[[int, bool, str], None]:
    """Record one verdict line for an acceptance criterion."""

    def record(criterion: int, ok: bool, detail: str) -> None:
        verdict = "PASS" if ok else "FAIL"
        line = f"ACCEPTANCE {criterion}: {verdict} - {detail}"
        _ACCEPTANCE_LINES.append((criterion, line))
        print(line)

    return record


def pytest_terminal_summary(terminalreporter) -> None:  # pragma: no cover
    if not _ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(_ACCEPTANCE_LINES):
        terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def slack_data() -> dict:
    """Sweep both single-phase fields at R = 128; calibrate the slack C."""
    inter = InteractionSet.nearest_neighbor(2, alpha=1.0, beta=2.0)
    schedule = Schedule((SLACK_RADIUS,), extrapolation_order=0)
    angles = 2.0 * math.pi * np.arange(SLACK_DIRECTIONS) / SLACK_DIRECTIONS
    dirs = np.stack([np.cos(angles), np.sin(angles)], axis=1)
    rows = []
    start = time.perf_counter()
    for label in (Label.ALPHA, Label.BETA):
        field = homogeneous_field(inter, label)
        for nu in dirs:
            est = estimate_phi(field, nu, schedule=schedule)
            target = exact_homogeneous_tension(inter, label, nu)
            rows.append((label, tuple(nu), est.value, target))
    elapsed = time.perf_counter() - start
    worst = max(abs(est - target) * SLACK_RADIUS for _, _, est, target in rows)
    return {
        "interactions": inter,
        "rows": rows,
        "radius": SLACK_RADIUS,
        "worst": worst,
        "constant": SLACK_SAFETY * worst,
        "elapsed": elapsed,
    }
