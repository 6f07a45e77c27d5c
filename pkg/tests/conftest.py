import sys
from collections import defaultdict
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from contagion.balance_sheets import BankBalanceSheet, build_system_snapshot  # noqa: E402

CRITERIA = {
    1: "baseline floor 1/26",
    2: "zero-propagation closed form",
    3: "probability scaling",
    4: "cascade matches straight-line oracle",
    5: "theta monotone in parameters and edges",
    6: "structures collapse at full connectivity",
    7: "size ordering of knock-on effects",
    8: "CET1 estimation fidelity",
    9: "run output independent of --jobs",
    10: "liquidity percentage anchors",
}

_outcomes = defaultdict(list)


def make_snapshot(buckets, capital, month="2017-03"):
    sheets = [
        BankBalanceSheet(f"b{i:02d}", month, *map(float, b), capital=float(c))
        for i, (b, c) in enumerate(zip(buckets, capital))
    ]
    return build_system_snapshot(sheets)


@pytest.fixture
def three_banks():
    # equal assets of 100, so the snapshot keeps id order b00, b01, b02
    third = 100 / 3
    return make_snapshot([(third, third, third)] * 3, [30, 1.2, 50])


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.outcome != "passed"):
        return
    number = getattr(report, "acceptance", None)
    if number is not None:
        _outcomes[number].append(report.outcome == "passed")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    marker = item.get_closest_marker("acceptance")
    if marker is not None:
        outcome.get_result().acceptance = marker.args[0]


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(CRITERIA):
        results = _outcomes.get(number)
        if not results:
            status = "NOT RUN"
        else:
            status = "PASS" if all(results) else "FAIL"
        terminalreporter.write_line(f"criterion {number:2d} {status:7s} {CRITERIA[number]}")
