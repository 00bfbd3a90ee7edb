import numpy as np
import pytest

from fpmul.primefield import get_context

SMALL_PRIMES = (2, 3, 5, 7, 13, 101)
ALL_PRIMES = SMALL_PRIMES + (2**31 - 1, 2**61 - 1)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(params=ALL_PRIMES, ids=lambda p: f"p{p}")
def ctx(request):
    return get_context(request.param)


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance: acceptance criterion with a PASS/FAIL summary line")


def pytest_terminal_summary(terminalreporter):
    lines = []
    for key in ("passed", "failed"):
        for rep in terminalreporter.stats.get(key, []):
            for name, value in getattr(rep, "user_properties", []):
                if name == "acceptance" and rep.when == "call":
                    ok, detail = value
                    status = "PASS" if ok and rep.passed else "FAIL"
                    lines.append((rep.nodeid, f"{status} {rep.nodeid.split('::')[-1]}: {detail}"))
    # failed tests that never reported still get a line
    for rep in terminalreporter.stats.get("failed", []):
        if "test_acceptance" in rep.nodeid and rep.when == "call" and \
                not any(n == "acceptance" for n, _ in rep.user_properties):
            lines.append((rep.nodeid, f"FAIL {rep.nodeid.split('::')[-1]}: {rep.longrepr.reprcrash.message}"))
    if lines:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(lines):
            terminalreporter.write_line(line)
