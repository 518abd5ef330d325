import numpy as np
import pytest


def random_invertible(n, rng, cond_max=10.0):
    """Random matrix with singular values in [1, cond_max]."""
    u, _ = np.linalg.qr(rng.standard_normal((n, n)))
    v, _ = np.linalg.qr(rng.standard_normal((n, n)))
    return (u * rng.uniform(1.0, cond_max, n)) @ v.T


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    lines = []
    for outcome in ("passed", "failed"):
        for rep in terminalreporter.stats.get(outcome, []):
            if "test_acceptance" in rep.nodeid and rep.when == "call":
                lines.append((rep.nodeid, outcome))
    if lines:
        terminalreporter.section("acceptance criteria")
        for nodeid, outcome in sorted(lines):
            name = nodeid.split("::")[-1]
            terminalreporter.write_line(f"{'PASS' if outcome == 'passed' else 'FAIL'}  {name}")
