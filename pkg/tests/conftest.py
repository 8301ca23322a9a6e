import numpy as np
import pytest

from rpsparse import standardize


def random_dataset(seed, n=30, p=4, sigma=0.5, support=2, outliers=0):
    """Small Gaussian regression instance with an optional block of shifted responses."""
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((n, p))
    beta = np.zeros(p)
    beta[:support] = rng.uniform(1.0, 3.0, support) * rng.choice([-1, 1], support)
    y = 1.0 + x @ beta + sigma * rng.standard_normal(n)
    y[:outliers] += 20.0
    return standardize(x, y), beta


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES = []


def record_criterion(name, ok, detail):
    """Store a one-line verdict for an acceptance criterion and return it."""
    line = f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
