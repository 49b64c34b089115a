import itertools

import numpy as np
import pytest

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def pain_oracle(P, C):
    """Sum_c Sum_ij P_ij C_ic C_jc by explicit loops."""
    P, C = np.asarray(P, float), np.asarray(C, float)
    n, k = C.shape
    total = 0.0
    for c in range(k):
        for i in range(n):
            for j in range(n):
                total += P[i, j] * C[i, c] * C[j, c]
    return total


def brute_force_optimum(P, k):
    """Minimum total pain over every labelling, by enumeration."""
    P = np.asarray(P, float)
    n = P.shape[0]
    best = np.inf
    for labels in itertools.product(range(k), repeat=n):
        val = sum(P[i, j] for i in range(n) for j in range(n) if labels[i] == labels[j])
        best = min(best, val)
    return best


def random_instance(rng, n, density=0.5, symmetric=False):
    P = rng.uniform(0.0, 1.0, (n, n)) * (rng.uniform(size=(n, n)) < density)
    if symmetric:
        P = np.triu(P, 1)
        P = P + P.T
    np.fill_diagonal(P, 0.0)
    return P


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
