import math

import numpy as np
import pytest


def gauss_det(a):
    """Determinant by Gaussian elimination with partial pivoting (test oracle)."""
    a = np.array(a, dtype=complex)
    n = a.shape[0]
    det = 1 + 0j
    scale = np.abs(a).max() if n else 1.0
    for col in range(n):
        pivot = col + int(np.argmax(np.abs(a[col:, col])))
        # a pivot at rounding level means the matrix is numerically singular
        if abs(a[pivot, col]) <= 1e-14 * scale:
            return 0j
        if pivot != col:
            a[[col, pivot]] = a[[pivot, col]]
            det = -det
        det *= a[col, col]
        a[col + 1:] -= np.outer(a[col + 1:, col] / a[col, col], a[col])
    return det


def away_from_pi_multiples(theta, distance):
    k = round(theta / math.pi)
    return abs(theta - k * math.pi) > distance


@pytest.fixture
def rng():
    return np.random.default_rng(20201)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
