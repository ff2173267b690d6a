import numpy as np
import pytest

ACCEPTANCE_LINES = []


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def ball_points(rng, n, m, r_max):
    x = rng.normal(size=(n, m + 1))
    x /= np.linalg.norm(x, axis=1)[:, None]
    return x * (r_max * rng.uniform(size=n) ** (1.0 / (m + 1)))[:, None]


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split("]")[1].split()[0])):
            terminalreporter.write_line(line)
