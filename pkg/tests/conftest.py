import numpy as np
import pytest

from deepice import Dataset

# one line per acceptance criterion, printed at the end of the session
ACCEPTANCE_LINES: list = []


def random_dataset(n: int, D: int = 2, seed: int = 0) -> Dataset:
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(n, D))
    y = rng.choice(np.array([-1, 1], dtype=np.int8), size=n)
    return Dataset(X, y)


@pytest.fixture
def square4():
    # four points, no three collinear
    X = np.array([[0.0, 0.0], [1.0, 0.1], [0.2, 1.0], [1.1, 1.3]])
    return Dataset(X, [1, -1, -1, 1])


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
