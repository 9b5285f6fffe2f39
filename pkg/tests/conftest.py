import numpy as np
import pytest

ACCEPTANCE_LINES = []


def record(name, ok, metric, tolerance, note=""):
    line = f"{name}: {'PASS' if ok else 'FAIL'} metric={metric:.3e} tolerance={tolerance:.1e}"
    if note:
        line += f" ({note})"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_unit(rng, n):
    v = rng.standard_normal((n, 3))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
