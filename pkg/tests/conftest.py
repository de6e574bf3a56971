import numpy as np
import pytest

from symrestore.models import PairingModel, build_pairing


def random_state(n: int, seed: int = 0) -> np.ndarray:
    rng = np.random.default_rng(seed)
    v = rng.normal(size=1 << n) + 1j * rng.normal(size=1 << n)
    return v / np.linalg.norm(v)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def pairing4():
    m = PairingModel(4, 1.0, 2)
    return m, build_pairing(m)


@pytest.fixture(scope="session")
def pairing8():
    m = PairingModel(8, 1.0, 4)
    return m, build_pairing(m)


ACCEPTANCE_LINES: list[str] = []


def record(label: str, passed: bool, detail: str) -> bool:
    line = f"{'PASS' if passed else 'FAIL'} {label}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return passed


def note(label: str, detail: str) -> None:
    line = f"INFO {label}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
