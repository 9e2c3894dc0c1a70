import numpy as np
import pytest
from hypothesis import settings

from igaweyl.reparam import identity, make_exp_convex, make_log_concave

settings.register_profile("default", deadline=None, max_examples=50)
settings.load_profile("default")


@pytest.fixture(scope="session")
def exp_phi():
    return make_exp_convex(1.0, 0.5)


@pytest.fixture(scope="session")
def log_phi():
    return make_log_concave(1.0, 0.5)


@pytest.fixture(scope="session")
def id_phi():
    return identity()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


_VERDICTS: list[str] = []


@pytest.fixture
def verdict():
    """Record a one-line pass/fail verdict, echoed in the terminal summary."""

    def record(label: str, ok: bool, detail: str = "") -> None:
        line = f"{label}: {'PASS' if ok else 'FAIL'}" + (f" ({detail})" if detail else "")
        _VERDICTS.append(line)
        print(line)

    return record


def pytest_terminal_summary(terminalreporter):
    if _VERDICTS:
        terminalreporter.section("acceptance criteria")
        for line in _VERDICTS:
            terminalreporter.write_line(line)
