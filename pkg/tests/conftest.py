import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

settings.register_profile(
    "default", max_examples=60, deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")

finite = st.floats(-10.0, 10.0, allow_nan=False, allow_infinity=False)


@st.composite
def impulse_responses(draw, max_p=8):
    p = draw(st.integers(1, max_p))
    return draw(hnp.arrays(np.float64, 2 * p - 1, elements=finite))


@st.composite
def square_matrices(draw, max_p=8):
    p = draw(st.integers(1, max_p))
    return draw(hnp.arrays(np.float64, (p, p), elements=finite))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_feasible_w(rng, U, V, p):
    """Random ``W`` with ``U'W = 0``, ``WV = 0``, ``||W|| <= 1``."""
    from hankelpath.spectral import orth_complement

    Up, Vp = orth_complement(U), orth_complement(V)
    if Up.shape[1] == 0:
        return np.zeros((p, p))
    D = rng.standard_normal((Up.shape[1], Vp.shape[1]))
    D /= np.linalg.norm(D, 2) / rng.uniform(0, 1)
    return Up @ D @ Vp.T


# one line per acceptance criterion, echoed at the end of the run
ACCEPTANCE_LINES: dict = {}


def record_criterion(number: int, ok: bool, detail: str) -> None:
    line = f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES[number] = line
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[k])
