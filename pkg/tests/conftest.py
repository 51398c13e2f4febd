import numpy as np
import pytest

from fogrnn import ingest


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def walk_freeze_recording():
    spec = ingest.SynthSpec(duration_s=60, freezes=((25, 10),), noise=20.0)
    return ingest.prepare(ingest.generate_synthetic(spec, seed=3))


@pytest.fixture(scope="session")
def small_cohort_matrix():
    from fogrnn.eval import harness
    from fogrnn.windowing import WindowSpec

    cohort = ingest.synthetic_cohort(10, seed=11, duration_s=120.0, n_freezes=2)
    return harness.featurize_cohort(cohort, WindowSpec())


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
