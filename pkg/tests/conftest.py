import os

os.environ.setdefault("NUMBA_THREADING_LAYER", "workqueue")

from hypothesis import settings  # noqa: E402

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")

import pytest  # noqa: E402

DESK_SEED = 42


@pytest.fixture(scope="session")
def desk_sweep():
    """d = 3, T = 1e5, 1e5 samples, fixed seed: the reference sweep (about a minute on one core)."""
    from frobdist.statistics import ExperimentConfig, sample_coprime

    return sample_coprime(ExperimentConfig(d=3, T=10**5, count=10**5, seed=DESK_SEED))


_ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def acceptance_report():
    """Collects one PASS/FAIL line per acceptance criterion; printed in the terminal summary."""
    return _ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
