import sys
from pathlib import Path

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, str(Path(__file__).parent))

from ipsw.domain import DgpSpec  # noqa: E402
from ipsw.scenarios import toy_dgp  # noqa: E402

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture
def toy() -> DgpSpec:
    return toy_dgp()


def random_spec(rng: np.random.Generator, K: int, floor: float = 0.0) -> DgpSpec:
    """A valid spec with K strata, every p_R at least ``floor``."""
    p_R = floor + (1 - K * floor) * rng.dirichlet(np.ones(K))
    return DgpSpec(
        p_R=p_R / p_R.sum(),
        p_T=rng.dirichlet(np.ones(K)),
        pi=rng.uniform(0.15, 0.85, K),
        mean0=rng.normal(0, 3, K),
        mean1=rng.normal(2, 3, K),
        var0=rng.uniform(0.2, 3, K),
        var1=rng.uniform(0.2, 3, K),
    )


ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def acceptance_log():
    return ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
