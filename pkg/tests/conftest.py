import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(__file__))

from finset_id import HypothesisSet, NoiseConfig, SystemParams, builtin_paper_config  # noqa: E402


@pytest.fixture(scope="session")
def paper_configs():
    return {e: builtin_paper_config(e) for e in (1, 2, 3)}


@pytest.fixture
def exp1(paper_configs):
    return paper_configs[1]


@pytest.fixture
def scalar_set():
    """True a = 0.5, b = 1 against a = 0.4."""
    return HypothesisSet((SystemParams([[0.5]], [[1.0]]), SystemParams([[0.4]], [[1.0]])))


@pytest.fixture
def unit_noise_1d():
    return NoiseConfig([[1.0]], [[1.0]])


def random_spd(rng, n, jitter=0.1):
    m = rng.standard_normal((n, n))
    return m @ m.T + jitter * np.eye(n)


def random_instance(rng, n_x=2, n_u=1, n_candidates=3):
    cands = [SystemParams(0.9 * rng.uniform(-1, 1, (n_x, n_x)) / n_x, rng.standard_normal((n_x, n_u)))
             for _ in range(n_candidates)]
    noise = NoiseConfig(random_spd(rng, n_x), random_spd(rng, n_u))
    return HypothesisSet(tuple(cands)), noise


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[n])
