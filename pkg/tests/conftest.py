import numpy as np
import pytest

from relaysim.channel import sample_networks

BIG = 1_000_000


def cn(rng, shape):
    """Unit-variance circularly-symmetric complex Gaussian draws (test-side)."""
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) * np.sqrt(0.5)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def big_network_sample():
    """10^6 four-relay single-antenna realizations, shared by the statistical tests."""
    return sample_networks(4, 1, 99, np.arange(BIG))


SINGLE_RELAY_SCHEMES = ("proposed", "opportunistic", "arbitrary_selection", "optimal_selection")


@pytest.fixture(scope="session")
def single_relay_curve():
    """10^6-trial outage estimate with one active relay at p_r = 5, 10, 15, 20 dB."""
    from relaysim.montecarlo import SweepSpec, estimate
    from relaysim.protocol import TrialConfig
    from relaysim.schemes import PowerConfig

    base = TrialConfig(1, 1, PowerConfig(100.0, 1.0), 4.0, SINGLE_RELAY_SCHEMES, fixed_mprime=1)
    return estimate(SweepSpec("p_r_dB", (5.0, 10.0, 15.0, 20.0), base, BIG), master_seed=20240601)


ACCEPTANCE_LINES: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[n])
