import math

import numpy as np
import pytest
from scipy import stats

from relaysim.channel import NetworkRealization, TrialSeed
from relaysim.montecarlo import batch_snrs
from relaysim.protocol import (
    TrialConfig,
    decode_mask,
    decode_set,
    evaluate_trial,
    mutual_information,
    outage,
    run_trial,
)
from relaysim.schemes import FIG2_SCHEMES, PowerConfig, SchemeKind

from conftest import BIG, cn


def cfg(**kw):
    base = dict(m=4, n_t=1, power=PowerConfig(100.0, 1.0), r_tar=4.0, schemes=FIG2_SCHEMES)
    base.update(kw)
    return TrialConfig(**base)


@pytest.mark.parametrize("snr, bits", [(0.0, 0.0), (1.0, 1.0), (15.0, 4.0)])
def test_mutual_information(snr, bits):
    assert mutual_information(snr) == bits


def test_mutual_information_rejects_negative():
    with pytest.raises(ValueError):
        mutual_information(-0.1)


def test_decode_boundary_counts_as_success():
    h = np.array([1.0 + 0j])
    # |h|^2 p_s = 15 = 2^4 - 1 exactly
    assert list(decode_set(h, 15.0, 4.0)) == [0]
    assert list(decode_set(h, 14.999, 4.0)) == []


def test_decode_all_at_high_power(rng):
    h = cn(rng, 6)
    assert list(decode_set(h, 1e12, 4.0)) == list(range(6))


def test_decode_monotone_in_source_power(rng):
    h = cn(rng, (1000, 5))
    prev = decode_mask(h, 1.0, 4.0)
    for p_s in (3.0, 10.0, 100.0, 1000.0):
        cur = decode_mask(h, p_s, 4.0)
        assert np.all(cur >= prev)
        prev = cur


def test_decode_probability_matches_exponential_cdf(big_network_sample):
    src, _ = big_network_sample
    freq = decode_mask(src[:, 0], 100.0, 4.0).mean()
    assert abs(freq - math.exp(-15 / 100)) <= 0.001


def test_config_validation():
    with pytest.raises(ValueError):
        cfg(r_tar=0.0)
    with pytest.raises(ValueError):
        cfg(fixed_mprime=5)
    with pytest.raises(ValueError):
        cfg(schemes=())
    with pytest.raises(ValueError):
        cfg(n_t=2)  # selection benchmarks need single-antenna relays
    c = cfg(n_t=2, schemes=(SchemeKind.PROPOSED_MULTIANTENNA, SchemeKind.CENTRALIZED))
    assert c.n_t == 2


def test_injected_channel_boundary():
    c = cfg(m=1, fixed_mprime=1, power=PowerConfig(1.0, 15.0), schemes=(SchemeKind.PROPOSED,))
    net = NetworkRealization(np.array([0.0 + 0j]), np.array([[[1.0], [1.0]]], dtype=complex))
    out = evaluate_trial(c, net)
    assert out.m_prime == 1
    assert out.snr[SchemeKind.PROPOSED] == 15.0
    assert mutual_information(out.snr[SchemeKind.PROPOSED]) == 4.0
    assert out.outage[SchemeKind.PROPOSED] is False


def test_empty_decode_set_all_outage():
    c = cfg(m=3)
    net = NetworkRealization(np.zeros(3, dtype=complex), np.ones((3, 2, 1), dtype=complex))
    out = evaluate_trial(c, net)
    assert out.m_prime == 0
    assert all(out.outage[k] for k in c.schemes)
    assert all(out.snr[k] == 0.0 for k in c.schemes)


def test_run_trial_deterministic():
    c = cfg()
    a = run_trial(c, TrialSeed(3, 17))
    b = run_trial(c, TrialSeed(3, 17))
    assert a == b


def test_fixed_mprime_ignores_first_hop(rng):
    c = cfg(fixed_mprime=2)
    dest = cn(rng, (4, 2, 1))
    a = evaluate_trial(c, NetworkRealization(np.zeros(4, dtype=complex), dest))
    b = evaluate_trial(c, NetworkRealization(cn(rng, 4) * 100, dest))
    assert a == b and a.m_prime == 2


def test_power_monotonicity_and_outage_dominance(rng):
    src = cn(rng, (2000, 4))
    dst = cn(rng, (2000, 4, 2, 1))
    prev = None
    for p_db in range(0, 21, 2):
        c = cfg(power=PowerConfig(100.0, 10 ** (p_db / 10)))
        _, snrs = batch_snrs(c, src, dst)
        flags = {k: outage(v, c.r_tar) for k, v in snrs.items()}
        if prev is not None:
            for k in flags:
                assert np.all(flags[k] <= prev[k])
        # a dominated scheme is in outage whenever the dominating one is
        assert np.all(flags[SchemeKind.PROPOSED] >= flags[SchemeKind.CENTRALIZED])
        assert np.all(flags[SchemeKind.ARBITRARY_SELECTION] >= flags[SchemeKind.OPTIMAL_SELECTION])
        prev = flags


def test_single_relay_proposed_outage_gamma_oracle(big_network_sample):
    src, dst = big_network_sample
    p_r, r_tar = 10.0, 4.0
    c = cfg(m=1, fixed_mprime=1, power=PowerConfig(100.0, p_r), schemes=(SchemeKind.PROPOSED,))
    _, snrs = batch_snrs(c, src, dst)
    freq = outage(snrs[SchemeKind.PROPOSED], r_tar).mean()
    p = stats.gamma(a=2).cdf(2 * (2 ** r_tar - 1) / p_r)
    assert abs(freq - p) <= 3 * math.sqrt(p * (1 - p) / BIG)
