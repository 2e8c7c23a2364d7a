import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from relaysim.channel import TrialSeed, sample_complex_noise
from relaysim.combining import (
    COMBINER,
    apply_combiner,
    effective_orthonormal,
    propagate,
    propagate_and_combine,
    relay_transform,
    scalar_gain,
    stack_rx,
    stack_tx,
    transmit_blocks,
    unstack_rx,
    unstack_tx,
)

from conftest import cn

R2 = 1 / np.sqrt(2)


def symbol_level_chain(x, hs, alphas):
    """Independent reference: explicit per-antenna, per-time sums, then P."""
    out_syms = []
    for h, a in zip(hs, alphas):
        o = effective_orthonormal(h[0], h[1])
        v = a * o.T @ x
        out_syms.append((v[0] + 1j * v[1], v[2] + 1j * v[3]))
    s = np.zeros(8)
    for t in range(2):
        for ant in range(2):
            z = sum(h[ant] * sy[t] for h, sy in zip(hs, out_syms))
            s[4 * t + 2 * ant] = z.real
            s[4 * t + 2 * ant + 1] = z.imag
    return COMBINER @ s


def test_stack_layout():
    s = stack_rx([1 + 2j, 5 + 6j], [3 + 4j, 7 + 8j])
    np.testing.assert_array_equal(s, np.arange(1, 9, dtype=float))
    np.testing.assert_array_equal(stack_rx([0, 0], [0, 0]), np.zeros(8))


def test_stack_round_trip(rng):
    a1, a2 = cn(rng, (5, 2)), cn(rng, (5, 2))
    b1, b2 = unstack_rx(stack_rx(a1, a2))
    np.testing.assert_array_equal(a1, b1)
    np.testing.assert_array_equal(a2, b2)
    z = cn(rng, (3, 2))
    np.testing.assert_array_equal(unstack_tx(stack_tx(z)), z)


def test_combiner_matrix():
    assert COMBINER.shape == (4, 8)
    assert set(np.unique(COMBINER)) <= {0.0, R2, -R2}
    assert np.abs(COMBINER @ COMBINER.T - np.eye(4)).max() <= 1e-15
    assert not COMBINER.flags.writeable


@pytest.mark.parametrize(
    "col, expected",
    [(0, R2 * np.eye(4)[0]), (6, R2 * np.eye(4)[0]), (7, -R2 * np.eye(4)[1])],
)
def test_combiner_columns(col, expected):
    np.testing.assert_array_equal(apply_combiner(np.eye(8)[col]), expected)


def test_effective_orthonormal_substitutions():
    np.testing.assert_array_equal(effective_orthonormal(1, 0), np.diag([1.0, 1.0, -1.0, 1.0]))
    expected = np.array([[0, 0, 1, 0], [0, 0, 0, -1], [1, 0, 0, 0], [0, 1, 0, 0]], dtype=float)
    np.testing.assert_array_equal(effective_orthonormal(0, 1), expected)


def test_effective_orthonormal_random(rng):
    h = cn(rng, (10_000, 2))
    o = effective_orthonormal(h[:, 0], h[:, 1])
    assert np.abs(o @ np.swapaxes(o, 1, 2) - np.eye(4)).max() <= 1e-12


def test_zero_channel_rejected():
    with pytest.raises(ValueError):
        effective_orthonormal(0, 0)
    with pytest.raises(ValueError):
        relay_transform(np.ones(4), 0, 0, 1.0)


def test_single_relay_identity(rng):
    for _ in range(200):
        h = cn(rng, 2)
        x = rng.standard_normal(4)
        syms = unstack_tx(x)
        r = apply_combiner(stack_rx(h[0] * syms, h[1] * syms))
        expect = np.linalg.norm(h) * R2 * effective_orthonormal(h[0], h[1]) @ x
        assert np.abs(r - expect).max() <= 1e-10


def test_relay_transform_examples():
    a, b, c, d = 1.0, 2.0, 3.0, 4.0
    out = relay_transform([a, b, c, d], 1, 0, 2.0)
    np.testing.assert_allclose(out, 2.0 * np.array([a + 1j * b, -c + 1j * d]))
    np.testing.assert_array_equal(relay_transform(np.zeros(4), 0.3 + 1j, 2, 1.5), np.zeros(2))
    with pytest.raises(ValueError):
        relay_transform(np.ones(4), 1, 0, 0.0)


def test_relay_transform_energy(rng):
    for _ in range(200):
        h = cn(rng, 2)
        x = rng.standard_normal(4)
        alpha = rng.uniform(0.1, 5)
        out = relay_transform(x, h[0], h[1], alpha)
        assert abs(np.linalg.norm(out) - alpha * np.linalg.norm(x)) <= 1e-12 * max(1, alpha * np.linalg.norm(x))


def test_chain_one_relay():
    x = np.array([1.0, -2.0, 0.5, 3.0])
    np.testing.assert_allclose(propagate_and_combine(x, [((1, 0), 1.0)]), R2 * x, atol=1e-15)


def test_chain_two_orthogonal_relays():
    x = np.array([1.0, -2.0, 0.5, 3.0])
    relays = [((1, 0), 1.0), ((0, 1), 1.0)]
    y = propagate_and_combine(x, relays)
    np.testing.assert_allclose(y, np.sqrt(2) * x, atol=1e-14)
    np.testing.assert_allclose(y, symbol_level_chain(x, [np.array(h) for h, _ in relays], [1, 1]), atol=1e-14)


def test_chain_random_matches_reference(rng):
    for _ in range(300):
        m = rng.integers(1, 9)
        hs = cn(rng, (m, 2))
        alphas = rng.uniform(0.2, 3, m)
        x = rng.standard_normal(4)
        relays = list(zip(hs, alphas))
        y = propagate_and_combine(x, relays)
        assert np.abs(y - scalar_gain(relays) * x).max() <= 1e-10
        assert np.abs(y - symbol_level_chain(x, hs, alphas)).max() <= 1e-10


def test_chain_empty_returns_combined_noise(rng):
    n = rng.standard_normal(8)
    np.testing.assert_array_equal(propagate_and_combine(np.ones(4), [], n), COMBINER @ n)


def test_chain_noise_passes_through_combiner(rng):
    hs = cn(rng, (3, 2))
    x = rng.standard_normal(4)
    n = rng.standard_normal(8)
    relays = [(h, 1.3) for h in hs]
    y = propagate_and_combine(x, relays, n)
    np.testing.assert_allclose(y, scalar_gain(relays) * x + COMBINER @ n, atol=1e-12)


def test_propagate_sums_relays():
    syms = np.array([[1, 2], [3j, 4]], dtype=complex)
    chans = np.array([[1, 0], [2, 1j]], dtype=complex)
    a1, a2 = propagate(syms, chans)
    np.testing.assert_allclose(a1, [1 + 6j, 2 + 8])
    np.testing.assert_allclose(a2, [-3, 4j])


def test_transmit_blocks():
    z = np.array([1 + 2j, 3 + 4j, 5 + 6j, 7 + 8j])
    np.testing.assert_array_equal(transmit_blocks(z), [[1, 2, 3, 4], [5, 6, 7, 8]])
    with pytest.raises(ValueError):
        transmit_blocks(z[:3])


def test_combined_noise_white():
    noise = sample_complex_noise(4_000_000, TrialSeed(5, 0), 1).reshape(-1, 2, 2)
    n = apply_combiner(stack_rx(noise[:, 0], noise[:, 1]))
    assert np.all(np.abs(n.var(axis=0) - 0.5) <= 0.01)
    corr = np.corrcoef(n.T) - np.eye(4)
    assert np.abs(corr).max() <= 0.01


coef = st.complex_numbers(max_magnitude=1e3, allow_nan=False, allow_infinity=False).filter(lambda z: abs(z) > 1e-6)


@settings(max_examples=100, deadline=None)
@given(hs=st.lists(st.tuples(coef, coef), min_size=1, max_size=8),
       alpha=st.floats(0.01, 100))
def test_scalarization_property(hs, alpha):
    x = np.array([0.3, -1.0, 2.0, 0.7])
    relays = [(np.array(h), alpha) for h in hs]
    y = propagate_and_combine(x, relays)
    g = scalar_gain(relays)
    assert g > 0
    assert np.abs(y - g * x).max() <= 1e-10 * max(1.0, g)
