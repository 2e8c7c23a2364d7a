"""Self-check suite run by ``relaysim verify``.

Each check returns a :class:`CheckResult`; :func:`run_checks` runs them all.
Trial counts are kept small so the whole suite finishes in a few seconds.
"""

import math
from dataclasses import dataclass

import numpy as np

from relaysim import combining
from relaysim.channel import TrialSeed, sample_complex_noise, sample_networks
from relaysim.linalg import svd_2xn, top_singular_value_sq
from relaysim.montecarlo import SweepSpec, analytic_outage_single_relay, estimate
from relaysim.protocol import TrialConfig, decode_mask, outage
from relaysim.schemes import (
    PowerConfig,
    SchemeKind,
    snr_arbitrary_selection,
    snr_centralized,
    snr_opportunistic,
    snr_optimal_selection,
    snr_proposed,
)


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str

    def __post_init__(self):
        object.__setattr__(self, "passed", bool(self.passed))


def _cn(rng, shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) * math.sqrt(0.5)


def check_combiner_rows(combiner):
    err = np.abs(combiner @ combiner.T - np.eye(4)).max()
    return CheckResult("combiner rows orthonormal", bool(err <= 1e-15), f"max |P P^T - I| = {err:.3e}")


def check_effective_orthonormal(rng, draws=10_000):
    h = _cn(rng, (draws, 2))
    o = combining.effective_orthonormal(h[:, 0], h[:, 1])
    err = np.abs(o @ np.swapaxes(o, -1, -2) - np.eye(4)).max()
    return CheckResult("effective channel orthonormal", bool(err <= 1e-12), f"max |O O^T - I| = {err:.3e}")


def check_single_relay_identity(rng, combiner, draws=2_000):
    h = _cn(rng, (draws, 2))
    x = rng.standard_normal((draws, 4))
    syms = combining.unstack_tx(x)
    ant1, ant2 = h[:, :1] * syms, h[:, 1:] * syms
    r = combining.apply_combiner(combining.stack_rx(ant1, ant2), combiner)
    o = combining.effective_orthonormal(h[:, 0], h[:, 1])
    expect = (np.linalg.norm(h, axis=1) / math.sqrt(2))[:, None] * np.einsum("nij,nj->ni", o, x)
    err = np.abs(r - expect).max()
    return CheckResult("single-relay combining identity", bool(err <= 1e-10), f"max error = {err:.3e}")


def check_effective_channel(rng, combiner, instances=500):
    worst = 0.0
    for _ in range(instances):
        m = int(rng.integers(1, 9))
        h = _cn(rng, (m, 2))
        alpha = float(rng.uniform(0.1, 3.0))
        x = rng.standard_normal(4)
        relays = [(hj, alpha) for hj in h]
        y = combining.propagate_and_combine(x, relays, combiner=combiner)
        worst = max(worst, float(np.abs(y - combining.scalar_gain(relays) * x).max()))
    return CheckResult("multi-relay effective scalar channel", worst <= 1e-10, f"max error = {worst:.3e}")


def check_noise_whiteness(combiner, master_seed, draws=200_000):
    noise = sample_complex_noise(4 * draws, TrialSeed(master_seed, 0), 7).reshape(draws, 2, 2)
    n = combining.apply_combiner(combining.stack_rx(noise[:, 0], noise[:, 1]), combiner)
    var = n.var(axis=0)
    corr = np.corrcoef(n.T) - np.eye(4)
    ok = bool(np.all(np.abs(var - 0.5) <= 0.01) and np.abs(corr).max() <= 0.01)
    return CheckResult(
        "combined noise white with variance 1/2", ok,
        f"variances {np.round(var, 4).tolist()}, max |corr| = {np.abs(corr).max():.4f}",
    )


def check_svd(rng, draws=500):
    worst = 0.0
    for _ in range(draws):
        n = int(rng.integers(1, 6))
        h = _cn(rng, (2, n))
        s = svd_2xn(h)
        worst = max(worst, float(np.abs(s.reconstruct() - h).max()))
        if s.d1 < s.d2 or s.d2 < 0:
            return CheckResult("2xN SVD", False, "singular values out of order")
    return CheckResult("2xN SVD", worst <= 1e-10, f"max reconstruction error = {worst:.3e}")


def check_snr_oracles(rng, combiner, instances=300):
    worst = 0.0
    for _ in range(instances):
        m = int(rng.integers(1, 7))
        h = _cn(rng, (m, 2))
        p_r = float(rng.uniform(0.1, 10.0))
        alpha = math.sqrt(p_r)
        x = np.array([1.0, 0.0, 0.0, 0.0])
        gain = combining.propagate_and_combine(x, [(hj, alpha) for hj in h], combiner=combiner)[0]
        # unit source power: signal variance 1/2 per real component, noise 1/2
        chain_snr = gain ** 2 * 0.5 / 0.5
        worst = max(worst, abs(chain_snr - snr_proposed(h, p_r)) / chain_snr)

        g = h.T @ h.conj()
        v = np.ones(2, dtype=complex)
        for _ in range(200):
            v = g @ v
            v /= np.linalg.norm(v)
        sigma2 = float(np.real(np.vdot(v, g @ v)))
        worst = max(worst, abs(snr_centralized(h, p_r) - sigma2 * m * p_r) / (sigma2 * m * p_r))

        brute = max(float(np.sum(np.abs(hj) ** 2)) * p_r for hj in h)
        worst = max(worst, abs(snr_opportunistic(h, p_r) - brute) / brute)
        if snr_optimal_selection(h, p_r) < snr_arbitrary_selection(h, p_r):
            return CheckResult("SNR oracles", False, "optimal selection below arbitrary selection")
        if snr_centralized(h, p_r) < snr_proposed(h, p_r):
            return CheckResult("SNR oracles", False, "centralized below proposed")
    return CheckResult("SNR oracles", worst <= 1e-9, f"max relative error = {worst:.3e}")


def check_top_singular_value(rng, draws=500):
    h = _cn(rng, (draws, 2, 3))
    fast = top_singular_value_sq(h)
    ref = np.array([svd_2xn(m).d1 ** 2 for m in h])
    err = float(np.abs(fast - ref).max() / ref.max())
    return CheckResult("closed-form top singular value", err <= 1e-12, f"max relative error = {err:.3e}")


def check_single_relay_outage(master_seed, trials=100_000):
    schemes = (
        SchemeKind.PROPOSED,
        SchemeKind.OPPORTUNISTIC,
        SchemeKind.ARBITRARY_SELECTION,
        SchemeKind.OPTIMAL_SELECTION,
    )
    base = TrialConfig(1, 1, PowerConfig(100.0, 1.0), 4.0, schemes, fixed_mprime=1)
    curve = estimate(SweepSpec("p_r_dB", (5.0, 10.0, 15.0, 20.0), base, trials), master_seed)
    worst = 0.0
    for i, p_db in enumerate(curve.sweep.values):
        p_r = 10 ** (p_db / 10)
        for k, scheme in enumerate(schemes):
            p = analytic_outage_single_relay(scheme, p_r, 4.0)
            sd = math.sqrt(max(p * (1 - p), 1e-300) / trials)
            worst = max(worst, abs(curve.counts[i, k] / trials - p) / sd)
    return CheckResult("single-relay outage matches closed form", worst <= 3.0, f"worst deviation = {worst:.2f} sigma")


def check_zero_rate_edge(rng, master_seed):
    snr = np.concatenate([[0.0], rng.exponential(size=1000)])
    source, _ = sample_networks(5, 1, master_seed, range(100))
    ok = (not np.any(outage(snr, 0.0))) and bool(np.all(decode_mask(source, 1.0, 0.0)))
    return CheckResult("zero target rate never in outage", ok, "outage and decoding at r_tar = 0")


def run_checks(master_seed: int = 2024, combiner=None) -> list[CheckResult]:
    p = combining.COMBINER if combiner is None else np.asarray(combiner, dtype=float)
    rng = np.random.default_rng(master_seed)
    checks = [
        (check_combiner_rows, (p,)),
        (check_effective_orthonormal, (rng,)),
        (check_single_relay_identity, (rng, p)),
        (check_effective_channel, (rng, p)),
        (check_noise_whiteness, (p, master_seed)),
        (check_svd, (rng,)),
        (check_top_singular_value, (rng,)),
        (check_snr_oracles, (rng, p)),
        (check_single_relay_outage, (master_seed,)),
        (check_zero_rate_edge, (rng, master_seed)),
    ]
    results = []
    for fn, args in checks:
        try:
            results.append(fn(*args))
        except Exception as exc:  # a crashing check is a failed check
            results.append(CheckResult(fn.__name__, False, f"raised {exc!r}"))
    return results
