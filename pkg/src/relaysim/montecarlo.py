"""Outage-probability estimation over parameter sweeps."""

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from statistics import NormalDist

import numpy as np

from relaysim.channel import sample_networks
from relaysim.protocol import TrialConfig, active_mask, outage
from relaysim.schemes import PowerConfig, SchemeKind, db_to_linear, linear_to_db, scheme_snr

AXES = ("p_r_dB", "p_s_dB", "m")
CHUNK_TRIALS = 16384
MIN_PARALLEL_CHUNK = 1024
CONFIDENCE = 0.95

CURVE_METADATA = {
    "log_base": 2,
    "rate_unit": "bits per complex symbol",
    "centralized_power": "total: M' * p_r pooled on the top singular vector of the joint channel",
    "decode_rule": "relay decodes iff log2(1 + |h_sr|^2 p_s) >= r_tar",
    "confidence_interval": "wilson score, 95%",
    "rng": "numpy Philox, key = master_seed, counter = (trial_index, stream_tag)",
}


@dataclass(frozen=True)
class SweepSpec:
    axis: str
    values: tuple
    base: TrialConfig
    trials: int

    def __post_init__(self):
        if self.axis not in AXES:
            raise ValueError(f"unknown sweep axis {self.axis!r}; choose from {AXES}")
        vals = tuple(self.values)
        object.__setattr__(self, "values", vals)
        if not vals:
            raise ValueError("sweep needs at least one value")
        diffs = np.diff(np.asarray(vals, dtype=float))
        if not (np.all(diffs > 0) or np.all(diffs < 0)):
            raise ValueError("sweep values must be strictly monotone")
        if self.trials < 1:
            raise ValueError(f"trials must be >= 1, got {self.trials}")
        if self.axis == "m" and any(int(v) != v or v < 1 for v in vals):
            raise ValueError("relay counts must be positive integers")
        for v in vals:
            self.config_at(v)

    def config_at(self, value) -> TrialConfig:
        """The trial configuration at one point of the sweep."""
        base = self.base
        if self.axis == "p_r_dB":
            return replace(base, power=PowerConfig(base.power.p_s, db_to_linear(value)))
        if self.axis == "p_s_dB":
            return replace(base, power=PowerConfig(db_to_linear(value), base.power.p_r))
        return replace(base, m=int(value))


@dataclass(frozen=True)
class CurvePoint:
    scheme: SchemeKind
    axis_value: float
    config: TrialConfig
    trials: int
    outage_count: int
    outage_prob: float
    ci_low: float
    ci_high: float


@dataclass
class OutageCurve:
    sweep: SweepSpec
    master_seed: int
    counts: np.ndarray  # (n_values, n_schemes) outage counts
    metadata: dict = field(default_factory=lambda: dict(CURVE_METADATA))

    @property
    def schemes(self) -> tuple[SchemeKind, ...]:
        return self.sweep.base.schemes

    def prob(self, scheme: SchemeKind) -> np.ndarray:
        k = self.schemes.index(scheme)
        return self.counts[:, k] / self.sweep.trials

    def points(self) -> list[CurvePoint]:
        out = []
        n = self.sweep.trials
        for k, scheme in enumerate(self.schemes):
            for i, value in enumerate(self.sweep.values):
                count = int(self.counts[i, k])
                lo, hi = wilson_interval(count, n)
                out.append(CurvePoint(scheme, value, self.sweep.config_at(value), n, count, count / n, lo, hi))
        return out

    def point_db(self, point: CurvePoint) -> tuple[float, float]:
        """``(p_s_dB, p_r_dB)`` of a point, exact on the swept axis."""
        p_s_db = linear_to_db(point.config.power.p_s)
        p_r_db = linear_to_db(point.config.power.p_r)
        if self.sweep.axis == "p_s_dB":
            p_s_db = float(point.axis_value)
        elif self.sweep.axis == "p_r_dB":
            p_r_db = float(point.axis_value)
        return p_s_db, p_r_db


def wilson_interval(successes: int, trials: int, confidence: float = CONFIDENCE) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    z = NormalDist().inv_cdf(0.5 + confidence / 2)
    p = successes / trials
    z2n = z * z / trials
    denom = 1.0 + z2n
    center = (p + z2n / 2) / denom
    half = z / denom * math.sqrt(p * (1 - p) / trials + z2n / (4 * trials))
    return min(max(center - half, 0.0), p), max(min(center + half, 1.0), p)


def batch_snrs(config: TrialConfig, source: np.ndarray, dest: np.ndarray):
    """Active mask and per-scheme SNR arrays for a batch of realizations.

    ``source`` is ``(T, M)`` and ``dest`` is ``(T, M, 2, n_t)``; only the
    first ``config.m`` relays are used.
    """
    source = source[:, : config.m]
    dest = dest[:, : config.m]
    act = active_mask(config, source)
    snrs = {kind: scheme_snr(kind, dest, config.power.p_r, act) for kind in config.schemes}
    return act, snrs


def trial_snrs(config: TrialConfig, master_seed: int, trial_indices):
    """Sample the given trials and return ``(m_prime, {scheme: snr})`` arrays."""
    source, dest = sample_networks(config.m, config.n_t, master_seed, trial_indices)
    act, snrs = batch_snrs(config, source, dest)
    return act.sum(axis=-1), snrs


def _count_chunk(args) -> np.ndarray:
    configs, master_seed, start, stop = args
    m_max = max(c.m for c in configs)
    source, dest = sample_networks(m_max, configs[0].n_t, master_seed, np.arange(start, stop))
    counts = np.zeros((len(configs), len(configs[0].schemes)), dtype=np.int64)
    for i, cfg in enumerate(configs):
        _, snrs = batch_snrs(cfg, source, dest)
        for k, kind in enumerate(cfg.schemes):
            counts[i, k] = np.count_nonzero(outage(snrs[kind], cfg.r_tar))
    return counts


def _run_counts(configs, master_seed: int, trials: int, workers: int) -> np.ndarray:
    """Outage counts summed over trial chunks, optionally across processes.

    Counts are integers, so the chunk layout (which depends on ``workers``)
    never changes the result.
    """
    if workers < 1:
        raise ValueError("workers must be >= 1")
    chunk = CHUNK_TRIALS
    if workers > 1:
        # a few chunks per worker keeps the pool busy on small runs
        chunk = max(MIN_PARALLEL_CHUNK, min(CHUNK_TRIALS, -(-trials // (4 * workers))))
    jobs = [(configs, master_seed, a, min(a + chunk, trials)) for a in range(0, trials, chunk)]
    zero = np.zeros((len(configs), len(configs[0].schemes)), dtype=np.int64)
    if workers == 1 or len(jobs) == 1:
        return sum(map(_count_chunk, jobs), zero)
    with ProcessPoolExecutor(max_workers=min(workers, len(jobs))) as pool:
        return sum(pool.map(_count_chunk, jobs), zero)


def estimate(sweep: SweepSpec, master_seed: int, workers: int = 1) -> OutageCurve:
    """Monte Carlo outage probabilities at every sweep point.

    Trial ``i`` at every sweep point uses the realization seeded by
    ``(master_seed, i)``; relay ``j`` of a realization does not depend on the
    relay count, so sweeps over ``m`` see nested networks. Results are
    identical for any ``workers``.
    """
    configs = [sweep.config_at(v) for v in sweep.values]
    total = _run_counts(configs, master_seed, sweep.trials, workers)
    meta = dict(CURVE_METADATA)
    meta["master_seed"] = master_seed
    return OutageCurve(sweep=sweep, master_seed=master_seed, counts=total, metadata=meta)


def decode_probability(p_s: float, r_tar: float) -> float:
    """Probability that one relay decodes the first hop under Rayleigh fading."""
    return math.exp(-(2.0 ** r_tar - 1.0) / p_s)


@dataclass
class ActiveCountCurve:
    """Outage conditioned on the number of active relays.

    ``counts[k]`` holds outage counts with exactly ``k`` active relays
    (row 0 is the empty set, always in outage). Relays are i.i.d., so
    which ``k`` relays decoded does not matter.
    """

    base: TrialConfig
    master_seed: int
    trials: int
    counts: np.ndarray  # (k_max + 1, n_schemes)

    @property
    def k_max(self) -> int:
        return self.counts.shape[0] - 1

    def conditional(self, scheme: SchemeKind) -> np.ndarray:
        k = self.base.schemes.index(SchemeKind(scheme))
        return self.counts[:, k] / self.trials

    def outage_vs_m(self, scheme: SchemeKind, m_values) -> np.ndarray:
        """Mix the conditional curve over ``M' ~ Binomial(m, q)``."""
        q = decode_probability(self.base.power.p_s, self.base.r_tar)
        cond = self.conditional(scheme)
        out = []
        for m in m_values:
            m = int(m)
            if not 0 <= m <= self.k_max:
                raise ValueError(f"m={m} outside 0..{self.k_max}")
            pmf = [math.comb(m, k) * q ** k * (1 - q) ** (m - k) for k in range(m + 1)]
            out.append(float(np.dot(pmf, cond[: m + 1])))
        return np.array(out)


def estimate_by_active_count(base: TrialConfig, k_max: int, trials: int, master_seed: int,
                             workers: int = 1) -> ActiveCountCurve:
    """Conditional outage for ``k = 0..k_max`` active relays.

    Lower-variance companion to a random-``M'`` sweep over ``m``: the
    binomial law of ``M'`` is applied exactly, so tail probabilities far
    below ``1/trials`` stay resolvable. Trials use nested networks across
    ``k``, hence the conditional curves are non-increasing in ``k``.
    """
    if k_max < 1:
        raise ValueError("k_max must be >= 1")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    configs = [replace(base, m=k, fixed_mprime=k) for k in range(1, k_max + 1)]
    total = _run_counts(configs, master_seed, trials, workers)
    empty = np.full((1, len(base.schemes)), trials, dtype=np.int64)
    return ActiveCountCurve(base, master_seed, trials, np.vstack([empty, total]))


def _gamma2_cdf(x: float) -> float:
    return -math.expm1(-x) - x * math.exp(-x)


def analytic_outage_single_relay(scheme: SchemeKind, p_r: float, r_tar: float) -> float:
    """Closed-form outage for a single active relay under Rayleigh fading.

    With ``t = 2^r_tar - 1``: the proposed scheme is in outage when
    ``||h||^2 < 2t/p_r`` and opportunistic relaying when ``||h||^2 < t/p_r``,
    where ``||h||^2 ~ Gamma(2, 1)``; antenna selection compares ``|h_1|^2``
    (arbitrary) or ``max(|h_1|^2, |h_2|^2)`` (optimal) with ``t/p_r`` for
    i.i.d. ``Exp(1)`` gains.
    """
    scheme = SchemeKind(scheme)
    if not p_r > 0:
        raise ValueError("p_r must be positive")
    x = (2.0 ** r_tar - 1.0) / p_r
    if scheme is SchemeKind.PROPOSED:
        return _gamma2_cdf(2 * x)
    if scheme is SchemeKind.OPPORTUNISTIC:
        return _gamma2_cdf(x)
    if scheme is SchemeKind.ARBITRARY_SELECTION:
        return -math.expm1(-x)
    if scheme is SchemeKind.OPTIMAL_SELECTION:
        return (-math.expm1(-x)) ** 2
    raise ValueError(f"no single-relay closed form for scheme {scheme.value}")


def required_power_db(curve: OutageCurve, scheme: SchemeKind, level: float) -> float:
    """Relay power (dB) where a p_r sweep crosses ``level``.

    Interpolates log10(outage) linearly in dB between the two bracketing
    points; returns ``nan`` if the curve never crosses.
    """
    if curve.sweep.axis != "p_r_dB":
        raise ValueError("required power needs a p_r_dB sweep")
    xs = np.asarray(curve.sweep.values, dtype=float)
    ps = curve.prob(scheme)
    order = np.argsort(xs)
    xs, ps = xs[order], ps[order]
    for i in range(len(xs) - 1):
        if ps[i] >= level > ps[i + 1]:
            if ps[i + 1] == 0:
                return float(xs[i + 1])
            y0, y1 = math.log10(ps[i]), math.log10(ps[i + 1])
            t = (math.log10(level) - y0) / (y1 - y0)
            return float(xs[i] + t * (xs[i + 1] - xs[i]))
    return float("nan")
