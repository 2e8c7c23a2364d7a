"""Two-phase decode-and-forward trial.

Phase one: the source broadcasts and every relay whose first-hop mutual
information reaches the target rate decodes. Phase two: the decoding relays
forward and each requested scheme is scored by its receive SNR and outage.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from relaysim.channel import NetworkRealization, TrialSeed, sample_network
from relaysim.schemes import PowerConfig, SchemeKind, scheme_snr


def mutual_information(snr):
    """``log2(1 + snr)`` in bits per complex symbol."""
    arr = np.asarray(snr, dtype=float)
    if np.any(arr < 0) or np.any(np.isnan(arr)):
        raise ValueError("SNR must be non-negative")
    out = np.log2(1.0 + arr)
    return float(out) if out.ndim == 0 else out


def decode_mask(source_channels, p_s: float, r_tar: float) -> np.ndarray:
    """Boolean mask of relays whose first hop supports rate ``r_tar``.

    Broadcasts over leading axes. Meeting the rate exactly counts as success.
    """
    if not p_s > 0:
        raise ValueError(f"p_s must be positive, got {p_s}")
    h = np.asarray(source_channels, dtype=complex)
    snr = (h.real ** 2 + h.imag ** 2) * p_s
    return mutual_information(snr) >= r_tar


def decode_set(source_channels, p_s: float, r_tar: float) -> np.ndarray:
    """Indices of the relays that decode the source message."""
    return np.flatnonzero(decode_mask(np.asarray(source_channels).reshape(-1), p_s, r_tar))


def outage(snr, r_tar: float):
    """True where the mutual information falls short of ``r_tar``."""
    return np.asarray(mutual_information(snr)) < r_tar


@dataclass(frozen=True)
class TrialConfig:
    m: int
    n_t: int
    power: PowerConfig
    r_tar: float
    schemes: tuple[SchemeKind, ...]
    fixed_mprime: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "schemes", tuple(SchemeKind(s) for s in self.schemes))
        if self.m < 1:
            raise ValueError(f"need at least one relay, got m={self.m}")
        if self.n_t < 1:
            raise ValueError(f"need at least one antenna per relay, got n_t={self.n_t}")
        if not (self.r_tar > 0 and math.isfinite(self.r_tar)):
            raise ValueError(f"target rate must be positive, got {self.r_tar}")
        if not self.schemes:
            raise ValueError("no schemes requested")
        if len(set(self.schemes)) != len(self.schemes):
            raise ValueError("duplicate schemes requested")
        if self.fixed_mprime is not None and not 0 <= self.fixed_mprime <= self.m:
            raise ValueError(f"fixed_mprime must lie in [0, m={self.m}], got {self.fixed_mprime}")
        if self.n_t > 1:
            bad = [s.value for s in self.schemes if s.single_antenna_only]
            if bad:
                raise ValueError(f"schemes {bad} need single-antenna relays (n_t=1)")


@dataclass
class TrialOutcome:
    m_prime: int
    snr: dict[SchemeKind, float] = field(default_factory=dict)
    outage: dict[SchemeKind, bool] = field(default_factory=dict)


def active_mask(config: TrialConfig, source_channels) -> np.ndarray:
    """Relays taking part in phase two, broadcast over leading trial axes."""
    h = np.asarray(source_channels)
    if config.fixed_mprime is not None:
        mask = np.zeros(h.shape, dtype=bool)
        mask[..., : config.fixed_mprime] = True
        return mask
    return decode_mask(h, config.power.p_s, config.r_tar)


def evaluate_trial(config: TrialConfig, network: NetworkRealization) -> TrialOutcome:
    """Score every configured scheme on a given channel realization."""
    if network.m != config.m or network.n_t != config.n_t:
        raise ValueError("network shape does not match the trial configuration")
    act = active_mask(config, network.source_to_relay)
    outcome = TrialOutcome(m_prime=int(act.sum()))
    for kind in config.schemes:
        snr = scheme_snr(kind, network.relay_to_dest, config.power.p_r, act)
        outcome.snr[kind] = snr
        outcome.outage[kind] = bool(outage(snr, config.r_tar))
    return outcome


def run_trial(config: TrialConfig, seed: TrialSeed) -> TrialOutcome:
    return evaluate_trial(config, sample_network(config.m, config.n_t, seed))
