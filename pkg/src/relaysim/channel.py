"""I.i.d. Rayleigh fading and complex Gaussian noise with per-trial streams.

Each trial owns its random streams. A stream is a Philox generator whose key
holds the master seed (plus a domain word separating channel draws from noise
draws) and whose counter holds the trial index and stream tag, so the mapping
``(master_seed, trial_index, stream_tag) -> stream`` is injective and does not
depend on the order in which trials are executed.
"""

from dataclasses import dataclass

import numpy as np

_MASK64 = (1 << 64) - 1
_DOMAIN_NETWORK = 0
_DOMAIN_NOISE = 1


@dataclass(frozen=True)
class TrialSeed:
    master_seed: int
    trial_index: int

    def __post_init__(self):
        for name in ("master_seed", "trial_index"):
            val = getattr(self, name)
            if not 0 <= val <= _MASK64:
                raise ValueError(f"{name} must fit in an unsigned 64-bit integer, got {val}")


@dataclass(frozen=True)
class NetworkRealization:
    """One fading draw for ``m`` relays with ``n_t`` antennas each.

    ``source_to_relay`` has shape ``(m,)``; ``relay_to_dest`` has shape
    ``(m, 2, n_t)`` (row = destination antenna, column = relay antenna).
    """

    source_to_relay: np.ndarray
    relay_to_dest: np.ndarray

    def __post_init__(self):
        s, d = self.source_to_relay, self.relay_to_dest
        if s.ndim != 1 or s.shape[0] < 1:
            raise ValueError("need at least one relay")
        if d.ndim != 3 or d.shape[0] != s.shape[0] or d.shape[1] != 2 or d.shape[2] < 1:
            raise ValueError(f"relay_to_dest must have shape (m, 2, n_t), got {d.shape}")
        if not (np.all(np.isfinite(s)) and np.all(np.isfinite(d))):
            raise ValueError("channel coefficients must be finite")

    @property
    def m(self) -> int:
        return self.source_to_relay.shape[0]

    @property
    def n_t(self) -> int:
        return self.relay_to_dest.shape[2]

    def simo(self) -> np.ndarray:
        """Relay-to-destination channels as ``(m, 2)`` SIMO vectors (``n_t == 1`` only)."""
        if self.n_t != 1:
            raise ValueError("SIMO view requires single-antenna relays")
        return self.relay_to_dest[:, :, 0]

    def subset(self, count: int) -> "NetworkRealization":
        """The first ``count`` relays of this realization."""
        return NetworkRealization(self.source_to_relay[:count], self.relay_to_dest[:count])


def trial_generator(seed: TrialSeed, stream_tag: int = 0, *, domain: int = _DOMAIN_NOISE) -> np.random.Generator:
    if not 0 <= stream_tag <= _MASK64:
        raise ValueError(f"stream_tag must fit in 64 bits, got {stream_tag}")
    key = seed.master_seed | (domain << 64)
    # counter word 0 advances with draws; words 1 and 2 pin the stream
    counter = (stream_tag << 64) | (seed.trial_index << 128)
    return np.random.Generator(np.random.Philox(key=key, counter=counter))


def _complex_normal(gen: np.random.Generator, shape) -> np.ndarray:
    z = gen.standard_normal((*shape, 2))
    z *= np.sqrt(0.5)
    return z[..., 0] + 1j * z[..., 1]


def sample_network(m: int, n_t: int, seed: TrialSeed) -> NetworkRealization:
    """Draw source->relay and relay->destination CN(0, 1) coefficients.

    Draws are laid out relay by relay, so the first ``k`` relays of a draw
    with ``m > k`` coincide with a draw made with ``m == k``.
    """
    if m < 1:
        raise ValueError(f"relay count must be >= 1, got {m}")
    if n_t < 1:
        raise ValueError(f"antennas per relay must be >= 1, got {n_t}")
    gen = trial_generator(seed, 0, domain=_DOMAIN_NETWORK)
    coeffs = _complex_normal(gen, (m, 1 + 2 * n_t))
    return NetworkRealization(coeffs[:, 0].copy(), coeffs[:, 1:].reshape(m, 2, n_t).copy())


def sample_networks(m: int, n_t: int, master_seed: int, trial_indices) -> tuple[np.ndarray, np.ndarray]:
    """Stack :func:`sample_network` over many trials.

    Returns ``(source, dest)`` with shapes ``(T, m)`` and ``(T, m, 2, n_t)``.
    """
    trial_indices = np.asarray(trial_indices, dtype=np.uint64)
    if m < 1 or n_t < 1:
        raise ValueError("m and n_t must be >= 1")
    width = 1 + 2 * n_t
    raw = np.empty((trial_indices.size, m, width, 2))
    for k, idx in enumerate(trial_indices.tolist()):
        gen = trial_generator(TrialSeed(master_seed, idx), 0, domain=_DOMAIN_NETWORK)
        raw[k] = gen.standard_normal((m, width, 2))
    raw *= np.sqrt(0.5)
    coeffs = raw[..., 0] + 1j * raw[..., 1]
    return coeffs[:, :, 0], coeffs[:, :, 1:].reshape(trial_indices.size, m, 2, n_t)


def sample_complex_noise(count: int, seed: TrialSeed, stream_tag: int) -> np.ndarray:
    """``count`` i.i.d. CN(0, 1) samples from the trial's ``stream_tag`` stream."""
    if count < 0:
        raise ValueError(f"count must be >= 0, got {count}")
    return _complex_normal(trial_generator(seed, stream_tag), (count,))
