"""Universal two-antenna space-time combining and relay-side channel inversion.

Real stacking conventions used throughout:

* received block (8 reals):
  ``[s1R(1), s1I(1), s2R(1), s2I(1), s1R(2), s1I(2), s2R(2), s2I(2)]``
* transmitted block (4 reals): ``[xR(1), xI(1), xR(2), xI(2)]``

All functions broadcast over leading batch axes.
"""

import numpy as np

from relaysim.linalg import simo_norm

# Fixed combining matrix; it does not depend on the channel.
COMBINER = np.array(
    [
        [1, 0, 0, 0, 0, 0, 1, 0],
        [0, 1, 0, 0, 0, 0, 0, -1],
        [0, 0, 1, 0, -1, 0, 0, 0],
        [0, 0, 0, 1, 0, 1, 0, 0],
    ],
    dtype=float,
) / np.sqrt(2.0)
COMBINER.setflags(write=False)


def stack_rx(antenna1, antenna2) -> np.ndarray:
    """Stack two time samples from each antenna into the 8-real layout.

    ``antenna1`` and ``antenna2`` have shape ``(..., 2)`` (time on the last
    axis).
    """
    a1 = np.asarray(antenna1, dtype=complex)
    a2 = np.asarray(antenna2, dtype=complex)
    if a1.shape[-1:] != (2,) or a2.shape != a1.shape:
        raise ValueError("each antenna needs two time samples with matching shapes")
    per_time = np.stack([a1, a2], axis=-1)  # (..., time, antenna)
    parts = np.stack([per_time.real, per_time.imag], axis=-1)
    return parts.reshape(*a1.shape[:-1], 8)


def unstack_rx(s) -> tuple[np.ndarray, np.ndarray]:
    """Inverse of :func:`stack_rx`."""
    s = np.asarray(s, dtype=float)
    parts = s.reshape(*s.shape[:-1], 2, 2, 2)
    z = parts[..., 0] + 1j * parts[..., 1]
    return z[..., 0], z[..., 1]


def stack_tx(symbols) -> np.ndarray:
    """Two complex symbols ``(..., 2)`` -> 4-real transmit block."""
    z = np.asarray(symbols, dtype=complex)
    return np.stack([z.real, z.imag], axis=-1).reshape(*z.shape[:-1], 4)


def unstack_tx(x) -> np.ndarray:
    """4-real transmit block -> two complex symbols ``(..., 2)``."""
    x = np.asarray(x, dtype=float)
    return x[..., 0::2] + 1j * x[..., 1::2]


def apply_combiner(s, combiner: np.ndarray | None = None) -> np.ndarray:
    """``r = P s`` for stacked receive blocks of shape ``(..., 8)``."""
    p = COMBINER if combiner is None else combiner
    return np.asarray(s, dtype=float) @ p.T


def effective_orthonormal(h1, h2) -> np.ndarray:
    """The 4 x 4 real orthonormal matrix seen through the combiner.

    Raises ``ValueError`` when ``h1 = h2 = 0``; such a relay carries no signal
    and should be dropped from the active set instead.
    """
    h1 = np.asarray(h1, dtype=complex)
    h2 = np.asarray(h2, dtype=complex)
    norm = simo_norm(np.stack(np.broadcast_arrays(h1, h2), axis=-1))
    if np.any(np.asarray(norm) == 0):
        raise ValueError("zero channel: relay has no path to the destination")
    ar, ai, br, bi = h1.real, h1.imag, h2.real, h2.imag
    rows = [
        [ar, -ai, br, -bi],
        [ai, ar, -bi, -br],
        [br, -bi, -ar, ai],
        [bi, br, ai, ar],
    ]
    o = np.stack([np.stack(np.broadcast_arrays(*r), axis=-1) for r in rows], axis=-2)
    return o / np.asarray(norm)[..., None, None]


def relay_transform(x, h1, h2, alpha) -> np.ndarray:
    """Pre-invert the relay's effective channel: ``alpha * O(h1, h2)^T x``.

    Returns the two complex symbols the relay puts on the air (shape
    ``(..., 2)``), read back from the 4-real result in transmit-block layout.
    """
    alpha = np.asarray(alpha, dtype=float)
    if not np.all(alpha > 0):
        raise ValueError(f"alpha must be positive, got {alpha}")
    o = effective_orthonormal(h1, h2)
    x = np.asarray(x, dtype=float)
    out = alpha[..., None] * np.einsum("...ji,...j->...i", o, x)
    return unstack_tx(out)


def propagate(symbols, channels, noise=None) -> tuple[np.ndarray, np.ndarray]:
    """Superimpose relay transmissions at the two destination antennas.

    ``symbols`` has shape ``(..., M, 2)`` (relay, time) and ``channels`` shape
    ``(..., M, 2)`` (relay, antenna). ``noise``, if given, is a stacked
    receive block ``(..., 8)``. Returns the two antenna sample pairs.
    """
    symbols = np.asarray(symbols, dtype=complex)
    channels = np.asarray(channels, dtype=complex)
    rx = np.einsum("...ja,...jt->...at", channels, symbols)
    ant1, ant2 = rx[..., 0, :], rx[..., 1, :]
    if noise is not None:
        n1, n2 = unstack_rx(noise)
        ant1, ant2 = ant1 + n1, ant2 + n2
    return ant1, ant2


def propagate_and_combine(x, relays, noise=None, combiner: np.ndarray | None = None) -> np.ndarray:
    """Full second-hop chain for one 2-symbol batch.

    Each relay in ``relays`` (a sequence of ``(h, alpha)`` with ``h`` a
    two-antenna SIMO channel) applies :func:`relay_transform`, the signals
    add up over the air, and the destination stacks and combines them. With
    no relays the output is just the combined noise.
    """
    x = np.asarray(x, dtype=float)
    if noise is None:
        noise = np.zeros(8)
    if len(relays) == 0:
        return apply_combiner(noise, combiner)
    chans = np.array([h for h, _ in relays], dtype=complex)
    alphas = np.array([a for _, a in relays], dtype=float)
    syms = relay_transform(x, chans[:, 0], chans[:, 1], alphas)
    ant1, ant2 = propagate(syms, chans, noise)
    return apply_combiner(stack_rx(ant1, ant2), combiner)


def scalar_gain(relays) -> float:
    """Per-component amplitude gain the combined output applies to ``x``."""
    return float(sum(alpha * simo_norm(h) for h, alpha in relays) / np.sqrt(2.0))


def transmit_blocks(symbols) -> np.ndarray:
    """Split a length-``T`` symbol stream (T even) into 4-real blocks."""
    z = np.asarray(symbols, dtype=complex)
    if z.shape[-1] % 2:
        raise ValueError("symbol stream length must be even")
    return stack_tx(z.reshape(*z.shape[:-1], -1, 2))
