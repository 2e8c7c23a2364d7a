"""Receive SNR of the proposed scheme and of the benchmark schemes.

All SNR functions take relay->destination channels with the relay index on
the second-to-last axis and broadcast over any leading batch axes:

* SIMO schemes: ``channels`` of shape ``(..., M, 2)``
* matrix schemes: ``h_mats`` of shape ``(..., M, 2, n_t)``

An optional boolean ``active`` mask of shape ``(..., M)`` marks the relays
taking part in the second hop; inactive relays contribute nothing. With no
active relay every SNR is 0.
"""

import enum
import math
from dataclasses import dataclass

import numpy as np

from relaysim.linalg import as_matrix_2xn, simo_norm, svd_2xn, top_singular_value_sq


class SchemeKind(str, enum.Enum):
    PROPOSED = "proposed"
    ARBITRARY_SELECTION = "arbitrary_selection"
    OPTIMAL_SELECTION = "optimal_selection"
    OPPORTUNISTIC = "opportunistic"
    CENTRALIZED = "centralized"
    PROPOSED_MULTIANTENNA = "proposed_multiantenna"

    def __str__(self):
        return self.value

    @property
    def single_antenna_only(self) -> bool:
        return self not in (SchemeKind.CENTRALIZED, SchemeKind.PROPOSED_MULTIANTENNA)

    @classmethod
    def parse(cls, name: str) -> "SchemeKind":
        try:
            return cls(name.strip().lower())
        except ValueError:
            choices = ", ".join(k.value for k in cls)
            raise ValueError(f"unknown scheme {name!r} (choose from {choices})") from None


FIG2_SCHEMES = (
    SchemeKind.PROPOSED,
    SchemeKind.ARBITRARY_SELECTION,
    SchemeKind.OPTIMAL_SELECTION,
    SchemeKind.OPPORTUNISTIC,
    SchemeKind.CENTRALIZED,
)


def db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)


def linear_to_db(x: float) -> float:
    return 10.0 * math.log10(x)


@dataclass(frozen=True)
class PowerConfig:
    """Source power ``p_s`` and per-relay power ``p_r`` (linear, unit noise)."""

    p_s: float
    p_r: float

    def __post_init__(self):
        if not (self.p_s > 0 and self.p_r > 0):
            raise ValueError(f"powers must be positive, got p_s={self.p_s}, p_r={self.p_r}")
        if not (math.isfinite(self.p_s) and math.isfinite(self.p_r)):
            raise ValueError("powers must be finite")

    @classmethod
    def from_db(cls, p_s_db: float, p_r_db: float) -> "PowerConfig":
        return cls(db_to_linear(p_s_db), db_to_linear(p_r_db))

    @property
    def alpha(self) -> float:
        """Relay amplitude scaling relative to the source, ``sqrt(p_r / p_s)``."""
        return math.sqrt(self.p_r / self.p_s)


def _as_simo(channels) -> np.ndarray:
    arr = np.asarray(channels, dtype=complex)
    if arr.size == 0 and arr.ndim == 1:
        arr = arr.reshape(0, 2)
    if arr.ndim < 2 or arr.shape[-1] != 2:
        raise ValueError(f"SIMO channels must have shape (..., M, 2), got {arr.shape}")
    return arr


def _mask(active, shape) -> np.ndarray:
    if active is None:
        return np.ones(shape, dtype=bool)
    return np.broadcast_to(np.asarray(active, dtype=bool), shape)


def _out(x):
    x = np.asarray(x, dtype=float)
    return float(x) if x.ndim == 0 else x


def _coherent_snr(gains: np.ndarray, gains_sq: np.ndarray, active: np.ndarray, p_r: float):
    # (sum g)^2 split as sum g^2 + cross terms, so one relay gives exactly ||h||^2
    g = np.where(active, gains, 0.0)
    energy = np.sum(np.where(active, gains_sq, 0.0), axis=-1)
    cross = np.maximum(np.sum(g, axis=-1) ** 2 - np.sum(g * g, axis=-1), 0.0)
    return _out((energy + cross) * p_r / 2.0)


def _energy(h: np.ndarray) -> np.ndarray:
    return np.sum(h.real ** 2 + h.imag ** 2, axis=-1)


def snr_proposed(channels, p_r: float, active=None):
    """``(sum_j ||h_j||)^2 p_r / 2``: coherent relay sum after combining."""
    h = _as_simo(channels)
    return _coherent_snr(simo_norm(h), _energy(h), _mask(active, h.shape[:-1]), p_r)


def _antenna_amplitude_sums(h: np.ndarray, active: np.ndarray) -> np.ndarray:
    return np.sum(np.where(active[..., None], np.abs(h), 0.0), axis=-2)


def snr_arbitrary_selection(channels, p_r: float, active=None):
    """Destination listens on antenna 1 only: ``(sum_j |h_1j|)^2 p_r``."""
    h = _as_simo(channels)
    sums = _antenna_amplitude_sums(h, _mask(active, h.shape[:-1]))
    return _out(sums[..., 0] ** 2 * p_r)


def snr_optimal_selection(channels, p_r: float, active=None):
    """Best receive antenna: ``max_i (sum_j |h_ij|)^2 p_r``."""
    h = _as_simo(channels)
    sums = _antenna_amplitude_sums(h, _mask(active, h.shape[:-1]))
    per_antenna = sums ** 2 * p_r
    return _out(np.maximum(per_antenna[..., 0], per_antenna[..., 1]))


def snr_opportunistic(channels, p_r: float, active=None):
    """Single best relay with MRC at the destination: ``max_j ||h_j||^2 p_r``."""
    h = _as_simo(channels)
    energy = np.where(_mask(active, h.shape[:-1]), _energy(h), 0.0)
    if energy.shape[-1] == 0:
        return _out(np.zeros(energy.shape[:-1]))
    return _out(np.max(energy, axis=-1) * p_r)


def _as_mats(h_mats) -> np.ndarray:
    arr = np.asarray(h_mats, dtype=complex)
    if arr.ndim < 3 or arr.shape[-2] != 2:
        raise ValueError(f"relay matrices must have shape (..., M, 2, n_t), got {arr.shape}")
    return arr


def snr_centralized_mimo(h_mats, p_r: float, active=None):
    """Joint beamforming on the top singular vector with pooled power.

    The 2 x (M' n_t) joint matrix of the active relays is used with total
    power ``M' p_r``: ``sigma_max(H)^2 M' p_r``.
    """
    h = _as_mats(h_mats)
    act = _mask(active, h.shape[:-2])
    h = np.where(act[..., None, None], h, 0.0)
    joint = np.moveaxis(h, -3, -2).reshape(*h.shape[:-3], 2, h.shape[-3] * h.shape[-1])
    count = np.sum(act, axis=-1)
    if joint.shape[-1] == 0:
        return _out(np.zeros(count.shape))
    return _out(top_singular_value_sq(joint) * count * p_r)


def snr_centralized(channels, p_r: float, active=None):
    """:func:`snr_centralized_mimo` for single-antenna relays."""
    return snr_centralized_mimo(_as_simo(channels)[..., None], p_r, active)


def relay_gains(h_mats) -> np.ndarray:
    """Top singular value of each relay's 2 x n_t channel, shape ``(..., M)``."""
    h = _as_mats(h_mats)
    if h.shape[-1] == 1:
        return simo_norm(h[..., 0])
    return np.sqrt(top_singular_value_sq(h))


def snr_proposed_multiantenna(h_mats, p_r: float, active=None):
    """Proposed scheme with each relay beamforming on its top right singular vector."""
    h = np.asarray(h_mats, dtype=complex)
    if h.size == 0 and h.ndim == 1:
        return 0.0
    h = _as_mats(h)
    if h.shape[-1] == 1:
        gains_sq = _energy(h[..., 0])
    else:
        gains_sq = top_singular_value_sq(h)
    return _coherent_snr(relay_gains(h), gains_sq, _mask(active, h.shape[:-2]), p_r)


def optimal_relay_beamformer(h_mat) -> np.ndarray:
    """Unit vector maximizing ``||H p||``: the top right singular vector of ``H``."""
    h = as_matrix_2xn(h_mat)
    if not np.any(h):
        raise ValueError("zero channel matrix has no beamforming direction")
    return svd_2xn(h).v[:, 0]


def effective_simo(h_mat, p) -> np.ndarray:
    """Collapse a 2 x n_t relay channel to a SIMO channel ``H p``."""
    h = as_matrix_2xn(h_mat)
    p = np.asarray(p, dtype=complex).reshape(-1)
    if p.shape[0] != h.shape[1]:
        raise ValueError(f"beamformer length {p.shape[0]} does not match n_t={h.shape[1]}")
    if abs(np.linalg.norm(p) - 1.0) > 1e-12:
        raise ValueError("beamforming vector must have unit norm")
    return h @ p


SNR_FUNCTIONS = {
    SchemeKind.PROPOSED: snr_proposed,
    SchemeKind.ARBITRARY_SELECTION: snr_arbitrary_selection,
    SchemeKind.OPTIMAL_SELECTION: snr_optimal_selection,
    SchemeKind.OPPORTUNISTIC: snr_opportunistic,
    SchemeKind.CENTRALIZED: snr_centralized,
    SchemeKind.PROPOSED_MULTIANTENNA: snr_proposed_multiantenna,
}


def scheme_snr(kind: SchemeKind, h_mats: np.ndarray, p_r: float, active=None):
    """Dispatch on ``kind`` given matrix-form channels ``(..., M, 2, n_t)``."""
    h = _as_mats(h_mats)
    if kind is SchemeKind.CENTRALIZED:
        return snr_centralized_mimo(h, p_r, active)
    if kind is SchemeKind.PROPOSED_MULTIANTENNA:
        return snr_proposed_multiantenna(h, p_r, active)
    if h.shape[-1] != 1:
        raise ValueError(f"scheme {kind.value} is defined for single-antenna relays only")
    return SNR_FUNCTIONS[kind](h[..., 0], p_r, active)
