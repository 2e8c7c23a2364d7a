"""Small complex linear algebra for 2 x N channel matrices.

Everything here works on plain numpy arrays. Matrices have two rows (the two
destination antennas) and ``n_t`` columns (relay antennas).
"""

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Svd2xN:
    """Singular value decomposition ``H = U diag(d1, d2) V^H`` of a 2 x N matrix.

    Attributes
    ----------
    u : ndarray, shape (2, 2)
        Left singular vectors (columns). The first nonzero entry of each
        column is real and non-negative.
    d1, d2 : float
        Singular values, ``d1 >= d2 >= 0``. For ``N == 1`` we have ``d2 == 0``.
    v : ndarray, shape (N, N)
        Right singular vectors (columns).
    """

    u: np.ndarray
    d1: float
    d2: float
    v: np.ndarray

    @property
    def sigma(self) -> np.ndarray:
        """The 2 x N block holding the singular values on its diagonal."""
        n = self.v.shape[0]
        s = np.zeros((2, n))
        s[0, 0] = self.d1
        if n > 1:
            s[1, 1] = self.d2
        return s

    def reconstruct(self) -> np.ndarray:
        return self.u @ self.sigma @ self.v.conj().T


def as_matrix_2xn(m) -> np.ndarray:
    """Validate and convert ``m`` to a complex (2, N) array."""
    arr = np.asarray(m, dtype=complex)
    if arr.ndim == 1:
        arr = arr.reshape(2, 1) if arr.shape[0] == 2 else arr
    if arr.ndim != 2 or arr.shape[0] != 2 or arr.shape[1] < 1:
        raise ValueError(f"expected a 2 x N matrix with N >= 1, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("matrix has non-finite entries")
    return arr


def simo_norm(h) -> float | np.ndarray:
    """Euclidean norm of a two-antenna SIMO channel along the last axis."""
    h = np.asarray(h, dtype=complex)
    if h.shape[-1] != 2:
        raise ValueError(f"SIMO channel must have 2 entries on the last axis, got {h.shape}")
    if not np.all(np.isfinite(h)):
        raise ValueError("SIMO channel has non-finite entries")
    out = np.sqrt(h.real[..., 0] ** 2 + h.imag[..., 0] ** 2
                  + h.real[..., 1] ** 2 + h.imag[..., 1] ** 2)
    return float(out) if out.ndim == 0 else out


def _normalize_phase(vec: np.ndarray) -> np.ndarray:
    # first nonzero entry real non-negative
    for k, c in enumerate(vec):
        if c != 0:
            mag = abs(c)
            out = vec * complex(c.real / mag, -c.imag / mag)
            out[k] = mag
            return out
    return vec


def _complete_basis(cols: list[np.ndarray], n: int) -> np.ndarray:
    """Extend orthonormal columns ``cols`` to an n x n unitary matrix."""
    if len(cols) == n:
        return np.column_stack(cols)
    seed = np.column_stack(cols + [np.eye(n, dtype=complex)])
    q, _ = np.linalg.qr(seed)
    q = q[:, :n].copy()
    for k, c in enumerate(cols):
        q[:, k] = c
    return q


def svd_2xn(m) -> Svd2xN:
    """Closed-form SVD of a complex 2 x N matrix.

    The left factor comes from the eigen-decomposition of the 2 x 2 Gram
    matrix ``H H^H``; right singular vectors are recovered as
    ``H^H u / d`` with the second one explicitly orthogonalized against the
    first so that ``V`` stays unitary when ``d2`` is tiny.

    Raises
    ------
    ValueError
        If the input is not 2 x N or has non-finite entries.
    """
    h = as_matrix_2xn(m)
    n = h.shape[1]

    orig = h
    scale = float(np.abs(h).max())
    if scale == 0:
        return Svd2xN(np.eye(2, dtype=complex), 0.0, 0.0, np.eye(n, dtype=complex))

    # real divisions: complex division by a subnormal scale overflows
    h = h.real / scale + 1j * (h.imag / scale)

    if n == 1:
        col = h[:, 0]
        ds = simo_norm(col)
        u1 = _normalize_phase(col / ds)
        u2 = _normalize_phase(np.array([-np.conj(u1[1]), np.conj(u1[0])]))
        v = np.array([[np.vdot(col, u1) / ds]])
        d1 = simo_norm(orig[:, 0])
        if not d1 > 0:  # squares underflowed
            d1 = ds * scale
        return Svd2xN(np.column_stack([u1, u2]), d1, 0.0, v)

    g = h @ h.conj().T
    a, c = g[0, 0].real, g[1, 1].real
    b = g[0, 1]
    if b == 0:
        # diagonal Gram matrix; ties keep input order
        u1, u2 = (np.array([1, 0], dtype=complex), np.array([0, 1], dtype=complex))
        if c > a:
            u1, u2 = u2, u1
    else:
        lam1 = 0.5 * (a + c) + np.sqrt(0.25 * (a - c) ** 2 + abs(b) ** 2)
        cand_a = np.array([b, lam1 - a])
        cand_b = np.array([lam1 - c, np.conj(b)])
        u1 = cand_a if np.linalg.norm(cand_a) >= np.linalg.norm(cand_b) else cand_b
        u1 = _normalize_phase(u1 / np.linalg.norm(u1))
        u2 = _normalize_phase(np.array([-np.conj(u1[1]), np.conj(u1[0])]))

    w1 = h.conj().T @ u1
    d1 = float(np.linalg.norm(w1))
    v1 = w1 / d1
    w2 = h.conj().T @ u2
    w2 = w2 - v1 * np.vdot(v1, w2)
    d2 = min(float(np.linalg.norm(w2)), d1)
    cols = [v1]
    if d2 > 0:
        # second Gram-Schmidt pass keeps V unitary when w2 is mostly rounding noise
        v2 = w2 / np.linalg.norm(w2)
        v2 = v2 - v1 * np.vdot(v1, v2)
        # if nothing survives, d2 is pure rounding and any orthogonal direction works
        if np.linalg.norm(v2) > 0.5:
            cols.append(v2 / np.linalg.norm(v2))
    v = _complete_basis(cols, n)
    return Svd2xN(np.column_stack([u1, u2]), d1 * scale, d2 * scale, v)


def top_singular_value_sq(h: np.ndarray) -> np.ndarray:
    """Largest squared singular value of a batch of 2 x N matrices.

    ``h`` has shape ``(..., 2, N)``. Uses the closed-form largest eigenvalue
    of the 2 x 2 Gram matrix, which involves only sums of non-negative terms.
    """
    h = np.asarray(h, dtype=complex)
    a = np.sum(h.real[..., 0, :] ** 2 + h.imag[..., 0, :] ** 2, axis=-1)
    c = np.sum(h.real[..., 1, :] ** 2 + h.imag[..., 1, :] ** 2, axis=-1)
    b = np.sum(h[..., 0, :] * np.conj(h[..., 1, :]), axis=-1)
    return 0.5 * (a + c) + np.sqrt(0.25 * (a - c) ** 2 + (b.real ** 2 + b.imag ** 2))
