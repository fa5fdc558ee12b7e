"""Dense complex linear algebra used by every other module.

Conventions
-----------
Matrices are ``complex128`` numpy arrays. A space-time sample of ``p``
antennas and ``q`` pulses is the ``p x q`` array ``X`` and its vector form is
antenna-major, ``x = X.reshape(-1)``, so ``Cov[x] = A kron B`` with ``A`` the
``p x p`` spatial factor and ``B`` the ``q x q`` temporal factor. The
``(i, j)`` block of a ``pq x pq`` matrix is ``M[i*q:(i+1)*q, j*q:(j+1)*q]``;
block indices are zero based.
"""
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from . import _backend
from .errors import ArgumentError, SizingError, ValidationError

#: Largest row or column count :func:`kron` will produce.
MAX_KRON_DIM = 1 << 14

HERMITIAN_TOL = 1e-12
PSD_TOL = 1e-10


@dataclass(frozen=True)
class EigenPairs:
    """Eigenvalues sorted descending with matching orthonormal columns."""

    values: np.ndarray
    vectors: np.ndarray

    def reconstruct(self, r=None):
        r = len(self.values) if r is None else r
        u = self.vectors[:, :r]
        return (u * self.values[:r]) @ u.conj().T


def as_complex_matrix(m, name="matrix"):
    """Copy ``m`` to a 2-D complex128 array, rejecting NaN and Inf."""
    arr = np.array(m, dtype=np.complex128, copy=True)
    if arr.ndim != 2:
        raise ArgumentError(f"{name} must be 2-D, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"{name} has non-finite entries")
    return arr


def hermitian_drift(m):
    m = np.asarray(m)
    scale = np.linalg.norm(m)
    if scale == 0:
        return 0.0
    return float(np.linalg.norm(m - m.conj().T) / scale)


def as_hermitian(m, tol=HERMITIAN_TOL, name="matrix"):
    """Return ``(m + m^H) / 2`` after checking ``m`` is Hermitian to ``tol``.

    Raises
    ------
    ValidationError
        If the relative Frobenius drift ``|m - m^H| / |m|`` exceeds ``tol``.
    """
    m = np.asarray(m, dtype=np.complex128)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ArgumentError(f"{name} must be square, got shape {m.shape}")
    drift = hermitian_drift(m)
    if drift > tol:
        raise ValidationError(f"{name} is not Hermitian (relative drift {drift:.3g})")
    return 0.5 * (m + m.conj().T)


def is_psd(m, tol=PSD_TOL):
    w = np.linalg.eigvalsh(np.asarray(m))
    top = max(abs(w[-1]), abs(w[0]))
    return bool(w[0] >= -tol * top) if top > 0 else True


def kron(left, right, max_dim=MAX_KRON_DIM):
    left = np.atleast_2d(np.asarray(left))
    right = np.atleast_2d(np.asarray(right))
    if left.size == 0 or right.size == 0:
        raise ArgumentError("kron operands must be non-empty")
    rows = left.shape[0] * right.shape[0]
    cols = left.shape[1] * right.shape[1]
    if rows > max_dim or cols > max_dim:
        raise SizingError(f"kron output {rows}x{cols} exceeds limit {max_dim}")
    return np.kron(left, right)


def hermitian_eig(m, tol=HERMITIAN_TOL):
    h = as_hermitian(m, tol)
    values, vectors = scipy.linalg.eigh(h)
    return EigenPairs(values[::-1].copy(), np.ascontiguousarray(vectors[:, ::-1]))


def eig_truncate(m, r, psd=False, tol=HERMITIAN_TOL):
    """Best rank-``r`` Hermitian approximation ``sum_{i<r} s_i u_i u_i^H``.

    With ``psd=False`` the ``r`` eigenvalues of largest magnitude are kept.
    With ``psd=True`` the ``r`` largest eigenvalues are kept and any below
    ``PSD_TOL`` times the leading one are set to zero, which gives the
    nearest psd matrix of rank at most ``r``.
    """
    m = np.asarray(m)
    dim = m.shape[0]
    if not 0 <= r <= dim:
        raise ArgumentError(f"rank {r} outside [0, {dim}]")
    eig = hermitian_eig(m, tol)
    values, vectors = eig.values, eig.vectors
    if psd:
        lead = max(values[0], 0.0)
        values = np.where(values > PSD_TOL * lead, values, 0.0)
        keep = np.arange(r)
    else:
        keep = np.argsort(-np.abs(values), kind="stable")[:r]
    u = vectors[:, keep]
    out = (u * values[keep]) @ u.conj().T
    return 0.5 * (out + out.conj().T)


def _check_square_blocks(m, p, q):
    if p < 1 or q < 1:
        raise ArgumentError(f"block sizes must be positive, got p={p}, q={q}")
    if m.shape != (p * q, p * q):
        raise ArgumentError(f"expected {(p * q, p * q)} matrix, got {m.shape}")


def rearrange(m, p, q):
    """Map ``pq x pq`` to ``p^2 x q^2``; row ``i*p + j`` is ``vec(M(i, j))^T``.

    ``vec`` stacks columns. The map permutes entries, so it is linear and
    preserves the Frobenius norm, and ``rearrange(kron(A, B))`` equals
    ``outer(A.reshape(-1), B.T.reshape(-1))``, a rank-one matrix.
    """
    m = np.ascontiguousarray(m, dtype=np.complex128)
    _check_square_blocks(m, p, q)
    return _backend.kernels.rearrange(m, p, q)


def rearrange_inv(r, p, q):
    r = np.ascontiguousarray(r, dtype=np.complex128)
    if p < 1 or q < 1 or r.shape != (p * p, q * q):
        raise ArgumentError(f"expected {(p * p, q * q)} matrix, got {r.shape}")
    return _backend.kernels.rearrange_inv(r, p, q)


def block(m, i, j, p, q):
    """The ``q x q`` block at zero-based block position ``(i, j)``."""
    m = np.asarray(m)
    _check_square_blocks(m, p, q)
    if not (0 <= i < p and 0 <= j < p):
        raise ArgumentError(f"block index ({i}, {j}) outside {p}x{p} grid")
    return m[i * q:(i + 1) * q, j * q:(j + 1) * q]


def orthonormal_basis(m, r):
    """Top-``r`` eigenvectors of Hermitian ``m`` as orthonormal columns."""
    return hermitian_eig(m).vectors[:, :r]


def projector_distance(u, v):
    """``|U U^H - V V^H|_F`` for orthonormal column sets ``U`` and ``V``."""
    u = np.asarray(u)
    v = np.asarray(v)
    u = u.reshape(-1, 1) if u.ndim == 1 else u
    v = v.reshape(-1, 1) if v.ndim == 1 else v
    return float(np.linalg.norm(u @ u.conj().T - v @ v.conj().T))
