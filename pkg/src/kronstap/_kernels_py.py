"""Pure numpy implementations of the hot kernels.

Every function here has a twin with the same signature in ``_ckernels.pyx``.
Inputs are complex128 arrays; a ``pq x pq`` matrix is indexed so that its
``(i, j)`` block of size ``q x q`` is ``M[i*q:(i+1)*q, j*q:(j+1)*q]``.
"""
import numpy as np


def rearrange(m, p, q):
    m4 = m.reshape(p, q, p, q)
    # row i*p + j holds the column-stacked (i, j) block
    return np.ascontiguousarray(m4.transpose(0, 2, 3, 1).reshape(p * p, q * q))


def rearrange_inv(r, p, q):
    r4 = r.reshape(p, p, q, q)
    return np.ascontiguousarray(r4.transpose(0, 3, 1, 2).reshape(p * q, p * q))


def contract_for_b(s, a, p, q):
    return np.einsum("ij,imjn->mn", a.conj(), s.reshape(p, q, p, q))


def contract_for_a(s, b, p, q):
    return np.einsum("mn,imjn->ij", b.conj(), s.reshape(p, q, p, q))


def kron_residual_sq(s, a, b):
    p, q = a.shape[0], b.shape[0]
    diff = s.reshape(p, q, p, q) - a[:, None, :, None] * b[None, :, None, :]
    return float(np.vdot(diff, diff).real)


def kron_apply(x, left, right):
    """``left @ X_k @ right.T`` for every ``X_k`` in the ``(n, p, q)`` stack."""
    return np.matmul(np.matmul(left, x), right.T)


def left_apply(x, left):
    return np.matmul(left, x)


def detection_stats(y, temporal):
    """Column norms of ``Y_k @ conj(temporal).T`` for every filtered bin ``Y_k``."""
    z = np.matmul(y, temporal.conj().T)
    return np.sqrt(np.einsum("kat,kat->kt", z.real, z.real) + np.einsum("kat,kat->kt", z.imag, z.imag))
