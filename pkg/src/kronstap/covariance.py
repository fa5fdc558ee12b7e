"""Sample covariance and low-rank Kronecker covariance estimation.

The estimator fits ``S ~ A kron B`` in Frobenius norm with
``rank(A) <= r_a`` and ``rank(B) <= r_b`` by alternating exact
minimization over each factor. Each half-step is a block contraction of
``S`` followed by a psd rank truncation, so the objective never increases.
"""
import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from . import _backend
from .errors import ArgumentError, DegenerateInputError, ValidationError
from .linalg import (
    PSD_TOL,
    as_hermitian,
    eig_truncate,
    hermitian_eig,
    rearrange,
)

log = logging.getLogger(__name__)

#: Relative residual ``|S - A kron B| / |S|`` treated as an exact fit.
EXACT_FIT_REL = 1e-12


@dataclass(frozen=True)
class SampleSet:
    """``n`` vectorized range bins, each of length ``p*q`` (antenna-major)."""

    p: int
    q: int
    samples: np.ndarray

    def __post_init__(self):
        data = np.asarray(self.samples, dtype=np.complex128)
        if data.ndim == 1:
            data = data.reshape(1, -1)
        if data.ndim != 2 or data.shape[1] != self.p * self.q:
            raise ArgumentError(
                f"samples must have shape (n, {self.p * self.q}), got {data.shape}")
        object.__setattr__(self, "samples", data)

    @property
    def n(self):
        return self.samples.shape[0]

    def arrays(self):
        """Samples as an ``(n, p, q)`` stack of phase-history arrays."""
        return self.samples.reshape(self.n, self.p, self.q)

    @classmethod
    def from_arrays(cls, arrays):
        arrays = np.asarray(arrays, dtype=np.complex128)
        n, p, q = arrays.shape
        return cls(p, q, arrays.reshape(n, p * q))

    def subset(self, index):
        return SampleSet(self.p, self.q, self.samples[index])

    def __len__(self):
        return self.n


@dataclass
class KronCovModel:
    """Estimated factors of ``S ~ A kron B`` with ``|A|_F = 1``."""

    a_factor: np.ndarray
    b_factor: np.ndarray
    r_a: int
    r_b: int
    objective_trace: list = field(default_factory=list)
    converged: bool = True
    iterations: int = 0
    effective_rank_a: int = None
    effective_rank_b: int = None

    def __post_init__(self):
        if self.effective_rank_a is None:
            self.effective_rank_a = _numerical_rank(self.a_factor)
        if self.effective_rank_b is None:
            self.effective_rank_b = _numerical_rank(self.b_factor)

    @property
    def p(self):
        return self.a_factor.shape[0]

    @property
    def q(self):
        return self.b_factor.shape[0]

    def covariance(self):
        return np.kron(self.a_factor, self.b_factor)

    def spatial_basis(self):
        return hermitian_eig(self.a_factor).vectors[:, :self.r_a]

    def temporal_basis(self):
        return hermitian_eig(self.b_factor).vectors[:, :self.r_b]

    @property
    def final_objective(self):
        return self.objective_trace[-1] if self.objective_trace else float("nan")


def _numerical_rank(m, rel=1e-9):
    w = np.linalg.eigvalsh(m)
    top = np.max(np.abs(w)) if w.size else 0.0
    return int(np.sum(np.abs(w) > rel * top)) if top > 0 else 0


def sample_covariance(data):
    """``S = (1/n) sum_m x_m x_m^H`` as a Hermitian ``pq x pq`` matrix."""
    if data.n < 1:
        raise ArgumentError("sample covariance needs at least one sample")
    x = data.samples
    s = x.T @ x.conj() / data.n
    return 0.5 * (s + s.conj().T)


def _split_dims(s, a=None, b=None):
    dim = s.shape[0]
    if a is not None:
        p = a.shape[0]
        if a.shape != (p, p) or dim % p:
            raise ArgumentError(f"factor of shape {a.shape} does not tile {s.shape}")
        return p, dim // p
    q = b.shape[0]
    if b.shape != (q, q) or dim % q:
        raise ArgumentError(f"factor of shape {b.shape} does not tile {s.shape}")
    return dim // q, q


def contract_for_b(s, a):
    """Minimizer over ``B`` of ``|S - A kron B|_F``: ``sum_ij conj(a_ij) S(i,j) / |A|^2``."""
    s = np.ascontiguousarray(s, dtype=np.complex128)
    a = np.ascontiguousarray(a, dtype=np.complex128)
    p, q = _split_dims(s, a=a)
    norm2 = float(np.vdot(a, a).real)
    if norm2 == 0:
        raise DegenerateInputError("spatial factor is identically zero")
    return _backend.kernels.contract_for_b(s, a, p, q) / norm2


def contract_for_a(s, b):
    """Minimizer over ``A`` of ``|S - A kron B|_F``: ``R_A[i,j] = <B, S(i,j)> / |B|^2``."""
    s = np.ascontiguousarray(s, dtype=np.complex128)
    b = np.ascontiguousarray(b, dtype=np.complex128)
    p, q = _split_dims(s, b=b)
    norm2 = float(np.vdot(b, b).real)
    if norm2 == 0:
        raise DegenerateInputError("temporal factor is identically zero")
    return _backend.kernels.contract_for_a(s, b, p, q) / norm2


def kron_objective(s, a, b):
    """``|S - A kron B|_F^2`` without forming the Kronecker product."""
    return _backend.kernels.kron_residual_sq(
        np.ascontiguousarray(s, dtype=np.complex128),
        np.ascontiguousarray(a, dtype=np.complex128),
        np.ascontiguousarray(b, dtype=np.complex128))


def kron_fit_unconstrained(s, p, q):
    """Nearest Kronecker product to ``s`` from the leading singular pair of ``rearrange(s)``.

    Returns Hermitian ``(A, B)`` with ``|A|_F = 1`` and ``trace(A) >= 0``.
    """
    s = as_hermitian(s, name="covariance")
    r = rearrange(s, p, q)
    if not np.any(r):
        raise DegenerateInputError("rearranged covariance is identically zero")
    u, sv, vh = scipy.linalg.svd(r, full_matrices=False)
    a = u[:, 0].reshape(p, p)
    b = (sv[0] * vh[0]).reshape(q, q).T

    # A = exp(-i phi) H for Hermitian H; <A, A^H> = exp(2 i phi) |H|^2 recovers phi
    align = np.vdot(a, a.conj().T)
    if abs(align) > 0:
        phase = np.exp(0.5j * np.angle(align))
        a, b = a * phase, b / phase
    if np.trace(a).real < 0:
        a, b = -a, -b
    a = 0.5 * (a + a.conj().T)
    b = 0.5 * (b + b.conj().T)
    scale = np.linalg.norm(a)
    return a / scale, b * scale


def _normalized(a, b):
    scale = np.linalg.norm(a)
    if scale == 0 or not np.any(b):
        raise DegenerateInputError("Kronecker factor collapsed to zero")
    return a / scale, b * scale


def lr_kron(s, p, q, r_a, r_b, tol=1e-8, max_iter=200):
    """Low-rank Kronecker covariance estimate by alternating minimization.

    Parameters
    ----------
    s : (pq, pq) array
        psd Hermitian sample covariance.
    r_a, r_b : int
        Rank bounds for the spatial (``p x p``) and temporal (``q x q``) factors.
    tol : float
        Stop once the objective decrease relative to the starting objective
        falls below ``tol``, or once the relative residual drops below
        ``EXACT_FIT_REL``.
    max_iter : int
        Maximum number of alternating (B, then A) updates.

    Returns
    -------
    KronCovModel
        ``objective_trace[0]`` is the rank-truncated closed-form fit and each
        later entry follows one full update; the trace is non-increasing.
    """
    if not 1 <= r_a <= p:
        raise ArgumentError(f"r_a={r_a} outside [1, {p}]")
    if not 1 <= r_b <= q:
        raise ArgumentError(f"r_b={r_b} outside [1, {q}]")
    if tol <= 0:
        raise ArgumentError("tol must be positive")
    s = as_hermitian(s, name="covariance")
    if s.shape != (p * q, p * q):
        raise ArgumentError(f"covariance shape {s.shape} does not match p={p}, q={q}")
    w = np.linalg.eigvalsh(s)
    top = max(abs(w[0]), abs(w[-1]))
    if top == 0:
        raise DegenerateInputError("covariance is identically zero")
    if w[0] < -PSD_TOL * top:
        raise ValidationError(f"covariance is not psd (min eigenvalue {w[0]:.3g})")
    s = np.ascontiguousarray(s)

    a_full, b_full = kron_fit_unconstrained(s, p, q)
    a, b = _normalized(eig_truncate(a_full, r_a, psd=True),
                       eig_truncate(b_full, r_b, psd=True))
    trace = [kron_objective(s, a, b)]
    energy = float(np.vdot(s, s).real)
    floor = max(trace[0], 1e-28 * energy)
    # below this the fit is exact to rounding and decreases are noise
    exact = EXACT_FIT_REL ** 2 * energy
    converged = False
    it = 0
    while it < max_iter:
        it += 1
        b = eig_truncate(contract_for_b(s, a), r_b, psd=True)
        a = eig_truncate(contract_for_a(s, b), r_a, psd=True)
        a, b = _normalized(a, b)
        trace.append(kron_objective(s, a, b))
        if trace[-1] <= exact or abs(trace[-2] - trace[-1]) / floor < tol:
            converged = True
            break
    log.debug("lr_kron: %d iterations, objective %.6g", it, trace[-1])
    return KronCovModel(a, b, r_a, r_b, trace, converged, it)
