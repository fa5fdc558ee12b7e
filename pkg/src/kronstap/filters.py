"""STAP projection filters, steering vectors and the detection statistic.

All four filter kinds are orthogonal projectors kept in factored form:

========================  =========================================
kind                      implied filter matrix
========================  =========================================
``LOW_RANK``              ``I - U U^H``
``KRON_CLASSICAL``        ``I - (U_A U_A^H) kron (U_B U_B^H)``
``KRON_STAP``             ``(I - U_A U_A^H) kron (I - U_B U_B^H)``
``SPATIAL_ONLY``          ``(I - U_A U_A^H) kron I``
========================  =========================================

The Kronecker kinds are applied on the ``p x q`` reshaping of each sample and
never build the ``pq x pq`` matrix.
"""
import enum
import warnings
from dataclasses import dataclass

import numpy as np

from . import _backend
from .errors import ArgumentError, StapWarning, ValidationError
from .linalg import hermitian_eig

ORTHONORMAL_TOL = 1e-10


class FilterKind(enum.Enum):
    LOW_RANK = "lowrank"
    KRON_CLASSICAL = "kronclassical"
    KRON_STAP = "kronstap"
    SPATIAL_ONLY = "spatial"

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower().replace("-", "").replace("_", "")
        for kind in cls:
            if kind.value == key or kind.name.replace("_", "").lower() == key:
                return kind
        raise ArgumentError(f"unknown filter kind {value!r}")


def _check_orthonormal(u, name):
    if u is None:
        return None
    u = np.ascontiguousarray(u, dtype=np.complex128)
    if u.ndim == 1:
        u = u.reshape(-1, 1)
    gram = u.conj().T @ u
    err = np.max(np.abs(gram - np.eye(u.shape[1]))) if u.shape[1] else 0.0
    if err > ORTHONORMAL_TOL:
        raise ValidationError(f"{name} columns are not orthonormal (error {err:.2g})")
    return u


def _complement(u, dim):
    """``I - U U^H`` for orthonormal columns ``U``."""
    return np.eye(dim, dtype=np.complex128) - u @ u.conj().T


@dataclass(frozen=True)
class StapFilter:
    kind: FilterKind
    p: int
    q: int
    spatial_basis: np.ndarray = None
    temporal_basis: np.ndarray = None
    joint_basis: np.ndarray = None

    def __post_init__(self):
        kind = FilterKind.parse(self.kind)
        object.__setattr__(self, "kind", kind)
        for name in ("spatial_basis", "temporal_basis", "joint_basis"):
            object.__setattr__(self, name, _check_orthonormal(getattr(self, name), name))
        need = {
            FilterKind.LOW_RANK: ("joint_basis",),
            FilterKind.KRON_CLASSICAL: ("spatial_basis", "temporal_basis"),
            FilterKind.KRON_STAP: ("spatial_basis", "temporal_basis"),
            FilterKind.SPATIAL_ONLY: ("spatial_basis",),
        }[kind]
        for name in need:
            if getattr(self, name) is None:
                raise ArgumentError(f"{kind.value} filter needs {name}")
        if self.joint_basis is not None and self.joint_basis.shape[0] != self.p * self.q:
            raise ArgumentError("joint basis length must be p*q")
        if self.spatial_basis is not None and self.spatial_basis.shape[0] != self.p:
            raise ArgumentError("spatial basis length must be p")
        if self.temporal_basis is not None and self.temporal_basis.shape[0] != self.q:
            raise ArgumentError("temporal basis length must be q")

    @property
    def dim(self):
        return self.p * self.q

    def spatial_filter(self):
        return _complement(self.spatial_basis, self.p)

    def temporal_filter(self):
        return _complement(self.temporal_basis, self.q)

    def rank(self):
        """Dimension of the filter's range (its trace)."""
        if self.kind is FilterKind.LOW_RANK:
            return self.dim - self.joint_basis.shape[1]
        ra = self.spatial_basis.shape[1]
        if self.kind is FilterKind.SPATIAL_ONLY:
            return (self.p - ra) * self.q
        rb = self.temporal_basis.shape[1]
        if self.kind is FilterKind.KRON_STAP:
            return (self.p - ra) * (self.q - rb)
        return self.dim - ra * rb

    def dense(self):
        """The ``pq x pq`` filter matrix. For testing and small problems."""
        if self.kind is FilterKind.LOW_RANK:
            return _complement(self.joint_basis, self.dim)
        if self.kind is FilterKind.SPATIAL_ONLY:
            return np.kron(self.spatial_filter(), np.eye(self.q))
        if self.kind is FilterKind.KRON_STAP:
            return np.kron(self.spatial_filter(), self.temporal_filter())
        pa = self.spatial_basis @ self.spatial_basis.conj().T
        pb = self.temporal_basis @ self.temporal_basis.conj().T
        return np.eye(self.dim) - np.kron(pa, pb)

    def apply(self, x):
        return apply_filter(self, x)


def apply_filter(f, x):
    """``F x`` for one vector of length ``pq`` or an ``(n, pq)`` batch."""
    x = np.asarray(x, dtype=np.complex128)
    single = x.ndim == 1
    batch = x.reshape(1, -1) if single else x
    if batch.ndim != 2 or batch.shape[1] != f.dim:
        raise ArgumentError(f"expected vectors of length {f.dim}, got shape {x.shape}")
    if f.kind is FilterKind.LOW_RANK:
        u = f.joint_basis
        out = batch - (batch @ u.conj()) @ u.T
    else:
        k = _backend.kernels
        stack = np.ascontiguousarray(batch).reshape(-1, f.p, f.q)
        if f.kind is FilterKind.KRON_STAP:
            y = k.kron_apply(stack, f.spatial_filter(), f.temporal_filter())
        elif f.kind is FilterKind.SPATIAL_ONLY:
            y = k.left_apply(stack, f.spatial_filter())
        else:
            pa = np.ascontiguousarray(f.spatial_basis @ f.spatial_basis.conj().T)
            pb = np.ascontiguousarray(f.temporal_basis @ f.temporal_basis.conj().T)
            y = stack - k.kron_apply(stack, pa, pb)
        out = y.reshape(batch.shape)
    return out[0] if single else out


def lr_stap_filter(s, r, p=None, q=None):
    """Project out the top-``r`` eigenvectors of the sample covariance ``s``."""
    dim = s.shape[0]
    if not 0 <= r <= dim:
        raise ArgumentError(f"rank {r} outside [0, {dim}]")
    if p is None and q is None:
        p, q = 1, dim
    elif p is None:
        p = dim // q
    elif q is None:
        q = dim // p
    if p * q != dim:
        raise ArgumentError(f"p*q={p * q} does not match covariance size {dim}")
    u = hermitian_eig(s).vectors[:, :r]
    return StapFilter(FilterKind.LOW_RANK, p, q, joint_basis=u)


def kron_classical_filter(model):
    return StapFilter(FilterKind.KRON_CLASSICAL, model.p, model.q,
                      spatial_basis=model.spatial_basis(),
                      temporal_basis=model.temporal_basis())


def kron_stap_filter(model):
    if model.r_a >= model.p or model.r_b >= model.q:
        warnings.warn("Kron STAP with a full-rank factor annihilates every input",
                      StapWarning, stacklevel=2)
    elif model.r_b > 0.9 * model.q:
        warnings.warn(f"r_b={model.r_b} is close to q={model.q}; targets will be cancelled",
                      StapWarning, stacklevel=2)
    return StapFilter(FilterKind.KRON_STAP, model.p, model.q,
                      spatial_basis=model.spatial_basis(),
                      temporal_basis=model.temporal_basis())


def spatial_only_filter(model):
    return StapFilter(FilterKind.SPATIAL_ONLY, model.p, model.q,
                      spatial_basis=model.spatial_basis())


def spatial_filter_from_vector(h, q):
    """Spatial-only filter that projects out the single direction ``h``."""
    h = np.asarray(h, dtype=np.complex128)
    return StapFilter(FilterKind.SPATIAL_ONLY, h.size, q,
                      spatial_basis=(h / np.linalg.norm(h)).reshape(-1, 1))


# --- steering vectors -------------------------------------------------------

@dataclass(frozen=True)
class SteeringVector:
    spatial: np.ndarray
    temporal: np.ndarray
    doppler: float

    @property
    def vector(self):
        return np.kron(self.spatial, self.temporal)


def spatial_steering(p, doppler, spatial_gain=1.0):
    phase = 2j * np.pi * spatial_gain * doppler * np.arange(p)
    return np.exp(phase) / np.sqrt(p)


def temporal_steering(q, doppler):
    return np.exp(2j * np.pi * doppler * np.arange(q)) / np.sqrt(q)


def doppler_grid(nbins):
    """``nbins`` bin-centre Dopplers evenly covering ``(-1/2, 1/2)``."""
    if nbins < 1:
        raise ArgumentError("need at least one Doppler bin")
    return -0.5 + (np.arange(nbins) + 0.5) / nbins


def steering_bank(p, q, dopplers, spatial_gain=1.0):
    dopplers = np.atleast_1d(np.asarray(dopplers, dtype=float))
    if dopplers.size == 0:
        raise ArgumentError("steering bank needs at least one Doppler")
    return [SteeringVector(spatial_steering(p, f, spatial_gain), temporal_steering(q, f), float(f))
            for f in dopplers]


def _temporal_matrix(bank, q):
    if isinstance(bank, np.ndarray) and bank.ndim == 2:
        t = bank
    else:
        t = np.array([sv.temporal for sv in bank])
    if t.ndim != 2 or t.shape[1] != q:
        raise ArgumentError(f"temporal steering length must be {q}")
    return np.ascontiguousarray(t, dtype=np.complex128)


def detection_statistic(f, x, bank):
    """``max_h |(h kron b_i)^H F x|`` over unit ``h`` for each bank entry.

    The maximum is ``|z|_2`` with ``z_k = (e_k kron b_i)^H F x``, attained at
    ``h = z / |z|``. Accepts one vector or an ``(n, pq)`` batch; returns
    ``(len(bank),)`` or ``(n, len(bank))`` statistics.
    """
    x = np.asarray(x, dtype=np.complex128)
    single = x.ndim == 1
    if x.shape[-1] != f.dim:
        raise ArgumentError(f"expected vectors of length {f.dim}, got shape {x.shape}")
    temporal = _temporal_matrix(bank, f.q)
    y = np.ascontiguousarray(apply_filter(f, x.reshape(-1, f.dim))).reshape(-1, f.p, f.q)
    stats = _backend.kernels.detection_stats(y, temporal)
    return stats[0] if single else stats


def maximizing_spatial(f, x, steering):
    """Unit spatial vector attaining the detection statistic for one steering entry."""
    y = apply_filter(f, x).reshape(f.p, f.q)
    z = y @ np.conj(steering.temporal)
    norm = np.linalg.norm(z)
    return z / norm if norm > 0 else z


def detection_statistic_at(f, x, dopplers):
    """Detection statistic of each sample in ``x`` at its own Doppler.

    ``x`` is ``(n, pq)`` and ``dopplers`` has length ``n``; returns ``(n,)``.
    """
    x = np.asarray(x, dtype=np.complex128).reshape(-1, f.dim)
    dopplers = np.asarray(dopplers, dtype=float).reshape(-1)
    if dopplers.size != x.shape[0]:
        raise ArgumentError("need one Doppler per sample")
    y = apply_filter(f, x).reshape(-1, f.p, f.q)
    temporal = np.exp(-2j * np.pi * np.outer(dopplers, np.arange(f.q))) / np.sqrt(f.q)
    z = np.einsum("nik,nk->ni", y, temporal)
    return np.linalg.norm(z, axis=1)
