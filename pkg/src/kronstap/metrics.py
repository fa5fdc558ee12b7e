"""SINR, SINR loss and its large-sample curves, MS residual, AUC and contrast."""
import enum
import warnings

import numpy as np
import scipy.linalg
import scipy.stats

from .errors import ArgumentError, DegenerateInputError, StapWarning, ValidationError
from .filters import SteeringVector, apply_filter
from .linalg import as_hermitian, hermitian_eig


def _steering_array(d):
    if isinstance(d, SteeringVector):
        return d.vector
    return np.asarray(d, dtype=np.complex128).reshape(-1)


def sinr(w, d, alpha, sigma_total):
    """``|alpha|^2 |w^H d|^2 / (w^H Sigma w)``."""
    w = np.asarray(w, dtype=np.complex128).reshape(-1)
    d = _steering_array(d)
    if not np.any(w):
        raise ArgumentError("weight vector must be non-zero")
    quad = np.vdot(w, np.asarray(sigma_total) @ w).real
    if quad <= 0:
        raise ValidationError("w^H Sigma w must be positive; Sigma is not positive definite")
    return float(abs(alpha) ** 2 * abs(np.vdot(w, d)) ** 2 / quad)


def sinr_max(d, sigma_total):
    """Optimal SINR ``d^H Sigma^{-1} d`` for unit amplitude."""
    d = _steering_array(d)
    try:
        factor = scipy.linalg.cho_factor(sigma_total)
    except np.linalg.LinAlgError as exc:
        raise ValidationError("Sigma must be positive definite") from exc
    return float(np.vdot(d, scipy.linalg.cho_solve(factor, d)).real)


def sinr_loss(f_hat, d, sigma_total, optimum=None):
    """``rho = SINR(F d) / SINR_max`` with the filter applied to the steering vector.

    ``optimum`` may carry a precomputed :func:`sinr_max` when many filters are
    scored against one ``(d, Sigma)`` pair. Returns 0 with a
    :class:`StapWarning` when the filter cancels the target.
    """
    d = _steering_array(d)
    w = apply_filter(f_hat, d)
    if np.linalg.norm(w) <= 1e-12 * np.linalg.norm(d):
        warnings.warn("filter cancels the steering vector; SINR loss is 0", StapWarning,
                      stacklevel=2)
        return 0.0
    best = sinr_max(d, sigma_total) if optimum is None else optimum
    return sinr(w, d, 1.0, sigma_total) / best


class TheoryCurve(enum.Enum):
    LOW_RANK = "lowrank"
    KRON_SPATIAL = "kronspatial"
    KRON_TEMPORAL_GIVEN_H = "krontemporalgivenh"

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        key = str(value).lower().replace("-", "").replace("_", "")
        for curve in cls:
            if curve.value == key:
                return curve
        raise ArgumentError(f"unknown theory curve {value!r}")


def theory_sinr_loss(method, n, r=None, r_b=None, kappa=None):
    """Large-sample mean SINR loss.

    ========================  ===================
    ``LOW_RANK``              ``1 - r / n``
    ``KRON_SPATIAL``          ``1 - 1 / n``
    ``KRON_TEMPORAL_GIVEN_H`` ``1 - kappa r_b / n``
    ========================  ===================
    """
    if n <= 0:
        raise ArgumentError("n must be positive")
    curve = TheoryCurve.parse(method)
    if curve is TheoryCurve.LOW_RANK:
        if r is None:
            raise ArgumentError("low-rank curve needs r")
        return 1.0 - r / n
    if curve is TheoryCurve.KRON_SPATIAL:
        return 1.0 - 1.0 / n
    if r_b is None or kappa is None:
        raise ArgumentError("temporal curve needs r_b and kappa")
    return 1.0 - kappa * r_b / n


def _unit(v):
    v = np.asarray(v, dtype=np.complex128).reshape(-1)
    return v / np.linalg.norm(v)


def kappa(a_true, h_tilde, d_a):
    """Spatial mismatch ratio ``d~^H A d~ / h~^H A h~``, with ``d~`` the unit
    part of ``d_a`` orthogonal to ``h_tilde``."""
    a = as_hermitian(a_true, name="a_true")
    h = _unit(h_tilde)
    d = np.asarray(d_a, dtype=np.complex128).reshape(-1)
    g = d - h * np.vdot(h, d)
    if np.linalg.norm(g) <= 1e-12 * np.linalg.norm(d):
        raise DegenerateInputError("steering vector is parallel to h_tilde")
    g /= np.linalg.norm(g)
    den = np.vdot(h, a @ h).real
    if den <= 0:
        raise DegenerateInputError("h_tilde carries no spatial clutter power")
    return float(max(np.vdot(g, a @ g).real, 0.0) / den)


def temporal_stage_sinr_loss(temporal_basis, h_tilde, d_a, d_b, a_true, b_true, sigma2):
    """SINR loss of the temporal stage with the spatial stage fixed at ``h_tilde``.

    The filter is ``(I - h h^H) kron (I - U_B U_B^H)``; the reference is the
    best temporal weight for the same spatial weight, so only the temporal
    subspace estimate is scored.
    """
    h = _unit(h_tilde)
    d_a = np.asarray(d_a, dtype=np.complex128)
    d_b = np.asarray(d_b, dtype=np.complex128)
    u = np.asarray(temporal_basis, dtype=np.complex128)
    g = d_a - h * np.vdot(h, d_a)
    v = d_b - u @ (u.conj().T @ d_b)
    gag = np.vdot(g, a_true @ g).real
    gg = np.vdot(g, g).real
    gain = abs(np.vdot(g, d_a)) ** 2
    out = gain * abs(np.vdot(v, d_b)) ** 2 / (
        gag * np.vdot(v, b_true @ v).real + sigma2 * gg * np.vdot(v, v).real)
    m = gag * np.asarray(b_true) + sigma2 * gg * np.eye(d_b.size)
    best = gain * np.vdot(d_b, scipy.linalg.solve(m, d_b, assume_a="pos")).real
    return float(out / best)


def naive_spatial_estimate(s, p, q):
    """Leading eigenpair ``(psi, h)`` of ``T = (1/q) sum_k S[k::q, k::q]``.

    ``T[i, j]`` averages the diagonal of block ``(i, j)``.
    """
    s = as_hermitian(s, name="covariance")
    if s.shape != (p * q, p * q):
        raise ArgumentError(f"covariance shape {s.shape} does not match p={p}, q={q}")
    t = np.einsum("ikjk->ij", s.reshape(p, q, p, q)) / q
    eig = hermitian_eig(t)
    if p > 1 and eig.values[0] - eig.values[1] <= 1e-12 * abs(eig.values[0]):
        warnings.warn("leading spatial eigenvalue is repeated; h_hat is arbitrary",
                      StapWarning, stacklevel=2)
    return float(eig.values[0]), eig.vectors[:, 0].copy()


def ms_residual(f, test):
    """``(1/M) sum_m |F x_m|^2`` over a :class:`SampleSet`."""
    if test.n < 1:
        raise ArgumentError("test set is empty")
    y = apply_filter(f, test.samples)
    return float(np.mean(np.sum(np.abs(y) ** 2, axis=1)))


def roc_auc(h0_scores, h1_scores):
    """Mann-Whitney AUC: fraction of ``(h1, h0)`` pairs ordered correctly, ties half."""
    h0 = np.asarray(h0_scores, dtype=float).reshape(-1)
    h1 = np.asarray(h1_scores, dtype=float).reshape(-1)
    if h0.size == 0 or h1.size == 0:
        raise ArgumentError("both score lists must be non-empty")
    ranks = scipy.stats.rankdata(np.concatenate([h1, h0]))
    u = ranks[:h1.size].sum() - h1.size * (h1.size + 1) / 2.0
    return float(u / (h1.size * h0.size))


def contrast_ratio(filtered_stats, target_pixels, k=10):
    """RMS of the ``k`` brightest target pixels over the RMS of the background.

    ``target_pixels`` indexes the flattened statistics (integer indices or a
    boolean mask); every other pixel is background.
    """
    stats = np.abs(np.asarray(filtered_stats, dtype=float)).reshape(-1)
    mask = np.zeros(stats.size, dtype=bool)
    index = np.asarray(target_pixels).reshape(-1)
    if index.dtype == bool:
        mask[:index.size] = index
    else:
        mask[index.astype(int)] = True
    count = int(mask.sum())
    if count == 0:
        raise ArgumentError("target pixel set is empty")
    if not 1 <= k <= count:
        raise ArgumentError(f"k={k} outside [1, {count}]")
    background = stats[~mask]
    if background.size == 0:
        raise ArgumentError("no background pixels")
    top = np.sort(stats[mask])[::-1][:k]
    back_rms = np.sqrt(np.mean(background ** 2))
    if back_rms == 0:
        raise DegenerateInputError("background is identically zero")
    return float(np.sqrt(np.mean(top ** 2)) / back_rms)
