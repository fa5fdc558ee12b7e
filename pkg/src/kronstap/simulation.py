"""SIRV clutter-plus-noise simulator with moving-target injection.

Each clutter sample is ``x = tau * c + w``: ``c`` is circular complex
Gaussian with covariance ``A kron B``, the texture ``tau^2`` is chi-square
with ``nu`` degrees of freedom divided by ``nu`` (so ``E[tau^2] = 1``), and
``w`` is white noise of variance ``sigma2``. The spatial factor is
``A = h h^H``, plus an optional second component orthogonal to ``h`` to model
spatially varying calibration errors.
"""
import math
from dataclasses import dataclass

import numpy as np

from .covariance import SampleSet
from .errors import ArgumentError, ValidationError
from .filters import spatial_steering, temporal_steering
from .linalg import as_hermitian, is_psd


@dataclass(frozen=True)
class TargetSpec:
    doppler: float
    amplitude: complex
    spatial_gain: float = 1.0

    def __post_init__(self):
        if abs(self.amplitude) == 0:
            raise ArgumentError("target amplitude must be non-zero")


@dataclass(frozen=True)
class ClutterScenario:
    """Generative parameters for one homogeneous clutter patch.

    ``spatial_secondary`` is ``(eigenvalue, vector)``; the vector is
    orthogonalized against ``h`` and normalized on construction.
    ``texture_dof=math.inf`` gives Gaussian clutter.
    """

    p: int
    q: int
    h: np.ndarray
    b_true: np.ndarray
    sigma2: float
    texture_dof: float = 4.0
    spatial_secondary: tuple = None
    rng_seed: int = 0
    spatial_gain: float = 1.0

    def __post_init__(self):
        h = np.asarray(self.h, dtype=np.complex128).reshape(-1)
        if h.size != self.p:
            raise ArgumentError(f"h has length {h.size}, expected p={self.p}")
        if not np.any(h):
            raise ValidationError("calibration vector h must be non-zero")
        b = as_hermitian(np.asarray(self.b_true, dtype=np.complex128), name="b_true")
        if b.shape != (self.q, self.q):
            raise ArgumentError(f"b_true has shape {b.shape}, expected ({self.q}, {self.q})")
        if not is_psd(b):
            raise ValidationError("b_true must be positive semidefinite")
        if self.sigma2 < 0:
            raise ValidationError("sigma2 must be non-negative")
        if self.texture_dof <= 0:
            raise ValidationError("texture_dof must be positive")
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "b_true", b)
        if self.spatial_secondary is not None:
            value, vec = self.spatial_secondary
            if not 0 < value < np.vdot(h, h).real:
                raise ValidationError("secondary spatial eigenvalue must lie in (0, |h|^2)")
            hn = h / np.linalg.norm(h)
            v = np.asarray(vec, dtype=np.complex128).reshape(-1)
            v = v - hn * np.vdot(hn, v)
            if np.linalg.norm(v) < 1e-12:
                raise ValidationError("secondary spatial vector is parallel to h")
            object.__setattr__(self, "spatial_secondary", (float(value), v / np.linalg.norm(v)))

    def spatial_factor(self):
        a = np.outer(self.h, self.h.conj())
        if self.spatial_secondary is not None:
            value, v = self.spatial_secondary
            a = a + value * np.outer(v, v.conj())
        return a

    @property
    def clutter_power(self):
        """Average clutter power per space-time element, ``tr(A) tr(B) / pq``."""
        return float(np.trace(self.spatial_factor()).real * np.trace(self.b_true).real
                     / (self.p * self.q))

    def rng(self):
        return np.random.default_rng(self.rng_seed)


def random_low_rank_psd(q, rank, rng, decades=2.0):
    """Random psd ``q x q`` matrix with ``rank`` eigenvalues log-uniform over ``decades``."""
    if not 1 <= rank <= q:
        raise ArgumentError(f"rank {rank} outside [1, {q}]")
    g = rng.standard_normal((q, rank)) + 1j * rng.standard_normal((q, rank))
    basis, _ = np.linalg.qr(g)
    values = np.sort(10.0 ** (-decades * rng.uniform(size=rank)))[::-1]
    b = (basis * values) @ basis.conj().T
    return 0.5 * (b + b.conj().T)


def make_scenario(p=3, q=32, rank_b=5, clutter_power=1.0, noise_ratio=1e-4,
                  texture_dof=4.0, secondary_eigenvalue=None, calibration_error=0.1,
                  spatial_gain=1.0, decades=2.0, seed=0, b_true=None):
    """Build a :class:`ClutterScenario` with random calibration and temporal factor.

    ``h`` has unit norm with gain and phase errors of relative size
    ``calibration_error`` around the ideal all-ones array. ``b_true`` (drawn
    or given) is rescaled so the per-element clutter power equals
    ``clutter_power``, and ``sigma2 = noise_ratio * clutter_power``.
    """
    rng = np.random.default_rng(seed)
    gain = 1.0 + calibration_error * rng.standard_normal(p)
    phase = np.pi * calibration_error * rng.standard_normal(p)
    h = np.abs(gain) * np.exp(1j * phase)
    h /= np.linalg.norm(h)
    secondary = None
    if secondary_eigenvalue:
        secondary = (secondary_eigenvalue,
                     rng.standard_normal(p) + 1j * rng.standard_normal(p))
    if b_true is None:
        b_true = random_low_rank_psd(q, rank_b, rng, decades)
    b_true = np.asarray(b_true, dtype=np.complex128)
    trace_a = 1.0 + (secondary_eigenvalue or 0.0)
    b_true = b_true * (clutter_power * p * q / (trace_a * np.trace(b_true).real))
    return ClutterScenario(p, q, h, b_true, noise_ratio * clutter_power, texture_dof,
                           secondary, seed, spatial_gain)


def scenario_covariance(sc):
    """``(clutter, total)`` with ``clutter = A kron B`` and ``total = clutter + sigma2 I``."""
    clutter = np.kron(sc.spatial_factor(), sc.b_true)
    clutter = 0.5 * (clutter + clutter.conj().T)
    return clutter, clutter + sc.sigma2 * np.eye(sc.p * sc.q)


def _psd_sqrt_columns(m):
    w, v = np.linalg.eigh(m)
    keep = w > 1e-12 * max(w[-1], 0.0)
    return v[:, keep] * np.sqrt(w[keep])


def _complex_normal(rng, shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


def texture_squared(rng, dof, n):
    if math.isinf(dof):
        return np.ones(n)
    return rng.chisquare(dof, n) / dof


def sample_clutter(sc, n, rng=None):
    """Draw ``n`` clutter-plus-noise range bins.

    With ``rng=None`` the scenario's own seed is used, so identical scenarios
    give identical streams.
    """
    if n < 1:
        raise ArgumentError("need at least one sample")
    rng = sc.rng() if rng is None else rng
    la = _psd_sqrt_columns(sc.spatial_factor())
    lb = _psd_sqrt_columns(sc.b_true)
    g = _complex_normal(rng, (n, la.shape[1], lb.shape[1]))
    # vec(L_A G L_B^T) has covariance (L_A L_A^H) kron (L_B L_B^H)
    speckle = np.matmul(np.matmul(la, g), lb.T)
    tau = np.sqrt(texture_squared(rng, sc.texture_dof, n))
    noise = math.sqrt(sc.sigma2) * _complex_normal(rng, (n, sc.p, sc.q))
    x = tau[:, None, None] * speckle + noise
    return SampleSet.from_arrays(x)


def target_return(spec, p, q):
    """``alpha * a(f) kron b(f)`` with unit-norm steering factors."""
    a = spatial_steering(p, spec.doppler, spec.spatial_gain)
    b = temporal_steering(q, spec.doppler)
    return spec.amplitude * np.kron(a, b)


def random_target(rng, amp_range, band=(-0.5, 0.5), spatial_gain=1.0, guard=0.0):
    """Target with uniform Doppler in ``band`` (excluding ``|f| < guard``) and
    uniform amplitude magnitude in ``amp_range`` with random phase."""
    lo, hi = band
    while True:
        f = rng.uniform(lo, hi)
        if abs(f) >= guard:
            break
    mag = rng.uniform(*amp_range)
    return TargetSpec(f, mag * np.exp(2j * np.pi * rng.uniform()), spatial_gain)


def corrupt_training(data, fraction, amp_range, rng_seed, spatial_gain=1.0,
                     band=(-0.5, 0.5), return_indices=False):
    """Add a random moving target to ``ceil(fraction * n)`` randomly chosen bins.

    The input set is not modified.
    """
    if not 0 <= fraction <= 1:
        raise ArgumentError("fraction must lie in [0, 1]")
    rng = rng_seed if isinstance(rng_seed, np.random.Generator) else np.random.default_rng(rng_seed)
    count = math.ceil(round(fraction * data.n, 9))
    index = np.sort(rng.choice(data.n, size=count, replace=False)) if count else np.array([], int)
    samples = data.samples.copy()
    for m in index:
        spec = random_target(rng, amp_range, band, spatial_gain)
        samples[m] += target_return(spec, data.p, data.q)
    out = SampleSet(data.p, data.q, samples)
    return (out, index) if return_indices else out
