import numpy as np
import pytest

from kronstap.covariance import KronCovModel
from kronstap.errors import ArgumentError, StapWarning, ValidationError
from kronstap.filters import (
    FilterKind,
    StapFilter,
    apply_filter,
    detection_statistic,
    detection_statistic_at,
    doppler_grid,
    kron_classical_filter,
    kron_stap_filter,
    lr_stap_filter,
    maximizing_spatial,
    spatial_filter_from_vector,
    spatial_only_filter,
    spatial_steering,
    steering_bank,
    temporal_steering,
)

from conftest import crandn, random_psd


def _unit(v):
    return v / np.linalg.norm(v)


def _model(rng, p, q, r_a, r_b):
    a, b = random_psd(rng, p, rank=r_a), random_psd(rng, q, rank=r_b)
    return KronCovModel(a / np.linalg.norm(a), b, r_a, r_b)


def _all_filters(rng, p=3, q=6, r_a=1, r_b=2):
    model = _model(rng, p, q, r_a, r_b)
    s = random_psd(rng, p * q)
    return [lr_stap_filter(s, r_a * r_b, p, q), kron_classical_filter(model),
            kron_stap_filter(model), spatial_only_filter(model)]


def test_lr_stap_examples(rng):
    s = random_psd(rng, 6)
    np.testing.assert_allclose(lr_stap_filter(s, 0).dense(), np.eye(6), atol=1e-15)
    f = lr_stap_filter(np.diag([5.0, 2.0, 1.0]), 1)
    np.testing.assert_allclose(f.dense(), np.diag([0, 1, 1]), atol=1e-15)
    with pytest.raises(ArgumentError):
        lr_stap_filter(s, 7)


def test_lr_stap_projects_out_subspace(rng):
    s = random_psd(rng, 8)
    f = lr_stap_filter(s, 3, 2, 4)
    u = f.joint_basis
    assert np.linalg.norm(apply_filter(f, u[:, 0])) < 1e-12
    for _ in range(10):
        v = crandn(rng, 8)
        v -= u @ (u.conj().T @ v)
        np.testing.assert_allclose(apply_filter(f, v), v, atol=1e-12)


def test_kron_classical_examples(backend, rng):
    with pytest.warns(StapWarning):
        full = kron_stap_filter(_model(rng, 2, 3, 2, 3))
    assert np.linalg.norm(full.dense()) < 1e-12
    f = kron_classical_filter(_model(rng, 2, 3, 2, 3))
    assert np.linalg.norm(f.dense()) < 1e-12
    model = _model(rng, 3, 5, 1, 2)
    f = kron_classical_filter(model)
    ua = f.spatial_basis
    a = crandn(rng, 3)
    a -= ua @ (ua.conj().T @ a)
    d = np.kron(a, crandn(rng, 5))
    np.testing.assert_allclose(apply_filter(f, d), d, atol=1e-12)
    x = crandn(rng, 100, 15)
    np.testing.assert_allclose(apply_filter(f, x), x @ f.dense().T, atol=1e-10)


def test_kron_stap_examples(backend, rng):
    model = _model(rng, 3, 6, 1, 2)
    f = kron_stap_filter(model)
    ua, ub = f.spatial_basis, f.temporal_basis
    a, b = crandn(rng, 3), crandn(rng, 6)
    a -= ua @ (ua.conj().T @ a)
    b -= ub @ (ub.conj().T @ b)
    np.testing.assert_allclose(apply_filter(f, np.kron(a, b)), np.kron(a, b), atol=1e-12)
    clutter = np.kron(ua[:, 0], ub @ crandn(rng, 2))
    assert np.linalg.norm(apply_filter(f, clutter)) < 1e-10
    assert round(np.trace(f.dense()).real) == (3 - 1) * (6 - 2) == f.rank()


def test_kron_stap_warnings(rng):
    with pytest.warns(StapWarning):
        kron_stap_filter(_model(rng, 3, 4, 3, 2))
    with pytest.warns(StapWarning):
        kron_stap_filter(_model(rng, 2, 20, 1, 19))


def test_spatial_only_examples(backend, rng):
    h = _unit(crandn(rng, 3))
    model = KronCovModel(np.outer(h, h.conj()), random_psd(rng, 4, rank=2), 1, 2)
    f = spatial_only_filter(model)
    assert np.linalg.norm(apply_filter(f, np.kron(h, crandn(rng, 4)))) < 1e-12
    assert round(np.trace(f.dense()).real) == (3 - 1) * 4 == f.rank()
    ks = kron_stap_filter(model)
    x = crandn(rng, 12)
    temporal = np.kron(np.eye(3), ks.temporal_filter())
    np.testing.assert_allclose(apply_filter(ks, x), apply_filter(f, temporal @ x), atol=1e-10)
    g = spatial_filter_from_vector(3 * h, 4)
    np.testing.assert_allclose(g.dense(), f.dense(), atol=1e-12)


def test_all_kinds_are_projectors(backend, rng):
    for f in _all_filters(rng):
        dense = f.dense()
        np.testing.assert_allclose(dense, dense.conj().T, atol=1e-9)
        np.testing.assert_allclose(dense @ dense, dense, atol=1e-9)
        assert round(np.trace(dense).real) == f.rank()


def test_apply_matches_dense_and_is_idempotent(backend, rng):
    p, q = 3, 64
    for f in _all_filters(rng, p, q, 1, 5):
        x = crandn(rng, 1000, p * q)
        y = apply_filter(f, x)
        np.testing.assert_allclose(y, x @ f.dense().T, atol=1e-10)
        np.testing.assert_allclose(apply_filter(f, y), y, atol=1e-9)
        np.testing.assert_allclose(apply_filter(f, x[0]), y[0], atol=1e-12)


def test_apply_length_mismatch(rng):
    f = _all_filters(rng)[2]
    with pytest.raises(ArgumentError):
        apply_filter(f, np.zeros(17))


def test_range_dimension_ordering(rng):
    p, q, r_a, r_b = 3, 8, 1, 3
    model = _model(rng, p, q, r_a, r_b)
    ks, kc = kron_stap_filter(model), kron_classical_filter(model)
    lr = lr_stap_filter(random_psd(rng, p * q), r_a * r_b, p, q)
    assert ks.rank() < kc.rank() <= lr.rank()
    assert kc.rank() == p * q - r_a * r_b


def test_population_optimum_cancels_clutter_subspaces(backend, rng):
    p, q = 3, 8
    model = _model(rng, p, q, 1, 3)
    f = kron_stap_filter(model)
    ua, ub = f.spatial_basis, f.temporal_basis
    for _ in range(20):
        x = np.kron(ua @ crandn(rng, 1), crandn(rng, q)) + np.kron(crandn(rng, p), ub @ crandn(rng, 3))
        assert np.linalg.norm(apply_filter(f, x)) < 1e-10 * np.linalg.norm(x)


def test_filter_validation(rng):
    with pytest.raises(ValidationError):
        StapFilter(FilterKind.SPATIAL_ONLY, 2, 3, spatial_basis=np.array([[1.0], [1.0]]))
    with pytest.raises(ArgumentError):
        StapFilter(FilterKind.KRON_STAP, 2, 3, spatial_basis=np.array([[1.0], [0.0]]))
    with pytest.raises(ArgumentError):
        StapFilter(FilterKind.LOW_RANK, 2, 3, joint_basis=np.eye(5)[:, :1])
    assert FilterKind.parse("Kron-STAP") is FilterKind.KRON_STAP
    assert FilterKind.parse("low_rank") is FilterKind.LOW_RANK
    with pytest.raises(ArgumentError):
        FilterKind.parse("mti")


def test_steering_bank():
    sv = steering_bank(3, 8, [0.0])[0]
    np.testing.assert_allclose(sv.spatial, np.ones(3) / np.sqrt(3))
    np.testing.assert_allclose(sv.temporal, np.ones(8) / np.sqrt(8))
    grid = doppler_grid(150)
    assert grid.size == 150 and -0.5 < grid[0] < grid[-1] < 0.5
    np.testing.assert_allclose(np.diff(grid), 1 / 150)
    bank = steering_bank(3, 16, [0.1, 0.1 + 3 / 16], spatial_gain=0.7)
    assert abs(np.vdot(bank[0].temporal, bank[1].temporal)) < 1e-12
    for s in bank:
        assert abs(np.linalg.norm(s.vector) - 1) < 1e-14
    np.testing.assert_allclose(bank[0].spatial, spatial_steering(3, 0.1, 0.7))
    with pytest.raises(ArgumentError):
        steering_bank(3, 8, [])


def test_detection_statistic_examples(backend, rng):
    p, q = 3, 8
    f = lr_stap_filter(np.eye(p * q), 0, p, q)
    bank = steering_bank(p, q, doppler_grid(8))
    np.testing.assert_array_equal(detection_statistic(f, np.zeros(p * q), bank), np.zeros(8))
    a = _unit(crandn(rng, p))
    x = np.kron(a, bank[3].temporal)
    stats = detection_statistic(f, x, bank)
    assert abs(stats[3] - 1) < 1e-12
    assert int(np.argmax(stats)) == 3
    h = maximizing_spatial(f, x, bank[3])
    assert abs(abs(np.vdot(h, a)) - 1) < 1e-12
    with pytest.raises(ArgumentError):
        detection_statistic(f, np.zeros(p * q + 1), bank)


def test_detection_statistic_phase_invariant_and_batched(backend, rng):
    f = _all_filters(rng)[2]
    bank = steering_bank(3, 6, doppler_grid(10))
    x = crandn(rng, 5, 18)
    stats = detection_statistic(f, x, bank)
    assert stats.shape == (5, 10)
    np.testing.assert_allclose(detection_statistic(f, np.exp(0.7j) * x, bank), stats, rtol=1e-12)
    np.testing.assert_allclose(detection_statistic(f, x[2], bank), stats[2], rtol=1e-12)
    at = detection_statistic_at(f, x, [bank[k].doppler for k in (0, 3, 3, 9, 1)])
    np.testing.assert_allclose(at, stats[np.arange(5), [0, 3, 3, 9, 1]], rtol=1e-12)


def test_temporal_steering_normalized():
    assert abs(np.linalg.norm(temporal_steering(37, 0.123)) - 1) < 1e-14
