import math

import numpy as np
import pytest

from kronstap.covariance import sample_covariance
from kronstap.errors import ArgumentError, ValidationError
from kronstap.filters import apply_filter, spatial_filter_from_vector
from kronstap.linalg import projector_distance
from kronstap.simulation import (
    ClutterScenario,
    TargetSpec,
    corrupt_training,
    make_scenario,
    random_low_rank_psd,
    sample_clutter,
    scenario_covariance,
    target_return,
    texture_squared,
)

from conftest import crandn


def test_ideal_scenario_covariance():
    sc = ClutterScenario(3, 4, np.ones(3), np.eye(4), 0.0)
    clutter, total = scenario_covariance(sc)
    np.testing.assert_array_equal(clutter, np.kron(np.ones((3, 3)), np.eye(4)))
    np.testing.assert_array_equal(total, clutter)


def test_rank_two_spatial_factor(rng):
    h = crandn(rng, 3)
    h /= np.linalg.norm(h)
    sc = ClutterScenario(3, 4, h, np.eye(4), 1e-3,
                         spatial_secondary=(1 / 900, crandn(rng, 3)))
    w = np.linalg.eigvalsh(sc.spatial_factor())[::-1]
    np.testing.assert_allclose(w, [1, 1 / 900, 0], atol=1e-12)
    clutter, total = scenario_covariance(sc)
    np.testing.assert_allclose(total - clutter, 1e-3 * np.eye(12), atol=1e-15)


def test_clutter_spectrum_is_outer_product(rng):
    sc = make_scenario(p=3, q=6, rank_b=3, secondary_eigenvalue=0.2, seed=4)
    clutter, _ = scenario_covariance(sc)
    sa = np.linalg.eigvalsh(sc.spatial_factor())
    sb = np.linalg.eigvalsh(sc.b_true)
    expected = np.sort(np.outer(sa, sb).reshape(-1))
    np.testing.assert_allclose(np.linalg.eigvalsh(clutter), expected, atol=1e-12)


def test_make_scenario_scaling():
    sc = make_scenario(p=3, q=32, rank_b=5, clutter_power=2.0, noise_ratio=1e-3, seed=1)
    assert abs(np.linalg.norm(sc.h) - 1) < 1e-14
    assert abs(sc.clutter_power - 2.0) < 1e-12
    assert abs(sc.sigma2 - 2e-3) < 1e-15
    w = np.linalg.eigvalsh(sc.b_true)
    assert np.sum(w > 1e-9 * w[-1]) == 5
    assert w[-1] / w[-5] <= 100 + 1e-9


def test_random_low_rank_psd(rng):
    b = random_low_rank_psd(10, 4, rng)
    w = np.linalg.eigvalsh(b)[::-1]
    assert np.all(w[4:] < 1e-12) and 0.01 <= w[3] <= w[0] <= 1
    with pytest.raises(ArgumentError):
        random_low_rank_psd(4, 5, rng)


def test_scenario_validation(rng):
    with pytest.raises(ValidationError):
        ClutterScenario(2, 2, np.zeros(2), np.eye(2), 1.0)
    with pytest.raises(ValidationError):
        ClutterScenario(2, 2, np.ones(2), -np.eye(2), 1.0)
    with pytest.raises(ValidationError):
        ClutterScenario(2, 2, np.ones(2), np.eye(2), -1.0)
    with pytest.raises(ValidationError):
        ClutterScenario(2, 2, np.ones(2), np.eye(2), 1.0, spatial_secondary=(3.0, [1, -1]))
    with pytest.raises(ValidationError):
        ClutterScenario(2, 2, np.ones(2), np.eye(2), 1.0, spatial_secondary=(0.5, [1, 1]))
    with pytest.raises(ArgumentError):
        ClutterScenario(2, 2, np.ones(3), np.eye(2), 1.0)


def test_gaussian_limit_kurtosis():
    sc = ClutterScenario(2, 2, [1.0, 0.5j], np.diag([1.0, 0.3]), 0.01,
                         texture_dof=1e6, rng_seed=3)
    x = sample_clutter(sc, 100000).samples
    power = np.abs(x) ** 2
    # circular complex Gaussian: E|x|^4 / (E|x|^2)^2 = 2
    kurt = np.mean(power ** 2, axis=0) / np.mean(power, axis=0) ** 2
    np.testing.assert_allclose(kurt, 2.0, rtol=0.02)


def test_sample_covariance_converges_to_truth():
    sc = make_scenario(p=2, q=4, rank_b=2, noise_ratio=0.01, seed=7)
    s = sample_covariance(sample_clutter(sc, 100000))
    _, total = scenario_covariance(sc)
    assert np.linalg.norm(s - total) < 0.05 * np.linalg.norm(total)


def test_noiseless_samples_in_clutter_subspace():
    sc = make_scenario(p=3, q=10, rank_b=3, noise_ratio=0.0, secondary_eigenvalue=0.1, seed=2)
    clutter, _ = scenario_covariance(sc)
    w, v = np.linalg.eigh(clutter)
    u = v[:, w > 1e-10 * w[-1]]
    assert u.shape[1] == 2 * 3
    x = sample_clutter(sc, 50).samples.T
    residual = x - u @ (u.conj().T @ x)
    assert np.linalg.norm(residual) < 1e-8 * np.linalg.norm(x)


def test_ideal_scenario_columns_proportional_to_h():
    sc = make_scenario(p=4, q=8, rank_b=3, noise_ratio=0.0, seed=9)
    h = sc.h / np.linalg.norm(sc.h)
    for arr in sample_clutter(sc, 20).arrays():
        off = arr - np.outer(h, h.conj() @ arr)
        assert np.linalg.norm(off) < 1e-8 * np.linalg.norm(arr)


def test_texture_normalization():
    tau2 = texture_squared(np.random.default_rng(0), 4.0, 100000)
    assert 0.99 <= tau2.mean() <= 1.01
    assert np.all(texture_squared(np.random.default_rng(0), math.inf, 5) == 1)


def test_reproducible_streams():
    a = sample_clutter(make_scenario(seed=11), 30).samples
    b = sample_clutter(make_scenario(seed=11), 30).samples
    assert a.tobytes() == b.tobytes()
    c = sample_clutter(make_scenario(seed=12), 30).samples
    assert a.tobytes() != c.tobytes()


def test_target_return():
    spec = TargetSpec(1 / 3, 2.0 - 1.0j)
    x = target_return(spec, 3, 8)
    assert abs(np.linalg.norm(x) - abs(spec.amplitude)) < 1e-12
    f = spatial_filter_from_vector(np.ones(3), 8)
    assert abs(np.linalg.norm(apply_filter(f, x)) - np.linalg.norm(x)) < 1e-12
    assert np.linalg.norm(target_return(TargetSpec(0.2, 1e-300), 3, 8)) < 1e-299
    with pytest.raises(ArgumentError):
        TargetSpec(0.1, 0.0)


def test_corrupt_training(rng):
    sc = make_scenario(p=3, q=8, rank_b=2, seed=5)
    data = sample_clutter(sc, 200)
    before = data.samples.copy()
    same = corrupt_training(data, 0.0, (1.0, 2.0), 0)
    np.testing.assert_array_equal(same.samples, data.samples)
    dirty, index = corrupt_training(data, 0.05, (1.0, 2.0), 0, return_indices=True)
    assert index.size == 10
    changed = np.flatnonzero(np.any(dirty.samples != data.samples, axis=1))
    np.testing.assert_array_equal(changed, index)
    np.testing.assert_array_equal(data.samples, before)
    with pytest.raises(ArgumentError):
        corrupt_training(data, 1.5, (1.0, 2.0), 0)


def test_full_corruption_dominates_scm():
    sc = make_scenario(p=3, q=8, rank_b=2, seed=5)
    data = sample_clutter(sc, 100)
    dirty = corrupt_training(data, 1.0, (1e3, 2e3), 1)
    clutter, _ = scenario_covariance(sc)
    clutter_lead = np.linalg.eigh(clutter)[1][:, -1]
    lead = np.linalg.eigh(sample_covariance(dirty))[1][:, -1]
    assert projector_distance(lead, clutter_lead) > 0.5
