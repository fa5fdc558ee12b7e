"""Seeded Monte Carlo harness comparing the STAP filter family.

Each trial draws its own generator from ``seed + trial`` so a report does
not depend on the worker count. The clutter scenario itself is fixed by
``scenario.seed`` and shared by all trials.
"""
import concurrent.futures
import csv
import io
import math
import time
import warnings
from dataclasses import dataclass, field, fields, replace

import numpy as np

from .covariance import lr_kron, sample_covariance
from .errors import ConfigError, StapWarning
from .filters import (
    detection_statistic_at,
    kron_classical_filter,
    kron_stap_filter,
    lr_stap_filter,
    spatial_filter_from_vector,
    spatial_only_filter,
    spatial_steering,
    temporal_steering,
)
from .metrics import (
    ms_residual,
    naive_spatial_estimate,
    roc_auc,
    sinr_loss,
    sinr_max,
    theory_sinr_loss,
)
from .simulation import (
    corrupt_training,
    make_scenario,
    random_target,
    sample_clutter,
    scenario_covariance,
    target_return,
)

EXPERIMENTS = (
    "ms-residual-vs-n",
    "sinr-loss-vs-n",
    "auc-vs-n",
    "auc-vs-n-corrupted",
    "lrkron-convergence",
)
METHODS = ("kronstap", "spatial", "kronclassical", "lowrank", "spatial-naive")


@dataclass(frozen=True)
class ScenarioParams:
    """Keyword arguments of :func:`kronstap.simulation.make_scenario`."""

    p: int = 3
    q: int = 32
    rank_b: int = 5
    clutter_power: float = 1.0
    noise_ratio: float = 1e-4
    texture_dof: float = 4.0
    secondary_eigenvalue: float = 0.0
    calibration_error: float = 0.1
    spatial_gain: float = 1.0
    decades: float = 2.0
    seed: int = 0

    def build(self):
        kwargs = {f.name: getattr(self, f.name) for f in fields(self)}
        return make_scenario(**kwargs)


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    axis: tuple
    trials: int = 100
    seed: int = 0
    scenario: ScenarioParams = field(default_factory=ScenarioParams)
    r_a: int = 1
    r_b: int = 5
    tol: float = 1e-8
    max_iter: int = 200
    lowrank_rank: int = 0
    methods: tuple = ("kronstap", "spatial", "kronclassical", "lowrank")
    test_size: int = 100
    train_size: int = 50
    target_amplitude: float = 0.02
    doppler_guard: float = 0.05
    corruption_fraction: float = 0.05
    corruption_amp: tuple = (5.0, 15.0)
    workers: int = 1
    output: str = None

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment {self.experiment!r}; "
                              f"expected one of {', '.join(EXPERIMENTS)}")
        object.__setattr__(self, "axis", tuple(self.axis))
        object.__setattr__(self, "methods", tuple(self.methods))
        if not self.axis:
            raise ConfigError("axis must list at least one value")
        if self.trials < 1:
            raise ConfigError("trials must be at least 1")
        sc = self.scenario
        if sc.p < 1 or sc.q < 1:
            raise ConfigError("scenario.p and scenario.q must be positive")
        if not 1 <= sc.rank_b <= sc.q:
            raise ConfigError("scenario.rank_b must lie in [1, q]")
        if not 1 <= self.r_a <= sc.p:
            raise ConfigError(f"estimator.r_a={self.r_a} outside [1, {sc.p}]")
        if not 1 <= self.r_b <= sc.q:
            raise ConfigError(f"estimator.r_b={self.r_b} outside [1, {sc.q}]")
        if not 0 <= self.lowrank_rank <= sc.p * sc.q:
            raise ConfigError("estimator.lowrank_rank outside [0, pq]")
        if self.tol <= 0 or self.max_iter < 1:
            raise ConfigError("estimator.tol must be positive and max_iter at least 1")
        unknown = set(self.methods) - set(METHODS)
        if unknown or not self.methods:
            raise ConfigError(f"unknown methods {sorted(unknown)}; expected a subset of {METHODS}")
        if self.experiment != "lrkron-convergence":
            if any(n < 1 or int(n) != n for n in self.axis):
                raise ConfigError("axis values must be positive integer sample counts")
        elif any(k < 0 or int(k) != k for k in self.axis):
            raise ConfigError("axis values must be non-negative iteration indices")
        if self.test_size < 1 or self.train_size < 1:
            raise ConfigError("test_size and train_size must be positive")
        if not 0 <= self.corruption_fraction <= 1:
            raise ConfigError("corruption.fraction must lie in [0, 1]")
        lo, hi = self.corruption_amp
        if not 0 <= lo <= hi:
            raise ConfigError("corruption amplitude range must satisfy 0 <= low <= high")
        if not 0 <= self.doppler_guard < 0.5:
            raise ConfigError("target.doppler_guard must lie in [0, 0.5)")
        if self.workers < 1:
            raise ConfigError("workers must be at least 1")

    @property
    def lr_rank(self):
        return self.lowrank_rank or self.r_a * self.r_b


@dataclass
class ExperimentReport:
    experiment: str
    axis: list
    series: dict
    trial_count: int
    seed: int
    runtime: float = 0.0

    def mean(self, method):
        return self.series[method][0]

    def stderr(self, method):
        return self.series[method][1]

    def to_csv(self):
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["axis", "method", "mean", "stderr"])
        for name, (mean, se) in self.series.items():
            for x, m, s in zip(self.axis, mean, se):
                writer.writerow([_fmt(x), name, _fmt(m), _fmt(s)])
        return buf.getvalue()

    def write_csv(self, path):
        with open(path, "w", newline="", encoding="ascii") as fh:
            fh.write(self.to_csv())


def _fmt(x):
    return format(float(x), ".12g")


# --- per-trial pipelines -----------------------------------------------------

def _filters(cfg, s, p, q):
    out = {}
    kron_methods = {"kronstap", "spatial", "kronclassical"} & set(cfg.methods)
    if kron_methods:
        model = lr_kron(s, p, q, cfg.r_a, cfg.r_b, cfg.tol, cfg.max_iter)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", StapWarning)
            if "kronstap" in kron_methods:
                out["kronstap"] = kron_stap_filter(model)
        if "spatial" in kron_methods:
            out["spatial"] = spatial_only_filter(model)
        if "kronclassical" in kron_methods:
            out["kronclassical"] = kron_classical_filter(model)
    if "lowrank" in cfg.methods:
        out["lowrank"] = lr_stap_filter(s, cfg.lr_rank, p, q)
    if "spatial-naive" in cfg.methods:
        _, h_hat = naive_spatial_estimate(s, p, q)
        out["spatial-naive"] = spatial_filter_from_vector(h_hat, q)
    return {m: out[m] for m in cfg.methods}


def _ms_residual_trial(cfg, sc, rng):
    rows = {m: [] for m in cfg.methods}
    for n in cfg.axis:
        train = sample_clutter(sc, int(n), rng)
        test = sample_clutter(sc, cfg.test_size, rng)
        for m, f in _filters(cfg, sample_covariance(train), sc.p, sc.q).items():
            rows[m].append(ms_residual(f, test))
    return rows


def _orthogonal_steering(sc, rng):
    """Target steering ``d_A kron d_B``: ``d_A`` is ``a(f)`` with its ``h``
    component removed and ``d_B = b(f)``, for a uniformly drawn Doppler."""
    h = sc.h / np.linalg.norm(sc.h)
    while True:
        f = rng.uniform(-0.5, 0.5)
        a = spatial_steering(sc.p, f, sc.spatial_gain)
        g = a - h * np.vdot(h, a)
        if np.linalg.norm(g) > 1e-3:
            return np.kron(g / np.linalg.norm(g), temporal_steering(sc.q, f))


def _sinr_trial(cfg, sc, rng, sigma):
    rows = {m: [] for m in cfg.methods}
    for n in cfg.axis:
        train = sample_clutter(sc, int(n), rng)
        d = _orthogonal_steering(sc, rng)
        best = sinr_max(d, sigma)
        for m, f in _filters(cfg, sample_covariance(train), sc.p, sc.q).items():
            rows[m].append(sinr_loss(f, d, sigma, optimum=best))
    return rows


def _auc_sets(cfg, sc, rng):
    """Equal-size clutter-only and clutter-plus-target test sets.

    Every bin gets a hypothesized Doppler outside the guard band; the H1 bins
    carry a target at that Doppler.
    """
    m = cfg.test_size
    h0 = sample_clutter(sc, m, rng)
    h1 = sample_clutter(sc, m, rng)
    amp = (cfg.target_amplitude, cfg.target_amplitude)
    t0 = [random_target(rng, amp, guard=cfg.doppler_guard, spatial_gain=sc.spatial_gain)
          for _ in range(m)]
    t1 = [random_target(rng, amp, guard=cfg.doppler_guard, spatial_gain=sc.spatial_gain)
          for _ in range(m)]
    x1 = h1.samples + np.array([target_return(t, sc.p, sc.q) for t in t1])
    return (h0.samples, [t.doppler for t in t0]), (x1, [t.doppler for t in t1])


def _auc(f, sets):
    (x0, f0), (x1, f1) = sets
    return roc_auc(detection_statistic_at(f, x0, f0), detection_statistic_at(f, x1, f1))


def _auc_trial(cfg, sc, rng):
    rows = {m: [] for m in cfg.methods}
    for n in cfg.axis:
        train = sample_clutter(sc, int(n), rng)
        sets = _auc_sets(cfg, sc, rng)
        for m, f in _filters(cfg, sample_covariance(train), sc.p, sc.q).items():
            rows[m].append(_auc(f, sets))
    return rows


def _auc_corrupted_trial(cfg, sc, rng):
    rows = {}
    for n in cfg.axis:
        train = sample_clutter(sc, int(n), rng)
        dirty = corrupt_training(train, cfg.corruption_fraction, cfg.corruption_amp, rng,
                                 spatial_gain=sc.spatial_gain)
        sets = _auc_sets(cfg, sc, rng)
        clean = _filters(cfg, sample_covariance(train), sc.p, sc.q)
        corrupted = _filters(cfg, sample_covariance(dirty), sc.p, sc.q)
        drops = {}
        for m in cfg.methods:
            a_clean, a_dirty = _auc(clean[m], sets), _auc(corrupted[m], sets)
            drops[m] = a_clean - a_dirty
            rows.setdefault(m, []).append(a_clean)
            rows.setdefault(f"{m}-corrupted", []).append(a_dirty)
            rows.setdefault(f"{m}-drop", []).append(drops[m])
        if "kronstap" in drops:
            for m in cfg.methods:
                if m != "kronstap":
                    rows.setdefault(f"{m}-drop-gap", []).append(drops[m] - drops["kronstap"])
    return rows


def _convergence_trial(cfg, sc, rng):
    train = sample_clutter(sc, cfg.train_size, rng)
    s = sample_covariance(train)
    last = int(max(cfg.axis))
    model = lr_kron(s, sc.p, sc.q, cfg.r_a, cfg.r_b, tol=cfg.tol,
                    max_iter=max(cfg.max_iter, last))
    trace = np.asarray(model.objective_trace)
    scale = np.vdot(s, s).real
    gap = (trace - trace[-1]) / scale
    gap = np.concatenate([gap, np.zeros(max(0, last + 1 - gap.size))])
    return {"objective-gap": [gap[int(k)] for k in cfg.axis]}


def run_trial(cfg, trial):
    """Series values of one trial, keyed by series name."""
    sc = cfg.scenario.build()
    rng = np.random.default_rng(cfg.seed + trial)
    if cfg.experiment == "ms-residual-vs-n":
        return _ms_residual_trial(cfg, sc, rng)
    if cfg.experiment == "sinr-loss-vs-n":
        _, sigma = scenario_covariance(sc)
        return _sinr_trial(cfg, sc, rng, sigma)
    if cfg.experiment == "auc-vs-n":
        return _auc_trial(cfg, sc, rng)
    if cfg.experiment == "auc-vs-n-corrupted":
        return _auc_corrupted_trial(cfg, sc, rng)
    return _convergence_trial(cfg, sc, rng)


def _run_trial_args(args):
    return run_trial(*args)


def run_experiment(cfg):
    """Run ``cfg.trials`` seeded trials and aggregate mean and standard error."""
    start = time.perf_counter()
    jobs = [(cfg, t) for t in range(cfg.trials)]
    if cfg.workers > 1:
        with concurrent.futures.ProcessPoolExecutor(cfg.workers) as pool:
            results = list(pool.map(_run_trial_args, jobs))
    else:
        results = [run_trial(*job) for job in jobs]
    series = {}
    for name in results[0]:
        values = np.array([r[name] for r in results], dtype=float)
        mean = values.mean(axis=0)
        if len(results) > 1:
            se = values.std(axis=0, ddof=1) / math.sqrt(len(results))
        else:
            se = np.zeros_like(mean)
        series[name] = (mean, se)
    if cfg.experiment == "sinr-loss-vs-n":
        zero = np.zeros(len(cfg.axis))
        series["theory-lowrank"] = (
            np.array([theory_sinr_loss("lowrank", n, r=cfg.lr_rank) for n in cfg.axis]), zero)
        series["theory-spatial"] = (
            np.array([theory_sinr_loss("kronspatial", n) for n in cfg.axis]), zero)
    return ExperimentReport(cfg.experiment, list(cfg.axis), series, cfg.trials, cfg.seed,
                            time.perf_counter() - start)


def with_overrides(cfg, **changes):
    """Copy of ``cfg`` with top-level fields replaced (validated again)."""
    return replace(cfg, **changes)
