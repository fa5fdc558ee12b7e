"""Command-line entry point: ``kronstap simulate|estimate|filter|experiment``.

Every command validates its full configuration, and reads file headers,
before it opens any output path.
"""
import argparse
import csv
import io
import math
import sys
from dataclasses import replace
from importlib import resources

import numpy as np

from . import __version__
from .config import load_experiment_config
from .covariance import lr_kron, sample_covariance
from .errors import ArgumentError, ConfigError, KronStapError
from .experiments import ScenarioParams, run_experiment
from .fileio import read_model, read_phase_history, write_model, write_phase_history
from .filters import (
    FilterKind,
    detection_statistic,
    doppler_grid,
    kron_classical_filter,
    kron_stap_filter,
    lr_stap_filter,
    spatial_only_filter,
    steering_bank,
)
from .simulation import TargetSpec, sample_clutter, target_return


def preset_names():
    return sorted(p.name[:-4] for p in resources.files("kronstap.presets").iterdir()
                  if p.name.endswith(".cfg"))


def preset_path(name):
    path = resources.files("kronstap.presets") / f"{name}.cfg"
    if not path.is_file():
        raise ConfigError(f"unknown preset {name!r}; available: {', '.join(preset_names())}")
    return path


def _say(args, *parts):
    if not args.quiet:
        print(*parts)


def _fmt_row(values):
    return [format(float(v), ".12g") for v in values]


# --- simulate ----------------------------------------------------------------

def cmd_simulate(args):
    if args.n is None or args.n < 1:
        raise ConfigError("simulate needs --n of at least 1")
    if not args.output:
        raise ConfigError("simulate needs --output")
    params = ScenarioParams(
        p=args.p, q=args.q, rank_b=args.rank_b, noise_ratio=args.noise_ratio,
        texture_dof=args.texture_dof, secondary_eigenvalue=args.secondary_eigenvalue,
        calibration_error=args.calibration_error, spatial_gain=args.spatial_gain,
        seed=args.seed)
    if not 1 <= params.rank_b <= params.q:
        raise ConfigError(f"--rank-b must lie in [1, {params.q}]")
    try:
        sc = params.build()
        targets = [TargetSpec(f, a, sc.spatial_gain) for f, a in args.target or []]
    except KronStapError as exc:
        raise ConfigError(str(exc)) from None
    sample_rng = None if args.sample_seed is None else np.random.default_rng(args.sample_seed)
    data = sample_clutter(sc, args.n, sample_rng)
    if targets:
        extra = sum(target_return(t, sc.p, sc.q) for t in targets)
        data = type(data)(data.p, data.q, data.samples + extra)
    write_phase_history(args.output, data)
    _say(args, f"wrote {data.n} range bins (p={sc.p}, q={sc.q}) to {args.output}")
    _say(args, f"clutter power {sc.clutter_power:.6g}, sigma2 {sc.sigma2:.6g}, "
               f"texture dof {sc.texture_dof:g}, rank(B) {params.rank_b}, "
               f"targets {len(targets)}")
    return 0


# --- estimate ----------------------------------------------------------------

def cmd_estimate(args):
    if not args.output:
        raise ConfigError("estimate needs --output")
    if args.tol <= 0 or args.max_iter < 1:
        raise ConfigError("--tol must be positive and --max-iter at least 1")

    def check(header):
        if not 1 <= args.r_a <= header.p:
            raise ConfigError(f"--r-a={args.r_a} outside [1, p={header.p}]")
        if not 1 <= args.r_b <= header.q:
            raise ConfigError(f"--r-b={args.r_b} outside [1, q={header.q}]")
        if header.n < 1:
            raise ConfigError(f"{args.input} holds no range bins")

    data = read_phase_history(args.input, expect=check)
    model = lr_kron(sample_covariance(data), data.p, data.q, args.r_a, args.r_b,
                    args.tol, args.max_iter)
    write_model(args.output, model)
    eig_a = np.linalg.eigvalsh(model.a_factor)[::-1]
    eig_b = np.linalg.eigvalsh(model.b_factor)[::-1]
    _say(args, f"iterations {model.iterations} (converged: {model.converged})")
    _say(args, f"final objective {model.final_objective:.6e}")
    _say(args, "A spectrum " + " ".join(f"{v:.4g}" for v in eig_a[:model.r_a]))
    _say(args, "B spectrum " + " ".join(f"{v:.4g}" for v in eig_b[:model.r_b]))
    return 0


# --- filter ------------------------------------------------------------------

def _build_filter(args, p, q):
    kind = FilterKind.parse(args.kind)
    if kind is FilterKind.LOW_RANK:
        if args.rank is None:
            raise ConfigError("lowrank filter needs --rank")
        if not args.train:
            raise ConfigError("lowrank filter needs --train")
        train = read_phase_history(args.train, expect=lambda h: _match(h.p, h.q, p, q, args.train))
        if not 0 <= args.rank <= p * q:
            raise ConfigError(f"--rank outside [0, {p * q}]")
        return lr_stap_filter(sample_covariance(train), args.rank, p, q)
    if not args.model:
        raise ConfigError(f"{kind.value} filter needs --model")
    model = read_model(args.model)
    _match(model.p, model.q, p, q, args.model)
    build = {FilterKind.KRON_CLASSICAL: kron_classical_filter,
             FilterKind.KRON_STAP: kron_stap_filter,
             FilterKind.SPATIAL_ONLY: spatial_only_filter}[kind]
    return build(model)


def _match(p, q, want_p, want_q, what):
    if (p, q) != (want_p, want_q):
        raise ConfigError(f"{what} has p={p}, q={q} but the input has p={want_p}, q={want_q}")


def cmd_filter(args):
    if args.doppler_bins < 1:
        raise ConfigError("--doppler-bins must be at least 1")
    if not args.output:
        raise ConfigError("filter needs --output")
    FilterKind.parse(args.kind)
    data = read_phase_history(args.input)
    f = _build_filter(args, data.p, data.q)
    bank = steering_bank(data.p, data.q, doppler_grid(args.doppler_bins), args.spatial_gain)
    stats = detection_statistic(f, data.samples, bank) if data.n else np.zeros((0, len(bank)))
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    for row in stats:
        writer.writerow(_fmt_row(row))
    with open(args.output, "w", newline="", encoding="ascii") as fh:
        fh.write(buf.getvalue())
    _say(args, f"wrote {data.n} x {len(bank)} detection statistics to {args.output}")
    return 0


# --- experiment --------------------------------------------------------------

def cmd_experiment(args):
    if (args.config is None) == (args.preset is None):
        raise ConfigError("give exactly one of a config path or --preset")
    source = args.config if args.config is not None else preset_path(args.preset)
    cfg = load_experiment_config(source, seed=args.seed, output=args.output)
    if args.workers is not None:
        if args.workers < 1:
            raise ConfigError("--workers must be at least 1")
        cfg = replace(cfg, workers=args.workers)
    report = run_experiment(cfg)
    text = report.to_csv()
    if cfg.output:
        with open(cfg.output, "w", newline="", encoding="ascii") as fh:
            fh.write(text)
        _say(args, f"{cfg.experiment}: {cfg.trials} trials in {report.runtime:.1f} s -> {cfg.output}")
    else:
        sys.stdout.write(text)
    return 0


# --- parser ------------------------------------------------------------------

def _global_flags(parser, suppress):
    default = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    parser.add_argument("--seed", type=int, default=default(None),
                        help="random seed (overrides any config seed)")
    parser.add_argument("--output", "-o", default=default(None), help="output path")
    parser.add_argument("--quiet", "-q", action="store_true", default=default(False),
                        help="suppress progress messages")


def _finite(text):
    value = float(text)
    if not math.isfinite(value):
        raise argparse.ArgumentTypeError(f"{text!r} is not finite")
    return value


def build_parser():
    parser = argparse.ArgumentParser(prog="kronstap", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    _global_flags(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True)
    common = argparse.ArgumentParser(add_help=False)
    _global_flags(common, suppress=True)

    sim = sub.add_parser("simulate", parents=[common], help="write simulated range bins (KPHD)")
    sim.add_argument("--n", type=int, required=True, help="number of range bins")
    sim.add_argument("--p", type=int, default=3)
    sim.add_argument("--q", type=int, default=32)
    sim.add_argument("--rank-b", type=int, default=5)
    sim.add_argument("--noise-ratio", type=_finite, default=1e-4)
    sim.add_argument("--texture-dof", type=float, default=4.0)
    sim.add_argument("--secondary-eigenvalue", type=_finite, default=0.0)
    sim.add_argument("--calibration-error", type=_finite, default=0.1)
    sim.add_argument("--spatial-gain", type=_finite, default=1.0)
    sim.add_argument("--sample-seed", type=int,
                     help="seed for the range bins alone; --seed fixes the scenario")
    sim.add_argument("--target", nargs=2, type=_finite, action="append",
                     metavar=("DOPPLER", "AMPLITUDE"), help="add a target to every bin")
    sim.set_defaults(func=cmd_simulate)

    est = sub.add_parser("estimate", parents=[common], help="fit LR-Kron, write a KCOV model")
    est.add_argument("input", help="KPHD training data")
    est.add_argument("--r-a", type=int, default=1)
    est.add_argument("--r-b", type=int, default=5)
    est.add_argument("--tol", type=float, default=1e-8)
    est.add_argument("--max-iter", type=int, default=200)
    est.set_defaults(func=cmd_estimate)

    flt = sub.add_parser("filter", parents=[common],
                         help="detection statistics per range bin and Doppler bin (CSV)")
    flt.add_argument("input", help="KPHD test data")
    flt.add_argument("--kind", default="kronstap",
                     help="kronstap, kronclassical, spatial or lowrank")
    flt.add_argument("--model", help="KCOV model for the Kronecker kinds")
    flt.add_argument("--train", help="KPHD training data for the lowrank kind")
    flt.add_argument("--rank", type=int, help="clutter rank for the lowrank kind")
    flt.add_argument("--doppler-bins", type=int, default=150)
    flt.add_argument("--spatial-gain", type=_finite, default=1.0)
    flt.set_defaults(func=cmd_filter)

    exp = sub.add_parser("experiment", parents=[common], help="run a Monte Carlo experiment")
    exp.add_argument("config", nargs="?", help="experiment config file")
    exp.add_argument("--preset", help=f"bundled config ({', '.join(preset_names())})")
    exp.add_argument("--workers", type=int, help="worker processes")
    exp.set_defaults(func=cmd_experiment)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "simulate" and args.seed is None:
        args.seed = 0
    try:
        return args.func(args)
    except (ConfigError, ArgumentError) as exc:
        print(f"kronstap: error: {exc}", file=sys.stderr)
        return 2
    except (KronStapError, OSError) as exc:
        print(f"kronstap: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
