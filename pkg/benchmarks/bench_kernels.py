"""Time the compiled kernels against the numpy fallback.

Run from the repository root after installing the package::

    python3 benchmarks/bench_kernels.py [--repeat N] [--p P] [--q Q] [--n N]

Prints one row per kernel: median seconds per call for each backend and the
python/compiled ratio. Outputs are checked to agree before timing.
"""
import argparse
import timeit

import numpy as np

from kronstap import _backend


def _crandn(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def cases(p, q, n, rng):
    s = _crandn(rng, p * q, p * q)
    s = s @ s.conj().T
    a, b = _crandn(rng, p, p), _crandn(rng, q, q)
    x = _crandn(rng, n, p, q)
    temporal = _crandn(rng, 150, q)
    return {
        "rearrange": (s, p, q),
        "rearrange_inv": (_crandn(rng, p * p, q * q), p, q),
        "contract_for_b": (s, a, p, q),
        "contract_for_a": (s, b, p, q),
        "kron_residual_sq": (s, a, b),
        "kron_apply": (x, a, b),
        "left_apply": (x, a),
        "detection_stats": (x, temporal),
    }


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=7)
    parser.add_argument("--p", type=int, default=3)
    parser.add_argument("--q", type=int, default=32)
    parser.add_argument("--n", type=int, default=200, help="range bins for the batch kernels")
    args = parser.parse_args(argv)

    backends = _backend.available()
    if "compiled" not in backends:
        print("compiled backend not built; timing the python backend only")
    args_by_kernel = cases(args.p, args.q, args.n, np.random.default_rng(0))
    print(f"p={args.p} q={args.q} n={args.n}, median of {args.repeat}")
    print(f"{'kernel':<18}" + "".join(f"{b:>14}" for b in backends) + f"{'ratio':>10}")
    for kernel, call_args in args_by_kernel.items():
        outputs, times = [], []
        for name in backends:
            fn = getattr(_backend._AVAILABLE[name], kernel)
            outputs.append(np.asarray(fn(*call_args)))
            timer = timeit.Timer(lambda: fn(*call_args))
            number, _ = timer.autorange()
            times.append(np.median(timer.repeat(args.repeat, number)) / number)
        scale = max(np.abs(outputs[0]).max(), 1.0)
        for out in outputs[1:]:
            if np.abs(out - outputs[0]).max() > 1e-12 * scale:
                raise SystemExit(f"{kernel}: backends disagree")
        ratio = times[backends.index("python")] / times[0] if len(times) > 1 else 1.0
        print(f"{kernel:<18}" + "".join(f"{t:>14.3e}" for t in times) + f"{ratio:>10.2f}")


if __name__ == "__main__":
    main()
