"""Compare the compiled kernels with the numpy fallback.

    python3 benchmarks/bench_kernels.py [--repeat 5] [--number 2000] [--end-to-end]

Each kernel is timed on the small matrices the optimizer and the Monte-Carlo
loop actually see (dimension 4 to 16). ``--end-to-end`` also times a full
``fqsw`` run in a subprocess per backend, selected through ``QRELAY_PURE_PYTHON``.
"""

import argparse
import os
import subprocess
import sys
import time
import timeit

import numpy as np

from qrelay import _kernels_py

try:
    from qrelay import _kernels
except ImportError:
    _kernels = None


def _hermitian(d, rng):
    x = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    return (x + x.conj().T) / 2


def _density(d, rng):
    x = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    rho = x @ x.conj().T
    return rho / np.trace(rho).real


def cases(rng):
    h8 = _hermitian(8, rng)
    rho16 = _density(16, rng)
    psi = rng.standard_normal(32) + 1j * rng.standard_normal(32)
    psi /= np.linalg.norm(psi)
    kraus = rng.standard_normal((3, 2, 4)) + 1j * rng.standard_normal((3, 2, 4))
    rho_in = _density(8, rng)
    return {
        "eigvalsh 8x8": ("eigvalsh", (h8,)),
        "entropy_bits 16x16": ("entropy_bits", (rho16,)),
        "trace_norm 8x8": ("trace_norm_hermitian", (h8,)),
        "partial_trace 2x2x4 keep A,C": ("partial_trace", (rho16, (2, 2, 4), (True, False, True))),
        "pure_marginal 2x4x2x2 keep 1,4": ("pure_marginal", (psi, (2, 4, 2, 2),
                                                              (True, False, False, True))),
        "kraus_apply rest=2 4->2": ("kraus_apply", (kraus, rho_in, 2)),
    }


def bench(mod, name, args, number, repeat):
    fn = getattr(mod, name)
    best = min(timeit.repeat(lambda: fn(*args), number=number, repeat=repeat))
    return best / number * 1e6


def end_to_end(backend_env):
    env = dict(os.environ, QRELAY_PURE_PYTHON=backend_env)
    cmd = [sys.executable, "-c",
           ("from qrelay.fqsw import DecouplingConfig, monte_carlo\n"
           "from qrelay.linalg import SubsystemShape, random_pure_state\n"
           "psi = random_pure_state(SubsystemShape.of(A=8, B=4, C=2), 1)\n"
           "monte_carlo(DecouplingConfig(psi, 2, 4, trials=5000, seed=0))\n")]
    start = time.perf_counter()
    subprocess.run(cmd, env=env, check=True)
    return time.perf_counter() - start


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--number", type=int, default=2000)
    ap.add_argument("--end-to-end", action="store_true")
    args = ap.parse_args(argv)

    if _kernels is None:
        print("compiled extension not built; run `pip install -e . --no-build-isolation`")
        return 1

    rng = np.random.default_rng(0)
    print(f"{'kernel':34s} {'cython us':>10s} {'numpy us':>10s} {'speedup':>8s}")
    for label, (name, call_args) in cases(rng).items():
        np.testing.assert_allclose(getattr(_kernels, name)(*call_args),
                                   getattr(_kernels_py, name)(*call_args), atol=1e-10)
        fast = bench(_kernels, name, call_args, args.number, args.repeat)
        slow = bench(_kernels_py, name, call_args, args.number, args.repeat)
        print(f"{label:34s} {fast:10.2f} {slow:10.2f} {slow / fast:7.1f}x")

    if args.end_to_end:
        fast = end_to_end("0")
        slow = end_to_end("1")
        print(f"{'fqsw 5000 trials (process)':34s} {fast * 1e3:8.0f}ms {slow * 1e3:8.0f}ms "
              f"{slow / fast:7.1f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
