"""Compare the numba and numpy kernel backends.

Times each hot kernel on a few grid sizes, then times a short end-to-end run
under each backend in a subprocess (the backend is picked at import time from
CYLFLOW_NUMBA). Numba compile time is excluded by a warm-up call.

    python3 benchmarks/bench_kernels.py
    python3 benchmarks/bench_kernels.py --sizes 64 128 --repeat 20 --no-run
"""

import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from cylflow.kernels import HYBRID, _numpy

try:
    from cylflow.kernels import _numba
except ImportError:
    _numba = None

RUN_SNIPPET = """
import time, warnings
from cylflow import SupportMarginWarning
from cylflow.config import build_config
from cylflow.kernels import BACKEND
from cylflow.transport import run
warnings.simplefilter("ignore", SupportMarginWarning)
cfg = build_config({{"nu": 0.01, "t_end": {t_end}, "grid": {{"nr": {n}, "nz": {n}, "z_len": 1.0}},
                    "initial_data": {{"kind": "gaussian_ring", "amplitude": 10.0}}}})
run(cfg.sim.with_(t_end=1e-3))  # warm-up
t0 = time.perf_counter()
state, rows = run(cfg.sim)
print(BACKEND, time.perf_counter() - t0, len(rows))
"""


def _cases(n, rng):
    hr, hz = 1.0 / n, 1.0 / n
    r = (np.arange(n) + 0.5) * hr
    q = rng.standard_normal((n, n))
    phi = 0.1 * rng.standard_normal((n, n))
    nm = n // 2 + 1
    rhs = rng.standard_normal((n, nm)) + 1j * rng.standard_normal((n, nm))
    lower = np.full(n, -1.0)
    inv_den = np.full((n, nm), 0.25)
    cp = np.full((n, nm), -0.25)

    def make(mod):
        fr, fz = mod.face_fluxes(phi, r, hr, hz)
        ur, uz = mod.velocity_from_stream(phi, r, hr, hz)
        return {
            "radial_operator": lambda: mod.radial_operator(q, r, hr, hz, 3.0, 0.0, 1.0, 2),
            "transport_rhs": lambda: mod.transport_rhs(q, phi, r, hr, hz, 0.01, HYBRID),
            "advection_divergence": lambda: mod.advection_divergence(q, fr, fz, r, hr, hz, 0.01, HYBRID),
            "velocity_from_stream": lambda: mod.velocity_from_stream(phi, r, hr, hz),
            "divergence": lambda: mod.divergence(ur, uz, r, hr, hz),
            "ssp_combine": lambda: mod.ssp_combine(0.75, q, 0.25, phi, 0.01, q),
            "tridiag_solve": lambda: mod.tridiag_solve(lower, cp, inv_den, rhs),
        }

    return make


def bench_kernels(sizes, repeat):
    rng = np.random.default_rng(0)
    backends = [("numpy", _numpy)] + ([("numba", _numba)] if _numba is not None else [])
    print(f"{'kernel':<22}{'n':>6}" + "".join(f"{name + ' [us]':>14}" for name, _ in backends) + f"{'speedup':>10}")
    for n in sizes:
        make = _cases(n, rng)
        tables = {name: make(mod) for name, mod in backends}
        for kernel in tables["numpy"]:
            times = []
            for name, _ in backends:
                fn = tables[name][kernel]
                fn()  # warm-up, triggers compilation
                times.append(min(timeit.repeat(fn, number=1, repeat=repeat)) * 1e6)
            speed = f"{times[0] / times[1]:>9.1f}x" if len(times) > 1 else ""
            print(f"{kernel:<22}{n:>6}" + "".join(f"{t:>14.1f}" for t in times) + speed)


def bench_run(n, t_end):
    code = RUN_SNIPPET.format(n=n, t_end=t_end)
    print(f"\nend-to-end ring run, {n}^2, t_end={t_end}")
    for flag in ("0", "1"):
        env = dict(os.environ, CYLFLOW_NUMBA=flag)
        out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
        backend, secs, rows = out.stdout.split()
        print(f"  {backend:<6} {float(secs):8.2f} s  ({rows} samples)")


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[64, 128, 256])
    ap.add_argument("--repeat", type=int, default=10)
    ap.add_argument("--run-n", type=int, default=128)
    ap.add_argument("--run-t-end", type=float, default=0.05)
    ap.add_argument("--no-run", action="store_true", help="skip the end-to-end comparison")
    args = ap.parse_args(argv)
    bench_kernels(args.sizes, args.repeat)
    if not args.no_run:
        bench_run(args.run_n, args.run_t_end)


if __name__ == "__main__":
    main()
