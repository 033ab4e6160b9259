"""Compare the compiled and pure-Python RK4 kernels.

    python3 benchmarks/bench_kernels.py --sizes 10 49 149 --steps 200

Reports microseconds per RK4 step for the lattice kernel on each grid size
and for the five-oscillator kernel, plus the largest difference between the
two backends' end states.
"""
import argparse
import time

import numpy as np

from freqspiral import kernels
from freqspiral.lattice import GridSpec, build_normal_frequencies, init_random_phases
from freqspiral.minimal import equilibrium_at_zero


def time_call(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def bench_lattice(backend, size, steps, repeat, periodic):
    kernels.use_backend(backend)
    spec = GridSpec(size, size, "periodic" if periodic else "free")
    theta0 = init_random_phases(spec, 1).theta
    omega = build_normal_frequencies(spec, 1).omega
    state = {}

    def run():
        y = np.array(theta0)
        kernels.lattice_steps(y, omega, 1.0, 0.125, steps, periodic)
        state["y"] = y
    secs = time_call(run, repeat)
    return 1e6 * secs / steps, state["y"]


def bench_minimal(backend, steps, repeat):
    kernels.use_backend(backend)
    y0 = equilibrium_at_zero().as_array()
    state = {}

    def run():
        y = y0.copy()
        kernels.minimal_steps(y, 0.25, 1 + 2 ** 0.5, 0.125, steps)
        state["y"] = y
    secs = time_call(run, repeat)
    return 1e6 * secs / steps, state["y"]


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    parser.add_argument("--sizes", type=int, nargs="+", default=[10, 49, 149])
    parser.add_argument("--steps", type=int, default=200)
    parser.add_argument("--minimal-steps", type=int, default=20000)
    parser.add_argument("--repeat", type=int, default=3)
    parser.add_argument("--periodic", action="store_true")
    args = parser.parse_args(argv)

    backends = kernels.available_backends()
    previous = kernels.active_backend()
    if "compiled" in backends:
        from freqspiral import _kernels
        print(f"compiled kernel built with vectorized sin: {bool(_kernels.vectorized_sin())}")
    else:
        print("compiled kernel not built; timing the Python backend only")

    header = f"{'case':<18}" + "".join(f"{b + ' us/step':>20}" for b in backends)
    if len(backends) > 1:
        header += f"{'speedup':>10}{'max |diff|':>13}"
    print(header)
    try:
        cases = [(f"lattice {n}x{n}", lambda b, n=n: bench_lattice(b, n, args.steps, args.repeat,
                                                                  args.periodic))
                 for n in args.sizes]
        cases.append(("minimal model", lambda b: bench_minimal(b, args.minimal_steps, args.repeat)))
        for label, fn in cases:
            results = {b: fn(b) for b in backends}
            line = f"{label:<18}" + "".join(f"{results[b][0]:>20.2f}" for b in backends)
            if len(backends) > 1:
                c, p = results["compiled"], results["python"]
                diff = float(np.max(np.abs(c[1] - p[1])))
                line += f"{p[0] / c[0]:>9.1f}x{diff:>13.1e}"
            print(line)
    finally:
        kernels.use_backend(previous)


if __name__ == "__main__":
    main()
