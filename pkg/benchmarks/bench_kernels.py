"""Compare the compiled and numpy Euler-Maruyama kernels.

    python3 benchmarks/bench_kernels.py --paths 200 --steps 2000

Both backends run on identical increments; the script checks they agree
and prints wall-clock time per backend (compile time excluded by a warm-up).
"""

import argparse
import time

import numpy as np

from itosym import kernels
from itosym.paths import sample_paths, stack_increments, uniform_grid
from itosym.symmetry import DEFAULT_X0, FAMILIES, make_family


def bench(tag, paths, steps, repeat, seed):
    fam = make_family(tag)
    eq = fam.equation
    t = uniform_grid(1.0, 1.0 / steps)
    dw = stack_increments(sample_paths(len(fam.noises), t, seed, paths))
    dt = np.diff(t)
    x0 = DEFAULT_X0[tag]
    results = {}
    backends = ["numpy"] + (["numba"] if kernels.numba_active() else [])
    for be in backends:
        kernels.euler_maruyama_batch(eq.drift, eq.noise_fns, x0, dt[:2], dw[:1, :, :2], eq.domain, be)
        best = np.inf
        for _ in range(repeat):
            t0 = time.perf_counter()
            states, _ = kernels.euler_maruyama_batch(eq.drift, eq.noise_fns, x0, dt, dw, eq.domain, be)
            best = min(best, time.perf_counter() - t0)
        results[be] = (best, states)
    line = f"{tag:3s} paths={paths} steps={steps}"
    for be, (sec, _) in results.items():
        line += f"  {be}={sec * 1e3:8.2f} ms"
    if len(results) == 2:
        a, b = results["numpy"][1], results["numba"][1]
        diff = np.nanmax(np.abs(a - b))
        line += f"  speedup={results['numpy'][0] / results['numba'][0]:6.1f}x  max|diff|={diff:.1e}"
    print(line)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--paths", type=int, default=200)
    ap.add_argument("--steps", type=int, default=2000)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--family", choices=sorted(FAMILIES), action="append")
    args = ap.parse_args()
    if not kernels.numba_active():
        print("numba unavailable or disabled; timing the numpy kernel only")
    for tag in args.family or sorted(FAMILIES):
        bench(tag, args.paths, args.steps, args.repeat, args.seed)


if __name__ == "__main__":
    main()
