"""Compare the compiled and pure-Python kernels on identical workloads.

Both backends draw the same RNG stream, so each scenario is first checked
for bit-identical results and then timed separately.  Run from the repo
root:

    python3 benchmarks/bench_backends.py [--quick]
"""

import argparse
import time

import numpy as np

import ofclimb._kernels_py as py_kernels
from ofclimb.core import Coloring, edge_tables
from ofclimb._rng import stream

try:
    import ofclimb._kernels as cy_kernels
except ImportError:
    cy_kernels = None


def fresh_state(module, n: int, seed: int):
    tab = edge_tables(n)
    colors = np.empty(tab.n_edges, dtype=np.int32)
    rng = stream(seed)
    module.fill_random_colors(colors, n - 1, rng.bit_generator)
    prof = Coloring(n, colors.copy()).profile
    return colors, prof.counts.copy(), prof.psi, rng


def time_walk(module, n: int, seed: int, mode: int, reps: int):
    tab = edge_tables(n)
    total_steps = 0
    t0 = time.perf_counter()
    for rep in range(reps):
        colors, counts, psi, rng = fresh_state(module, n, seed + rep)
        budget = 10**7
        while True:
            steps, psi, code = module.walk_phase(
                colors, counts, tab.u, tab.v, psi, mode, budget,
                rng.bit_generator)
            total_steps += steps
            if code != module.PHASE_LIMIT:
                break
        assert code in (module.PHASE_REACHED, module.PHASE_STUCK)
    return time.perf_counter() - t0, total_steps


def time_metropolis(module, n: int, seed: int, steps: int):
    tab = edge_tables(n)
    colors, counts, psi, rng = fresh_state(module, n, seed)
    t0 = time.perf_counter()
    out = module.metropolis_phase(colors, counts, tab.u, tab.v, psi, 0.5,
                                  steps, rng.bit_generator)
    return time.perf_counter() - t0, out


def check_identical(n: int, seed: int, mode: int):
    """Both kernels must produce the same trajectory from the same stream."""
    tab = edge_tables(n)
    results = []
    for module in (py_kernels, cy_kernels):
        colors, counts, psi, rng = fresh_state(module, n, seed)
        out = module.walk_phase(colors, counts, tab.u, tab.v, psi, mode,
                                5000, rng.bit_generator)
        results.append((out, colors.copy()))
    (out_a, col_a), (out_b, col_b) = results
    assert out_a == out_b, f"status mismatch: {out_a} vs {out_b}"
    assert np.array_equal(col_a, col_b), "colorings diverged"


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--quick", action="store_true",
                        help="smaller reps for a fast sanity pass")
    args = parser.parse_args()

    if cy_kernels is None:
        print("compiled kernels not built; nothing to compare "
              "(pip install -e . rebuilds them)")
        return

    scale = 0.1 if args.quick else 1.0
    print(f"{'scenario':38s} {'python':>10s} {'cython':>10s} {'speedup':>8s}")

    for n, mode, label, reps in (
            (8, py_kernels.MODE_MILD, "mild walk to OF, n=8", 200),
            (16, py_kernels.MODE_MILD, "mild walk to OF, n=16", 30),
            (8, py_kernels.MODE_STRICT, "strict walk to dead end, n=8", 200),
            (16, py_kernels.MODE_STRICT, "strict walk to dead end, n=16", 30),
    ):
        check_identical(n, 1000 + n + mode, mode)
        reps = max(1, int(reps * scale))
        t_py, steps_py = time_walk(py_kernels, n, 2000, mode, reps)
        t_cy, steps_cy = time_walk(cy_kernels, n, 2000, mode, reps)
        assert steps_py == steps_cy
        print(f"{label:38s} {t_py:9.3f}s {t_cy:9.3f}s {t_py / t_cy:7.1f}x")

    steps = int(2_000_000 * scale)
    t_py, out_py = time_metropolis(py_kernels, 4, 3000, steps)
    t_cy, out_cy = time_metropolis(cy_kernels, 4, 3000, steps)
    assert out_py == out_cy
    label = f"metropolis eps=0.5, n=4, {steps} steps"
    print(f"{label:38s} {t_py:9.3f}s {t_cy:9.3f}s {t_py / t_cy:7.1f}x")

    steps = int(500_000 * scale)
    t_py, out_py = time_metropolis(py_kernels, 12, 3001, steps)
    t_cy, out_cy = time_metropolis(cy_kernels, 12, 3001, steps)
    assert out_py == out_cy
    label = f"metropolis eps=0.5, n=12, {steps} steps"
    print(f"{label:38s} {t_py:9.3f}s {t_cy:9.3f}s {t_py / t_cy:7.1f}x")


if __name__ == "__main__":
    main()
