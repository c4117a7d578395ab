"""Benchmark the compiled kernels against the numpy fallback.

Run:  python benchmarks/bench_kernels.py
Shapes cover the two cases that dominate training runs: single-observation
forward passes during action selection, and minibatch forward/backward
passes during learning.
"""

import os
import time

os.environ.setdefault("OPENBLAS_NUM_THREADS", "1")
os.environ.setdefault("OMP_NUM_THREADS", "1")

import numpy as np

from cyclerl.nn import _pykernels, mlp

try:
    from cyclerl import _kernels
except ImportError:
    _kernels = None


def timeit(fn, min_seconds=0.4):
    fn()
    n = 1
    while True:
        t0 = time.perf_counter()
        for _ in range(n):
            fn()
        dt = time.perf_counter() - t0
        if dt > min_seconds:
            return dt / n
        n = max(n + 1, int(n * min_seconds / max(dt, 1e-9)))


CASES = [
    ("policy 64-64 tanh, act (n=1)", (6, (64, 64), 2, "tanh"), 1),
    ("policy 64-64 tanh, minibatch 25", (6, (64, 64), 2, "tanh"), 25),
    ("value 64-64 tanh, batch 500", (6, (64, 64), 1, "tanh"), 500),
    ("critic 256-256 relu, act (n=1)", (5, (256, 256), 1, "relu"), 1),
    ("critic 256-256 relu, minibatch 256", (5, (256, 256), 1, "relu"), 256),
]


def main():
    rng = np.random.default_rng(0)
    impls = [("python", _pykernels)]
    if _kernels is not None:
        impls.append(("compiled", _kernels))
    else:
        print("compiled kernels not built; benchmarking the fallback only")

    header = f"{'case':40s} {'pass':8s}" + "".join(f"{name:>12s}" for name, _ in impls)
    print(header)
    print("-" * len(header))
    for label, (din, hidden, dout, act), n in CASES:
        spec = mlp.MlpSpec(din, hidden, dout, act)
        params = mlp.init_params(spec, rng)
        x = np.ascontiguousarray(rng.normal(size=(n, din)))
        gy = np.ascontiguousarray(rng.normal(size=(n, dout)))
        fwd_times = []
        bwd_times = []
        for _, impl in impls:
            acts = impl.mlp_forward(spec.dims, spec.act_code, params, x)
            fwd_times.append(timeit(
                lambda impl=impl: impl.mlp_forward(spec.dims, spec.act_code, params, x)))
            bwd_times.append(timeit(
                lambda impl=impl, acts=acts: impl.mlp_backward(
                    spec.dims, spec.act_code, params, acts, gy)))
        print(f"{label:40s} {'forward':8s}"
              + "".join(f"{t * 1e6:10.1f}us" for t in fwd_times))
        print(f"{'':40s} {'backward':8s}"
              + "".join(f"{t * 1e6:10.1f}us" for t in bwd_times))

    # adam on a realistic parameter-vector size
    size = mlp.MlpSpec(5, (256, 256), 1, "relu").param_count
    params = rng.normal(size=size)
    grad = rng.normal(size=size)
    m = np.zeros(size)
    v = np.zeros(size)
    times = []
    for _, impl in impls:
        times.append(timeit(
            lambda impl=impl: impl.adam_update(params, grad, m, v, 10,
                                               3e-4, 0.9, 0.999, 1e-8)))
    print(f"{f'adam update ({size} params)':40s} {'step':8s}"
          + "".join(f"{t * 1e6:10.1f}us" for t in times))


if __name__ == "__main__":
    main()
