"""Compiled vs pure-numpy timing for the hot kernels, plus an end-to-end run.

    python3 benchmarks/bench_kernels.py [--repeat 5] [--skip-sim]

Kernel timings use ``func.py_func`` for the uncompiled path in the same
process (helpers called from inside a kernel stay compiled there).  The
end-to-end comparison runs a 10 s S2 scenario in two subprocesses, one with
``EQOBS_DISABLE_JIT=1``.
"""

import argparse
import os
import subprocess
import sys
import tempfile
import textwrap
import time

import numpy as np

from eqobs import kernels
from eqobs._accel import JIT_ENABLED


def _best(fn, args, repeat):
    fn(*args)  # warm-up (compilation)
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        times.append(time.perf_counter() - t0)
    return min(times)


def _loop(kernel, inputs):
    def run(*_):
        for x in inputs:
            kernel(x)
    return run


def kernel_table(repeat):
    rng = np.random.default_rng(0)
    ws = rng.normal(size=(2000, 3))
    rs = kernels.so3_exp_batch(ws * 0.5)
    xis = rng.normal(size=(500, 6))
    mats = [kernels.so3_hat(w) for w in ws[:200]]
    cases = [
        ("so3_exp x2000", _loop(kernels.so3_exp, ws), _loop(kernels.so3_exp.py_func, ws)),
        ("so3_log x2000", _loop(kernels.so3_log, rs), _loop(kernels.so3_log.py_func, rs)),
        ("se3_exp x500", _loop(kernels.se3_exp, xis), _loop(kernels.se3_exp.py_func, xis)),
        ("expm_taylor x200", _loop(kernels.expm_taylor, mats), _loop(kernels.expm_taylor.py_func, mats)),
        ("so3_exp_batch 2000", lambda: kernels.so3_exp_batch(ws), lambda: kernels.so3_exp_batch.py_func(ws)),
        ("so3_compose_batch 2000", lambda: kernels.so3_compose_batch(rs, rs),
         lambda: kernels.so3_compose_batch.py_func(rs, rs)),
    ]
    print(f"numba active: {JIT_ENABLED}")
    print(f"{'kernel':<24}{'jit [ms]':>12}{'numpy [ms]':>12}{'speedup':>10}")
    for name, fast, slow in cases:
        tf, ts = _best(fast, (), repeat), _best(slow, (), repeat)
        print(f"{name:<24}{tf * 1e3:>12.3f}{ts * 1e3:>12.3f}{ts / tf:>10.1f}")


SCENARIO = textwrap.dedent("""\
    system = "s2_direction"
    t_end = 10.0
    dt = 0.01
    seed = 3
    [truth]
    state = [0.0, 0.6, 0.8]
    [velocity]
    kind = "sinusoid"
    amplitude = [0.5, 0.5, 0.5]
    frequency = 0.2
    [observer]
    initial = [0.0, 0.0, 1.0]
    """)

_SIM = ("import sys,time;from eqobs.scenario import load_scenario,run_simulation;"
        "s=load_scenario(sys.argv[1]);run_simulation(s);t=time.perf_counter();"
        "run_simulation(s);print(time.perf_counter()-t)")


def simulation_table():
    with tempfile.TemporaryDirectory() as tmp:
        path = os.path.join(tmp, "bench.toml")
        with open(path, "w") as fh:
            fh.write(SCENARIO)
        out = {}
        for label, flag in (("jit", "0"), ("numpy", "1")):
            env = dict(os.environ, EQOBS_DISABLE_JIT=flag)
            res = subprocess.run([sys.executable, "-c", _SIM, path], env=env,
                                 capture_output=True, text=True, check=True)
            out[label] = float(res.stdout.strip())
    print(f"simulate 1000 steps: jit {out['jit']:.3f} s, numpy {out['numpy']:.3f} s, "
          f"ratio {out['numpy'] / out['jit']:.2f}")


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--skip-sim", action="store_true")
    args = ap.parse_args()
    kernel_table(args.repeat)
    if not args.skip_sim:
        simulation_table()


if __name__ == "__main__":
    main()
