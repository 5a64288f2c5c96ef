"""Time the compiled kernels against the pure-Python fallback.

    python benchmarks/bench_kernels.py [--repeat N]

Also times the finite-difference reference solver with each backend forced through
``HJFRONT_PURE_PYTHON``.
"""

import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from hjfront import kernels


def _cases(rng):
    n = 400
    x = np.cumsum(rng.uniform(0.01, 1, n))
    y = rng.normal(size=n)

    nl = nr = 200
    pl, pr = np.sort(rng.normal(size=nl)), np.sort(rng.normal(size=nr))
    hl, hr = rng.uniform(0, 1, nl), rng.uniform(0, 1, nr)
    okl, okr = rng.random(nl) < 0.7, rng.random(nr) < 0.7
    tl, tr = np.zeros(nl, bool), np.zeros(nr, bool)
    tl[nl // 2] = tr[nr // 2] = True
    mj = (pl, hl, okl | tl, tl, np.argsort(hl, kind="stable"),
          pr, hr, okr | tr, tr, np.argsort(hr, kind="stable"), 1e-10)

    m = 4000
    u = rng.uniform(-1, 1, m)
    H = 2 - np.sqrt(1 + u * u)
    alpha = np.ones(m)
    iface = np.full(m - 1, np.nan)
    iface[m // 2] = 0.3
    F = kernels.godunov_fluxes(u, H, alpha, iface, impl=kernels.backends()["python"])
    return {
        "hull_indices(n=400)": lambda impl: kernels.hull_indices(x, y, True, impl=impl),
        "min_jump_pair(200x200)": lambda impl: kernels.min_jump_pair(*mj, impl=impl),
        "godunov_fluxes(n=4000)": lambda impl: kernels.godunov_fluxes(u, H, alpha, iface, impl=impl),
        "conservative_update(n=4000)": lambda impl: kernels.conservative_update(u, F, 0.3, impl=impl),
    }


def _fd_time(pure: bool) -> float:
    env = dict(os.environ, HJFRONT_PURE_PYTHON="1" if pure else "0")
    code = ("import time\nfrom hjfront import config, verify\n"
            "cfg = config.load('builtin:interface')\n"
            "p0, a, g, _, _ = cfg.coefficients()\n"
            "fc = verify.FDOracleConfig(0.002, 0.4)\n"
            "t0 = time.perf_counter(); verify.fd_oracle(p0, a, g, cfg.model, fc, cfg.horizon, window=cfg.domain)\n"
            "print(time.perf_counter() - t0)")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    return float(out.stdout.strip())


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=20)
    args = ap.parse_args(argv)
    impls = kernels.backends()
    if "compiled" not in impls:
        print("compiled extension not built; only the python backend is available")
    cases = _cases(np.random.default_rng(0))
    print(f"{'kernel':30s} " + " ".join(f"{k:>12s}" for k in impls) + "   speedup")
    for name, fn in cases.items():
        times = {k: min(timeit.repeat(lambda: fn(m), number=1, repeat=args.repeat)) for k, m in impls.items()}
        sp = times["python"] / times["compiled"] if "compiled" in times else float("nan")
        print(f"{name:30s} " + " ".join(f"{times[k] * 1e3:10.3f}ms" for k in impls) + f"   {sp:7.1f}x")
    tp, tc = _fd_time(True), _fd_time(False)
    print(f"{'fd oracle interface dx=0.002':30s} python {tp:.3f}s compiled {tc:.3f}s   {tp / tc:7.1f}x")


if __name__ == "__main__":
    main()
