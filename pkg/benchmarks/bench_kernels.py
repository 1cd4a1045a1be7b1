"""Compare the compiled and pure-Python kernels on the intrinsic-information hot loop.

Run with ``python3 benchmarks/bench_kernels.py``. Both backends must agree to 1e-12.
"""
import argparse
import time

import numpy as np

from qsecret._backend import BACKENDS, get_kernels
from qsecret.infotheory import ClassicalChannel, refine_channel


def timed(fn, repeat):
    best = np.inf
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--channels", type=int, default=100_000)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    rng = np.random.default_rng(args.seed)
    p = rng.dirichlet(np.ones(27)).reshape(3, 3, 3)
    chs = rng.dirichlet(np.ones(3), size=(args.channels, 3))
    start = ClassicalChannel.random(3, 3, np.random.default_rng(args.seed + 1))

    print(f"available backends: {sorted(BACKENDS)}")
    results = {}
    for name in sorted(BACKENDS):
        k = get_kernels(name)
        t_batch, vals = timed(lambda: k.channel_cmi_batch(p, chs), args.repeat)
        t_ref, res = timed(lambda: refine_channel(p, start.matrix, kernels=k), args.repeat)
        results[name] = (vals, res[1])
        print(f"{name:>7}: batch CMI over {args.channels} channels {t_batch * 1e3:9.2f} ms | "
              f"refine_channel {t_ref * 1e3:9.2f} ms")
    if len(results) == 2:
        (va, ra), (vb, rb) = results.values()
        print(f"max batch disagreement: {np.max(np.abs(va - vb)):.2e}; "
              f"refined value disagreement: {abs(ra - rb):.2e}")


if __name__ == "__main__":
    main()
