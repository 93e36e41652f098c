"""Compare the compiled kernels with the pure-Python fallback.

    python3 benchmarks/bench_kernels.py [--repeat N]

Kernel timings call both modules directly; the end-to-end timings run the
homology of a few diagrams in subprocesses with and without
KHOVANOV_ZC_PURE=1.
"""

import argparse
import os
import random
import subprocess
import sys
import timeit

from khovanov_zc import _pykernels
from khovanov_zc.complex import build_complex
from khovanov_zc.diagram import from_braid

try:
    from khovanov_zc import _ckernels
except ImportError:
    _ckernels = None


def random_rows(rng, nr, nc, density=0.3):
    """Random entries that need not be monomials."""
    rows = {}
    for i in range(nr):
        r = {j: rng.choice((1, 1, 2, 3)) for j in range(nc) if rng.random() < density}
        if r:
            rows[i] = r
    return rows


def largest_differential():
    cx = build_complex(from_braid([1, -2, 1, -2, 1, -2, 1], 3))
    i = max(cx.differential, key=lambda i: cx.differential[i].nnz())
    m = cx.differential[i]
    return m.rows, m.ncols


def kernel_cases(rng):
    a = random_rows(rng, 80, 80)
    b = random_rows(rng, 80, 80)
    # general entries swell under elimination, so keep the random case small
    m = random_rows(rng, 20, 20)
    d, ncols = largest_differential()
    words = [(rng.getrandbits(24), rng.getrandbits(24)) for _ in range(2000)]
    return {
        "clmul x2000": lambda k: [k.clmul(x, y) for x, y in words],
        "sparse_matmul 80x80": lambda k: k.sparse_matmul(a, b),
        "eliminate random 20x20": lambda k: k.eliminate({i: dict(r) for i, r in m.items()}, 20),
        f"eliminate d ({len(d)} rows)": lambda k: k.eliminate({i: dict(r) for i, r in d.items()}, ncols),
    }


END_TO_END = """
from khovanov_zc import load_fixture, build_complex, homology, run_counterexample
from khovanov_zc.diagram import from_braid
for name in ("figure_eight", "trefoil_right"):
    homology(build_complex(load_fixture(name)))
homology(build_complex(from_braid([1, -2, 1, -2, 1, -2, 1], 3)))
run_counterexample()
"""


def end_to_end(pure: bool, repeat: int) -> float:
    env = dict(os.environ)
    if pure:
        env["KHOVANOV_ZC_PURE"] = "1"
    else:
        env.pop("KHOVANOV_ZC_PURE", None)
    best = float("inf")
    for _ in range(repeat):
        start = timeit.default_timer()
        subprocess.run([sys.executable, "-c", END_TO_END], env=env, check=True)
        best = min(best, timeit.default_timer() - start)
    return best


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--repeat", type=int, default=3)
    args = p.parse_args(argv)
    impls = [("python", _pykernels)] + ([("cython", _ckernels)] if _ckernels else [])
    if _ckernels is None:
        print("compiled kernels not built; timing the fallback only")
    cases = kernel_cases(random.Random(0))
    print(f"{'case':24s}" + "".join(f"{name:>12s}" for name, _ in impls) + ("     speedup" if len(impls) == 2 else ""))
    for title, fn in cases.items():
        times = [min(timeit.repeat(lambda: fn(k), number=5, repeat=args.repeat)) / 5 for _, k in impls]
        line = f"{title:24s}" + "".join(f"{t * 1e3:10.2f}ms" for t in times)
        if len(times) == 2:
            line += f"{times[0] / times[1]:11.1f}x"
        print(line, flush=True)
    py = end_to_end(True, args.repeat)
    line = f"{'end to end':24s}{py * 1e3:10.0f}ms"
    if _ckernels is not None:
        cy = end_to_end(False, args.repeat)
        line += f"{cy * 1e3:10.0f}ms{py / cy:11.1f}x"
    print(line)


if __name__ == "__main__":
    main()
