"""Time the numba and numpy paths of each kernel on the same inputs.

Run with ``python3 benchmarks/bench_kernels.py``. Both paths must agree before
any timing is reported.
"""

from __future__ import annotations

import argparse
import timeit

import numpy as np

from deenkit import _kernels as k


def _inputs(seed: int):
    rng = np.random.default_rng(seed)
    codes = rng.integers(32, 0x0700, size=4000, dtype=np.uint32)
    a = rng.integers(0x0621, 0x064A, size=300, dtype=np.uint32)
    b = rng.integers(0x0621, 0x064A, size=300, dtype=np.uint32)
    jd = 2451545.0 + rng.uniform(-9000, 9000, size=20000)
    return codes, a, b, jd


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--seed", type=int, default=7)
    args = parser.parse_args()
    if not k.NUMBA_AVAILABLE:
        raise SystemExit("numba is not installed; nothing to compare")

    codes, a, b, jd = _inputs(args.seed)
    cases = {
        "trigram_counts": (lambda: k._trigram_counts_np(codes, 256), lambda: k._trigram_counts_nb(codes, 256)),
        "levenshtein": (lambda: k._levenshtein_np(a, b), lambda: k._levenshtein_nb(a, b)),
        "sun_position": (lambda: k._sun_position_np(jd), lambda: k._sun_position_nb(jd)),
    }
    print(f"{'kernel':<16}{'numpy ms':>12}{'numba ms':>12}{'speedup':>10}")
    for name, (np_fn, nb_fn) in cases.items():
        ref, got = np_fn(), nb_fn()  # also triggers compilation
        if isinstance(ref, tuple):
            assert all(np.allclose(r, g, rtol=0, atol=1e-9) for r, g in zip(ref, got)), name
        else:
            assert np.array_equal(np.asarray(ref), np.asarray(got)), name
        t_np = min(timeit.repeat(np_fn, number=1, repeat=args.repeat)) * 1e3
        t_nb = min(timeit.repeat(nb_fn, number=1, repeat=args.repeat)) * 1e3
        print(f"{name:<16}{t_np:>12.3f}{t_nb:>12.3f}{t_np / t_nb:>9.1f}x")


if __name__ == "__main__":
    main()
