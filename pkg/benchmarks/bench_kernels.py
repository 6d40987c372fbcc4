"""Time the compiled kernels against the pure-Python fallback.

Usage: python3 benchmarks/bench_kernels.py [--repeat N] [--json-out FILE]
"""

from __future__ import annotations

import argparse
import json
import timeit

from pfnormal import _kernels_py

try:
    from pfnormal import _kernels as _compiled
except ImportError:  # extension not built
    _compiled = None

CASES = {
    "carlson_rf": lambda k: k.carlson_rf(0.3 + 0.1j, 1.2, 2.5 - 0.4j, 1e-15, 200),
    "agm": lambda k: k.agm(1.0, 0.37, 1e-15, 200),
    "hyp2f1_halves": lambda k: k.hyp2f1_halves(0.42 + 0.05j, 1e-15, 2000),
    "pvi_rhs": lambda k: k.pvi_rhs(0.5 + 0.01j, 1.3, 0.4, 0.125, -0.125, 0.125, 0.375),
}


def per_call(fn, kernels, repeat: int) -> float:
    number = 2000
    return min(timeit.repeat(lambda: fn(kernels), number=number, repeat=repeat)) / number


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--json-out")
    args = ap.parse_args()

    rows = {}
    print(f"{'kernel':<16}{'python us':>12}{'compiled us':>14}{'speedup':>10}")
    for name, fn in CASES.items():
        py = per_call(fn, _kernels_py, args.repeat)
        if _compiled is not None:
            c = per_call(fn, _compiled, args.repeat)
            assert abs(complex(fn(_compiled)) - complex(fn(_kernels_py))) < 1e-12
        else:
            c = float("nan")
        rows[name] = {"python_s": py, "compiled_s": c, "speedup": py / c}
        print(f"{name:<16}{py * 1e6:>12.2f}{c * 1e6:>14.2f}{py / c:>10.1f}")
    if args.json_out:
        with open(args.json_out, "w") as fh:
            json.dump(rows, fh, sort_keys=True, indent=2)


if __name__ == "__main__":
    main()
