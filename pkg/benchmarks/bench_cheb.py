"""Compare the compiled and pure-Python Chebyshev recurrence.

    python benchmarks/bench_cheb.py [--sizes 1000,5000,20000] [--degree 30] [--cols 2]
"""
import argparse
import json

from fracheat.bench import bench_cheb


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--sizes", default="1000,5000,20000")
    ap.add_argument("--degree", type=int, default=30)
    ap.add_argument("--cols", type=int, default=2)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    print(f"{'n':>7} {'nnz':>9} {'compiled ms':>12} {'python ms':>10} {'speedup':>8}")
    rows = []
    for n in map(int, args.sizes.split(",")):
        r = bench_cheb(n, args.degree, args.cols, args.repeat)
        b = r["backends"]
        rows.append(r)
        comp = b.get("compiled", float("nan")) * 1e3
        print(f"{n:>7} {r['nnz']:>9} {comp:>12.2f} {b['python'] * 1e3:>10.2f} {r.get('speedup', float('nan')):>8.2f}")
    with open("bench_cheb.json", "w") as fh:
        json.dump(rows, fh, indent=2)


if __name__ == "__main__":
    main()
