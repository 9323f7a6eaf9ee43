"""Plot squared Frobenius error against elapsed time from a `pfnmf bench` CSV."""

import argparse
import csv
from collections import defaultdict

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("bench_csv")
    ap.add_argument("--out", default="convergence.png")
    ap.add_argument("--x", choices=["elapsed_seconds", "budget_units"], default="elapsed_seconds")
    args = ap.parse_args()

    series = defaultdict(lambda: ([], []))
    with open(args.bench_csv, newline="") as fh:
        for row in csv.DictReader(fh):
            xs, ys = series[row["solver"]]
            xs.append(float(row[args.x]))
            ys.append(float(row["squared_frobenius_error"]))

    fig, ax = plt.subplots(figsize=(5, 3.5))
    for solver, (xs, ys) in sorted(series.items()):
        ax.plot(xs, ys, marker=".", label=solver.upper() if solver == "mur" else "NeNMF")
    ax.set_xlabel(args.x.replace("_", " "))
    ax.set_ylabel("squared Frobenius error")
    ax.set_yscale("log")
    ax.legend()
    fig.tight_layout()
    fig.savefig(args.out, dpi=150)
    print(f"saved {args.out}")


if __name__ == "__main__":
    main()
