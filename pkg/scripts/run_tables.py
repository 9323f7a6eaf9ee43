"""Score MUR against NeNMF on one or more kit directories and print both tables.

Each kit holds hits/<label>.wav, tracks/<name>.wav and annotations/<name>.txt.
"""

import argparse

from pfnmf.experiments import format_tables, run_kit, score_tables
from pfnmf.mur import MurConfig
from pfnmf.nenmf import NenmfConfig, OgmConfig
from pfnmf.onsets import MedianThresholdConfig


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("kits", nargs="+")
    ap.add_argument("--name", default="dataset", help="row label for the top-k table")
    ap.add_argument("--mur-iters", type=int, default=100)
    ap.add_argument("--nenmf-iters", type=int, default=10)
    ap.add_argument("--inner", type=int, default=10)
    ap.add_argument("--rank-h", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--median-window", type=float, default=0.1)
    args = ap.parse_args()

    kwargs = dict(rank_h=args.rank_h, seed=args.seed, mur=MurConfig(args.mur_iters),
                  nenmf=NenmfConfig(args.nenmf_iters, OgmConfig(inner_iterations=args.inner)),
                  median=MedianThresholdConfig(window_seconds=args.median_window))
    results = []
    for kit in args.kits:
        results += run_kit(kit, **kwargs)
    print(format_tables(score_tables(results), args.name))


if __name__ == "__main__":
    main()
