"""Write a synthetic drum recording, its isolated hits and reference onsets.

The output directory doubles as a kit for run_tables.py:

    python3 scripts/synthetic_demo.py demo/kit
    pfnmf dict --hit kick demo/kit/hits/kick.wav ... --out demo/drums.dict
"""

import argparse
from pathlib import Path

from pfnmf.audio import write_wav
from pfnmf.onsets import write_annotations
from pfnmf.synthetic import drum_track


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("out_dir")
    ap.add_argument("--tracks", type=int, default=1)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--duration", type=float, default=30.0)
    ap.add_argument("--onsets", type=int, default=60)
    ap.add_argument("--background", type=float, default=0.2, help="background/drum Frobenius ratio")
    args = ap.parse_args()

    out = Path(args.out_dir)
    for sub in ("hits", "tracks", "annotations"):
        (out / sub).mkdir(parents=True, exist_ok=True)
    for i in range(args.tracks):
        tr = drum_track(seed=args.seed + i, duration=args.duration, n_onsets=args.onsets,
                        background_ratio=args.background)
        name = f"track{i:02d}"
        write_wav(out / "tracks" / f"{name}.wav", tr.audio, bits=16)
        write_annotations(out / "annotations" / f"{name}.txt", tr.onsets)
    for label, hit in tr.hits.items():
        write_wav(out / "hits" / f"{label}.wav", hit, bits=16)
    print(f"wrote {args.tracks} track(s) and {len(tr.hits)} hits under {out}")


if __name__ == "__main__":
    main()
