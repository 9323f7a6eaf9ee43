"""Command-line interface: ``pfnmf {dict,transcribe,eval,bench}``.

Exit codes: 0 success, 1 usage/config error, 2 data error, 3 numeric failure.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import os
import sys
import warnings
from dataclasses import dataclass, field

import numpy as np

from .audio import AudioError, load_wav, stft_magnitude
from .dictionary import (DictionaryFormatError, assemble_dictionary, build_component, load_dictionary,
                         save_dictionary)
from .factor import NumericalError, random_init, read_activations, write_activations
from .mur import MurConfig, run_mur
from .nenmf import NenmfConfig, OgmConfig, run_nenmf
from .onsets import (DEFAULT_OFFSETS, AnnotationFormatError, EvalCounts, MedianThresholdConfig,
                     annotations_to_frame_counts, counts_topk, detect_median, detect_topk, f_score,
                     match_onsets, read_annotations, write_annotations)

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 1, 2, 3

BENCH_COLUMNS = ["solver", "budget_units", "elapsed_seconds", "squared_frobenius_error"]


class UsageError(Exception):
    pass


class DataError(Exception):
    pass


@dataclass
class RunConfig:
    solver: str = "nenmf"
    iterations: int | None = None   # None: 100 for mur, 10 for nenmf
    inner: int = 10
    rank_h: int = 5
    seed: int = 0
    window: int = 2048
    hop: int = 512
    epsilon: float = 1e-12
    median_window: float = 0.1
    offsets: dict = field(default_factory=lambda: dict(DEFAULT_OFFSETS))
    tolerance: float = 0.05

    def __post_init__(self):
        if self.solver not in ("mur", "nenmf"):
            raise UsageError(f"unknown solver {self.solver!r}")
        for name in ("inner", "rank_h", "window", "hop"):
            if getattr(self, name) < 1:
                raise UsageError(f"{name.replace('_', '-')} must be >= 1")
        if self.iterations is not None and self.iterations < 1:
            raise UsageError("iters must be >= 1")
        if self.window < 2 or self.hop > self.window:
            raise UsageError("need window >= 2 and hop <= window")

    @property
    def T(self) -> int:
        if self.iterations is not None:
            return self.iterations
        return 100 if self.solver == "mur" else 10

    def mur(self, T: int | None = None) -> MurConfig:
        return MurConfig(iterations=T or self.T, epsilon=self.epsilon)

    def nenmf(self, T: int | None = None) -> NenmfConfig:
        return NenmfConfig(outer_iterations=T or self.T, ogm=OgmConfig(inner_iterations=self.inner))

    def median(self) -> MedianThresholdConfig:
        return MedianThresholdConfig(self.median_window, dict(self.offsets), self.tolerance)


# option dest -> (config-file key, parser)
_OPTIONS = {
    "solver": ("solver", str),
    "iterations": ("iters", int),
    "inner": ("inner", int),
    "rank_h": ("rank-h", int),
    "seed": ("seed", int),
    "window": ("window", int),
    "hop": ("hop", int),
    "epsilon": ("epsilon", float),
    "median_window": ("median-window", float),
    "tolerance": ("tolerance", float),
}


def parse_offsets(items) -> dict:
    out = {}
    for item in items:
        label, sep, value = item.partition("=")
        if not sep or not label.strip():
            raise UsageError(f"--offset expects LABEL=COEFF, got {item!r}")
        try:
            out[label.strip()] = float(value)
        except ValueError:
            raise UsageError(f"bad offset coefficient in {item!r}") from None
    return out


def read_config_file(path) -> dict:
    """Read ``[pfnmf]`` from an INI-style file; keys are the long flag names."""
    cp = configparser.ConfigParser()
    try:
        with open(path, encoding="utf-8") as f:
            cp.read_file(f)
    except (OSError, configparser.Error) as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from exc
    if not cp.has_section("pfnmf"):
        raise UsageError(f"{path}: missing [pfnmf] section")
    sec = cp["pfnmf"]
    keys = {key: dest for dest, (key, _) in _OPTIONS.items()}
    values = {}
    for key, raw in sec.items():
        if key == "offset":
            values["offsets"] = parse_offsets(s for s in raw.split(",") if s.strip())
        elif key in keys:
            dest = keys[key]
            try:
                values[dest] = _OPTIONS[dest][1](raw)
            except ValueError:
                raise UsageError(f"{path}: bad value for {key}: {raw!r}") from None
        else:
            raise UsageError(f"{path}: unknown key {key!r}")
    return values


def resolve_config(args) -> RunConfig:
    values = read_config_file(args.config) if getattr(args, "config", None) else {}
    for dest in _OPTIONS:
        v = getattr(args, dest, None)
        if v is not None:
            values[dest] = v
    offsets = dict(DEFAULT_OFFSETS)
    offsets.update(values.pop("offsets", {}))
    offsets.update(parse_offsets(getattr(args, "offset", None) or []))
    try:
        cfg = RunConfig(offsets=offsets, **values)
        cfg.median()
        return cfg
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _spectrogram(path, cfg: RunConfig):
    return stft_magnitude(load_wav(path), cfg.window, cfg.hop)


def _load_inputs(args, cfg: RunConfig):
    d = load_dictionary(args.dict)
    expected = cfg.window // 2 + 1
    if d.bin_count != expected:
        raise UsageError(f"dictionary has {d.bin_count} bins but --window {cfg.window} gives {expected}")
    S = _spectrogram(args.song, cfg)
    return S, d


def _solve(solver: str, S, d, init, cfg: RunConfig, T: int | None = None):
    if solver == "mur":
        return run_mur(S, d, init, cfg.mur(T))
    return run_nenmf(S, d, init, cfg.nenmf(T))


def cmd_dict(args) -> int:
    cfg = resolve_config(args)
    labels = [label for label, _ in args.hit]
    if len(set(labels)) != len(labels):
        raise UsageError(f"duplicate labels: {labels}")
    columns = [build_component(_spectrogram(path, cfg)) for _, path in args.hit]
    try:
        d = assemble_dictionary(columns, labels)
    except ValueError as exc:
        raise DataError(str(exc)) from exc
    save_dictionary(d, args.out)
    print(f"bins={d.bin_count} components={d.rank} labels={','.join(d.labels)}")
    return EXIT_OK


def write_trace(path, rows) -> None:
    with open(path, "w", encoding="utf-8", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(BENCH_COLUMNS)
        w.writerows(rows)


def read_trace(path) -> list[dict]:
    with open(path, encoding="utf-8", newline="") as f:
        reader = csv.DictReader(f)
        if reader.fieldnames != BENCH_COLUMNS:
            raise DataError(f"{path}: unexpected header {reader.fieldnames}")
        return [{"solver": r["solver"], "budget_units": int(r["budget_units"]),
                 "elapsed_seconds": float(r["elapsed_seconds"]),
                 "squared_frobenius_error": float(r["squared_frobenius_error"])} for r in reader]


def _trace_rows(solver: str, trace, units_per_iter: int):
    # the CSV reports ||V - WH||_F^2, i.e. twice the internal half-norm loss
    return [[solver, it * units_per_iter, repr(el), repr(2.0 * ls)]
            for it, ls, el in zip(trace.iterations, trace.losses, trace.elapsed)]


def cmd_transcribe(args) -> int:
    cfg = resolve_config(args)
    S, d = _load_inputs(args, cfg)
    init = random_init(S.bin_count, S.frame_count, d.rank, cfg.rank_h, cfg.seed)
    state, trace = _solve(cfg.solver, S, d, init, cfg)

    prefix = args.out
    act_path = f"{prefix}_activations.csv"
    write_activations(act_path, state.H_D, d.labels, S.time_resolution)
    print(f"{cfg.solver}: {S.frame_count} frames at {S.time_resolution:.6f} s, "
          f"loss {trace.losses[0]:.6g} -> {trace.losses[-1]:.6g}")
    print(f"wrote {act_path}")

    missing = [lab for lab in d.labels if lab not in cfg.offsets]
    if missing:
        print(f"no --offset for {missing}; skipping median-threshold onsets", file=sys.stderr)
    else:
        mcfg = cfg.median()
        onsets = [detect_median(state.H_D[i], mcfg, lab, S.time_resolution) for i, lab in enumerate(d.labels)]
        on_path = f"{prefix}_onsets.tsv"
        write_annotations(on_path, onsets)
        print(f"wrote {on_path} ({sum(len(o) for o in onsets)} onsets)")
    if args.trace:
        units = 1 if cfg.solver == "mur" else cfg.inner
        write_trace(args.trace, _trace_rows(cfg.solver, trace, units))
    for msg in trace.warnings:
        print(f"warning: {msg}", file=sys.stderr)
    return EXIT_OK


def _select(labels_a, labels_b, wanted, what):
    if wanted:
        missing = [lab for lab in wanted if lab not in labels_a or lab not in labels_b]
        if missing:
            raise DataError(f"{what}: labels {missing} not present on both sides")
        return list(wanted)
    if set(labels_a) != set(labels_b):
        raise DataError(f"{what}: label mismatch {sorted(labels_a)} vs {sorted(labels_b)}")
    return list(labels_a)


def evaluate_pair(mode: str, detected_path, reference_path, tolerance: float, wanted=None):
    """Per-component EvalCounts for one detected/reference file pair."""
    reference = read_annotations(reference_path)
    if mode == "topk-frames":
        H_D, labels, times = read_activations(detected_path)
        if len(times) < 2:
            raise DataError(f"{detected_path}: need at least two frames to infer time resolution")
        res = float(times[1] - times[0])
        use = _select(labels, reference.keys(), wanted, detected_path)
        rows = [labels.index(lab) for lab in use]
        try:
            p, mask = annotations_to_frame_counts([reference[lab] for lab in use], len(times), res)
        except ValueError as exc:
            raise DataError(f"{reference_path}: {exc}") from exc
        counts = counts_topk(detect_topk(H_D[rows], p), mask)
        return dict(zip(use, counts))
    detected = read_annotations(detected_path)
    use = _select(detected.keys(), reference.keys(), wanted, detected_path)
    return {lab: match_onsets(detected[lab], reference[lab], tolerance) for lab in use}


def cmd_eval(args) -> int:
    cfg = resolve_config(args)
    if len(args.detected) != len(args.reference):
        raise UsageError("need the same number of --detected and --reference files")
    wanted = [s.strip() for s in args.labels.split(",")] if args.labels else None

    rows = []
    for track, (det, ref) in enumerate(zip(args.detected, args.reference)):
        for lab, c in evaluate_pair(args.mode, det, ref, cfg.tolerance, wanted).items():
            rows.append([track, lab, c.TP, c.FP, c.FN, f_score(c)])

    print(f"{'track':>5} {'component':<12} {'TP':>5} {'FP':>5} {'FN':>5} {'F':>7}")
    for r in rows:
        print(f"{r[0]:>5} {r[1]:<12} {r[2]:>5} {r[3]:>5} {r[4]:>5} {r[5]:>7.4f}")
    labels = list(dict.fromkeys(r[1] for r in rows))
    for lab in labels:
        fs = [r[5] for r in rows if r[1] == lab]
        print(f"{'mean':>5} {lab:<12} {'':>5} {'':>5} {'':>5} {np.mean(fs):>7.4f}")
    mean_f = float(np.mean([r[5] for r in rows])) if rows else float("nan")
    print(f"mean F = {mean_f:.4f}")

    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as f:
            w = csv.writer(f, lineterminator="\n")
            w.writerow(["track", "component", "TP", "FP", "FN", "F"])
            w.writerows([r[:5] + [repr(float(r[5]))] for r in rows])
            w.writerow(["all", "mean", "", "", "", repr(mean_f)])
    return EXIT_OK


def read_eval_csv(path) -> list[dict]:
    with open(path, encoding="utf-8", newline="") as f:
        return list(csv.DictReader(f))


def cmd_bench(args) -> int:
    cfg = resolve_config(args)
    S, d = _load_inputs(args, cfg)
    init = random_init(S.bin_count, S.frame_count, d.rank, cfg.rank_h, cfg.seed)
    digest = init.digest()
    rows = []
    for solver, T, units in (("mur", 100, 1), ("nenmf", 10, cfg.inner)):
        if init.digest() != digest:
            raise RuntimeError("initial state was modified between solver runs")
        _, trace = _solve(solver, S, d, init, cfg, T=T)
        rows += _trace_rows(solver, trace, units)
        print(f"{solver}: squared Frobenius error {2 * trace.losses[0]:.6g} -> {2 * trace.losses[-1]:.6g} "
              f"in {trace.elapsed[-1]:.3f} s")
    write_trace(args.out, rows)
    print(f"init sha256 {digest}")
    print(f"wrote {args.out}")
    return EXIT_OK


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _add_run_options(p, solver=True):
    if solver:
        p.add_argument("--solver", choices=["mur", "nenmf"])
        p.add_argument("--iters", dest="iterations", type=int, help="outer iterations T")
    p.add_argument("--inner", type=int, help="inner OGM iterations K (nenmf)")
    p.add_argument("--rank-h", dest="rank_h", type=int, help="harmonic rank r_H (default 5)")
    p.add_argument("--seed", type=int)
    p.add_argument("--epsilon", type=float, help="MUR denominator guard (default 1e-12)")


def _add_stft_options(p):
    p.add_argument("--window", type=int, help="STFT window length (default 2048)")
    p.add_argument("--hop", type=int, help="STFT hop size (default 512)")


def _add_median_options(p):
    p.add_argument("--median-window", dest="median_window", type=float, help="seconds (default 0.1)")
    p.add_argument("--offset", action="append", metavar="LABEL=COEFF",
                   help="threshold offset per component (repeatable)")
    p.add_argument("--tolerance", type=float, help="onset match tolerance in seconds (default 0.05)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="pfnmf", description="Drum transcription with partially fixed NMF.")
    parser.add_argument("--config", help="INI file with a [pfnmf] section; flags override it")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("dict", help="build a drum dictionary from isolated hits")
    p.add_argument("--hit", nargs=2, action="append", required=True, metavar=("LABEL", "WAV"))
    p.add_argument("--out", required=True)
    _add_stft_options(p)
    p.set_defaults(func=cmd_dict)

    p = sub.add_parser("transcribe", help="factorize a song and write activations and onsets")
    p.add_argument("song")
    p.add_argument("--dict", required=True)
    p.add_argument("--out", required=True, help="output prefix")
    p.add_argument("--trace", help="optional convergence CSV")
    _add_run_options(p)
    _add_stft_options(p)
    _add_median_options(p)
    p.set_defaults(func=cmd_transcribe)

    p = sub.add_parser("eval", help="score detections against reference annotations")
    p.add_argument("--mode", choices=["topk-frames", "median-onsets"], required=True)
    p.add_argument("--detected", nargs="+", required=True,
                   help="activation CSVs (topk-frames) or onset TSVs (median-onsets)")
    p.add_argument("--reference", nargs="+", required=True)
    p.add_argument("--labels", help="comma-separated subset of components to score")
    p.add_argument("--tolerance", type=float)
    p.add_argument("--out", help="optional CSV of per-component scores")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("bench", help="MUR vs NeNMF convergence from one initialization")
    p.add_argument("song")
    p.add_argument("--dict", required=True)
    p.add_argument("--out", required=True)
    _add_run_options(p, solver=False)
    _add_stft_options(p)
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            return args.func(args)
    except UsageError as exc:
        print(f"pfnmf: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NumericalError as exc:
        print(f"pfnmf: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (DataError, AudioError, DictionaryFormatError, AnnotationFormatError, FileNotFoundError,
            KeyError, ValueError) as exc:
        print(f"pfnmf: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
