"""``phonewatch`` command line: synth, train, tune, eval, sweep, stream.

Every :class:`RunConfig` field can be set in a flat ``key=value`` file
(``--config``) and overridden by the matching ``--flag``.
"""
from __future__ import annotations

import argparse
import csv
import logging
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, fields, replace
from functools import partial
from pathlib import Path

from . import ga
from .errors import (ConvergenceError, DegenerateModelError, InfeasibleError,
                     InvalidInputError, KernelDomainError, PhoneWatchError)
from .evaluation import (DEFAULT_THRESHOLDS, accuracy, classify_period, cross_validate,
                         ground_truth_periods, threshold_sweep, write_features_csv,
                         write_sweep_csv, write_verdicts_csv)
from .pipeline import OK, export_scenes, ingest, read_manifest
from .streaming import RealClock, SimulatedClock, StatusLevels, run_stream
from .svm import KINDS, KernelSpec, load, save, train
from .svm.kernels import USES
from .synthetic import make_dataset, make_sequence

log = logging.getLogger("phonewatch")

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_NUMERIC = 2


@dataclass(frozen=True)
class RunConfig:
    kernel: str = "polynomial"  # a kernel kind, or "tune"
    gamma: float = 1.0
    coef0: float = 1.0
    degree: float = 2.0
    nu: float = 0.5
    seg_fraction: float = 0.05
    window: float = 3.0
    threshold: float = 0.65
    green_upper: float = 0.40
    red_lower: float = 0.65
    workers: int = 4
    fps_cap: float = 6.0
    default_fps: float = 15.0  # timestamps for manifests without them
    folds: int = 9
    seed: int = 0
    ga_kernel: str = "polynomial"
    ga_population: int = 20
    ga_generations: int = 50
    ga_crossover: float = 0.80
    ga_mutation: float = 0.05
    ga_tournament: int = 2
    ga_restarts: int = 1
    detector: str = ""

    def __post_init__(self):
        if self.kernel != "tune" and self.kernel not in KINDS:
            raise InvalidInputError(f"unknown kernel {self.kernel!r}")
        if self.ga_kernel not in KINDS:
            raise InvalidInputError(f"unknown GA kernel {self.ga_kernel!r}")
        StatusLevels(self.green_upper, self.red_lower)
        if self.workers < 1 or self.folds < 2 or self.window <= 0 or self.default_fps <= 0:
            raise InvalidInputError("workers >= 1, folds >= 2, window > 0 and default_fps > 0")
        if self.ga_restarts < 1:
            raise InvalidInputError("ga_restarts must be positive")
        if not 0.0 <= self.threshold <= 1.0:
            raise InvalidInputError("threshold must lie in [0, 1]")

    @property
    def levels(self) -> StatusLevels:
        return StatusLevels(self.green_upper, self.red_lower)

    def kernel_spec(self) -> KernelSpec:
        return KernelSpec(self.kernel, **{k: getattr(self, k) for k in USES[self.kernel]})

    def ga_config(self, restart: int = 0) -> ga.GaConfig:
        return ga.GaConfig(population=self.ga_population, generations=self.ga_generations,
                           crossover_rate=self.ga_crossover, mutation_rate=self.ga_mutation,
                           tournament_size=self.ga_tournament, seed=self.seed + restart)


_FIELD_TYPES = {f.name: f.type for f in fields(RunConfig)}
_CASTS = {"float": float, "int": int, "str": str}


def _coerce(key: str, value: str):
    if key not in _FIELD_TYPES:
        raise InvalidInputError(f"unknown config key {key!r}")
    try:
        return _CASTS[_FIELD_TYPES[key]](value)
    except ValueError as exc:
        raise InvalidInputError(f"config {key}: {exc}") from exc


def read_config_file(path) -> dict:
    values = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise InvalidInputError(f"{path}:{lineno}: expected key=value")
            key, value = (s.strip() for s in line.split("=", 1))
            values[key] = _coerce(key, value)
    return values


def build_config(args) -> RunConfig:
    values = read_config_file(args.config) if args.config else {}
    for name in _FIELD_TYPES:
        flag = getattr(args, f"cfg_{name}", None)
        if flag is not None:
            values[name] = flag
    return RunConfig(**values)


def write_config_file(path, config: RunConfig) -> None:
    with open(path, "w") as fh:
        for key, value in asdict(config).items():
            fh.write(f"{key}={value}\n")


# -- helpers ------------------------------------------------------------------------


def _timestamps(entries, default_fps):
    return [e.timestamp if e.timestamp is not None else i / default_fps
            for i, e in enumerate(entries)]


def _ingest(manifest, config: RunConfig, labeled=True):
    report = ingest(manifest, config.seg_fraction, config.detector or None)
    if labeled:
        report.dataset.validate()
        if any(s.label is None for s in report.dataset.items):
            raise InvalidInputError(f"{manifest}: training needs every usable frame labeled")
    n = len(report.results)
    log.info("%d frames: %d used, %d face not found, %d errors", n, report.count(OK),
             report.count("not_found"), report.count("error"))
    return report


def _write_report(path, config, kernel: KernelSpec, nu, cv, report, extra=()):
    lines = [("kernel", kernel.kind), ("nu", repr(float(nu)))]
    lines += [(k, repr(float(v))) for k, v in kernel.params().items()]
    lines += [("folds", len(cv.fold_accuracies)), ("seed", config.seed),
              ("cv_mean", repr(cv.mean)), ("cv_std", repr(cv.std)),
              ("fold_accuracies", ",".join(repr(a) for a in cv.fold_accuracies)),
              ("failed_folds", len(cv.failures)),
              ("frames_total", len(report.results)), ("frames_used", report.count(OK)),
              ("frames_not_found", report.count("not_found")),
              ("frames_error", report.count("error")), *extra]
    with open(path, "w") as fh:
        for key, value in lines:
            fh.write(f"{key}={value}\n")


def _fit_and_report(args, config, kernel, nu, report, extra=()):
    X, y = report.dataset.X, report.dataset.y
    cv = cross_validate(X, y, kernel, nu, k=config.folds, seed=config.seed)
    model = train(X, y, kernel, nu)
    save(model, args.model)
    _write_report(args.report or f"{args.model}.report", config, kernel, nu, cv, report, extra)
    if args.features:
        write_features_csv(args.features, report.dataset)
    print(f"cv_mean={cv.mean:.4f} cv_std={cv.std:.4f} kernel={kernel.kind} nu={nu:.6g}")
    return model


# -- subcommands --------------------------------------------------------------------


def cmd_synth(args, config: RunConfig) -> int:
    if args.mode == "dataset":
        scenes = make_dataset(args.n_pos, args.n_neg, seed=config.seed, noise=args.noise)
        manifest = export_scenes(args.out, scenes)
    else:
        frames = make_sequence(args.duration, args.video_fps, seed=config.seed,
                               dropout=args.dropout, confusion=args.confusion, noise=args.noise)
        manifest = export_scenes(args.out, [(f.scene, f.label) for f in frames],
                                 timestamps=[f.timestamp for f in frames])
    print(manifest)
    return EXIT_OK


def cmd_train(args, config: RunConfig) -> int:
    if config.kernel == "tune":
        return cmd_tune(args, config)
    report = _ingest(args.manifest, config)
    _fit_and_report(args, config, config.kernel_spec(), config.nu, report)
    return EXIT_OK


def cmd_tune(args, config: RunConfig) -> int:
    report = _ingest(args.manifest, config)
    X, y = report.dataset.X, report.dataset.y
    fit = partial(ga.fitness, X=X, y=y, kernel_kind=config.ga_kernel,
                  folds=config.folds, seed=config.seed)
    executor = ThreadPoolExecutor(config.workers) if config.workers > 1 else None
    results = []
    try:
        for restart in range(config.ga_restarts):
            results.append(ga.evolve(
                config.ga_config(restart), fit, config.ga_kernel, executor=executor,
                on_generation=lambda s, _: log.info(
                    "generation %d best %.4f mean %.4f", s.generation, s.best_fitness,
                    s.mean_fitness)))
    finally:
        if executor is not None:
            executor.shutdown()
    ga.write_log(args.log or f"{args.model}.ga.csv", results)
    result = max(results, key=lambda r: r.best_fitness)  # first of equals
    best = result.best()
    if result.best_fitness <= 0.0:
        raise DegenerateModelError("no chromosome produced a trainable model")
    _fit_and_report(args, config, best.kernel, best.nu, report,
                    extra=[("ga_best_fitness", repr(result.best_fitness)),
                           ("ga_generations", config.ga_generations),
                           ("ga_population", config.ga_population),
                           ("ga_restarts", config.ga_restarts)])
    return EXIT_OK


def _frame_verdicts(args, config, model):
    report = ingest(args.manifest, config.seg_fraction, config.detector or None,
                    require_usable=True)
    entries = read_manifest(args.manifest)
    X = report.dataset.X
    pred = iter(model.predict(X).tolist())
    verdicts = [next(pred) if r.status == OK else None for r in report.results]
    timestamps = _timestamps(entries, config.default_fps)
    labels = [e.label for e in entries]
    return report, verdicts, timestamps, labels


def cmd_eval(args, config: RunConfig) -> int:
    model = load(args.model)
    report, verdicts, timestamps, labels = _frame_verdicts(args, config, model)
    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["frame_id", "timestamp", "label", "predicted", "status"])
        for r, v, t, lab in zip(report.results, verdicts, timestamps, labels):
            w.writerow([r.frame_id, repr(float(t)), "?" if lab is None else lab,
                        "none" if v is None else v, r.status])
    if args.features:
        write_features_csv(args.features, report.dataset)
    periods = classify_period(verdicts, timestamps, config.window, config.threshold)
    if args.verdicts:
        write_verdicts_csv(args.verdicts, periods)
    scored = [(v, lab) for v, lab in zip(verdicts, labels) if v is not None and lab is not None]
    if scored:
        acc = accuracy([v for v, _ in scored], [lab for _, lab in scored])
        print(f"frame_accuracy={acc:.4f} frames={len(scored)}")
    print(f"periods={len(periods)} not_found={report.count('not_found')} "
          f"errors={report.count('error')}")
    return EXIT_OK


def cmd_sweep(args, config: RunConfig) -> int:
    model = load(args.model)
    _, verdicts, timestamps, labels = _frame_verdicts(args, config, model)
    if any(lab is None for lab in labels):
        raise InvalidInputError("sweep needs every frame labeled")
    truth = ground_truth_periods(labels, timestamps, config.window)
    thresholds = args.thresholds or DEFAULT_THRESHOLDS
    rows = threshold_sweep(verdicts, timestamps, truth, thresholds, config.window)
    write_sweep_csv(args.out, rows)
    for r in rows:
        print(f"threshold={r.threshold:.2f} with={r.acc_with:.4f} "
              f"without={r.acc_without:.4f} general={r.acc_general:.4f}")
    return EXIT_OK


def cmd_stream(args, config: RunConfig) -> int:
    model = load(args.model)
    manifest = Path(args.manifest)
    entries = read_manifest(manifest)
    if not entries:
        raise InvalidInputError(f"{manifest}: empty manifest")
    ts = _timestamps(entries, config.default_fps)
    entries = [replace(e, timestamp=t) for e, t in zip(entries, ts)]
    clock = SimulatedClock() if args.clock == "simulated" else RealClock()
    out = open(args.out, "w") if args.out else sys.stdout
    alarms = []
    verdicts = []
    try:
        for rec in run_stream(entries, model, base_dir=manifest.parent, workers=config.workers,
                              fps=config.fps_cap, window=config.window, levels=config.levels,
                              frac=config.seg_fraction, clock=clock):
            out.write(rec.line() + "\n")
            verdicts.append(rec.verdict)
            if rec.alarm:
                alarms.append(rec)
    finally:
        if out is not sys.stdout:
            out.close()
    if all(v is None for v in verdicts):
        raise InvalidInputError(f"{manifest}: no usable frames")
    if args.alarms:
        with open(args.alarms, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["frame_id", "timestamp", "fraction"])
            for rec in alarms:
                w.writerow([rec.frame_id, repr(rec.timestamp), repr(rec.fraction)])
    periods = classify_period(verdicts, ts, config.window, config.threshold)
    if args.verdicts:
        write_verdicts_csv(args.verdicts, periods)
    with_phone = sum(p.decision == 1 for p in periods)
    log.info("%d frames, %d alarms, %d/%d periods withPhone", len(verdicts), len(alarms),
             with_phone, len(periods))
    return EXIT_OK


# -- argument parsing ----------------------------------------------------------------


def _thresholds(text: str):
    try:
        values = tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc
    if not values:
        raise argparse.ArgumentTypeError("empty threshold list")
    return values


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("run configuration (overrides --config)")
    g.add_argument("--config", help="flat key=value configuration file")
    for f in fields(RunConfig):
        g.add_argument(f"--{f.name.replace('_', '-')}", dest=f"cfg_{f.name}",
                       type=_CASTS[f.type], default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="phonewatch",
                                     description="Phone-use detection from driver frames.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="write synthetic frames and a manifest")
    p.add_argument("--out", required=True)
    p.add_argument("--mode", choices=("dataset", "sequence"), default="dataset")
    p.add_argument("--n-pos", type=int, default=100)
    p.add_argument("--n-neg", type=int, default=100)
    p.add_argument("--duration", type=float, default=60.0)
    p.add_argument("--video-fps", type=float, default=15.0)
    p.add_argument("--dropout", type=float, default=0.05)
    p.add_argument("--confusion", type=float, default=0.1)
    p.add_argument("--noise", type=float, default=3.0)
    _add_config_flags(p)
    p.set_defaults(func=cmd_synth)

    for name, func, helptext in (("train", cmd_train, "train with fixed parameters"),
                                 ("tune", cmd_tune, "GA-tune parameters, then train")):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--manifest", required=True)
        p.add_argument("--model", required=True)
        p.add_argument("--report")
        p.add_argument("--features")
        p.add_argument("--log", help="GA log CSV (tune)")
        _add_config_flags(p)
        p.set_defaults(func=func)

    p = sub.add_parser("eval", help="classify a manifest with a saved model")
    p.add_argument("--manifest", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--out", required=True, help="per-frame predictions CSV")
    p.add_argument("--features")
    p.add_argument("--verdicts", help="period verdict CSV")
    _add_config_flags(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("sweep", help="period accuracy over vote thresholds")
    p.add_argument("--manifest", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--thresholds", type=_thresholds, help="comma-separated list")
    _add_config_flags(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("stream", help="throttled real-time simulation with status levels")
    p.add_argument("--manifest", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--out", help="status lines (default stdout)")
    p.add_argument("--alarms", help="alarm records CSV")
    p.add_argument("--verdicts", help="period verdict CSV")
    p.add_argument("--clock", choices=("real", "simulated"), default="real")
    _add_config_flags(p)
    p.set_defaults(func=cmd_stream)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        config = build_config(args)
        return args.func(args, config)
    except (ConvergenceError, InfeasibleError, DegenerateModelError, KernelDomainError) as exc:
        print(f"phonewatch: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (PhoneWatchError, OSError, ValueError) as exc:
        print(f"phonewatch: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
