"""Command-line front end.

Exit codes: 0 success, 1 usage error, 2 data error, 3 convergence error.
"""

from __future__ import annotations

import argparse
import csv
import logging
import sys
from pathlib import Path

import numpy as np

from . import config as cfgmod
from . import simulator as sim
from .detect import detect_peaks, write_candidates
from .errors import ConfigError, ConvergenceError, GBTError
from .evaluation import EvalReport, evaluate_pipeline
from .events import load_events, save_events
from .gbt import classify_many, load_model, save_model, train_gbt
from .pipeline import (
    Observation,
    detect_and_extract,
    draw_training_labels,
    labeled_samples,
    read_labels,
    write_labels,
)

log = logging.getLogger("gbtsvm")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_CONVERGENCE = 0, 1, 2, 3

# flag names that would otherwise collide or read poorly
_FLAG_NAMES = {("train", "seed"): "train-seed", ("band", "lo"): "band-lo",
               ("band", "hi"): "band-hi"}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _flag(sec: str, name: str) -> str:
    return "--" + _FLAG_NAMES.get((sec, name), name.replace("_", "-"))


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=Path, help="INI file with [detection], [train], ... sections")
    p.add_argument("--seed", type=int, help="master seed")
    p.add_argument("-v", "--verbose", action="store_true")
    group = p.add_argument_group("settings (override the config file)")
    for sec, f in cfgmod.option_fields():
        group.add_argument(_flag(sec, f.name), dest=f"opt__{sec}__{f.name}", metavar="VALUE",
                           help=f"[{sec}] {f.name}")


def _run_config(args) -> cfgmod.RunConfig:
    overrides: dict = {}
    for key, value in vars(args).items():
        if key.startswith("opt__") and value is not None:
            _, sec, name = key.split("__")
            overrides.setdefault(sec, {})[name] = value
    if args.seed is not None:
        overrides["run"] = {"seed": args.seed}
    return cfgmod.load_config(args.config, overrides)


def _scene_dirs(paths) -> list[Path]:
    out = []
    for p in map(Path, paths):
        if (p / "events.csv").is_file():
            out.append(p)
        else:
            found = sorted(e.parent for e in p.rglob("events.csv"))
            if not found:
                raise GBTError(f"no scene directories (with events.csv) under {p}")
            out.extend(found)
    return out


def _write_scene(scene: sim.SceneSpec, cfg: cfgmod.RunConfig, out: Path) -> None:
    out.mkdir(parents=True, exist_ok=True)
    table, truth = sim.simulate(scene, cfg.sampling.bright_threshold)
    save_events(table, out / "events.csv")
    sim.write_truth(truth, out / "truth.csv")
    sim.dump_scene(scene, out / "scene.ini")
    obs = Observation.from_table(table, cfg.band)
    rng = np.random.default_rng([scene.seed, 1])
    labels = draw_training_labels(obs, truth, rng, cfg.sampling.n_faint_bkg,
                                  cfg.sampling.n_bright_bkg, cfg.sampling.extended_radius)
    write_labels(labels, out / "labels.csv")


def cmd_simulate(args, cfg: cfgmod.RunConfig) -> int:
    out = Path(args.out)
    if args.scene_file:
        scene = sim.load_scene(args.scene_file)
        _write_scene(scene, cfg, out / Path(args.scene_file).stem)
        return EXIT_OK
    train, test = sim.default_benchmark(cfg.seed)
    jobs = [(out / "train" / f"scene_{k:02d}", s) for k, s in enumerate(train)]
    jobs += [(out / "test" / f"scene_{k:02d}", s) for k, s in enumerate(test)]
    n = len(jobs) if args.scenes is None else args.scenes
    if not 0 <= n <= len(jobs):
        raise UsageError(f"--scenes must be between 0 and {len(jobs)}")
    for path, scene in jobs[:n]:
        _write_scene(scene, cfg, path)
        log.info("wrote %s", path)
    print(f"wrote {n} scene(s) to {out}")
    return EXIT_OK


def cmd_detect(args, cfg: cfgmod.RunConfig) -> int:
    obs = Observation.from_table(load_events(args.events), cfg.band)
    candidates = detect_peaks(obs.image, cfg.detection)
    if args.out:
        write_candidates(candidates, args.out)
    else:
        print("rank,row,col,peak_value")
        for c in candidates:
            print(f"{c.rank},{c.row},{c.col},{c.peak_value}")
    log.info("lambda_hat=%.6g, %d candidate(s)", obs.lambda_hat, len(candidates))
    return EXIT_OK


def cmd_train(args, cfg: cfgmod.RunConfig) -> int:
    samples = []
    for d in _scene_dirs(args.data):
        obs = Observation.from_table(load_events(d / "events.csv"), cfg.band)
        samples += labeled_samples(obs, read_labels(d / "labels.csv"), cfg.band,
                                   cfg.detection.window)
    model = train_gbt(samples, cfg.train)
    save_model(model, args.out)
    print(f"trained on {len(samples)} samples; {model.n_submodels} submodels -> {args.out}")
    return EXIT_OK


def cmd_classify(args, cfg: cfgmod.RunConfig) -> int:
    model = load_model(args.model)
    obs = Observation.from_table(load_events(args.events), cfg.band)
    candidates, feats = detect_and_extract(obs, cfg.band, cfg.detection)
    codes = classify_many(model, feats)
    fh = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["rank", "row", "col", "peak_value", "label1", "label2", "decision", "class"])
        for c, code in zip(candidates, codes):
            w.writerow([c.rank, c.row, c.col, c.peak_value, code.label1, code.label2,
                        code.decision, code.class_name.value])
    finally:
        if fh is not sys.stdout:
            fh.close()
    return EXIT_OK


def cmd_evaluate(args, cfg: cfgmod.RunConfig) -> int:
    model = load_model(args.model)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    combined = EvalReport().finalize()
    rows = []
    for d in _scene_dirs(args.data):
        report = evaluate_pipeline(
            model, load_events(d / "events.csv"), sim.read_truth(d / "truth.csv"),
            cfg.band, cfg.detection, cfg.eval.match_radius, cfg.eval.bkg_group_radius,
        )
        combined = combined + report
        rows.append((str(d), report))
        print(f"{d}: accuracy {report.accuracy if report.accuracy is not None else 'undefined'}")
    combined.write_json(out / "report.json")
    combined.write_csv(out / "report.csv")
    with open(out / "scenes.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        level_cols = [f"{lv}.{k}" for lv in ("L1", "L2L", "L2R") for k in ("tp", "fp", "tn", "fn")]
        w.writerow(["scene", "n_correct_ps", "n_correct_bkg", "n_samples", "n_ref", "n_true",
                    "n_false", *level_cols])
        for name, r in rows:
            w.writerow([name, r.n_correct_ps, r.n_correct_bkg, r.n_samples, r.n_ref, r.n_true,
                        r.n_false, *[getattr(c, k) for c in r.per_level
                                     for k in ("tp", "fp", "tn", "fn")]])
    acc = "undefined" if combined.accuracy is None else f"{combined.accuracy:.4f}"
    print(f"combined accuracy over {len(rows)} scene(s): {acc}")
    return EXIT_OK


def cmd_config(args, cfg: cfgmod.RunConfig) -> int:
    text = cfgmod.dumps_config(cfg)
    if args.out:
        Path(args.out).write_text(text)
    else:
        print(text, end="")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="gbtsvm", description="X-ray point-source recognition pipeline")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("simulate", help="write synthetic scenes (events, truth, labels)")
    _add_common(p)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--scenes", type=int, help="write only the first N benchmark scenes")
    p.add_argument("--scene-file", help="simulate one user scene spec instead of the benchmark")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("detect", help="list potential point sources in an event file")
    _add_common(p)
    p.add_argument("events")
    p.add_argument("--out", help="candidate CSV (default: stdout)")
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("train", help="train a model from labelled scene directories")
    _add_common(p)
    p.add_argument("data", nargs="+", help="scene directories (or parents of them)")
    p.add_argument("--out", required=True, help="model file to write")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("classify", help="detect and classify candidates in an event file")
    _add_common(p)
    p.add_argument("events")
    p.add_argument("--model", required=True)
    p.add_argument("--out", help="class CSV (default: stdout)")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("evaluate", help="score a model on scenes with ground truth")
    _add_common(p)
    p.add_argument("data", nargs="+", help="scene directories (or parents of them)")
    p.add_argument("--model", required=True)
    p.add_argument("--out", required=True, help="report directory")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("config", help="print the effective configuration")
    _add_common(p)
    p.add_argument("--out", help="write to a file instead of stdout")
    p.set_defaults(func=cmd_config)
    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        cfg = _run_config(args)
        return args.func(args, cfg)
    except (UsageError, ConfigError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ConvergenceError as exc:
        print(f"convergence error: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    except (GBTError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
