"""Command-line surface tying the modules into reproducible experiments.

Commands::

    fingertip gen-data        --out runs/demo [--config file] [--seed N]
    fingertip calibrate       --out runs/demo
    fingertip train-material  --out runs/demo
    fingertip train-shake     --out runs/demo
    fingertip run-task pinch|cups|shake --out runs/demo [--trials N]
    fingertip report PATH... [--csv-dir DIR]
    fingertip print-config

Exit codes: 0 success (and, for training/tasks, the acceptance gate held),
1 runtime error, 2 usage error, 3 gate failed. Every command resolves its
config fully before touching the filesystem, and all randomness flows from
the single [experiment] seed via stable per-stage sub-seeds.
"""

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from fingertip import traceio
from fingertip.config import ExperimentConfig, config_digest, load_config, render_config
from fingertip.errors import FingertipError
from fingertip.force import (
    CalibrationTable,
    build_calibration_dataset,
    estimate_forces,
    fit_linear_baseline,
    load_force_estimator,
    save_force_estimator,
    split_dataset,
    train_force_estimator,
)
from fingertip.mlp import Dataset, mean_squared_error
from fingertip.reports import (
    RunReport,
    confusion_csv_lines,
    read_report,
    read_trial_log,
    render_reports_table,
    write_report,
    write_trial_log,
)
from fingertip.seeding import derive_seed
from fingertip.sim import (
    CONTENT_CLASSES,
    default_fingertip_model,
    default_material_profiles,
    synthesize_cup_slide,
    synthesize_shaking,
    synthesize_sliding,
)
from fingertip.tasks import (
    CHIP_PLANT,
    PINCH_THRESHOLDS_N,
    TOFU_PLANT,
    PinchConfig,
    run_cup_trial,
    run_pinch_trial,
    run_shake_trial,
)
from fingertip.vibro import (
    MATERIAL_FEATURES,
    SHAKE_FEATURES,
    load_classifier,
    save_classifier,
    train_material_classifier,
    train_content_classifier,
)

GATE_MSE_N2 = 0.15
GATE_BASELINE_RATIO = 2.0
GATE_MATERIAL_ACCURACY = 0.95
GATE_SHAKE_ACCURACY = 0.95
SHAKE_MISTAKE_BUDGET = 3  # tolerated wrong selections out of 56

PINCH_PLANTS = {"tofu": TOFU_PLANT, "chip": CHIP_PLANT}


def _fingertip_model(cfg: ExperimentConfig):
    return default_fingertip_model(
        stiffness=cfg.fingertip.stiffness,
        hysteresis_ratio=cfg.fingertip.hysteresis_ratio,
        noise_sigma=cfg.fingertip.noise_sigma,
        gain_modulation=cfg.fingertip.gain_modulation,
    )


def _require(path: Path, hint: str) -> Path:
    if not path.exists():
        raise FingertipError(f"missing {hint}: expected {path} (run `fingertip {hint.split()[0]}` first?)")
    return path


def _out_dirs(out: Path) -> dict[str, Path]:
    dirs = {
        "out": out,
        "models": out / "models",
        "reports": out / "reports",
        "materials": out / "materials",
        "shaking": out / "shaking",
        "cups": out / "cups",
    }
    for d in dirs.values():
        d.mkdir(parents=True, exist_ok=True)
    return dirs


def _write_corpus(root: Path, traces_by_class: dict[str, list], seeds_by_class) -> None:
    manifest_rows = []
    for name in sorted(traces_by_class):
        class_dir = root / name
        class_dir.mkdir(parents=True, exist_ok=True)
        for i, trace in enumerate(traces_by_class[name]):
            rel = f"{name}/trace_{i:03d}.tact"
            traceio.write_trace(root / rel, trace)
            manifest_rows.append((name, rel, seeds_by_class[name][i]))
    with open(root / "manifest.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["class", "path", "seed"])
        writer.writerows(manifest_rows)


def _read_corpus(root: Path) -> dict[str, list]:
    manifest = _require(root / "manifest.csv", "gen-data corpus manifest")
    traces: dict[str, list] = {}
    with open(manifest, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["class", "path", "seed"]:
            raise FingertipError(f"{manifest}: corrupt manifest header {header}")
        for row in reader:
            if not row:
                continue
            if len(row) != 3:
                raise FingertipError(f"{manifest}: corrupt manifest row {row}")
            traces.setdefault(row[0], []).append(traceio.read_trace(root / row[1]))
    return traces


def cmd_gen_data(cfg: ExperimentConfig, out: Path) -> int:
    dirs = _out_dirs(out)
    (out / "scenario.resolved.cfg").write_text(render_config(cfg))

    model = _fingertip_model(cfg)
    table = build_calibration_dataset(model, cfg.grid, seed=derive_seed(cfg.seed, "calibration"))
    table.write_csv(out / "calibration.csv")
    print(f"calibration.csv: {len(table)} rows "
          f"({len(cfg.grid.angles_deg)}x{len(cfg.grid.heights_mm)} trials)")

    profiles = default_material_profiles()
    mat_traces, mat_seeds = {}, {}
    for name, profile in profiles.items():
        seeds = [derive_seed(cfg.seed, "material", name, i) for i in range(cfg.materials.traces_per_class)]
        mat_traces[name] = [
            synthesize_sliding(profile, cfg.materials.duration_s, cfg.materials.speed_mm_s, s)
            for s in seeds
        ]
        mat_seeds[name] = seeds
    _write_corpus(dirs["materials"], mat_traces, mat_seeds)
    print(f"materials: {len(profiles)} classes x {cfg.materials.traces_per_class} traces")

    shake_traces, shake_seeds = {}, {}
    for name in CONTENT_CLASSES:
        seeds = [derive_seed(cfg.seed, "shake", name, i) for i in range(cfg.shaking.traces_per_class)]
        shake_traces[name] = [
            synthesize_shaking(name, cfg.shaking.duration_s, cfg.shaking.shake_freq_hz, s)
            for s in seeds
        ]
        shake_seeds[name] = seeds
    _write_corpus(dirs["shaking"], shake_traces, shake_seeds)
    print(f"shaking: {len(CONTENT_CLASSES)} classes x {cfg.shaking.traces_per_class} traces")

    for i in range(3):
        rims = np.sort(cfg.cups.rims_in_travel())
        trace, z = synthesize_cup_slide(
            rims,
            cfg.cups.slide_speed_mm_s,
            cfg.cups.total_travel_mm,
            cfg.cups.noise_floor,
            seed=derive_seed(cfg.seed, "cups-sample", i),
        )
        traceio.write_trace(dirs["cups"] / f"slide_{i:03d}.tact", trace)
        traceio.write_ztrajectory_csv(dirs["cups"] / f"slide_{i:03d}.z.csv", z)
    print("cups: 3 sample slides")
    return 0


def cmd_calibrate(cfg: ExperimentConfig, out: Path) -> int:
    dirs = _out_dirs(out)
    table = CalibrationTable.read_csv(_require(out / "calibration.csv", "gen-data calibration table"))

    estimator = train_force_estimator(table, cfg.train_force)
    train_set, test_set = split_dataset(table.dataset(), 0.2, cfg.train_force.seed)
    baseline = fit_linear_baseline(train_set, test_set)

    model_path = dirs["models"] / "force.mlpm"
    save_force_estimator(model_path, estimator)

    scatter_path = dirs["reports"] / "force_scatter.csv"
    pred = estimate_forces(estimator, test_set.inputs)
    with open(scatter_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["fx_true", "fy_true", "fx_pred", "fy_pred"])
        for truth, p in zip(test_set.targets, pred):
            writer.writerow([repr(float(v)) for v in (*truth, *p)])

    ratio = baseline.test_mse / estimator.test_mse if estimator.test_mse else float("inf")
    report = RunReport(
        experiment_id="calibrate",
        config_digest=config_digest(cfg),
        metrics={
            "mse_mlp": {"value": estimator.test_mse, "unit": "N^2"},
            "mse_linear_baseline": {"value": baseline.test_mse, "unit": "N^2"},
            "baseline_to_mlp_ratio": {"value": ratio, "unit": ""},
            "rows": {"value": len(table), "unit": ""},
        },
        artifacts=(str(model_path), str(scatter_path)),
    )
    write_report(dirs["reports"] / "calibrate.json", report)
    print(f"force MLP test MSE: {estimator.test_mse:.4f} N^2 "
          f"(linear baseline {baseline.test_mse:.4f}, ratio {ratio:.1f}x)")
    passed = estimator.test_mse <= GATE_MSE_N2 and ratio >= GATE_BASELINE_RATIO
    print("gate:", "pass" if passed else "FAIL")
    return 0 if passed else 3


def _cmd_train_classifier(cfg: ExperimentConfig, out: Path, which: str) -> int:
    dirs = _out_dirs(out)
    if which == "material":
        corpus = _read_corpus(dirs["materials"])
        model, rep = train_material_classifier(corpus, cfg.train_material)
        features, gate = MATERIAL_FEATURES, GATE_MATERIAL_ACCURACY
    else:
        corpus = _read_corpus(dirs["shaking"])
        model, rep = train_content_classifier(corpus, cfg.train_shake)
        features, gate = SHAKE_FEATURES, GATE_SHAKE_ACCURACY

    model_path = dirs["models"] / f"{which}.mlpm"
    save_classifier(model_path, model, rep.classes, features)
    eval_path = dirs["reports"] / f"{which}_eval.json"
    eval_path.write_text(json.dumps(rep.to_dict(), indent=2) + "\n")

    report = RunReport(
        experiment_id=f"train-{which}",
        config_digest=config_digest(cfg),
        metrics={
            "accuracy": {"value": rep.accuracy, "unit": ""},
            "test_windows": {"value": rep.n_test_windows, "unit": ""},
            "train_windows": {"value": rep.n_train_windows, "unit": ""},
        },
        artifacts=(str(model_path), str(eval_path)),
    )
    write_report(dirs["reports"] / f"train_{which}.json", report)
    print(f"{which} classifier held-out accuracy: {rep.accuracy:.4f} "
          f"({rep.n_test_windows} test windows)")
    passed = rep.accuracy >= gate
    print("gate:", "pass" if passed else "FAIL")
    return 0 if passed else 3


def _run_pinch_batch(cfg: ExperimentConfig, out: Path, trials: int):
    fingertip_model = _fingertip_model(cfg)
    estimator = load_force_estimator(
        _require(out / "models" / "force.mlpm", "calibrate force model")
    )
    records, successes, crushed = [], 0, 0
    objects = cfg.pinch.objects
    for i in range(trials):
        name = objects[i % len(objects)]
        plant = PINCH_PLANTS[name]
        pinch_cfg = PinchConfig(
            force_threshold_n=PINCH_THRESHOLDS_N[name],
            step_size_mm=cfg.pinch.step_size_mm,
            damage_force_n=plant.damage_force_n,
            hold_force_min_n=plant.hold_force_min_n,
        )
        seed = derive_seed(cfg.seed, "pinch-trial", i)
        outcome = run_pinch_trial(plant, estimator, pinch_cfg, seed, fingertip_model)
        successes += outcome.outcome == "success"
        crushed += outcome.outcome == "crushed"
        records.append({"trial": i, "seed": seed, "object": name, **outcome.record()})
    summary = {
        "task": "pinch",
        "trials": trials,
        "successes": successes,
        "crushed": crushed,
        "dropped": trials - successes - crushed,
    }
    return records, summary, successes == trials


def _run_cups_batch(cfg: ExperimentConfig, out: Path, trials: int):
    records, successes = [], 0
    for i in range(trials):
        target = i % 3 + 1
        seed = derive_seed(cfg.seed, "cup-trial", i)
        result = run_cup_trial(cfg.cups, target, cfg.detect, seed)
        successes += result.success
        records.append({"trial": i, "seed": seed, **result.record()})
    summary = {"task": "cups", "trials": trials, "successes": successes}
    return records, summary, successes == trials


def _run_shake_batch(cfg: ExperimentConfig, out: Path, trials: int):
    model, classes, features = load_classifier(
        _require(out / "models" / "shake.mlpm", "train-shake content model")
    )
    if tuple(classes) != CONTENT_CLASSES:
        raise FingertipError(f"shake model classes {classes} != {CONTENT_CLASSES}")
    records, correct = [], 0
    contents = ("screws", "rubber_bands")
    for i in range(trials):
        target = contents[0] if i < (trials + 1) // 2 else contents[1]
        flip = bool(derive_seed(cfg.seed, "shake-order", i) % 2)
        boxes = tuple(reversed(contents)) if flip else contents
        seed = derive_seed(cfg.seed, "shake-trial", i)
        decision = run_shake_trial(
            boxes, target, model, seed, features,
            cfg.shaking.duration_s, cfg.shaking.shake_freq_hz,
        )
        ok = decision.selected_box is not None and boxes[decision.selected_box] == target
        correct += ok
        records.append(
            {"trial": i, "seed": seed, "boxes": list(boxes), "correct": ok,
             **decision.record()}
        )
    summary = {"task": "shake", "trials": trials, "correct": correct}
    return records, summary, correct >= trials - SHAKE_MISTAKE_BUDGET


def cmd_run_task(cfg: ExperimentConfig, out: Path, task: str, trials: int | None) -> int:
    dirs = _out_dirs(out)
    defaults = {"pinch": 50, "cups": 36, "shake": 56}
    n = trials if trials is not None else defaults[task]
    runner = {"pinch": _run_pinch_batch, "cups": _run_cups_batch, "shake": _run_shake_batch}[task]
    records, summary, passed = runner(cfg, out, n)

    log_path = dirs["reports"] / f"task_{task}.jsonl"
    write_trial_log(log_path, records)
    metrics = {
        k: {"value": v, "unit": ""} for k, v in summary.items() if k != "task"
    }
    report = RunReport(
        experiment_id=f"task-{task}",
        config_digest=config_digest(cfg),
        metrics=metrics,
        artifacts=(str(log_path),),
    )
    write_report(dirs["reports"] / f"task_{task}.json", report)
    print(json.dumps(summary))
    print("gate:", "pass" if passed else "FAIL")
    return 0 if passed else 3


def cmd_report(paths, csv_dir: Path | None) -> int:
    if not paths:
        raise FingertipError("usage error: no report paths given")
    reports = {}
    for path in paths:
        rep = read_report(path)
        reports[rep.experiment_id] = rep
    sys.stdout.write(render_reports_table(reports))

    if csv_dir is not None:
        csv_dir.mkdir(parents=True, exist_ok=True)
        for rep in reports.values():
            for artifact in rep.artifacts:
                if artifact.endswith("_eval.json"):
                    detail = json.loads(Path(artifact).read_text())
                    lines = confusion_csv_lines(detail["classes"], detail["confusion"])
                    target = csv_dir / (Path(artifact).stem + "_confusion.csv")
                    target.write_text("\n".join(lines) + "\n")
                    print(f"wrote {target}")
                elif artifact.endswith("force_scatter.csv"):
                    print(f"scatter data at {artifact}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fingertip",
        description="Synthetic tactile-fingertip experiments: data, training, tasks.",
    )
    parser.add_argument("--config", type=Path, default=None, help="scenario config file")
    parser.add_argument("--seed", type=int, default=None, help="override the experiment seed")
    parser.add_argument("--out", type=Path, default=Path("runs/default"), help="output directory")
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("gen-data", help="write calibration table and signal corpora")
    sub.add_parser("calibrate", help="train the force estimator and linear baseline")
    sub.add_parser("train-material", help="train the 7-way material classifier")
    sub.add_parser("train-shake", help="train the 3-way box-content classifier")

    run = sub.add_parser("run-task", help="run seeded task trials against trained models")
    run.add_argument("task", choices=("pinch", "cups", "shake"))
    run.add_argument("--trials", type=int, default=None, help="trial count (task default)")

    rep = sub.add_parser("report", help="summarize report JSONs as a table")
    rep.add_argument("paths", nargs="*", help="report JSON paths")
    rep.add_argument("--csv-dir", type=Path, default=None, help="emit confusion CSVs here")

    sub.add_parser("print-config", help="print the fully-resolved config")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config, args.seed)
        if args.command == "print-config":
            sys.stdout.write(render_config(cfg))
            return 0
        if args.command == "report":
            return cmd_report(args.paths, args.csv_dir)
        if args.command == "gen-data":
            return cmd_gen_data(cfg, args.out)
        if args.command == "calibrate":
            return cmd_calibrate(cfg, args.out)
        if args.command == "train-material":
            return _cmd_train_classifier(cfg, args.out, "material")
        if args.command == "train-shake":
            return _cmd_train_classifier(cfg, args.out, "shake")
        if args.command == "run-task":
            return cmd_run_task(cfg, args.out, args.task, args.trials)
        raise AssertionError(f"unhandled command {args.command}")
    except FingertipError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
