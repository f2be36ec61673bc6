"""Command-line surface tying the analysis pipelines together.

Exit codes: 0 success, 1 usage/config error, 2 runtime failure. Errors are
reported as one machine-readable JSON object on stderr. Every run writes a
manifest next to its outputs; reruns with an identical manifest produce
bitwise-identical CSVs.
"""

import argparse
import json
import os
import sys

import numpy as np

from . import __version__
from .analysis import (
    adv_perturbation_spectrum,
    corruption_delta_spectrum,
    corruption_energy_fraction,
    dataset_spectrum,
)
from .augment import SpectralTemplate
from .basis import FrequencyIndex, PerturbationParams, basis_perturb
from .corruptions import SEVERITIES, CorruptionSpec, corruption_suite
from .filters import FilterSpec
from .heatmap import bandlimited_error_curve, error_heatmap, layer_heatmap
from .metrics import accuracy_table, mce, scatter_fit, scatter_points
from .model import PgdConfig, external_model, pgd_attack
from .model.training import (
    AdversarialStage,
    BandNoiseStage,
    CorruptionSetStage,
    FlipCrop,
    GaussianStage,
    MatchedNoiseStage,
    TrainConfig,
    train,
)
from .io import (
    load_checkpoint,
    load_config,
    load_dataset,
    load_energy_csv,
    load_matrix_csv,
    load_report,
    load_tensor,
    make_synthetic_dataset,
    render_heatmap_png,
    save_bandcurve_csv,
    save_checkpoint,
    save_dataset,
    save_energy_csv,
    save_heatmap,
    save_matrix_csv,
    save_report,
    save_tensor,
    write_manifest,
)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _emit_error(exc):
    doc = {"error": {"type": type(exc).__name__, "message": str(exc)}}
    print(json.dumps(doc), file=sys.stderr)


def _load_model(spec: str):
    """'external:CMD ARGS...' spawns a child; otherwise a checkpoint path."""
    if spec.startswith("external:"):
        return external_model(spec[len("external:") :].split())
    model, _ = load_checkpoint(spec)
    return model


def _resolve_dataset(path: str, split="test", limit=None):
    if path.startswith("synth:"):
        opts = dict(part.split("=") for part in path[len("synth:") :].split(",") if part)
        ds = make_synthetic_dataset(
            n=int(opts.get("n", 1000)),
            classes=int(opts.get("classes", 10)),
            size=int(opts.get("size", 32)),
            seed=int(opts.get("seed", 0)),
            split=opts.get("split", split),
        )
    else:
        ds = load_dataset(path, split=split)
    if limit:
        ds = ds.subset(limit)
    return ds


def _outdir(path):
    os.makedirs(path, exist_ok=True)
    return path


def _save_template(template: SpectralTemplate, out, stem):
    save_matrix_csv(os.path.join(out, stem + ".csv"), template.grid)
    render_heatmap_png(template.grid, os.path.join(out, stem + ".png"))


# --- subcommands -----------------------------------------------------------


def cmd_dataset(args):
    ds = make_synthetic_dataset(
        n=args.n, classes=args.classes, size=args.size, seed=args.seed,
        split=args.split,
    )
    out = _outdir(args.out)
    save_dataset(out, ds)
    config = {
        "n": args.n, "classes": args.classes, "size": args.size,
        "seed": args.seed, "split": args.split,
    }
    write_manifest(os.path.join(out, "manifest.json"), "dataset", config, args.seed)
    print(json.dumps({"out": out, "images": len(ds), "classes": ds.class_count}))


def cmd_spectrum(args):
    ds = _resolve_dataset(args.dataset, limit=args.limit)
    out = _outdir(args.out)
    if args.corruption:
        spec = CorruptionSpec(args.corruption, args.severity, seed=args.seed)
        template = corruption_delta_spectrum(ds.images, spec)
        stem = f"delta_spectrum_{args.corruption}_s{args.severity}"
    else:
        template = dataset_spectrum(ds.images, source=ds.provenance)
        stem = "dataset_spectrum"
    _save_template(template, out, stem)
    config = {
        "dataset": args.dataset, "corruption": args.corruption,
        "severity": args.severity, "limit": args.limit, "seed": args.seed,
    }
    write_manifest(os.path.join(out, "manifest.json"), "spectrum", config, args.seed)
    print(json.dumps({"out": out, "source": template.source}))


_STAGE_BUILDERS = {
    "flip_crop": lambda st, _: FlipCrop(pad=st.get("pad", 4)),
    "gaussian": lambda st, _: GaussianStage(
        st["sigma"], per_image=st.get("per_image", False)
    ),
    "band_limited": lambda st, _: BandNoiseStage(
        FilterSpec(st["mode"], st["bandwidth"]), st["target_norm"]
    ),
    "matched": lambda st, _: MatchedNoiseStage(
        SpectralTemplate(load_matrix_csv(st["template"]), source=st["template"])
    ),
    "corruption_set": lambda st, _: CorruptionSetStage(
        tuple(st["names"]), tuple(st.get("severities", SEVERITIES))
    ),
    "adversarial": lambda st, seed: AdversarialStage(
        PgdConfig(
            epsilon=st.get("epsilon", 8 / 255),
            step_size=st.get("step_size", 2 / 255),
            steps=st.get("steps", 7),
            random_init=st.get("random_init", True),
            seed=seed,
        )
    ),
}


def cmd_train(args):
    config = load_config(args.config)
    seed = config.get("seed", 0)
    dataset_cfg = config["dataset"]
    if "synthetic" in dataset_cfg:
        train_ds = make_synthetic_dataset(**dataset_cfg["synthetic"])
    else:
        train_ds = load_dataset(dataset_cfg["train"], split="train")
    if "limit" in dataset_cfg:
        train_ds = train_ds.subset(dataset_cfg["limit"])
    eval_ds = None
    if "synthetic_test" in dataset_cfg:
        eval_ds = make_synthetic_dataset(**dataset_cfg["synthetic_test"])
    elif "test" in dataset_cfg:
        eval_ds = load_dataset(dataset_cfg["test"], split="test")

    stages = tuple(
        _STAGE_BUILDERS[st["kind"]](st, seed) for st in config.get("augmentation", ())
    )
    front_end = None
    if config.get("front_end"):
        front_end = FilterSpec(
            config["front_end"]["mode"], config["front_end"]["bandwidth"]
        )
    tc = config["train"]
    train_cfg = TrainConfig(
        epochs=tc["epochs"],
        batch_size=tc["batch_size"],
        learning_rate=tc.get("learning_rate", 0.02),
        lr_decay=tc.get("lr_decay", 0.1),
        lr_decay_epochs=tuple(tc.get("lr_decay_epochs", ())),
        momentum=tc.get("momentum", 0.9),
        weight_decay=tc.get("weight_decay", 0.0),
        seed=seed,
        augmentation=stages,
        front_end=front_end,
    )
    arch = config.get("model", {}).get("arch", "smallconv")
    model = train(train_ds, train_cfg, arch=arch, eval_dataset=eval_ds)

    out = _outdir(config["out"])
    save_checkpoint(os.path.join(out, "model.json"), model, arch, seed)
    with open(os.path.join(out, "train_log.csv"), "w") as fh:
        keys = list(model.train_log[0])
        fh.write(",".join(keys) + "\n")
        for row in model.train_log:
            fh.write(",".join(format(row[k], ".17g") if isinstance(row[k], float)
                              else str(row[k]) for k in keys) + "\n")
    write_manifest(os.path.join(out, "manifest.json"), "train", config, seed)
    print(json.dumps({"out": out, "final": model.train_log[-1]}))


def cmd_heatmap(args):
    model = _load_model(args.model)
    ds = _resolve_dataset(args.dataset, limit=args.limit)
    params = PerturbationParams(v=args.norm, seed=args.seed)
    out = _outdir(args.out)
    if args.layer:
        hm = layer_heatmap(
            model, ds.images, args.layer, params,
            window=args.window, clip=args.clip, full_grid=args.full_grid,
        )
        stem = f"heatmap_layer_{args.layer}"
    else:
        hm = error_heatmap(
            model, ds.images, ds.labels, params,
            window=args.window, clip=args.clip, full_grid=args.full_grid,
        )
        stem = "heatmap_error"
    save_heatmap(os.path.join(out, stem), hm)
    render_heatmap_png(hm, os.path.join(out, stem + ".png"))
    config = {
        "model": args.model, "dataset": args.dataset, "norm": args.norm,
        "layer": args.layer, "window": args.window, "clip": args.clip,
        "full_grid": args.full_grid, "limit": args.limit, "seed": args.seed,
    }
    write_manifest(os.path.join(out, "manifest.json"), "heatmap", config, args.seed)
    print(json.dumps({"out": out, "grid_mean": float(hm.grid.mean())}))


def cmd_bandcurve(args):
    model = _load_model(args.model)
    ds = _resolve_dataset(args.dataset, limit=args.limit)
    bandwidths = [int(b) for b in args.bandwidths.split(",")]
    rows = bandlimited_error_curve(
        model, ds.images, ds.labels, args.mode, [args.norm], bandwidths,
        seed=args.seed, clip=args.clip,
    )
    out = _outdir(args.out)
    save_bandcurve_csv(os.path.join(out, "bandcurve.csv"), rows)
    config = {
        "model": args.model, "dataset": args.dataset, "mode": args.mode,
        "norm": args.norm, "bandwidths": bandwidths, "clip": args.clip,
        "limit": args.limit, "seed": args.seed,
    }
    write_manifest(os.path.join(out, "manifest.json"), "bandcurve", config, args.seed)
    print(json.dumps({"out": out, "rows": rows}))


def cmd_evaluate(args):
    model = _load_model(args.model)
    baseline = _load_model(args.baseline) if args.baseline else None
    ds = _resolve_dataset(args.dataset, limit=args.limit)
    names = [name for name, _ in corruption_suite()]
    report = accuracy_table(model, ds, names, seed=args.seed)
    out = _outdir(args.out)
    summary = {
        "average_accuracy": report.average_accuracy,
        "clean_error": report.clean_error,
        "per_corruption": report.per_corruption_accuracy,
    }
    base_report = None
    if baseline is not None:
        base_report = accuracy_table(baseline, ds, names, seed=args.seed)
        summary["mce"] = mce(report.error_grid, base_report.error_grid)
    save_report(os.path.join(out, "report.csv"), report, base_report)
    energies = {
        name: corruption_energy_fraction(ds.images[: args.energy_limit], name,
                                         seed=args.seed)[0]
        for name in names
    }
    save_energy_csv(os.path.join(out, "energy.csv"), energies)
    with open(os.path.join(out, "summary.json"), "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    config = {
        "model": args.model, "baseline": args.baseline, "dataset": args.dataset,
        "suite": args.suite, "limit": args.limit,
        "energy_limit": args.energy_limit, "seed": args.seed,
    }
    write_manifest(os.path.join(out, "manifest.json"), "evaluate", config, args.seed)
    print(json.dumps(summary))


def cmd_scatter(args):
    report, baseline = load_report(args.report)
    if baseline is None:
        raise ValueError("report has no baseline_error column; rerun evaluate --baseline")
    energies = load_energy_csv(args.energy)
    points = scatter_points(report, baseline, energies)
    k, r = scatter_fit(points)
    result = {"k": k, "r": r, "points": points}
    if args.out:
        out = _outdir(args.out)
        with open(os.path.join(out, "scatter.json"), "w") as fh:
            json.dump(result, fh, indent=2, sort_keys=True)
            fh.write("\n")
        config = {"report": args.report, "energy": args.energy}
        write_manifest(os.path.join(out, "manifest.json"), "scatter", config, 0)
    print(json.dumps({"k": k, "r": r}))


def cmd_attack_fourier(args):
    model = _load_model(args.model)
    image = load_tensor(args.image).astype(np.float64)
    i, j = (int(t) for t in args.index.split(","))
    before = int(model.predict(image[None])[0])
    params = PerturbationParams(v=args.norm, sign_policy=args.sign, seed=args.seed)
    perturbed = basis_perturb(image, FrequencyIndex(i, j), params, clip=args.clip)
    after = int(model.predict(perturbed[None])[0])
    result = {
        "index": [i, j], "norm": args.norm,
        "prediction_before": before, "prediction_after": after,
        "flipped": before != after,
    }
    if args.out:
        out = _outdir(args.out)
        save_tensor(os.path.join(out, "perturbed.npy"), perturbed.astype("<f8"))
        with open(os.path.join(out, "attack.json"), "w") as fh:
            json.dump(result, fh, indent=2, sort_keys=True)
            fh.write("\n")
        config = {
            "model": args.model, "image": args.image, "index": args.index,
            "norm": args.norm, "sign": args.sign, "clip": args.clip,
            "seed": args.seed,
        }
        write_manifest(os.path.join(out, "manifest.json"), "attack-fourier",
                       config, args.seed)
    print(json.dumps(result))


def cmd_attack_pgd(args):
    model = _load_model(args.model)
    ds = _resolve_dataset(args.dataset, limit=args.limit)
    cfg = PgdConfig(
        epsilon=args.eps, step_size=args.step_size, steps=args.steps,
        seed=args.seed,
    )
    result = adv_perturbation_spectrum(model, ds.images, ds.labels, cfg)
    x_adv, success = pgd_attack(model, ds.images, ds.labels, cfg)
    out = _outdir(args.out)
    save_tensor(os.path.join(out, "adversarial.npy"), x_adv.astype("<f4"))
    _save_template(result.template, out, "adv_delta_spectrum")
    summary = {
        "success_rate": result.success_rate,
        "n_success": result.n_success,
        "n_zero_delta": result.n_zero_delta,
    }
    with open(os.path.join(out, "summary.json"), "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    config = {
        "model": args.model, "dataset": args.dataset, "eps": args.eps,
        "step_size": args.step_size, "steps": args.steps,
        "limit": args.limit, "seed": args.seed,
    }
    write_manifest(os.path.join(out, "manifest.json"), "attack-pgd", config, args.seed)
    print(json.dumps(summary))


def build_parser() -> _Parser:
    parser = _Parser(prog="specrob", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("dataset", help="materialize a synthetic dataset")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--classes", type=int, default=10)
    p.add_argument("--size", type=int, default=32)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--split", default="train")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_dataset)

    p = sub.add_parser("spectrum", help="dataset or corruption-delta spectrum")
    p.add_argument("--dataset", required=True)
    p.add_argument("--corruption")
    p.add_argument("--severity", type=int, default=3)
    p.add_argument("--limit", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("train", help="train a built-in model from a JSON config")
    p.add_argument("--config", required=True)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("heatmap", help="Fourier heat map (error or layer delta)")
    p.add_argument("--model", required=True)
    p.add_argument("--dataset", required=True)
    p.add_argument("--norm", type=float, default=4.0)
    p.add_argument("--layer")
    p.add_argument("--window", type=int)
    p.add_argument("--clip", action="store_true")
    p.add_argument("--full-grid", action="store_true")
    p.add_argument("--limit", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_heatmap)

    p = sub.add_parser("bandcurve", help="error under fixed-norm band-limited noise")
    p.add_argument("--model", required=True)
    p.add_argument("--dataset", required=True)
    p.add_argument("--mode", choices=["low", "high"], required=True)
    p.add_argument("--norm", type=float, default=8.0)
    p.add_argument("--bandwidths", required=True, help="comma-separated ints")
    p.add_argument("--clip", action="store_true")
    p.add_argument("--limit", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_bandcurve)

    p = sub.add_parser("evaluate", help="corruption accuracy table and mCE")
    p.add_argument("--model", required=True)
    p.add_argument("--dataset", required=True)
    p.add_argument("--suite", default="default")
    p.add_argument("--baseline")
    p.add_argument("--limit", type=int)
    p.add_argument("--energy-limit", type=int, default=256)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("scatter", help="fit accuracy delta vs energy fraction")
    p.add_argument("--report", required=True)
    p.add_argument("--energy", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_scatter)

    p = sub.add_parser("attack", help="perturbation attacks")
    attack_sub = p.add_subparsers(dest="attack_kind", required=True)

    pf = attack_sub.add_parser("fourier", help="single-query basis perturbation")
    pf.add_argument("--model", required=True)
    pf.add_argument("--image", required=True, help="NPY file with a (C,H,W) image")
    pf.add_argument("--index", required=True, help="i,j in unshifted coordinates")
    pf.add_argument("--norm", type=float, required=True)
    pf.add_argument("--sign", choices=["random", "+1", "-1"], default="+1")
    pf.add_argument("--clip", action="store_true")
    pf.add_argument("--seed", type=int, default=0)
    pf.add_argument("--out")
    pf.set_defaults(func=cmd_attack_fourier)

    pp = attack_sub.add_parser("pgd", help="PGD attack set + delta spectrum")
    pp.add_argument("--model", required=True)
    pp.add_argument("--dataset", required=True)
    pp.add_argument("--eps", type=float, default=8 / 255)
    pp.add_argument("--step-size", type=float, default=2 / 255)
    pp.add_argument("--steps", type=int, default=20)
    pp.add_argument("--limit", type=int)
    pp.add_argument("--seed", type=int, default=0)
    pp.add_argument("--out", required=True)
    pp.set_defaults(func=cmd_attack_pgd)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        _emit_error(exc)
        return 1
    try:
        args.func(args)
    except (ValueError, FileNotFoundError, KeyError) as exc:
        _emit_error(exc)
        return 1
    except Exception as exc:  # runtime failures
        _emit_error(exc)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
