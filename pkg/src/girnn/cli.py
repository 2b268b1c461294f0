"""Command-line experiment runner.

Verbs: speckles, train, reconstruct, sweep, compare, report. Settings come
from an optional key=value config file overridden by flags; every seed is
printed at startup. Exit codes: 0 success, 1 argument errors, 2 data or
format errors, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import fields
from pathlib import Path

import numpy as np

from .bench import (
    BenchReport,
    ExperimentConfig,
    ReportRow,
    emit_artifacts,
    run_method_comparison,
    run_rate_sweep,
    write_pgm,
)
from .checkpoint import load_checkpoint, save_checkpoint
from .correlation import reconstruct_correlation
from .dataset import (
    MnistSet,
    build_sequences,
    handwritten_digit_corpus,
    load_mnist_idx,
    select_test_targets,
    select_training_subset,
)
from .errors import FormatError, NumericalError
from .fista import CsProblem, fista_reconstruct
from .imaging import generate_speckles, sampling_count
from .training import predict_image, train


def parse_config_file(path: str | Path) -> dict:
    """Plain key=value lines; '#' starts a comment, blank lines ignored."""
    values: dict[str, str] = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected key=value, got {raw!r}")
        key, value = line.split("=", 1)
        values[key.strip().replace("-", "_")] = value.strip()
    return values


_CONFIG_KEYS = {
    "rate": float,
    "seed_speckle": int,
    "seed_init": int,
    "seed_shuffle": int,
    "seed_subset": int,
    "hidden": int,
    "layers": int,
    "train_size": int,
    "epochs": int,
    "batch": int,
    "deterministic": lambda s: s.lower() in ("1", "true", "yes"),
    "out": str,
    "method": str,
    "count": int,
    "distribution": str,
    "mnist_images": str,
    "mnist_labels": str,
    "cs_lambda": float,
    "cs_max_iterations": int,
    "target": int,
    "checkpoint": str,
    "rates": str,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="girnn", description="Ghost-imaging simulation and benchmark runner"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="key=value settings file")
        p.add_argument("--rate", type=float, help="sampling rate in (0, 1]")
        p.add_argument("--seed-speckle", type=int, dest="seed_speckle")
        p.add_argument("--seed-init", type=int, dest="seed_init")
        p.add_argument("--seed-shuffle", type=int, dest="seed_shuffle")
        p.add_argument("--seed-subset", type=int, dest="seed_subset")
        p.add_argument("--hidden", type=int)
        p.add_argument("--layers", type=int)
        p.add_argument("--train-size", type=int, dest="train_size")
        p.add_argument("--epochs", type=int)
        p.add_argument("--batch", type=int)
        p.add_argument("--deterministic", action="store_true", default=None)
        p.add_argument("--out", help="output directory")
        p.add_argument("--distribution", choices=("binary", "uniform"))
        p.add_argument("--mnist-images", dest="mnist_images")
        p.add_argument("--mnist-labels", dest="mnist_labels")
        p.add_argument("--cs-lambda", type=float, dest="cs_lambda")
        p.add_argument("--cs-max-iterations", type=int, dest="cs_max_iterations")

    p = sub.add_parser("speckles", help="generate a speckle sequence and save it")
    common(p)
    p.add_argument("--count", type=int, help="pattern count (default from --rate)")

    p = sub.add_parser("train", help="train a network and write a checkpoint")
    common(p)

    p = sub.add_parser("reconstruct", help="reconstruct one target with one method")
    common(p)
    p.add_argument("--method", choices=("gi", "cs", "rnn"))
    p.add_argument("--target", type=int, help="digit class of the test target")
    p.add_argument("--checkpoint", help="trained model file (rnn method)")

    p = sub.add_parser("sweep", help="sampling-rate sweep")
    common(p)
    p.add_argument("--rates", help="comma-separated sampling rates")

    p = sub.add_parser("compare", help="three-method comparison at one rate")
    common(p)

    p = sub.add_parser("report", help="print mean PSNR lines from a report.csv")
    common(p)
    return parser


def _settings(args: argparse.Namespace) -> dict:
    """Merge config file values (typed) under explicit command-line flags."""
    merged: dict = {}
    if args.config:
        for key, raw in parse_config_file(args.config).items():
            if key not in _CONFIG_KEYS:
                raise ValueError(f"unknown config key {key!r}")
            merged[key] = _CONFIG_KEYS[key](raw)
    for key in _CONFIG_KEYS:
        value = getattr(args, key, None)
        if value is not None:
            merged[key] = value
    return merged


def _experiment_config(s: dict) -> ExperimentConfig:
    kwargs = {}
    rename = {
        "hidden": "hidden_size",
        "layers": "layer_count",
        "batch": "batch_size",
        "out": "output_dir",
    }
    valid = {f.name for f in fields(ExperimentConfig)}
    for key, value in s.items():
        name = rename.get(key, key)
        if name in valid:
            kwargs[name] = value
    if "rates" in s:
        kwargs["sampling_rates"] = tuple(
            float(r) for r in str(s["rates"]).split(",")
        )
    return ExperimentConfig(**kwargs)


def _load_corpora(s: dict) -> tuple[MnistSet, MnistSet]:
    """(train pool, test pool); real IDX files when given, offline corpus else."""
    if "mnist_images" in s or "mnist_labels" in s:
        if not ("mnist_images" in s and "mnist_labels" in s):
            raise ValueError("--mnist-images and --mnist-labels must be given together")
        full = load_mnist_idx(s["mnist_images"], s["mnist_labels"])
        split = max(1, int(len(full) * 0.85))
        return (
            MnistSet(full.images[:split], full.labels[:split]),
            MnistSet(full.images[split:], full.labels[split:]),
        )
    corpus = handwritten_digit_corpus()
    split = 1500
    return (
        MnistSet(corpus.images[:split], corpus.labels[:split]),
        MnistSet(corpus.images[split:], corpus.labels[split:]),
    )


def _print_seeds(config: ExperimentConfig) -> None:
    print(
        f"seeds: speckle={config.seed_speckle} init={config.seed_init} "
        f"shuffle={config.seed_shuffle} subset={config.seed_subset}"
    )


def _prepare(s: dict) -> tuple[ExperimentConfig, MnistSet, MnistSet]:
    config = _experiment_config(s)
    _print_seeds(config)
    train_pool, test_pool = _load_corpora(s)
    train_set = select_training_subset(
        train_pool, min(config.train_size, len(train_pool)), config.seed_subset
    )
    test_set = select_test_targets(test_pool, config.seed_subset)
    return config, train_set, test_set


def cmd_speckles(s: dict) -> int:
    config = _experiment_config(s)
    _print_seeds(config)
    pixel_count = 28 * 28
    count = s.get("count") or sampling_count(s.get("rate", 0.25), pixel_count)
    seq = generate_speckles(config.seed_speckle, count, 28, 28, config.distribution)
    out = Path(config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    path = out / "speckles.npz"
    np.savez(path, stack=seq.stack, seed=seq.seed, distribution=seq.distribution)
    print(f"wrote {count} patterns to {path}")
    return 0


def cmd_train(s: dict) -> int:
    config, train_set, _ = _prepare(s)
    rate = s.get("rate", 0.25)
    count = sampling_count(rate, 28 * 28)
    speckles = generate_speckles(config.seed_speckle, count, 28, 28, config.distribution)
    dataset = build_sequences(train_set, speckles, rate)
    net, history = train(dataset, config.train_config())
    out = Path(config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    path = out / "model.ckpt"
    save_checkpoint(net, path)
    print(f"final training loss {history[-1][1]:.6f}; checkpoint at {path}")
    return 0


def cmd_reconstruct(s: dict) -> int:
    config, _, test_set = _prepare(s)
    method = s.get("method")
    if method not in ("gi", "cs", "rnn"):
        raise ValueError("--method must be one of gi, cs, rnn")
    digit = s.get("target", 0)
    try:
        idx = test_set.labels.index(digit)
    except ValueError:
        raise ValueError(f"no test target with digit class {digit}") from None
    target = test_set.images[idx]
    rate = s.get("rate", 0.25)
    count = sampling_count(rate, 28 * 28)
    speckles = generate_speckles(config.seed_speckle, count, 28, 28, config.distribution)
    [(measurements, _)] = build_sequences(
        MnistSet([target], [digit]), speckles, rate
    )
    if method == "gi":
        recon = reconstruct_correlation(measurements)
    elif method == "cs":
        recon = fista_reconstruct(
            CsProblem.from_measurements(
                measurements,
                lam=s.get("cs_lambda"),
                max_iterations=s.get("cs_max_iterations", 500),
            )
        ).image
    else:
        if "checkpoint" not in s:
            raise ValueError("rnn reconstruction needs --checkpoint")
        net = load_checkpoint(s["checkpoint"])
        recon = predict_image(net, measurements)
    out = Path(config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    path = out / f"{method}_rate{rate:g}_target{digit}.pgm"
    write_pgm(recon, path)
    from .bench import psnr

    print(f"{method} target {digit}: {psnr(recon, target):.2f} dB -> {path}")
    return 0


def cmd_sweep(s: dict) -> int:
    config, train_set, test_set = _prepare(s)
    report, recons = run_rate_sweep(train_set, test_set, config)
    emit_artifacts(report, recons, config.output_dir)
    for method, rate in report.method_rates():
        print(f"{method} rate {rate:g}: mean {report.mean(method, rate):.2f} dB")
    print(f"artifacts in {config.output_dir}")
    return 0


def cmd_compare(s: dict) -> int:
    config, train_set, test_set = _prepare(s)
    rate = s.get("rate", 0.25)
    report, recons = run_method_comparison(train_set, test_set, config, rate=rate)
    emit_artifacts(report, recons, config.output_dir)
    for method in ("gi", "cs", "rnn"):
        print(f"{method}: mean {report.mean(method, rate):.2f} dB")
    print(f"rnn - cs gap: {report.metadata['gap_rnn_over_cs_db']} dB")
    print(f"rnn - gi gap: {report.metadata['gap_rnn_over_gi_db']} dB")
    print(f"artifacts in {config.output_dir}")
    return 0


def cmd_report(s: dict) -> int:
    config = _experiment_config(s)
    path = Path(config.output_dir) / "report.csv"
    if not path.exists():
        raise FormatError(f"no report at {path}")
    report = BenchReport()
    lines = path.read_text(encoding="utf-8").splitlines()
    if not lines or lines[0] != "method,rate,target_id,psnr_db":
        raise FormatError(f"{path}: unexpected CSV header")
    for line in lines[1:]:
        method, rate, tid, value = line.split(",")
        if tid == "mean":
            continue
        report.rows.append(ReportRow(method, float(rate), tid, float(value)))
    for method, rate in report.method_rates():
        print(f"{method} rate {rate:g}: mean {report.mean(method, rate):.4f} dB")
    return 0


_COMMANDS = {
    "speckles": cmd_speckles,
    "train": cmd_train,
    "reconstruct": cmd_reconstruct,
    "sweep": cmd_sweep,
    "compare": cmd_compare,
    "report": cmd_report,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return 0 if e.code in (0, None) else 1
    try:
        settings = _settings(args)
        return _COMMANDS[args.command](settings)
    except (ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except FormatError as e:
        print(f"format error: {e}", file=sys.stderr)
        return 2
    except NumericalError as e:
        print(f"numerical failure: {e}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
