"""Command line tying the library into file-based experiments.

Exit codes: 0 success, 1 usage error, 2 data or validation error. All
diagnostics go to stderr; results go to the requested output files.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from .experiment import ConfigError, load_experiment_config
from .gridio import GridFileError, read_grid, write_grid, write_pgm
from .metrics import evaluate_predictions
from .processes import corrupt, noising
from .restorer import ConvRestorer, ModelFormatError, load_model, save_model
from .rng import draw_noise, seeded_rng
from .sampler import NonFiniteStateError, sample
from .trainer import make_synthetic_dataset, train_loop, write_loss_history


class _Parser(argparse.ArgumentParser):
    # usage errors exit 1; data errors exit 2 (handled in main)
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _log(message: str) -> None:
    print(message, file=sys.stderr)


def cmd_synth_data(args) -> int:
    config = load_experiment_config(args.config)
    dataset = make_synthetic_dataset(config.data)
    os.makedirs(args.out, exist_ok=True)
    for i, (x0, u) in enumerate(dataset):
        write_grid(Path(args.out) / f"sample_{i:04d}.x0.grid", x0)
        write_grid(Path(args.out) / f"sample_{i:04d}.prior.grid", u)
    _log(f"wrote {len(dataset)} (clean, prior) pairs to {args.out}")
    return 0


def cmd_noise(args) -> int:
    config = load_experiment_config(args.config)
    x0 = read_grid(args.x0)
    u = read_grid(args.prior)
    draw = draw_noise(config.process, x0.shape, seeded_rng(args.seed))
    write_grid(args.out, noising(config.process, x0, u, args.n, draw))
    return 0


def cmd_corrupt(args) -> int:
    config = load_experiment_config(args.config)
    u = read_grid(args.prior)
    state, _ = corrupt(config.process, u, seeded_rng(args.seed))
    write_grid(args.out, state)
    return 0


def _load_dataset_dir(data_dir: str) -> list:
    clean_files = sorted(Path(data_dir).glob("*.x0.grid"))
    if not clean_files:
        raise GridFileError(f"no *.x0.grid files found in {data_dir}")
    dataset = []
    for clean_path in clean_files:
        prior_path = clean_path.with_name(clean_path.name.replace(".x0.grid", ".prior.grid"))
        if not prior_path.exists():
            raise GridFileError(f"missing prior file {prior_path}")
        dataset.append((read_grid(clean_path), read_grid(prior_path)))
    return dataset


def cmd_train(args) -> int:
    config = load_experiment_config(args.config)
    dataset = _load_dataset_dir(args.data)
    # init stream offset by one from the shuffling/corruption stream
    model = ConvRestorer.initialized(seeded_rng(config.train.seed + 1))
    model, history = train_loop(model, dataset, config.process, config.train)
    save_model(model, args.out)
    loss_out = args.loss_out or f"{args.out}.loss.csv"
    write_loss_history(loss_out, history)
    if history:
        _log(
            f"trained {len(history)} epochs on {len(dataset)} samples, "
            f"loss {history[0]:.6f} -> {history[-1]:.6f}"
        )
    _log(f"model written to {args.out}, loss history to {loss_out}")
    return 0


def cmd_sample(args) -> int:
    config = load_experiment_config(args.config)
    model = load_model(args.model)
    u = read_grid(args.prior)
    state, _ = sample(
        config.process, config.sampler_config(), model, u, seeded_rng(args.seed)
    )
    write_grid(args.out, state)
    return 0


def cmd_eval(args) -> int:
    clean_files = sorted(Path(args.ref).glob("*.x0.grid"))
    if not clean_files:
        raise GridFileError(f"no *.x0.grid files found in {args.ref}")
    references, priors, predictions = [], [], []
    for clean_path in clean_files:
        stem = clean_path.name[: -len(".x0.grid")]
        prior_path = clean_path.with_name(f"{stem}.prior.grid")
        hyp_path = Path(args.hyp) / f"{stem}.grid"
        if not prior_path.exists():
            raise GridFileError(f"missing prior file {prior_path}")
        if not hyp_path.exists():
            raise GridFileError(f"missing hypothesis file {hyp_path}")
        references.append(read_grid(clean_path))
        priors.append(read_grid(prior_path))
        predictions.append(read_grid(hyp_path))
    report = evaluate_predictions(references, priors, predictions)
    with open(args.report, "w") as fh:
        fh.write(report.to_json())
        fh.write("\n")
    _log(
        f"evaluated {len(references)} pairs: rmse={report.rmse:.6f} "
        f"prior_rmse={report.prior_rmse:.6f} ratio={report.improvement_ratio:.4f}"
    )
    return 0


def cmd_render(args) -> int:
    write_pgm(args.out, read_grid(args.input))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ddk", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth-data", help="generate a synthetic (clean, prior) dataset")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_synth_data)

    p = sub.add_parser("noise", help="corrupt a clean grid at one step index")
    p.add_argument("--config", required=True)
    p.add_argument("--x0", required=True, help="clean grid file")
    p.add_argument("--prior", required=True, help="prior grid file")
    p.add_argument("--n", required=True, type=int, help="step index in [0, N]")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", required=True, type=int)
    p.set_defaults(func=cmd_noise)

    p = sub.add_parser("corrupt", help="build the fully corrupted initial sample")
    p.add_argument("--config", required=True)
    p.add_argument("--prior", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--seed", required=True, type=int)
    p.set_defaults(func=cmd_corrupt)

    p = sub.add_parser("train", help="train the conv restorer on a dataset directory")
    p.add_argument("--config", required=True)
    p.add_argument("--data", required=True, help="directory from synth-data")
    p.add_argument("--out", required=True, help="model file")
    p.add_argument("--loss-out", help="loss CSV path (default: <out>.loss.csv)")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("sample", help="iteratively generate a clean grid from a prior")
    p.add_argument("--config", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--prior", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--seed", required=True, type=int)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("eval", help="score hypotheses against references and priors")
    p.add_argument("--ref", required=True, help="directory with *.x0.grid and *.prior.grid")
    p.add_argument("--hyp", required=True, help="directory with <stem>.grid hypotheses")
    p.add_argument("--report", required=True, help="JSON report path")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("render", help="render a grid file as a PGM heatmap")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_render)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (
        ConfigError,
        GridFileError,
        ModelFormatError,
        NonFiniteStateError,
        ValueError,
        RuntimeError,
        OSError,
    ) as exc:
        print(f"ddk: error: {exc}", file=sys.stderr)
        return 2


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
