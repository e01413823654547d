"""
TONet command line.

    tonet synth     synthetic corpus
    tonet features  CFP / TCFP feature files
    tonet train     train one variant
    tonet infer     wav + checkpoint -> label CSV
    tonet eval      score an estimate CSV against a reference CSV
    tonet ablate    base / d / tc / f / full grid over seeds
    tonet plot      SVG of an estimate over a reference

Exit codes: 0 success, 1 usage error, 2 runtime or data error.
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional, Sequence

import pandas as pd

from . import __version__
from .data.corpus import read_corpus
from .data.labels import read_contour_csv, write_contour_csv
from .data.synth import SynthSpec, make_corpus
from .dsp.audio import load_wav
from .dsp.cfp import CfpConfig, extract_features, save_cfp
from .dsp.tcfp import apply_rearrange, build_permutation
from .evaluation.metrics import METRIC_NAMES, evaluate_contours, format_table, results_frame
from .model.config import VARIANTS, ModelConfig, load_model_config, model_config_for_preset, to_flat
from .model.params import load_params
from .model.tonet import init_params
from .plots import plot_contours
from .training.config import TrainConfig, train_config_for_preset
from .training.inference import predict_contour
from .training.segments import clip_features
from .training.trainer import evaluate_clips, split_holdout, train
from .utils import configure_logging, echo_config, flat_dict, save_output

logger = logging.getLogger(__name__)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        raise UsageError(f"{self.prog}: error: {message}")


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def _existing_file(text: str) -> Path:
    path = Path(text)
    if not path.is_file():
        raise argparse.ArgumentTypeError(f"no such file: {text}")
    return path


def _existing_dir(text: str) -> Path:
    path = Path(text)
    if not path.is_dir():
        raise argparse.ArgumentTypeError(f"no such directory: {text}")
    return path


# ===== Config resolution =====


def resolve_model_config(args: argparse.Namespace) -> ModelConfig:
    """Preset < --config file < flags."""
    overrides = flat_dict(
        {
            "preset": getattr(args, "preset", None),
            "variant": getattr(args, "variant", None),
            "backbone": getattr(args, "backbone", None),
            "seed": getattr(args, "seed", None),
        }
    )
    config_path = getattr(args, "config", None)
    if config_path is not None:
        return load_model_config(config_path, **overrides)
    preset = overrides.pop("preset", "desk")
    return model_config_for_preset(preset, **overrides)


def resolve_train_config(args: argparse.Namespace, model_config: ModelConfig) -> TrainConfig:
    return train_config_for_preset(
        model_config.preset,
        epochs=args.epochs,
        batch_size=getattr(args, "batch_size", None),
        learning_rate=getattr(args, "lr", None),
        seed=args.seed,
    )


# ===== Commands =====


def cmd_synth(args: argparse.Namespace) -> None:
    template = SynthSpec(duration=args.duration, accompaniment=not args.no_accompaniment)
    make_corpus(args.out, args.seed, args.n_clips, template)
    echo_config(args.out, {"corpus": {"seed": args.seed, "n_clips": args.n_clips}, "synth": template.model_dump(exclude={"events", "seed"})})
    print(f"Wrote {args.n_clips} clips to {args.out}")


def cmd_features(args: argparse.Namespace) -> None:
    config = CfpConfig()
    waves = [load_wav(path) for path in args.wav]
    plan = build_permutation(config.num_bins, config.bins_per_octave)
    out = Path(args.out)
    for path, cfp in zip(args.wav, extract_features(waves, config, workers=args.workers)):
        save_cfp(out / f"{Path(path).stem}.cfp", cfp)
        if args.tcfp:
            save_cfp(out / f"{Path(path).stem}.tcfp", apply_rearrange(cfp, plan))
    echo_config(out, {"cfp": config.model_dump()})
    print(f"Wrote features for {len(waves)} files to {out}")


def cmd_train(args: argparse.Namespace) -> None:
    model_config = resolve_model_config(args)
    train_config = resolve_train_config(args, model_config)
    corpus = read_corpus(args.corpus)
    result = train(corpus, model_config, train_config, args.out)
    last = result.history.iloc[-1]
    print(f"best epoch {result.best_epoch} (OA {result.best_oa:.4f}); final loss {last['loss']:.6f}")
    print(f"checkpoints in {result.out_dir}")


def cmd_infer(args: argparse.Namespace) -> None:
    config_path = args.config or args.checkpoint.parent / "model.cfg"
    config = load_model_config(config_path)
    params = load_params(args.checkpoint, init_params(config))
    wave = load_wav(args.wav)
    contour = predict_contour(params, config, wave)
    out = Path(args.out)
    write_contour_csv(out, contour)
    sections = {"model": to_flat(config), "infer": {"wav": args.wav, "checkpoint": args.checkpoint}}
    echo_config(out.parent, sections, name=f"{out.stem}.config.txt")
    print(f"Wrote {len(contour)} frames to {args.out}")


def cmd_eval(args: argparse.Namespace) -> None:
    est = read_contour_csv(args.est)
    ref = read_contour_csv(args.ref)
    result = evaluate_contours(est, ref, args.tolerance)
    print(format_table(result))
    if args.csv:
        save_output(results_frame({Path(args.est).stem: result}), "Metrics", args.csv, float_format="%.6f")


def cmd_ablate(args: argparse.Namespace) -> None:
    corpus = read_corpus(args.corpus)
    out = Path(args.out)
    base_config = resolve_model_config(args)
    train_clips, held_clips = split_holdout(corpus, TrainConfig().holdout_fraction)
    cfp_config = CfpConfig()
    plan = build_permutation(base_config.num_bins, base_config.bins_per_octave)
    eval_features = clip_features(held_clips or train_clips, cfp_config, plan)

    variants = [v for v in VARIANTS if v in args.variants]
    rows = []
    for seed in args.seeds:
        for variant in variants:
            config = ModelConfig.model_validate({**base_config.model_dump(), "variant": variant, "seed": seed})
            train_config = train_config_for_preset(
                config.preset, epochs=args.epochs, batch_size=args.batch_size, seed=seed
            )
            run_dir = out / f"{variant}_seed{seed}"
            result = train(corpus, config, train_config, run_dir)
            best = load_params(result.best_path, init_params(config))
            scores = evaluate_clips(best, config, eval_features)
            rows.append({"variant": variant, "seed": seed, **scores.metrics()})
            logger.info("ablate %s seed %d: oa %.4f roa %.4f", variant, seed, scores.oa, scores.roa)

    summary = pd.DataFrame(rows, columns=["variant", "seed", *METRIC_NAMES])
    save_output(summary, "Ablation summary", out / "summary.csv", float_format="%.6f")
    (out / "report.txt").write_text(direction_report(summary))
    grid = {"seeds": args.seeds, "variants": variants, "epochs": args.epochs}
    echo_config(out, {"model": to_flat(base_config), "ablate": grid})
    print(summary.to_string(index=False, float_format=lambda v: f"{v:.4f}"))


def direction_report(summary: pd.DataFrame) -> str:
    """Per seed: does full match or beat base on OA and ROA."""
    lines = ["seed,full_ge_base_oa,full_ge_base_roa"]
    for seed, rows in summary.groupby("seed", sort=True):
        by_variant = rows.set_index("variant")
        if "full" not in by_variant.index or "base" not in by_variant.index:
            continue
        full, base = by_variant.loc["full"], by_variant.loc["base"]
        lines.append(f"{seed},{'yes' if full['oa'] >= base['oa'] else 'no'},{'yes' if full['roa'] >= base['roa'] else 'no'}")
    return "\n".join(lines) + "\n"


def cmd_plot(args: argparse.Namespace) -> None:
    est = read_contour_csv(args.est)
    ref = read_contour_csv(args.ref)
    plot_contours(est, ref, args.out, title=args.title)
    print(f"Wrote {args.out}")


# ===== Parser =====


def _add_model_flags(parser: argparse.ArgumentParser, variant: bool = True):
    parser.add_argument("--preset", choices=["paper", "desk"], default=None)
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--backbone", choices=["mlp", "conv-encdec"], default=None)
    parser.add_argument("--epochs", type=_positive_int, default=None)
    parser.add_argument("--batch-size", dest="batch_size", type=_positive_int, default=None)
    parser.add_argument("--config", type=_existing_file, default=None, help="model-config key=value file")
    if variant:
        parser.add_argument("--variant", choices=list(VARIANTS), default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="tonet", description="Tone-octave melody extraction toolkit")
    parser.add_argument("--version", action="version", version=f"tonet {__version__}")
    parser.add_argument("--verbose", action="store_true", help="debug logging")
    parser.add_argument("--quiet", action="store_true", help="warnings and errors only")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser, required=True)

    p = sub.add_parser("synth", help="write a synthetic corpus")
    p.add_argument("--out", required=True)
    p.add_argument("--n-clips", dest="n_clips", type=_positive_int, default=8)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--duration", type=float, default=2.56)
    p.add_argument("--no-accompaniment", dest="no_accompaniment", action="store_true")
    p.set_defaults(handler=cmd_synth)

    p = sub.add_parser("features", help="compute CFP (and TCFP) feature files")
    p.add_argument("--wav", nargs="+", required=True, type=_existing_file)
    p.add_argument("--out", required=True)
    p.add_argument("--tcfp", action="store_true")
    p.add_argument("--workers", type=_positive_int, default=1)
    p.set_defaults(handler=cmd_features)

    p = sub.add_parser("train", help="train one model variant")
    p.add_argument("--corpus", required=True, type=_existing_dir)
    p.add_argument("--out", required=True)
    p.add_argument("--lr", type=float, default=None)
    _add_model_flags(p)
    p.set_defaults(handler=cmd_train)

    p = sub.add_parser("infer", help="extract a melody contour from a wav file")
    p.add_argument("--wav", required=True, type=_existing_file)
    p.add_argument("--checkpoint", required=True, type=_existing_file)
    p.add_argument("--config", type=_existing_file, default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(handler=cmd_infer)

    p = sub.add_parser("eval", help="score an estimate against a reference")
    p.add_argument("--est", required=True, type=_existing_file)
    p.add_argument("--ref", required=True, type=_existing_file)
    p.add_argument("--tolerance", type=float, default=50.0)
    p.add_argument("--csv", default=None)
    p.set_defaults(handler=cmd_eval)

    p = sub.add_parser("ablate", help="train and score every variant")
    p.add_argument("--corpus", required=True, type=_existing_dir)
    p.add_argument("--out", required=True)
    p.add_argument("--seeds", nargs="+", type=int, default=[0])
    p.add_argument("--variant", dest="variants", nargs="+", choices=list(VARIANTS), default=list(VARIANTS))
    _add_model_flags(p, variant=False)
    p.set_defaults(handler=cmd_ablate)

    p = sub.add_parser("plot", help="SVG of estimate and reference contours")
    p.add_argument("--est", required=True, type=_existing_file)
    p.add_argument("--ref", required=True, type=_existing_file)
    p.add_argument("--out", required=True)
    p.add_argument("--title", default=None)
    p.set_defaults(handler=cmd_plot)
    return parser


def run(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(list(argv) if argv is not None else None)
    except UsageError as e:
        print(str(e), file=sys.stderr)
        return 1
    except SystemExit as e:
        return int(e.code or 0)

    configure_logging(verbose=args.verbose, quiet=args.quiet)
    try:
        args.handler(args)
    except (ValueError, OSError, RuntimeError) as e:
        logger.debug("Command failed", exc_info=True)
        print(f"error: {e}", file=sys.stderr)
        return 2
    return 0


def main(argv: Optional[List[str]] = None) -> None:
    sys.exit(run(argv))
