"""
Command-line entry point: ``python -m cli <subcommand> [options]``.

Exit codes: 0 success, 2 usage error, 3 data error, 4 numeric failure.
"""
import argparse
import json
import sys
from typing import Any, Callable, Dict, List, Optional

import numpy as np

from cli.commands import cmd_eval, cmd_merge, cmd_score, cmd_synth, cmd_train, cmd_train_clf
from config.config import Config
from utils.errors import CrowdAnomalyError, DataError, NumericError
from utils.logger import Logger

logger = Logger.get_logger(__name__)

EXIT_OK = 0
EXIT_USAGE = 2

CONFIG_KEYS = tuple(Config.defaults())


def _pipeline_options() -> argparse.ArgumentParser:
    parent = argparse.ArgumentParser(add_help=False)
    group = parent.add_argument_group("pipeline options")
    group.add_argument("--config", metavar="FILE", help="JSON or YAML file using the flag vocabulary")
    group.add_argument("--cube-p", type=int, help=f"cube side in pixels (default {Config.CUBE_P})")
    group.add_argument("--cube-q", type=int, help=f"cube depth in frames (default {Config.CUBE_Q})")
    group.add_argument("--spatial-stride", type=int, help="spatial stride (default: cube side)")
    group.add_argument("--temporal-stride", type=int, help="temporal stride (default: cube depth)")
    group.add_argument("--state-dim", type=int, help=f"LDS state dimension, <= q-1 (default {Config.STATE_DIM})")
    group.add_argument("--percentile", type=float,
                       help=f"threshold calibration percentile in (0, 100] (default {Config.THRESHOLD_PERCENTILE})")
    group.add_argument("--seed", type=int, help=f"seed, or base seed for eval runs (default {Config.SEED})")
    return parent


def _scene_options() -> argparse.ArgumentParser:
    parent = argparse.ArgumentParser(add_help=False)
    group = parent.add_argument_group("synthetic scene options")
    group.add_argument("--width", type=int, help=f"frame width (default {Config.SYNTH_WIDTH})")
    group.add_argument("--height", type=int, help=f"frame height (default {Config.SYNTH_HEIGHT})")
    group.add_argument("--particles", type=int, help=f"particle count (default {Config.SYNTH_PARTICLES})")
    group.add_argument("--frames", type=int, help=f"sequence length (default {Config.SYNTH_FRAMES})")
    group.add_argument("--dispersal-frame", type=int,
                       help=f"first Abnormal frame, < --frames (default {Config.SYNTH_DISPERSAL_FRAME})")
    group.add_argument("--speed-normal", type=float, help=f"wandering speed (default {Config.SYNTH_SPEED_NORMAL})")
    group.add_argument("--speed-abnormal", type=float,
                       help=f"dispersal speed (default {Config.SYNTH_SPEED_ABNORMAL})")
    return parent


def _classifier_options() -> argparse.ArgumentParser:
    parent = argparse.ArgumentParser(add_help=False)
    group = parent.add_argument_group("classifier options")
    group.add_argument("--learning-rate", type=float, help=f"(default {Config.CLF_LEARNING_RATE})")
    group.add_argument("--epochs", type=int, help=f"(default {Config.CLF_EPOCHS})")
    group.add_argument("--l2", type=float, help=f"(default {Config.CLF_L2})")
    return parent


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="crowd-anomaly",
        description="Crowd anomaly detection with dynamic textures and Gaussian normalcy models.",
    )
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", required=True)
    pipeline, scene, classifier = _pipeline_options(), _scene_options(), _classifier_options()

    synth = sub.add_parser("synth", parents=[pipeline, scene],
                           help="write a seeded synthetic scene and its manifest")
    synth.add_argument("--out", required=True, metavar="DIR",
                       help="output directory; frames go to DIR/frames/frame_*.pgm, "
                            "the manifest to DIR/manifest.json")

    train = sub.add_parser("train", parents=[pipeline], help="fit the normalcy model on Normal frames")
    train.add_argument("--manifest", required=True, help="labelled manifest JSON")
    train.add_argument("--out", required=True, metavar="MODEL", help="model JSON to write")

    score = sub.add_parser("score", parents=[pipeline], help="score the frames of one manifest entry")
    score.add_argument("--manifest", required=True, help="manifest JSON")
    score.add_argument("--model", required=True, help="model JSON from train or merge")
    score.add_argument("--out", required=True, metavar="CSV", help="per-frame scores CSV")
    score.add_argument("--entry", type=int, default=0, help="manifest entry index (default 0)")
    score.add_argument("--overlay-dir", help="also write frames with anomalous cubes highlighted")
    score.add_argument("--threshold", type=float, help="override the stored threshold")

    merge = sub.add_parser("merge", parents=[pipeline],
                           help="merge a model with the Normal frames of another manifest")
    merge.add_argument("--model", required=True, help="existing model JSON")
    merge.add_argument("--manifest", required=True, help="manifest providing the new batch")
    merge.add_argument("--out", required=True, metavar="MODEL", help="merged model JSON")

    train_clf = sub.add_parser("train-clf", parents=[pipeline, classifier],
                               help="train the Normal/Abnormal maximum entropy classifier")
    train_clf.add_argument("--manifest", required=True, help="labelled manifest JSON")
    train_clf.add_argument("--out", required=True, metavar="MODEL", help="classifier JSON to write")

    evaluate = sub.add_parser(
        "eval", parents=[pipeline, scene],
        help="multi-run accuracy protocol",
        description="A run is one synthetic scene seeded --seed + r, or manifest entry r with --manifest.",
    )
    evaluate.add_argument("--manifest", help="evaluate manifest entries instead of synthetic scenes")
    evaluate.add_argument("--runs", type=int, help=f"number of runs (default {Config.RUNS})")
    evaluate.add_argument("--out", required=True, metavar="CSV",
                          help="report CSV; the JSON twin is written next to it")
    return parser


def _flags(args: argparse.Namespace) -> Dict[str, Any]:
    values = vars(args)
    return {key: values[key] for key in CONFIG_KEYS if key in values}


COMMANDS: Dict[str, Callable[[argparse.Namespace], Dict[str, Any]]] = {
    "synth": lambda a: cmd_synth(_flags(a), a.config, a.out),
    "train": lambda a: cmd_train(_flags(a), a.config, a.manifest, a.out),
    "score": lambda a: cmd_score(_flags(a), a.config, a.manifest, a.model, a.out,
                                 overlay_dir=a.overlay_dir, entry=a.entry, threshold=a.threshold),
    "merge": lambda a: cmd_merge(_flags(a), a.config, a.model, a.manifest, a.out),
    "train-clf": lambda a: cmd_train_clf(_flags(a), a.config, a.manifest, a.out),
    "eval": lambda a: cmd_eval(_flags(a), a.config, a.manifest, a.out),
}


def main(argv: Optional[List[str]] = None) -> int:
    """
    Run one subcommand.

    Args:
        argv: Arguments without the program name; defaults to sys.argv[1:]

    Returns:
        Process exit code
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code in (None, 0) else EXIT_USAGE

    try:
        summary = COMMANDS[args.command](args)
    except CrowdAnomalyError as e:
        logger.error(f"{args.command}: {e}")
        return e.exit_code
    except (np.linalg.LinAlgError, FloatingPointError) as e:
        logger.error(f"{args.command}: numeric failure: {e}")
        return NumericError.exit_code
    except OSError as e:
        logger.error(f"{args.command}: {e}")
        return DataError.exit_code

    print(json.dumps(summary, sort_keys=True))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
