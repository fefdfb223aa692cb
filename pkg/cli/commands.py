"""
Subcommand implementations.

Every command resolves its configuration first, so parameter errors surface before
any frames are read. Commands return a small summary dict that the entry point
prints as JSON on stdout.
"""
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Tuple, Union

import numpy as np

from config.pipeline_config import PipelineConfig
from evaluation.accuracy import compute_accuracy, write_report
from evaluation.harness import evaluate_runs
from models.gaussian import (
    DetectorSettings,
    calibrate_threshold,
    load_gaussian_model,
    merge_models,
    save_gaussian_model,
)
from models.maxent import accuracy, example_list, save_maxent_model, train
from pipeline.detector import CrowdAnomalyDetector, TrainedDetector
from utils.data_manager import DataManager
from utils.errors import ConfigurationError, InsufficientDataError
from utils.logger import Logger
from video.frame_io import FrameLabel, FrameSequence, write_frame_sequence
from video.manifest import DatasetManifest, LabelInterval, ManifestEntry, load_manifest, save_manifest
from video.synthetic import generate_synthetic_sequence

logger = Logger.get_logger(__name__)

PathLike = Union[str, Path]
Flags = Mapping[str, Any]

CLASSIFIER_LABELS = (FrameLabel.NORMAL.value, FrameLabel.ABNORMAL.value)


def _non_empty_manifest(path: PathLike) -> DatasetManifest:
    manifest = load_manifest(path)
    if len(manifest) == 0:
        raise InsufficientDataError(f"manifest {path} holds no entries")
    return manifest


def _normal_segments(manifest: DatasetManifest, detector: CrowdAnomalyDetector) -> List[FrameSequence]:
    segments = []
    for entry in manifest.entries:
        seq, track = entry.load()
        segments.extend(detector.normal_segments(seq, track, detector.cube.q))
    return segments


def _settings_base(settings: Optional[DetectorSettings]) -> Dict[str, Any]:
    if settings is None:
        return {}
    base = settings.to_dict()
    base.pop("threshold")
    return base


def cmd_synth(flags: Flags, config_file: Optional[PathLike], out_dir: PathLike) -> Dict[str, Any]:
    """
    Generate a synthetic scene as ``out_dir/frames/frame_*.pgm`` plus ``out_dir/manifest.json``.

    A frame directory holds nothing but PGMs, so the manifest sits beside it.
    """
    config = PipelineConfig.resolve(flags, config_file)
    config.synthetic.validate()
    out_dir = Path(out_dir)

    seq, _ = generate_synthetic_sequence(config.synthetic, config.seed)
    frames_dir = out_dir / "frames"
    write_frame_sequence(seq, frames_dir)

    entry = ManifestEntry(
        path=frames_dir,
        scene=f"synthetic-seed-{config.seed}",
        intervals=tuple(LabelInterval(*span) for span in config.synthetic.intervals()),
        frame_count=seq.frame_count,
    )
    manifest_path = out_dir / "manifest.json"
    save_manifest(DatasetManifest((entry,)), manifest_path)
    return {"frames": seq.frame_count, "frames_dir": str(frames_dir), "manifest": str(manifest_path)}


def cmd_train(flags: Flags, config_file: Optional[PathLike], manifest_path: PathLike,
              model_out: PathLike) -> Dict[str, Any]:
    """Fit the Gaussian model on every Normal segment of a manifest and store it with its threshold."""
    config = PipelineConfig.resolve(flags, config_file)
    detector = CrowdAnomalyDetector.from_config(config)
    manifest = _non_empty_manifest(manifest_path)

    trained = detector.fit(_normal_segments(manifest, detector))
    save_gaussian_model(trained.model, model_out, detector.settings(trained.threshold))
    return {"model": str(model_out), "dim": trained.model.dim, "m": trained.model.m,
            "threshold": trained.threshold}


def _load_detector(model_in: PathLike, flags: Flags, config_file: Optional[PathLike],
                   threshold: Optional[float]) -> Tuple[CrowdAnomalyDetector, TrainedDetector, PipelineConfig]:
    model, settings = load_gaussian_model(model_in)
    config = PipelineConfig.resolve(flags, config_file, base=_settings_base(settings))
    if threshold is None:
        if settings is None:
            raise ConfigurationError(f"model {model_in} stores no threshold; pass --threshold")
        threshold = settings.threshold
    detector = CrowdAnomalyDetector.from_config(config)
    detector.check_model(model)
    return detector, TrainedDetector(model=model, threshold=float(threshold)), config


def cmd_score(flags: Flags, config_file: Optional[PathLike], manifest_path: PathLike,
              model_in: PathLike, scores_out: PathLike, overlay_dir: Optional[PathLike] = None,
              entry: int = 0, threshold: Optional[float] = None) -> Dict[str, Any]:
    """
    Score one manifest entry frame by frame.

    Writes ``frame,score_max,is_anomalous`` rows; with ``overlay_dir`` also writes the
    frames with anomalous cube footprints brightened to 1.0.
    """
    detector, trained, _ = _load_detector(model_in, flags, config_file, threshold)
    manifest = _non_empty_manifest(manifest_path)
    if not 0 <= entry < len(manifest):
        raise ConfigurationError(f"--entry {entry} outside [0, {len(manifest)})")

    seq, truth = manifest.entries[entry].load()
    scores = detector.score(trained, seq)
    DataManager.write_text(scores.to_csv_text(), scores_out)

    summary = {
        "scores": str(scores_out),
        "frames": seq.frame_count,
        "frames_flagged": int(scores.is_anomalous.sum()),
        "threshold": trained.threshold,
        "accuracy": compute_accuracy(scores.track(), truth)[0],
    }
    if overlay_dir is not None:
        overlay = detector.overlay(seq, scores.grid, scores.cube_decisions)
        write_frame_sequence(overlay, overlay_dir)
        summary["overlay_dir"] = str(overlay_dir)
    return summary


def cmd_merge(flags: Flags, config_file: Optional[PathLike], model_in: PathLike,
              manifest_path: PathLike, model_out: PathLike) -> Dict[str, Any]:
    """
    Merge a stored model with the Normal segments of another manifest.

    The threshold is recalibrated on the new batch at the stored percentile.
    """
    detector, trained, _ = _load_detector(model_in, flags, config_file, threshold=0.0)
    manifest = _non_empty_manifest(manifest_path)

    batch = detector.training_features(_normal_segments(manifest, detector))
    merged = merge_models(trained.model, batch)
    threshold = calibrate_threshold(merged, batch, detector.percentile)
    save_gaussian_model(merged, model_out, detector.settings(threshold))
    return {"model": str(model_out), "m_a": trained.model.m, "n_b": int(batch.shape[0]),
            "m": merged.m, "threshold": threshold}


def cmd_train_clf(flags: Flags, config_file: Optional[PathLike], manifest_path: PathLike,
                  model_out: PathLike) -> Dict[str, Any]:
    """
    Train the Normal/Abnormal event classifier on cube features.

    A cube is Abnormal when any frame it spans is Abnormal. Inputs are standardised
    and the mean/scale are stored with the classifier.
    """
    config = PipelineConfig.resolve(flags, config_file)
    detector = CrowdAnomalyDetector.from_config(config)
    manifest = _non_empty_manifest(manifest_path)

    blocks, labels = [], []
    for entry in manifest.entries:
        seq, track = entry.load()
        grid, X = detector.features(seq)
        blocks.append(X)
        for cube in grid.cubes:
            start, end = cube.frames
            abnormal = bool(track.abnormal[start:end].any())
            labels.append(FrameLabel.ABNORMAL.value if abnormal else FrameLabel.NORMAL.value)
    X = np.vstack(blocks)

    mean = X.mean(axis=0)
    scale = X.std(axis=0)
    scale = np.where(scale > 0, scale, 1.0)
    data = example_list((X - mean) / scale, labels)

    model = train(data, config.classifier, labels=CLASSIFIER_LABELS)
    train_accuracy = accuracy(model, data)
    save_maxent_model(model, model_out, input_mean=mean, input_scale=scale)
    return {"model": str(model_out), "examples": len(data),
            "abnormal_examples": labels.count(FrameLabel.ABNORMAL.value),
            "training_accuracy": 100.0 * train_accuracy}


def cmd_eval(flags: Flags, config_file: Optional[PathLike], manifest_path: Optional[PathLike],
             report_out: PathLike) -> Dict[str, Any]:
    """
    Run the multi-run protocol and write the CSV report plus its JSON twin.

    Without a manifest each run is a fresh synthetic scene seeded ``--seed + r``;
    with one, run r evaluates entry r, and every entry is evaluated unless
    ``--runs`` or the config file says otherwise.
    """
    config = PipelineConfig.resolve(flags, config_file)
    n_runs = config.runs
    if manifest_path is not None:
        source = _non_empty_manifest(manifest_path)
        runs_given = flags.get("runs") is not None or (
            config_file is not None and "runs" in PipelineConfig.load_file(config_file)
        )
        if not runs_given:
            n_runs = len(source)
    else:
        config.synthetic.validate()
        source = config.synthetic

    report = evaluate_runs(source, config, n_runs, config.seed)
    csv_path, json_path = write_report(report, report_out)
    return {"average_accuracy": report.average_accuracy, "runs": len(report.runs),
            "csv": str(csv_path), "json": str(json_path)}
