"""
End-to-end crowd anomaly detector: cubes -> dynamic texture features -> Gaussian model.

A frame is Abnormal when any cube covering it scores above the threshold. A cube
spanning frames [t, t + q) attributes its decision to all q frames.
"""
from dataclasses import dataclass
from typing import Iterable, List, Optional, Tuple

import numpy as np
import pandas as pd

from models.dyntex import extract_features, feature_dim
from models.gaussian import (
    DetectorSettings,
    GaussianModel,
    calibrate_threshold,
    fit_gaussian,
    mahalanobis_batch,
)
from utils.errors import DataError, DimensionMismatchError, InsufficientDataError
from utils.logger import Logger
from video.cubes import CubeGrid, CubeSpec, extract_cubes
from video.frame_io import FrameSequence, LabelTrack

logger = Logger.get_logger(__name__)


@dataclass(frozen=True, eq=False)
class TrainedDetector:
    """A normalcy model together with its calibrated threshold."""

    model: GaussianModel
    threshold: float
    training_features: Optional[np.ndarray] = None


@dataclass(frozen=True, eq=False)
class FrameScores:
    """
    Per-frame scoring output.

    Attributes:
        score_max: (T,) highest cube score covering each frame; 0 for uncovered frames
        is_anomalous: (T,) OR of the covering cubes' decisions
        cube_scores: (L,) Mahalanobis score per cube, grid order
        cube_decisions: (L,) score > threshold per cube
        grid: The scored cubes
        threshold: Threshold the decisions used
    """

    score_max: np.ndarray
    is_anomalous: np.ndarray
    cube_scores: np.ndarray
    cube_decisions: np.ndarray
    grid: CubeGrid
    threshold: float

    def track(self) -> LabelTrack:
        return LabelTrack(self.is_anomalous)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({
            "frame": np.arange(self.score_max.shape[0]),
            "score_max": self.score_max,
            "is_anomalous": self.is_anomalous.astype(int),
        })

    def to_csv_text(self) -> str:
        """CSV with header ``frame,score_max,is_anomalous``."""
        return self.to_frame().to_csv(index=False, lineterminator="\n")


class CrowdAnomalyDetector:
    """
    Trains and applies the cube-level normalcy model.

    Args:
        cube: Cube geometry
        state_dim: LDS state dimension n
        percentile: Calibration percentile for the threshold
    """

    def __init__(self, cube: CubeSpec, state_dim: int, percentile: float):
        self.cube = cube
        self.state_dim = state_dim
        self.percentile = percentile

    @classmethod
    def from_config(cls, config) -> "CrowdAnomalyDetector":
        return cls(config.cube, config.state_dim, config.percentile)

    def settings(self, threshold: float) -> DetectorSettings:
        return DetectorSettings(
            threshold=threshold,
            percentile=self.percentile,
            cube_p=self.cube.p,
            cube_q=self.cube.q,
            spatial_stride=self.cube.spatial_stride,
            temporal_stride=self.cube.temporal_stride,
            state_dim=self.state_dim,
        )

    @property
    def feature_dim(self) -> int:
        return feature_dim(self.state_dim)

    def features(self, seq: FrameSequence) -> Tuple[CubeGrid, np.ndarray]:
        """Cube grid of a sequence and its (L, n + 4) feature matrix."""
        grid = extract_cubes(seq, self.cube)
        return grid, extract_features(grid, self.state_dim)

    def training_features(self, segments: Iterable[FrameSequence]) -> np.ndarray:
        """
        Stack the features of every Normal segment.

        Segments shorter than one cube are skipped.

        Raises:
            InsufficientDataError: If no segment yields a cube
        """
        blocks = []
        for segment in segments:
            if segment.frame_count < self.cube.q:
                logger.debug(f"Skipping {segment.frame_count}-frame segment shorter than q={self.cube.q}")
                continue
            blocks.append(self.features(segment)[1])
        if not blocks:
            raise InsufficientDataError(
                f"no Normal-labeled segment is long enough for one cube (q={self.cube.q})"
            )
        return np.vstack(blocks)

    def fit(self, segments: Iterable[FrameSequence]) -> TrainedDetector:
        """
        Fit the Gaussian model on Normal material and calibrate its threshold.

        Args:
            segments: Normal-only frame sequences

        Returns:
            TrainedDetector
        """
        X = self.training_features(segments)
        model = fit_gaussian(X)
        threshold = calibrate_threshold(model, X, self.percentile)
        return TrainedDetector(model=model, threshold=threshold, training_features=X)

    def check_model(self, model: GaussianModel) -> None:
        if model.dim != self.feature_dim:
            raise DimensionMismatchError(
                f"model dimension {model.dim} does not match feature dimension {self.feature_dim} "
                f"implied by --state-dim {self.state_dim}"
            )

    def score(self, detector: TrainedDetector, seq: FrameSequence) -> FrameScores:
        """
        Score every frame of a sequence.

        Args:
            detector: Trained model and threshold
            seq: Frames to score

        Returns:
            FrameScores; frames no cube covers score 0 and stay Normal
        """
        self.check_model(detector.model)
        grid, X = self.features(seq)
        cube_scores = mahalanobis_batch(detector.model, X)
        cube_decisions = cube_scores > detector.threshold

        score_max = np.zeros(seq.frame_count)
        anomalous = np.zeros(seq.frame_count, dtype=bool)
        for cube, score, decision in zip(grid.cubes, cube_scores, cube_decisions):
            start, end = cube.frames
            score_max[start:end] = np.maximum(score_max[start:end], score)
            if decision:
                anomalous[start:end] = True

        logger.info(
            f"Scored {len(grid)} cubes: {int(cube_decisions.sum())} anomalous, "
            f"{int(anomalous.sum())}/{seq.frame_count} frames flagged"
        )
        return FrameScores(
            score_max=score_max,
            is_anomalous=anomalous,
            cube_scores=cube_scores,
            cube_decisions=cube_decisions,
            grid=grid,
            threshold=float(detector.threshold),
        )

    @staticmethod
    def overlay(seq: FrameSequence, grid: CubeGrid, decisions: np.ndarray) -> FrameSequence:
        """Copy of ``seq`` with every anomalous cube footprint set to intensity 1.0."""
        decisions = np.asarray(decisions, dtype=bool)
        if decisions.shape != (len(grid),):
            raise DimensionMismatchError(f"{decisions.shape[0]} decisions for {len(grid)} cubes")
        frames = np.array(seq.frames)
        p = grid.spec.p
        for cube, flagged in zip(grid.cubes, decisions):
            if flagged:
                x, y, t = cube.origin
                frames[t:t + grid.spec.q, y:y + p, x:x + p] = 1.0
        return FrameSequence(frames)

    @staticmethod
    def normal_segments(seq: FrameSequence, track: LabelTrack, q: int) -> List[FrameSequence]:
        """Maximal runs of Normal frames holding at least q frames."""
        track.check_matches(seq)
        if q < 1:
            raise DataError(f"q must be >= 1, got {q}")
        segments = []
        start = None
        for t, abnormal in enumerate(list(track.abnormal) + [True]):
            if not abnormal and start is None:
                start = t
            elif abnormal and start is not None:
                if t - start >= q:
                    segments.append(seq.slice(start, t))
                start = None
        return segments
