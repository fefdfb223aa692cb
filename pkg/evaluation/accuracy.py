"""
Frame-level accuracy, confusion counts and run reports.

Abnormal is the positive class: tp counts Abnormal frames predicted Abnormal.
"""
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from utils.data_manager import DataManager
from utils.errors import ConfigurationError, DataError, DimensionMismatchError
from utils.logger import Logger
from utils.schemas import EVAL_REPORT_SCHEMA, SCHEMA_VERSION
from video.frame_io import LabelTrack

logger = Logger.get_logger(__name__)

CSV_COLUMNS = ["run", "accuracy", "tp", "fp", "tn", "fn"]


@dataclass(frozen=True)
class Confusion:
    tp: int
    fp: int
    tn: int
    fn: int

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn

    def as_tuple(self) -> Tuple[int, int, int, int]:
        return self.tp, self.fp, self.tn, self.fn


def compute_accuracy(predicted: LabelTrack, truth: LabelTrack) -> Tuple[float, Confusion]:
    """
    Frame-level agreement between two label tracks.

    Args:
        predicted: Detector output
        truth: Ground truth of the same length

    Returns:
        (accuracy in percent, confusion counts)

    Raises:
        DimensionMismatchError: Tracks differ in length
        DataError: Tracks are empty
    """
    if len(predicted) != len(truth):
        raise DimensionMismatchError(f"predicted track has {len(predicted)} frames, truth has {len(truth)}")
    if len(truth) == 0:
        raise DataError("cannot score empty label tracks")

    pred, true = predicted.abnormal, truth.abnormal
    confusion = Confusion(
        tp=int(np.sum(pred & true)),
        fp=int(np.sum(pred & ~true)),
        tn=int(np.sum(~pred & ~true)),
        fn=int(np.sum(~pred & true)),
    )
    accuracy = 100.0 * (confusion.tp + confusion.tn) / confusion.total
    return accuracy, confusion


def average_accuracy(accuracies: Sequence[float]) -> float:
    """Arithmetic mean of per-run accuracies."""
    values = np.asarray(accuracies, dtype=np.float64)
    if values.size == 0:
        raise DataError("no run accuracies to average")
    return float(values.sum() / values.size)


@dataclass(frozen=True)
class RunResult:
    run_id: int
    accuracy: float
    n_frames_evaluated: int
    confusion: Confusion

    def __post_init__(self):
        if self.confusion.total != self.n_frames_evaluated:
            raise DataError(
                f"run {self.run_id}: confusion counts sum to {self.confusion.total}, "
                f"expected {self.n_frames_evaluated}"
            )

    def to_dict(self) -> Dict[str, Any]:
        tp, fp, tn, fn = self.confusion.as_tuple()
        return {
            "run_id": self.run_id,
            "accuracy": self.accuracy,
            "n_frames_evaluated": self.n_frames_evaluated,
            "tp": tp,
            "fp": fp,
            "tn": tn,
            "fn": fn,
        }


@dataclass(frozen=True)
class EvalReport:
    runs: Tuple[RunResult, ...]
    average_accuracy: float

    @classmethod
    def from_runs(cls, runs: Sequence[RunResult]) -> "EvalReport":
        runs = tuple(sorted(runs, key=lambda r: r.run_id))
        return cls(runs=runs, average_accuracy=average_accuracy([r.accuracy for r in runs]))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "schema_version": SCHEMA_VERSION,
            "runs": [run.to_dict() for run in self.runs],
            "average_accuracy": self.average_accuracy,
        }

    @classmethod
    def from_dict(cls, document: Dict[str, Any]) -> "EvalReport":
        DataManager.validate(document, EVAL_REPORT_SCHEMA, "evaluation report")
        runs = [
            RunResult(
                run_id=raw["run_id"],
                accuracy=raw["accuracy"],
                n_frames_evaluated=raw["n_frames_evaluated"],
                confusion=Confusion(raw["tp"], raw["fp"], raw["tn"], raw["fn"]),
            )
            for raw in document["runs"]
        ]
        return cls(runs=tuple(runs), average_accuracy=document["average_accuracy"])

    def to_frame(self) -> pd.DataFrame:
        rows = [[run.run_id, run.accuracy, *run.confusion.as_tuple()] for run in self.runs]
        return pd.DataFrame(rows, columns=CSV_COLUMNS)

    def to_csv_text(self) -> str:
        """Run rows under ``run,accuracy,tp,fp,tn,fn`` followed by ``average,<value>``."""
        body = self.to_frame().to_csv(index=False, lineterminator="\n")
        return f"{body}average,{self.average_accuracy!r}\n"


def write_report(report: EvalReport, csv_path: Union[str, Path]) -> Tuple[Path, Path]:
    """
    Write the CSV report and its JSON twin (same name, ``.json`` suffix).

    Returns:
        (csv path, json path)
    """
    csv_path = Path(csv_path)
    json_path = csv_path.with_suffix(".json")
    if json_path == csv_path:
        raise ConfigurationError(f"report path {csv_path} must not end in .json")
    DataManager.write_text(report.to_csv_text(), csv_path)
    DataManager.save_json(report.to_dict(), json_path)
    logger.info(f"Wrote evaluation report {csv_path} and {json_path}")
    return csv_path, json_path


def load_report(json_path: Union[str, Path]) -> EvalReport:
    return EvalReport.from_dict(DataManager.load_json(json_path))
