"""Evaluation package: frame-level accuracy and the multi-run harness."""
from .accuracy import (
    Confusion,
    EvalReport,
    RunResult,
    average_accuracy,
    compute_accuracy,
    load_report,
    write_report,
)
from .harness import evaluate_runs, run_once

__all__ = [
    "Confusion",
    "EvalReport",
    "RunResult",
    "average_accuracy",
    "compute_accuracy",
    "load_report",
    "write_report",
    "evaluate_runs",
    "run_once",
]
