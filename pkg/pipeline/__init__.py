"""Pipeline package: the end-to-end cube/texture/Gaussian detector."""
from .detector import CrowdAnomalyDetector, FrameScores, TrainedDetector

__all__ = ["CrowdAnomalyDetector", "FrameScores", "TrainedDetector"]
