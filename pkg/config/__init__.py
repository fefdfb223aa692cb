"""Config package for the crowd anomaly pipeline."""
from .config import Config
from .pipeline_config import PipelineConfig

__all__ = ["Config", "PipelineConfig"]
