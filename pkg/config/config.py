"""
Environment-level defaults for the crowd anomaly pipeline.
"""
import os
from pathlib import Path
from dotenv import load_dotenv

from utils.logger import Logger

# Load environment variables
load_dotenv()

logger = Logger.get_logger(__name__)


class Config:
    """Central configuration class; every value can be overridden from the environment or .env."""

    # Cube geometry
    CUBE_P = int(os.getenv("CUBE_P", "8"))
    CUBE_Q = int(os.getenv("CUBE_Q", "8"))
    # Empty means "same as the cube extent"
    SPATIAL_STRIDE = os.getenv("SPATIAL_STRIDE", "")
    TEMPORAL_STRIDE = os.getenv("TEMPORAL_STRIDE", "")

    # Dynamic texture / Gaussian model
    STATE_DIM = int(os.getenv("STATE_DIM", "5"))
    THRESHOLD_PERCENTILE = float(os.getenv("THRESHOLD_PERCENTILE", "100"))

    # Event classifier
    CLF_LEARNING_RATE = float(os.getenv("CLF_LEARNING_RATE", "0.001"))
    CLF_EPOCHS = int(os.getenv("CLF_EPOCHS", "500"))
    CLF_L2 = float(os.getenv("CLF_L2", "0.01"))

    # Seeds and evaluation protocol
    SEED = int(os.getenv("SEED", "7"))
    RUNS = int(os.getenv("RUNS", "10"))

    # Synthetic scene
    SYNTH_WIDTH = int(os.getenv("SYNTH_WIDTH", "64"))
    SYNTH_HEIGHT = int(os.getenv("SYNTH_HEIGHT", "64"))
    SYNTH_PARTICLES = int(os.getenv("SYNTH_PARTICLES", "120"))
    SYNTH_FRAMES = int(os.getenv("SYNTH_FRAMES", "64"))
    SYNTH_DISPERSAL_FRAME = int(os.getenv("SYNTH_DISPERSAL_FRAME", "32"))
    SYNTH_SPEED_NORMAL = float(os.getenv("SYNTH_SPEED_NORMAL", "0.5"))
    SYNTH_SPEED_ABNORMAL = float(os.getenv("SYNTH_SPEED_ABNORMAL", "4.0"))

    # Logs (the loguru sinks read the same variable)
    LOG_DIR = Path(os.getenv("LOG_DIR", "logs"))

    @classmethod
    def stride_or_none(cls, raw: str):
        return int(raw) if raw.strip() else None

    @classmethod
    def defaults(cls) -> dict:
        """Environment defaults in the config-file vocabulary."""
        return {
            "cube_p": cls.CUBE_P,
            "cube_q": cls.CUBE_Q,
            "spatial_stride": cls.stride_or_none(cls.SPATIAL_STRIDE),
            "temporal_stride": cls.stride_or_none(cls.TEMPORAL_STRIDE),
            "state_dim": cls.STATE_DIM,
            "percentile": cls.THRESHOLD_PERCENTILE,
            "seed": cls.SEED,
            "runs": cls.RUNS,
            "learning_rate": cls.CLF_LEARNING_RATE,
            "epochs": cls.CLF_EPOCHS,
            "l2": cls.CLF_L2,
            "width": cls.SYNTH_WIDTH,
            "height": cls.SYNTH_HEIGHT,
            "particles": cls.SYNTH_PARTICLES,
            "frames": cls.SYNTH_FRAMES,
            "dispersal_frame": cls.SYNTH_DISPERSAL_FRAME,
            "speed_normal": cls.SYNTH_SPEED_NORMAL,
            "speed_abnormal": cls.SYNTH_SPEED_ABNORMAL,
        }

    @classmethod
    def display_config(cls):
        """Log the current configuration."""
        logger.info("=" * 50)
        logger.info("PIPELINE CONFIGURATION")
        logger.info("=" * 50)
        logger.info(f"Cube: p={cls.CUBE_P}, q={cls.CUBE_Q}")
        logger.info(f"State dimension: {cls.STATE_DIM}")
        logger.info(f"Threshold percentile: {cls.THRESHOLD_PERCENTILE}")
        logger.info(f"Classifier: lr={cls.CLF_LEARNING_RATE}, epochs={cls.CLF_EPOCHS}, l2={cls.CLF_L2}")
        logger.info(f"Seed: {cls.SEED}, runs: {cls.RUNS}")
        logger.info("=" * 50)
