"""
Resolved pipeline configuration.

Precedence: command-line flags > config file > environment (``Config``) > built-in defaults.
"""
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Union

from config.config import Config
from models.maxent import TrainConfig
from utils.data_manager import DataManager
from utils.errors import ConfigurationError, DataError, SchemaError
from utils.logger import Logger
from utils.schemas import PIPELINE_CONFIG_SCHEMA
from video.cubes import CubeSpec
from video.synthetic import SyntheticConfig

logger = Logger.get_logger(__name__)


def _normalize_keys(raw: Mapping[str, Any]) -> Dict[str, Any]:
    """Accept both ``cube-p`` and ``cube_p`` spellings."""
    return {str(key).replace("-", "_"): value for key, value in raw.items()}


@dataclass(frozen=True)
class PipelineConfig:
    """
    Everything a command needs besides its input and output paths.

    Attributes:
        cube: Cube geometry
        state_dim: LDS state dimension n
        percentile: Threshold calibration percentile
        classifier: Event classifier training settings
        synthetic: Synthetic scene settings
        seed: Base seed
        runs: Number of evaluation runs
    """

    cube: CubeSpec = field(default_factory=lambda: CubeSpec(p=8, q=8))
    state_dim: int = 5
    percentile: float = 100.0
    classifier: TrainConfig = field(default_factory=TrainConfig)
    synthetic: SyntheticConfig = field(default_factory=SyntheticConfig)
    seed: int = 7
    runs: int = 10

    @classmethod
    def from_values(cls, values: Mapping[str, Any]) -> "PipelineConfig":
        """Build from a flat mapping in the config-file vocabulary."""
        try:
            cube = CubeSpec(
                p=int(values["cube_p"]),
                q=int(values["cube_q"]),
                spatial_stride=values.get("spatial_stride"),
                temporal_stride=values.get("temporal_stride"),
            )
            return cls(
                cube=cube,
                state_dim=int(values["state_dim"]),
                percentile=float(values["percentile"]),
                classifier=TrainConfig(
                    learning_rate=float(values["learning_rate"]),
                    epochs=int(values["epochs"]),
                    l2=float(values["l2"]),
                    seed=int(values["seed"]),
                ),
                synthetic=SyntheticConfig(
                    width=int(values["width"]),
                    height=int(values["height"]),
                    n_particles=int(values["particles"]),
                    n_frames=int(values["frames"]),
                    dispersal_frame=int(values["dispersal_frame"]),
                    speed_normal=float(values["speed_normal"]),
                    speed_abnormal=float(values["speed_abnormal"]),
                ),
                seed=int(values["seed"]),
                runs=int(values["runs"]),
            )
        except (TypeError, ValueError) as e:
            if isinstance(e, ConfigurationError):
                raise
            raise ConfigurationError(f"invalid configuration value: {e}") from e

    @classmethod
    def load_file(cls, config_file: Union[str, Path]) -> Dict[str, Any]:
        """
        Read a JSON or YAML config file.

        Returns:
            Normalised key/value mapping

        Raises:
            ConfigurationError: Unreadable file or unknown keys
        """
        try:
            document = DataManager.load_document(config_file)
        except DataError as e:
            raise ConfigurationError(f"cannot read config file: {e}") from e
        if document is None:
            return {}
        if not isinstance(document, dict):
            raise ConfigurationError(f"config file {config_file} must hold a mapping")
        values = _normalize_keys(document)
        try:
            DataManager.validate(values, PIPELINE_CONFIG_SCHEMA, "config file", expected_version=None)
        except SchemaError as e:
            raise ConfigurationError(str(e)) from e
        return values

    @classmethod
    def resolve(cls, flags: Optional[Mapping[str, Any]] = None,
                config_file: Optional[Union[str, Path]] = None,
                base: Optional[Mapping[str, Any]] = None) -> "PipelineConfig":
        """
        Merge the configuration layers.

        Args:
            flags: Command-line values; None entries mean "not given"
            config_file: Optional JSON/YAML file using the flag vocabulary
            base: Values that replace the environment defaults, such as the settings
                stored with a trained model

        Returns:
            Validated PipelineConfig
        """
        values = Config.defaults()
        values.update(_normalize_keys(base or {}))
        if config_file is not None:
            values.update(cls.load_file(config_file))
            logger.info(f"Loaded configuration file {config_file}")
        for key, value in _normalize_keys(flags or {}).items():
            if value is not None and key in values:
                values[key] = value
        config = cls.from_values(values)
        config.validate()
        return config

    def validate(self) -> None:
        """Cheap parameter checks every command runs before heavy work."""
        n, q, d = self.state_dim, self.cube.q, self.cube.d
        if n < 1:
            raise ConfigurationError(f"--state-dim must be >= 1, got {n}")
        if n > q - 1:
            raise ConfigurationError(f"--state-dim ({n}) must be <= --cube-q - 1 ({q - 1})")
        if n > d:
            raise ConfigurationError(f"--state-dim ({n}) must be <= --cube-p squared ({d})")
        if not 0.0 < self.percentile <= 100.0:
            raise ConfigurationError(f"--percentile must be in (0, 100], got {self.percentile}")
        if self.runs < 1:
            raise ConfigurationError(f"--runs must be >= 1, got {self.runs}")
        self.classifier.validate()

    def to_dict(self) -> Dict[str, Any]:
        return {
            "cube_p": self.cube.p,
            "cube_q": self.cube.q,
            "spatial_stride": self.cube.spatial_stride,
            "temporal_stride": self.cube.temporal_stride,
            "state_dim": self.state_dim,
            "percentile": self.percentile,
            "seed": self.seed,
            "runs": self.runs,
            "learning_rate": self.classifier.learning_rate,
            "epochs": self.classifier.epochs,
            "l2": self.classifier.l2,
            "width": self.synthetic.width,
            "height": self.synthetic.height,
            "particles": self.synthetic.n_particles,
            "frames": self.synthetic.n_frames,
            "dispersal_frame": self.synthetic.dispersal_frame,
            "speed_normal": self.synthetic.speed_normal,
            "speed_abnormal": self.synthetic.speed_abnormal,
        }
