"""
Seeded synthetic crowd scenes: a dispersal event in a field of wandering particles.

Before ``dispersal_frame`` every particle takes a random-direction step of length
``speed_normal`` per frame; from ``dispersal_frame`` on every particle flees radially
from the crowd centroid at ``speed_abnormal``. Particles reflect at the frame edges and
are drawn as 3x3 squares of intensity 1 with additive clamping at 1.0.
"""
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from utils.errors import ConfigurationError
from utils.logger import Logger
from video.frame_io import FrameLabel, FrameSequence, LabelTrack

logger = Logger.get_logger(__name__)

_HALF_SQUARE = 1


@dataclass(frozen=True)
class SyntheticConfig:
    width: int = 64
    height: int = 64
    n_particles: int = 120
    n_frames: int = 64
    dispersal_frame: int = 32
    speed_normal: float = 0.5
    speed_abnormal: float = 4.0

    def validate(self) -> None:
        if self.width < 1 or self.height < 1 or self.n_frames < 1:
            raise ConfigurationError("--width, --height and --frames must be positive")
        if self.n_particles < 0:
            raise ConfigurationError("--particles must be non-negative")
        if self.speed_normal < 0 or self.speed_abnormal < 0:
            raise ConfigurationError("--speed-normal and --speed-abnormal must be non-negative")
        if not 0 <= self.dispersal_frame < self.n_frames:
            raise ConfigurationError(
                f"--dispersal-frame ({self.dispersal_frame}) must be in [0, --frames "
                f"({self.n_frames}))"
            )

    def intervals(self) -> Tuple[Tuple[int, int, FrameLabel], ...]:
        """Ground-truth intervals: Normal before dispersal, Abnormal from it on."""
        spans = []
        if self.dispersal_frame > 0:
            spans.append((0, self.dispersal_frame, FrameLabel.NORMAL))
        spans.append((self.dispersal_frame, self.n_frames, FrameLabel.ABNORMAL))
        return tuple(spans)


def _reflect(raw: np.ndarray, upper: float) -> Tuple[np.ndarray, np.ndarray]:
    """Fold positions into [0, upper]; also report which coordinates bounced."""
    if upper <= 0:
        return np.zeros_like(raw), np.zeros(raw.shape, dtype=bool)
    period = 2.0 * upper
    folded = np.mod(raw, period)
    bounced = folded > upper
    return np.where(bounced, period - folded, folded), bounced


def _render(xs: np.ndarray, ys: np.ndarray, width: int, height: int) -> np.ndarray:
    frame = np.zeros((height, width), dtype=np.float64)
    cols = np.rint(xs).astype(int)
    rows = np.rint(ys).astype(int)
    for col, row in zip(cols, rows):
        frame[max(row - _HALF_SQUARE, 0):row + _HALF_SQUARE + 1,
              max(col - _HALF_SQUARE, 0):col + _HALF_SQUARE + 1] += 1.0
    return np.minimum(frame, 1.0)


def generate_synthetic_sequence(config: SyntheticConfig, seed: int) -> Tuple[FrameSequence, LabelTrack]:
    """
    Generate a crowd scene with a dispersal event.

    Args:
        config: Scene geometry and motion parameters
        seed: Seed of the only random generator used; equal seeds give bit-identical output

    Returns:
        (frames, labels) with frames before ``dispersal_frame`` Normal and the rest Abnormal

    Raises:
        ConfigurationError: If dispersal_frame >= n_frames or a dimension is not positive
    """
    config.validate()
    rng = np.random.default_rng(seed)
    x_max, y_max = float(config.width - 1), float(config.height - 1)

    n = config.n_particles
    xs = rng.uniform(0.0, x_max, n)
    ys = rng.uniform(0.0, y_max, n)
    velocity: Optional[np.ndarray] = None

    frames = np.empty((config.n_frames, config.height, config.width), dtype=np.float64)
    frames[0] = _render(xs, ys, config.width, config.height)

    for t in range(1, config.n_frames):
        if t < config.dispersal_frame:
            angles = rng.uniform(0.0, 2.0 * np.pi, n)
            xs, _ = _reflect(xs + config.speed_normal * np.cos(angles), x_max)
            ys, _ = _reflect(ys + config.speed_normal * np.sin(angles), y_max)
        else:
            if velocity is None:
                velocity = _flight_velocity(xs, ys, config.speed_abnormal, rng)
            xs, bounced_x = _reflect(xs + velocity[0], x_max)
            ys, bounced_y = _reflect(ys + velocity[1], y_max)
            velocity[0] = np.where(bounced_x, -velocity[0], velocity[0])
            velocity[1] = np.where(bounced_y, -velocity[1], velocity[1])
        frames[t] = _render(xs, ys, config.width, config.height)

    labels = LabelTrack.from_intervals(config.intervals(), config.n_frames)
    logger.debug(
        f"Synthesized {config.n_frames} frames, {n} particles, dispersal at "
        f"{config.dispersal_frame}, seed {seed}"
    )
    return FrameSequence(frames), labels


def _flight_velocity(xs: np.ndarray, ys: np.ndarray, speed: float,
                     rng: np.random.Generator) -> np.ndarray:
    """Radial unit directions away from the centroid, scaled to ``speed``."""
    if xs.size == 0:
        return np.zeros((2, 0))
    dx, dy = xs - xs.mean(), ys - ys.mean()
    norm = np.hypot(dx, dy)
    # particles sitting on the centroid pick a random heading
    fallback = rng.uniform(0.0, 2.0 * np.pi, xs.size)
    at_centre = norm == 0.0
    safe = np.where(at_centre, 1.0, norm)
    ux = np.where(at_centre, np.cos(fallback), dx / safe)
    uy = np.where(at_centre, np.sin(fallback), dy / safe)
    return np.vstack([ux, uy]) * speed
