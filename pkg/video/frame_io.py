"""
Grayscale frame sequences: the raw input volume and its per-frame labels.

Frames are stored on disk as directories of 8-bit binary PGM files named
``frame_%06d.pgm``; in memory as a float64 array of shape (T, H, W) in [0, 1].
"""
import re
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Iterable, List, Tuple, Union

import numpy as np
from PIL import Image, UnidentifiedImageError

from utils.data_manager import DataManager
from utils.errors import DataError, DimensionMismatchError, FrameLoadError
from utils.logger import Logger

logger = Logger.get_logger(__name__)

FRAME_NAME_FORMAT = "frame_{:06d}.pgm"
_PGM_MAGIC = b"P5"
_DIGITS = re.compile(r"(\d+)")


class FrameLabel(str, Enum):
    """Ground-truth label of a single frame."""

    NORMAL = "normal"
    ABNORMAL = "abnormal"


@dataclass(frozen=True, eq=False)
class FrameSequence:
    """
    Ordered grayscale frames.

    Attributes:
        frames: float64 array of shape (frame_count, height, width), values in [0, 1]
    """

    frames: np.ndarray

    def __post_init__(self):
        frames = np.array(self.frames, dtype=np.float64)
        if frames.ndim != 3:
            raise DimensionMismatchError(f"frames must be a (T, H, W) array, got shape {frames.shape}")
        if frames.shape[0] < 1:
            raise DataError("a frame sequence needs at least one frame")
        if frames.shape[1] < 1 or frames.shape[2] < 1:
            raise DimensionMismatchError(f"frame dimensions must be positive, got {frames.shape[1:]}")
        if not np.all(np.isfinite(frames)) or frames.min() < 0.0 or frames.max() > 1.0:
            raise DataError("frame intensities must lie in [0, 1]")
        frames.setflags(write=False)
        object.__setattr__(self, "frames", frames)

    @property
    def frame_count(self) -> int:
        return int(self.frames.shape[0])

    @property
    def height(self) -> int:
        return int(self.frames.shape[1])

    @property
    def width(self) -> int:
        return int(self.frames.shape[2])

    def slice(self, start: int, end: int) -> "FrameSequence":
        """Frames in the half-open range [start, end)."""
        if not 0 <= start < end <= self.frame_count:
            raise DataError(f"frame range [{start}, {end}) outside [0, {self.frame_count})")
        return FrameSequence(self.frames[start:end])


@dataclass(frozen=True, eq=False)
class LabelTrack:
    """
    Per-frame Normal/Abnormal labels.

    Attributes:
        abnormal: boolean array, True where the frame is Abnormal
    """

    abnormal: np.ndarray

    def __post_init__(self):
        abnormal = np.array(self.abnormal, dtype=bool)
        if abnormal.ndim != 1:
            raise DimensionMismatchError("a label track is one-dimensional")
        abnormal.setflags(write=False)
        object.__setattr__(self, "abnormal", abnormal)

    def __len__(self) -> int:
        return int(self.abnormal.shape[0])

    @property
    def labels(self) -> List[FrameLabel]:
        return [FrameLabel.ABNORMAL if a else FrameLabel.NORMAL for a in self.abnormal]

    @classmethod
    def from_labels(cls, labels: Iterable[Union[FrameLabel, str]]) -> "LabelTrack":
        return cls(np.array([FrameLabel(label) is FrameLabel.ABNORMAL for label in labels], dtype=bool))

    @classmethod
    def from_intervals(cls, intervals: Iterable[Tuple[int, int, Union[FrameLabel, str]]],
                       frame_count: int) -> "LabelTrack":
        """
        Build a track from half-open (start, end, label) intervals.

        Frames not covered by any interval are Normal.
        """
        abnormal = np.zeros(frame_count, dtype=bool)
        for start, end, label in intervals:
            if FrameLabel(label) is FrameLabel.ABNORMAL:
                abnormal[start:end] = True
        return cls(abnormal)

    def normal_prefix_length(self) -> int:
        """Number of leading Normal frames."""
        hits = np.flatnonzero(self.abnormal)
        return int(hits[0]) if hits.size else len(self)

    def check_matches(self, seq: FrameSequence) -> None:
        if len(self) != seq.frame_count:
            raise DimensionMismatchError(
                f"label track has {len(self)} frames, sequence has {seq.frame_count}"
            )


def _frame_sort_key(path: Path) -> Tuple[int, str]:
    digits = _DIGITS.findall(path.stem)
    if not digits:
        raise FrameLoadError(f"frame file has no frame number: {path.name}")
    return int(digits[-1]), path.name


def _read_pgm(path: Path) -> np.ndarray:
    if path.suffix.lower() != ".pgm":
        raise FrameLoadError(f"not a PGM file: {path.name}")
    with open(path, "rb") as handle:
        if handle.read(2) != _PGM_MAGIC:
            raise FrameLoadError(f"not a binary (P5) PGM file: {path.name}")
    try:
        with Image.open(path) as img:
            if img.mode != "L":
                raise FrameLoadError(f"PGM is not 8-bit grayscale ({img.mode}): {path.name}")
            return np.asarray(img, dtype=np.uint8)
    except (UnidentifiedImageError, OSError, SyntaxError) as e:
        raise FrameLoadError(f"unreadable PGM file {path.name}: {e}") from e


def list_frame_files(directory: Union[str, Path]) -> List[Path]:
    """
    Frame files of a directory in numeric filename order.

    Hidden files are ignored.
    """
    directory = Path(directory)
    if not directory.is_dir():
        raise FrameLoadError(f"frame directory not found: {directory}")
    files = [p for p in directory.iterdir() if p.is_file() and not p.name.startswith(".")]
    return sorted(files, key=_frame_sort_key)


def load_frame_sequence(path: Union[str, Path]) -> FrameSequence:
    """
    Load a directory of numerically ordered 8-bit binary PGM frames.

    Args:
        path: Frame directory

    Returns:
        FrameSequence with intensities scaled by 1/255

    Raises:
        FrameLoadError: Missing directory, non-PGM file or mixed frame dimensions
    """
    files = list_frame_files(path)
    if not files:
        raise FrameLoadError(f"frame directory is empty: {path}")

    frames = []
    first_shape = None
    for file in files:
        pixels = _read_pgm(file)
        if first_shape is None:
            first_shape = pixels.shape
        elif pixels.shape != first_shape:
            raise FrameLoadError(
                f"frame dimensions {pixels.shape[1]}x{pixels.shape[0]} differ from "
                f"{first_shape[1]}x{first_shape[0]}: {file.name}"
            )
        frames.append(pixels)

    seq = FrameSequence(np.stack(frames).astype(np.float64) / 255.0)
    logger.info(f"Loaded {seq.frame_count} frames ({seq.width}x{seq.height}) from {path}")
    return seq


def write_frame_sequence(seq: FrameSequence, directory: Union[str, Path]) -> List[Path]:
    """
    Write frames as ``frame_%06d.pgm`` (P5, maxval 255).

    Intensities are rounded to the nearest multiple of 1/255; each file is written atomically.

    Args:
        seq: Frames to write
        directory: Output directory, created if needed

    Returns:
        Written paths in frame order
    """
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    pixels = np.rint(seq.frames * 255.0).astype(np.uint8)

    written = []
    for index, frame in enumerate(pixels):
        target = directory / FRAME_NAME_FORMAT.format(index)
        with DataManager.atomic_path(target) as tmp:
            Image.fromarray(frame).save(tmp, format="PPM")
        written.append(target)

    logger.info(f"Wrote {len(written)} frames to {directory}")
    return written


def count_frames(directory: Union[str, Path]) -> int:
    """Number of PGM files in a frame directory."""
    return sum(1 for p in Path(directory).glob("*.pgm") if not p.name.startswith("."))
