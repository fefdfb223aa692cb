"""
Spatio-temporal cube decomposition.

A cube is a p x p pixel block followed across q consecutive frames. Cube data is
stored frame-major, shape (q, p, p), matching ``FrameSequence.frames``.
"""
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from utils.errors import ConfigurationError, DataError
from utils.logger import Logger
from video.frame_io import FrameSequence

logger = Logger.get_logger(__name__)


@dataclass(frozen=True)
class CubeSpec:
    """
    Cube geometry.

    Strides default to the cube extent, which gives a non-overlapping tiling.
    """

    p: int = 8
    q: int = 5
    spatial_stride: Optional[int] = None
    temporal_stride: Optional[int] = None

    def __post_init__(self):
        if self.spatial_stride is None:
            object.__setattr__(self, "spatial_stride", self.p)
        if self.temporal_stride is None:
            object.__setattr__(self, "temporal_stride", self.q)
        if self.p < 2 or self.q < 2:
            raise ConfigurationError(f"cube size needs p >= 2 and q >= 2, got p={self.p}, q={self.q}")
        if self.spatial_stride < 1 or self.temporal_stride < 1:
            raise ConfigurationError("cube strides must be >= 1")

    @property
    def d(self) -> int:
        """Observation dimension of one slice (p * p)."""
        return self.p * self.p


@dataclass(frozen=True, eq=False)
class Cube:
    """
    One extracted block.

    Attributes:
        origin: (x, y, t) of the block's first pixel and frame
        data: (q, p, p) intensities copied from the source sequence
    """

    origin: Tuple[int, int, int]
    data: np.ndarray

    @property
    def frames(self) -> Tuple[int, int]:
        """Half-open frame span [t, t + q) covered by the cube."""
        t = self.origin[2]
        return t, t + int(self.data.shape[0])


@dataclass(frozen=True, eq=False)
class CubeGrid:
    """Cubes in x-major, then y, then t order."""

    spec: CubeSpec
    cubes: List[Cube]
    grid_dims: Tuple[int, int, int]

    def __len__(self) -> int:
        return len(self.cubes)

    def index(self, ix: int, iy: int, it: int) -> int:
        nx, ny, nt = self.grid_dims
        return (ix * ny + iy) * nt + it

    def at(self, ix: int, iy: int, it: int) -> Cube:
        return self.cubes[self.index(ix, iy, it)]


def grid_dims(width: int, height: int, frame_count: int, spec: CubeSpec) -> Tuple[int, int, int]:
    """Lattice size per axis; partial border blocks are dropped."""
    if spec.p > min(width, height):
        raise DataError(f"cube side p={spec.p} exceeds frame size {width}x{height}")
    if spec.q > frame_count:
        raise DataError(f"cube depth q={spec.q} exceeds sequence length {frame_count}")
    nx = (width - spec.p) // spec.spatial_stride + 1
    ny = (height - spec.p) // spec.spatial_stride + 1
    nt = (frame_count - spec.q) // spec.temporal_stride + 1
    return nx, ny, nt


def extract_cubes(seq: FrameSequence, spec: CubeSpec) -> CubeGrid:
    """
    Decompose a sequence into p x p x q cubes.

    Args:
        seq: Source frames
        spec: Cube geometry and strides

    Returns:
        CubeGrid with nx * ny * nt cubes, data copied from the sequence

    Raises:
        DataError: If p or q exceeds the sequence extent
    """
    nx, ny, nt = grid_dims(seq.width, seq.height, seq.frame_count, spec)
    p, q = spec.p, spec.q
    frames = seq.frames

    cubes = []
    for ix in range(nx):
        x = ix * spec.spatial_stride
        for iy in range(ny):
            y = iy * spec.spatial_stride
            for it in range(nt):
                t = it * spec.temporal_stride
                cubes.append(Cube((x, y, t), frames[t:t + q, y:y + p, x:x + p].copy()))

    logger.debug(f"Extracted {len(cubes)} cubes, grid {(nx, ny, nt)}, p={p}, q={q}")
    return CubeGrid(spec, cubes, (nx, ny, nt))
