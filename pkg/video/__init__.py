"""Video package: frame I/O, manifests, synthetic scenes and cube extraction."""
from .frame_io import (
    FrameLabel,
    FrameSequence,
    LabelTrack,
    load_frame_sequence,
    write_frame_sequence,
)
from .manifest import (
    DatasetManifest,
    LabelInterval,
    ManifestEntry,
    load_manifest,
    save_manifest,
)
from .synthetic import SyntheticConfig, generate_synthetic_sequence
from .cubes import Cube, CubeGrid, CubeSpec, extract_cubes

__all__ = [
    "FrameLabel",
    "FrameSequence",
    "LabelTrack",
    "load_frame_sequence",
    "write_frame_sequence",
    "DatasetManifest",
    "LabelInterval",
    "ManifestEntry",
    "load_manifest",
    "save_manifest",
    "SyntheticConfig",
    "generate_synthetic_sequence",
    "Cube",
    "CubeGrid",
    "CubeSpec",
    "extract_cubes",
]
