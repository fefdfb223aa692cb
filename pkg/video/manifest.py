"""
Dataset manifests: which frame directories to use and their ground-truth intervals.

Format (one JSON document)::

    {"entries": [{"path": "frames", "scene": "ground", "frame_count": 150,
                  "intervals": [{"start": 0, "end": 100, "label": "normal"},
                                {"start": 100, "end": 150, "label": "abnormal"}]}]}

``path`` is resolved relative to the manifest's directory. ``frame_count`` is optional.
"""
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

from utils.data_manager import DataManager
from utils.errors import DataError, ManifestError, SchemaError
from utils.logger import Logger
from utils.schemas import MANIFEST_SCHEMA, SCHEMA_VERSION
from video.frame_io import FrameLabel, FrameSequence, LabelTrack, count_frames, load_frame_sequence

logger = Logger.get_logger(__name__)


@dataclass(frozen=True)
class LabelInterval:
    """Half-open frame range [start, end) with one label."""

    start: int
    end: int
    label: FrameLabel

    def as_tuple(self) -> Tuple[int, int, FrameLabel]:
        return self.start, self.end, self.label


@dataclass(frozen=True)
class ManifestEntry:
    """One labelled frame directory."""

    path: Path
    scene: str
    intervals: Tuple[LabelInterval, ...]
    frame_count: Optional[int] = None

    def load(self) -> Tuple[FrameSequence, LabelTrack]:
        """Load the frames and expand the intervals into a per-frame track."""
        seq = load_frame_sequence(self.path)
        if self.frame_count is not None and self.frame_count != seq.frame_count:
            raise ManifestError(
                f"scene '{self.scene}' declares {self.frame_count} frames, "
                f"{self.path} holds {seq.frame_count}"
            )
        self._check_range(seq.frame_count)
        track = LabelTrack.from_intervals((iv.as_tuple() for iv in self.intervals), seq.frame_count)
        return seq, track

    def intervals_with(self, label: FrameLabel) -> List[LabelInterval]:
        return [iv for iv in self.intervals if iv.label is label]

    def _check_range(self, frame_count: int) -> None:
        for iv in self.intervals:
            if iv.end > frame_count:
                raise ManifestError(
                    f"scene '{self.scene}': interval [{iv.start}, {iv.end}) exceeds "
                    f"frame count {frame_count}"
                )


@dataclass(frozen=True)
class DatasetManifest:
    entries: Tuple[ManifestEntry, ...] = field(default_factory=tuple)

    def __len__(self) -> int:
        return len(self.entries)


def _parse_intervals(raw: List[Dict[str, Any]], scene: str) -> Tuple[LabelInterval, ...]:
    intervals = sorted(
        (LabelInterval(int(r["start"]), int(r["end"]), FrameLabel(r["label"])) for r in raw),
        key=lambda iv: (iv.start, iv.end),
    )
    for iv in intervals:
        if iv.start < 0 or iv.end <= iv.start:
            raise ManifestError(f"scene '{scene}': invalid interval [{iv.start}, {iv.end})")
    for prev, cur in zip(intervals, intervals[1:]):
        if cur.start < prev.end:
            raise ManifestError(
                f"scene '{scene}': intervals [{prev.start}, {prev.end}) and "
                f"[{cur.start}, {cur.end}) overlap"
            )
    return tuple(intervals)


def parse_manifest(document: Any, base_dir: Union[str, Path] = ".") -> DatasetManifest:
    """
    Validate and parse an already-loaded manifest document.

    Args:
        document: Parsed JSON
        base_dir: Directory that relative entry paths are resolved against

    Returns:
        DatasetManifest

    Raises:
        ManifestError: Malformed syntax, overlapping or out-of-range intervals
    """
    try:
        DataManager.validate(document, MANIFEST_SCHEMA, "manifest")
    except SchemaError as e:
        raise ManifestError(str(e)) from e

    base_dir = Path(base_dir)
    entries = []
    for raw in document["entries"]:
        path = Path(raw["path"])
        if not path.is_absolute():
            path = base_dir / path
        entry = ManifestEntry(
            path=path,
            scene=raw["scene"],
            intervals=_parse_intervals(raw["intervals"], raw["scene"]),
            frame_count=raw.get("frame_count"),
        )
        frame_count = entry.frame_count
        if frame_count is None and path.is_dir():
            frame_count = count_frames(path)
        if frame_count is not None:
            entry._check_range(frame_count)
        entries.append(entry)

    return DatasetManifest(tuple(entries))


def load_manifest(path: Union[str, Path]) -> DatasetManifest:
    """
    Load a JSON manifest.

    An empty file yields an empty manifest.
    """
    path = Path(path)
    if not path.is_file():
        raise ManifestError(f"manifest not found: {path}")
    if not path.read_text().strip():
        logger.warning(f"Manifest {path} is empty")
        return DatasetManifest()
    try:
        document = DataManager.load_json(path)
    except DataError as e:
        raise ManifestError(str(e)) from e
    manifest = parse_manifest(document, base_dir=path.parent)
    logger.info(f"Loaded manifest {path} with {len(manifest)} entries")
    return manifest


def manifest_to_dict(manifest: DatasetManifest, base_dir: Union[str, Path] = ".") -> Dict[str, Any]:
    base_dir = Path(base_dir)
    entries = []
    for entry in manifest.entries:
        try:
            rel = entry.path.relative_to(base_dir)
        except ValueError:
            rel = entry.path
        raw = {"path": rel.as_posix(), "scene": entry.scene}
        if entry.frame_count is not None:
            raw["frame_count"] = entry.frame_count
        raw["intervals"] = [
            {"start": iv.start, "end": iv.end, "label": iv.label.value} for iv in entry.intervals
        ]
        entries.append(raw)
    return {"schema_version": SCHEMA_VERSION, "entries": entries}


def save_manifest(manifest: DatasetManifest, path: Union[str, Path]) -> None:
    """Write a manifest with entry paths relative to its own directory."""
    path = Path(path)
    DataManager.save_json(manifest_to_dict(manifest, base_dir=path.parent), path)
