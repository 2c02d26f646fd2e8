"""Frame ingestion: manifest parsing, face-box selection and the per-frame
crop -> segment -> features chain."""
from __future__ import annotations

import csv
import logging
import shlex
import subprocess
from dataclasses import dataclass, field
from pathlib import Path

from .errors import InvalidInputError, PhoneWatchError
from .evaluation import LabeledDataset, Sample
from .features import FeatureVector, extract_features
from .imaging import ImageBuffer, read_ppm, write_ppm
from .roi import Rect, crop, expand_face, largest_face, layout_for_crop
from .segmentation import DEFAULT_FRACTION, SkinMask, segment_skin

log = logging.getLogger(__name__)

MANIFEST_FIELDS = ["path", "face_x", "face_y", "face_w", "face_h", "label", "timestamp"]

OK = "ok"
NOT_FOUND = "not_found"
ERROR = "error"


@dataclass
class ManifestEntry:
    path: str
    faces: list = field(default_factory=list)  # candidate Rects; empty when "none"
    label: int | None = None
    timestamp: float | None = None

    @property
    def face(self) -> Rect | None:
        return largest_face(self.faces)


def _parse_label(text: str):
    text = text.strip()
    if text in ("?", ""):
        return None
    value = int(text)
    if value not in (-1, 1):
        raise InvalidInputError(f"label must be +1, -1 or ?, got {text}")
    return value


def read_manifest(path) -> list[ManifestEntry]:
    """Parse a manifest CSV.

    Consecutive rows naming the same frame (and timestamp) are merged into
    one entry holding every candidate face box.
    """
    path = Path(path)
    entries: list[ManifestEntry] = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        missing = set(MANIFEST_FIELDS) - set(reader.fieldnames or [])
        if missing:
            raise InvalidInputError(f"{path}: manifest lacks columns {sorted(missing)}")
        for lineno, row in enumerate(reader, start=2):
            try:
                box_fields = [row[k].strip() for k in ("face_x", "face_y", "face_w", "face_h")]
                box = None
                if not any(v.lower() == "none" or v == "" for v in box_fields):
                    box = Rect(*(int(v) for v in box_fields))
                label = _parse_label(row["label"])
                ts = row["timestamp"].strip()
                timestamp = float(ts) if ts not in ("", "?", "none") else None
            except (ValueError, TypeError) as exc:
                raise InvalidInputError(f"{path}:{lineno}: {exc}") from exc
            frame = row["path"].strip()
            prev = entries[-1] if entries else None
            if prev is not None and prev.path == frame and prev.timestamp == timestamp:
                if box is not None:
                    prev.faces.append(box)
                continue
            entries.append(ManifestEntry(frame, [box] if box else [], label, timestamp))
    return entries


def write_manifest(path, entries) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(MANIFEST_FIELDS)
        for e in entries:
            label = "?" if e.label is None else str(e.label)
            ts = "" if e.timestamp is None else repr(float(e.timestamp))
            boxes = e.faces or [None]
            for box in boxes:
                coords = ["none"] * 4 if box is None else [box.x, box.y, box.w, box.h]
                w.writerow([e.path, *coords, label, ts])


def run_detector(command: str, frame_path) -> list[Rect]:
    """Ask an external detector for face boxes: it prints ``x y w h`` per line."""
    out = subprocess.run(shlex.split(command) + [str(frame_path)], capture_output=True,
                         text=True, check=True).stdout
    boxes = []
    for line in out.splitlines():
        parts = line.replace(",", " ").split()
        if len(parts) == 4:
            boxes.append(Rect(*(int(float(p)) for p in parts)))
    return boxes


@dataclass(frozen=True, eq=False)
class FrameResult:
    frame_id: str
    status: str
    features: FeatureVector | None = None
    mask: SkinMask | None = None
    message: str = ""
    label: int | None = None
    timestamp: float | None = None


def process_frame(frame: ImageBuffer, face: Rect, frac: float = DEFAULT_FRACTION):
    """Expand the face box, crop, segment and measure.  Pure."""
    region = expand_face(face, frame.width, frame.height)
    layout = layout_for_crop(region.w, region.h)
    mask = segment_skin(crop(frame, region), layout, frac)
    return extract_features(mask, layout), mask


def process_entry(entry: ManifestEntry, base_dir=".", frac: float = DEFAULT_FRACTION,
                  detector: str | None = None, keep_mask: bool = False) -> FrameResult:
    meta = dict(frame_id=entry.path, label=entry.label, timestamp=entry.timestamp)
    frame_path = Path(base_dir) / entry.path
    try:
        faces = entry.faces
        if detector and not faces:
            faces = run_detector(detector, frame_path)
        face = largest_face(faces)
        if face is None:
            return FrameResult(status=NOT_FOUND, **meta)
        frame = read_ppm(frame_path)
        features, mask = process_frame(frame, face, frac)
    except (OSError, PhoneWatchError, subprocess.SubprocessError) as exc:
        return FrameResult(status=ERROR, message=str(exc), **meta)
    return FrameResult(status=OK, features=features, mask=mask if keep_mask else None, **meta)


@dataclass
class IngestReport:
    dataset: LabeledDataset
    results: list

    def count(self, status: str) -> int:
        return sum(r.status == status for r in self.results)


def ingest(manifest_path, frac: float = DEFAULT_FRACTION, detector: str | None = None,
           require_usable: bool = True) -> IngestReport:
    manifest_path = Path(manifest_path)
    entries = read_manifest(manifest_path)
    results = [process_entry(e, manifest_path.parent, frac, detector) for e in entries]
    for r in results:
        if r.status == ERROR:
            log.warning("frame %s skipped: %s", r.frame_id, r.message)
    items = [Sample(r.frame_id, r.features, r.label, r.timestamp)
             for r in results if r.status == OK]
    if require_usable and not items:
        raise InvalidInputError(f"{manifest_path}: no usable frames")
    return IngestReport(LabeledDataset(items), results)


# -- synthetic sets on disk ---------------------------------------------------------


def export_scenes(out_dir, scenes, timestamps=None, name="frame") -> Path:
    """Write scenes as PPM files plus ``manifest.csv``; returns the manifest path.

    ``scenes`` may contain ``None`` (a frame with no face): a background-only
    image is still written and its face box recorded as ``none``.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    entries = []
    for i, item in enumerate(scenes):
        scene, label = item if isinstance(item, tuple) else (item, item.label)
        fname = f"{name}_{i:05d}.ppm"
        if scene is None:
            blank = ImageBuffer.filled(160, 120, (30, 40, 70))
            write_ppm(out / fname, blank)
            faces = []
        else:
            write_ppm(out / fname, scene.frame)
            faces = [scene.face]
        ts = None if timestamps is None else timestamps[i]
        entries.append(ManifestEntry(fname, faces, label, ts))
    manifest = out / "manifest.csv"
    write_manifest(manifest, entries)
    return manifest
