"""ETJ trajectory interchange format and dataset manifests.

An ETJ document is JSON: fps, frame count, per-frame camera rows (row-major
[R|t], world-from-camera, meters), optional character hips, caption, tag
segments and validity mask. Floats round-trip 64-bit exactly (shortest
repr). Writes go to a temp file in the target directory and are renamed
into place, so failures never leave partial output.
"""

from __future__ import annotations

import json
import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ManifestError, MalformedEtjError
from .geom import CameraTrajectory, CharacterTrajectory
from .tagging import TagSegment

ETJ_VERSION = 1
_ROT_LOAD_TOL = 1e-5


@dataclass
class EtjData:
    """In-memory model of one ETJ document."""

    camera: CameraTrajectory
    character: CharacterTrajectory | None = None
    caption: str | None = None
    caption_kind: str | None = None
    tags: dict[str, list[TagSegment]] = field(default_factory=dict)

    @property
    def fps(self) -> float:
        return self.camera.fps

    def __post_init__(self):
        if self.character is not None and len(self.character) != len(self.camera):
            raise MalformedEtjError("character length must match camera length")


def to_dict(data: EtjData) -> dict:
    cam = data.camera
    rows = np.concatenate([cam.rotations, cam.translations[:, :, None]], axis=2)
    doc: dict = {
        "version": ETJ_VERSION,
        "fps": cam.fps,
        "n_frames": len(cam),
        "camera": rows.reshape(len(cam), 12).tolist(),
    }
    if data.character is not None:
        doc["character_hips"] = data.character.hips.tolist()
    if data.caption is not None:
        doc["caption"] = data.caption
        doc["caption_kind"] = data.caption_kind or "camera"
    if data.tags:
        doc["tags"] = {
            key: [[s.start, s.end, s.label] for s in segs]
            for key, segs in data.tags.items()
        }
    if not cam.mask.all():
        doc["mask"] = cam.mask.astype(int).tolist()
    return doc


def from_dict(doc: dict) -> EtjData:
    try:
        version = doc["version"]
        fps = float(doc["fps"])
        n = int(doc["n_frames"])
        cam_rows = np.asarray(doc["camera"], dtype=float)
    except (KeyError, TypeError, ValueError) as err:
        raise MalformedEtjError(f"missing or invalid required field: {err}") from err
    if version != ETJ_VERSION:
        raise MalformedEtjError(f"unsupported ETJ version {version}")
    if cam_rows.shape != (n, 12):
        raise MalformedEtjError(f"camera must be {n} rows of 12 numbers, got {cam_rows.shape}")
    mats = cam_rows.reshape(n, 3, 4)
    rotations, translations = mats[:, :, :3], mats[:, :, 3]
    err = np.linalg.norm(
        rotations @ rotations.transpose(0, 2, 1) - np.eye(3), axis=(1, 2)
    ).max()
    if err > _ROT_LOAD_TOL:
        raise MalformedEtjError(f"camera rotations not orthonormal (err {err:.3g})")

    mask = None
    if "mask" in doc:
        mask = np.asarray(doc["mask"], dtype=int)
        if mask.shape != (n,):
            raise MalformedEtjError("mask length must equal n_frames")
        mask = mask.astype(bool)
    camera = CameraTrajectory(fps, rotations, translations, mask)

    character = None
    if "character_hips" in doc:
        hips = np.asarray(doc["character_hips"], dtype=float)
        if hips.shape != (n, 3):
            raise MalformedEtjError(f"character_hips must be ({n},3), got {hips.shape}")
        character = CharacterTrajectory(fps, hips)

    tags: dict[str, list[TagSegment]] = {}
    for key, segs in (doc.get("tags") or {}).items():
        if key not in ("camera", "character"):
            raise MalformedEtjError(f"unknown tag stream {key!r}")
        try:
            tags[key] = [TagSegment(int(a), int(b), str(lbl)) for a, b, lbl in segs]
        except (TypeError, ValueError) as exc:
            raise MalformedEtjError(f"malformed tag segment in {key!r}") from exc

    kind = doc.get("caption_kind")
    if kind is not None and kind not in ("camera", "camera-character"):
        raise MalformedEtjError(f"unknown caption_kind {kind!r}")
    return EtjData(camera, character, doc.get("caption"), kind, tags)


def atomic_write_text(path, text: str):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def save_etj(path, data: EtjData):
    atomic_write_text(path, json.dumps(to_dict(data)) + "\n")


def load_etj(path) -> EtjData:
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as err:
        raise MalformedEtjError(f"{path}: not valid JSON: {err}") from err
    if not isinstance(doc, dict):
        raise MalformedEtjError(f"{path}: expected a JSON object")
    return from_dict(doc)


@dataclass(frozen=True)
class ManifestEntry:
    path: Path
    split: str = "train"
    overlap_len: int | None = None


def load_manifest(path) -> list[ManifestEntry]:
    """Read a dataset manifest; entry paths resolve against the manifest dir."""
    path = Path(path)
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as err:
        raise ManifestError(f"{path}: not valid JSON: {err}") from err
    if not isinstance(doc, list):
        raise ManifestError(f"{path}: manifest must be a JSON list")
    entries = []
    for item in doc:
        if not isinstance(item, dict) or "path" not in item:
            raise ManifestError(f"{path}: entries need a 'path' field")
        split = item.get("split", "train")
        if split not in ("train", "val"):
            raise ManifestError(f"{path}: split must be train or val, got {split!r}")
        p = path.parent / item["path"]
        if not p.exists():
            raise ManifestError(f"{path}: missing file {p}")
        overlap = item.get("overlap_len")
        entries.append(ManifestEntry(p, split, None if overlap is None else int(overlap)))
    if not entries:
        raise ManifestError(f"{path}: empty manifest")
    return entries


def save_manifest(path, entries: list[dict]):
    atomic_write_text(path, json.dumps(entries, indent=2) + "\n")
