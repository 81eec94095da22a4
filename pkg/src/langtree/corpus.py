"""Corpus data model and file I/O: manifests, embedding files, WAV audio."""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

EMB1_MAGIC = b"EMB1"
EMB1_VERSION = 1

PCM16_SCALE = 32768.0


class CorpusError(ValueError):
    """Raised for malformed manifests, embedding files, or audio."""


@dataclass(frozen=True)
class LanguageRecord:
    lang_id: str
    display_name: str
    family: str
    subfamily: str
    group_tags: frozenset[str] = frozenset()
    seen_1k: bool = False
    seen_4k: bool = False


@dataclass(frozen=True)
class ClipRef:
    clip_id: str
    source: str | None = None
    duration_s: float | None = None


@dataclass
class EmbeddingSet:
    """Per-language lists of per-clip embedding vectors, all sharing one dim."""

    dim: int
    vectors: dict[str, np.ndarray] = field(default_factory=dict)

    def add(self, lang_id: str, rows: np.ndarray) -> None:
        rows = np.asarray(rows, dtype=np.float64)
        if rows.ndim != 2 or rows.shape[1] != self.dim:
            raise CorpusError(
                f"{lang_id}: expected shape (n, {self.dim}), got {rows.shape}"
            )
        if not np.isfinite(rows).all():
            raise CorpusError(f"{lang_id}: non-finite embedding values")
        self.vectors[lang_id] = rows

    def __contains__(self, lang_id: str) -> bool:
        return lang_id in self.vectors

    def __getitem__(self, lang_id: str) -> np.ndarray:
        return self.vectors[lang_id]


@dataclass(frozen=True)
class AudioClip:
    samples: np.ndarray
    sample_rate: int


def load_manifest(path: str | Path) -> tuple[list[LanguageRecord], dict[str, list[ClipRef]]]:
    """Load the JSON manifest, preserving language order.

    Returns the language records and a mapping lang_id -> clip list. The
    manifest may also carry per-language "embeddings" and per-clip "audio"
    paths; those land in ClipRef.source / the records' sidecar mapping and
    are resolved by the callers that need them.
    """
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as e:
        raise CorpusError(f"{path}: not valid JSON: {e}") from e

    if not isinstance(doc, dict) or "languages" not in doc:
        raise CorpusError(f"{path}: missing top-level 'languages' list")

    records: list[LanguageRecord] = []
    clips: dict[str, list[ClipRef]] = {}
    for entry in doc["languages"]:
        for key in ("lang_id", "display_name", "family", "subfamily", "clips"):
            if key not in entry:
                raise CorpusError(f"language entry missing required field '{key}'")
        lang_id = entry["lang_id"]
        if lang_id in clips:
            raise CorpusError(f"duplicate lang_id '{lang_id}'")
        clip_list = []
        seen_clip_ids = set()
        for c in entry["clips"]:
            if "clip_id" not in c:
                raise CorpusError(f"{lang_id}: clip missing clip_id")
            if c["clip_id"] in seen_clip_ids:
                raise CorpusError(f"{lang_id}: duplicate clip_id '{c['clip_id']}'")
            seen_clip_ids.add(c["clip_id"])
            clip_list.append(
                ClipRef(
                    clip_id=c["clip_id"],
                    source=c.get("audio"),
                    duration_s=c.get("duration_s"),
                )
            )
        if not clip_list:
            raise CorpusError(f"{lang_id}: language has zero clips")
        records.append(
            LanguageRecord(
                lang_id=lang_id,
                display_name=entry["display_name"],
                family=entry["family"],
                subfamily=entry["subfamily"],
                group_tags=frozenset(entry.get("group_tags", [])),
                seen_1k=bool(entry.get("seen_1k", False)),
                seen_4k=bool(entry.get("seen_4k", False)),
            )
        )
        clips[lang_id] = clip_list
    return records, clips


def manifest_embedding_paths(path: str | Path) -> dict[str, Path]:
    """Per-language embedding file paths from the manifest, resolved
    relative to the manifest location."""
    path = Path(path)
    doc = json.loads(path.read_text())
    out = {}
    for entry in doc["languages"]:
        emb = entry.get("embeddings")
        if emb is not None:
            p = Path(emb)
            out[entry["lang_id"]] = p if p.is_absolute() else path.parent / p
    return out


def manifest_audio_paths(path: str | Path) -> dict[str, list[Path]]:
    """Per-language audio clip paths, resolved relative to the manifest."""
    path = Path(path)
    doc = json.loads(path.read_text())
    out: dict[str, list[Path]] = {}
    for entry in doc["languages"]:
        paths = []
        for c in entry["clips"]:
            audio = c.get("audio")
            if audio is not None:
                p = Path(audio)
                paths.append(p if p.is_absolute() else path.parent / p)
        out[entry["lang_id"]] = paths
    return out


def read_embeddings(path: str | Path) -> np.ndarray:
    """Read one language's EMB1 file into an (count, dim) float array."""
    data = Path(path).read_bytes()
    if len(data) < 16 or data[:4] != EMB1_MAGIC:
        raise CorpusError(f"{path}: bad magic, not an EMB1 file")
    version, dim, count = struct.unpack_from("<III", data, 4)
    if version != EMB1_VERSION:
        raise CorpusError(f"{path}: unsupported EMB1 version {version}")
    expected = 16 + 4 * dim * count
    if len(data) != expected:
        raise CorpusError(
            f"{path}: truncated payload, expected {expected} bytes got {len(data)}"
        )
    rows = np.frombuffer(data, dtype="<f4", offset=16).reshape(count, dim)
    if not np.isfinite(rows).all():
        raise CorpusError(f"{path}: non-finite embedding values")
    return rows.astype(np.float64)


def write_embeddings(
    vectors: np.ndarray, path: str | Path, clip_ids: list[str] | None = None
) -> None:
    """Write an (count, dim) matrix as EMB1; optional clip-id sidecar."""
    vectors = np.asarray(vectors)
    if vectors.ndim != 2 or vectors.shape[0] == 0:
        raise CorpusError("write_embeddings needs a non-empty 2-D matrix")
    if not np.isfinite(vectors).all():
        raise CorpusError("non-finite embedding values")
    count, dim = vectors.shape
    path = Path(path)
    with path.open("wb") as f:
        f.write(EMB1_MAGIC)
        f.write(struct.pack("<III", EMB1_VERSION, dim, count))
        f.write(np.ascontiguousarray(vectors, dtype="<f4").tobytes())
    if clip_ids is not None:
        if len(clip_ids) != count:
            raise CorpusError("clip_ids length does not match row count")
        sidecar = path.with_suffix(path.suffix + ".json")
        sidecar.write_text(json.dumps({"clip_ids": clip_ids}, indent=0) + "\n")


def load_embedding_set(
    manifest_path: str | Path, dim: int | None = None
) -> tuple[list[LanguageRecord], dict[str, list[ClipRef]], EmbeddingSet]:
    """Load the manifest plus every referenced EMB1 file."""
    records, clips = load_manifest(manifest_path)
    paths = manifest_embedding_paths(manifest_path)
    emb: EmbeddingSet | None = None
    for rec in records:
        if rec.lang_id not in paths:
            raise CorpusError(f"{rec.lang_id}: manifest has no embeddings path")
        rows = read_embeddings(paths[rec.lang_id])
        if emb is None:
            emb = EmbeddingSet(dim=dim if dim is not None else rows.shape[1])
        emb.add(rec.lang_id, rows)
        if len(clips[rec.lang_id]) != rows.shape[0]:
            raise CorpusError(
                f"{rec.lang_id}: {rows.shape[0]} embedding rows but "
                f"{len(clips[rec.lang_id])} clips in manifest"
            )
    assert emb is not None
    return records, clips, emb


def read_wav(path: str | Path, require_rate: int | None = None) -> AudioClip:
    """Read a mono RIFF/WAVE file (PCM16 or float32) into [-1, 1] samples."""
    data = Path(path).read_bytes()
    if len(data) < 12 or data[:4] != b"RIFF" or data[8:12] != b"WAVE":
        raise CorpusError(f"{path}: not a RIFF/WAVE file")

    fmt = None
    payload = None
    pos = 12
    while pos + 8 <= len(data):
        cid = data[pos : pos + 4]
        (size,) = struct.unpack_from("<I", data, pos + 4)
        body = data[pos + 8 : pos + 8 + size]
        if len(body) < size:
            raise CorpusError(f"{path}: truncated chunk {cid!r}")
        if cid == b"fmt ":
            if size < 16:
                raise CorpusError(f"{path}: fmt chunk too short")
            fmt = struct.unpack_from("<HHIIHH", body, 0)
        elif cid == b"data":
            payload = body
        pos += 8 + size + (size & 1)

    if fmt is None or payload is None:
        raise CorpusError(f"{path}: missing fmt or data chunk")
    codec, channels, sample_rate, _, _, bits = fmt
    if channels != 1:
        raise CorpusError(f"{path}: {channels} channels, only mono supported")
    if codec == 1 and bits == 16:
        samples = np.frombuffer(payload, dtype="<i2").astype(np.float64) / PCM16_SCALE
    elif codec == 3 and bits == 32:
        samples = np.frombuffer(payload, dtype="<f4").astype(np.float64)
    else:
        raise CorpusError(f"{path}: unsupported codec (fmt={codec}, bits={bits})")
    if require_rate is not None and sample_rate != require_rate:
        raise CorpusError(
            f"{path}: sample rate {sample_rate}, expected {require_rate}"
        )
    return AudioClip(samples=samples, sample_rate=sample_rate)


def write_wav(clip: AudioClip, path: str | Path, float32: bool = False) -> None:
    """Write a mono WAV file; PCM16 by default, IEEE float32 on request."""
    samples = np.asarray(clip.samples, dtype=np.float64)
    if float32:
        codec, bits = 3, 32
        payload = samples.astype("<f4").tobytes()
    else:
        codec, bits = 1, 16
        ints = np.clip(np.round(samples * PCM16_SCALE), -32768, 32767)
        payload = ints.astype("<i2").tobytes()
    byte_rate = clip.sample_rate * bits // 8
    with Path(path).open("wb") as f:
        f.write(b"RIFF")
        f.write(struct.pack("<I", 36 + len(payload)))
        f.write(b"WAVE")
        f.write(b"fmt ")
        f.write(struct.pack("<IHHIIHH", 16, codec, 1, clip.sample_rate, byte_rate, bits // 8, bits))
        f.write(b"data")
        f.write(struct.pack("<I", len(payload)))
        f.write(payload)
