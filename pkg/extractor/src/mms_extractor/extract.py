"""Run a pretrained MMS-LID checkpoint over a manifest's audio clips and
write one EMB1 file per language.

Per clip, the final transformer layer's hidden states are mean-pooled over
time (padding frames excluded via the feature-level attention mask), giving
one vector per clip; rows follow manifest clip order. A frames-dump mode
additionally stores the unpooled frame states for pooling verification.
"""

from __future__ import annotations

import argparse
import json
import struct
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import torch

MODEL_IDS = {
    "126": "facebook/mms-lid-126",
    "256": "facebook/mms-lid-256",
    "1024": "facebook/mms-lid-1024",
    "4017": "facebook/mms-lid-4017",
}

EMB1_MAGIC = b"EMB1"


class ExtractionError(RuntimeError):
    pass


@dataclass
class ExtractorConfig:
    model: str  # one of MODEL_IDS keys or a full model identifier
    manifest: Path
    out_dir: Path
    device: str = "cpu"
    batch_size: int = 4
    frames_dump: bool = False

    @property
    def model_id(self) -> str:
        return MODEL_IDS.get(self.model, self.model)


def read_manifest(path: Path) -> list[dict]:
    doc = json.loads(Path(path).read_text())
    languages = doc["languages"]
    seen = set()
    for entry in languages:
        if entry["lang_id"] in seen:
            raise ExtractionError(f"duplicate lang_id '{entry['lang_id']}'")
        seen.add(entry["lang_id"])
    return languages


def read_wav_mono_16k(path: Path) -> np.ndarray:
    """Minimal mono WAV reader (PCM16 / float32) producing [-1, 1] samples."""
    data = Path(path).read_bytes()
    if data[:4] != b"RIFF" or data[8:12] != b"WAVE":
        raise ExtractionError(f"{path}: not a RIFF/WAVE file")
    fmt = payload = None
    pos = 12
    while pos + 8 <= len(data):
        cid = data[pos : pos + 4]
        (size,) = struct.unpack_from("<I", data, pos + 4)
        body = data[pos + 8 : pos + 8 + size]
        if cid == b"fmt ":
            fmt = struct.unpack_from("<HHIIHH", body, 0)
        elif cid == b"data":
            payload = body
        pos += 8 + size + (size & 1)
    if fmt is None or payload is None:
        raise ExtractionError(f"{path}: missing fmt or data chunk")
    codec, channels, rate, _, _, bits = fmt
    if channels != 1:
        raise ExtractionError(f"{path}: only mono audio supported")
    if rate != 16000:
        raise ExtractionError(f"{path}: sample rate {rate}, expected 16000")
    if codec == 1 and bits == 16:
        return np.frombuffer(payload, dtype="<i2").astype(np.float32) / 32768.0
    if codec == 3 and bits == 32:
        return np.frombuffer(payload, dtype="<f4").astype(np.float32)
    raise ExtractionError(f"{path}: unsupported codec (fmt={codec}, bits={bits})")


def write_emb1(rows: np.ndarray, path: Path, clip_ids: list[str]) -> None:
    rows = np.ascontiguousarray(rows, dtype="<f4")
    count, dim = rows.shape
    with Path(path).open("wb") as f:
        f.write(EMB1_MAGIC)
        f.write(struct.pack("<III", 1, dim, count))
        f.write(rows.tobytes())
    sidecar = path.with_suffix(path.suffix + ".json")
    sidecar.write_text(json.dumps({"clip_ids": clip_ids}, indent=0) + "\n")


def load_model(model_id: str, device: str = "cpu"):
    from transformers import AutoFeatureExtractor, AutoModelForAudioClassification

    feature_extractor = AutoFeatureExtractor.from_pretrained(model_id)
    model = AutoModelForAudioClassification.from_pretrained(model_id)
    model.to(device).eval()
    return model, feature_extractor


def pool_clip_batch(
    model, feature_extractor, waveforms: list[np.ndarray], device: str = "cpu"
) -> tuple[np.ndarray, list[np.ndarray]]:
    """Mean-pool final-layer hidden states per clip, masking out padding.

    Returns (pooled (n, D) array, per-clip frame matrices).
    """
    batch = feature_extractor(
        waveforms,
        sampling_rate=16000,
        return_tensors="pt",
        padding=True,
        return_attention_mask=True,
    )
    input_values = batch.input_values.to(device)
    attention_mask = batch.get("attention_mask")
    if attention_mask is not None:
        attention_mask = attention_mask.to(device)
    with torch.no_grad():
        out = model(
            input_values=input_values,
            attention_mask=attention_mask,
            output_hidden_states=True,
        )
    hidden = out.hidden_states[-1]  # (n, T, D)
    if attention_mask is not None:
        frame_mask = model.wav2vec2._get_feature_vector_attention_mask(
            hidden.shape[1], attention_mask
        )
    else:
        frame_mask = torch.ones(hidden.shape[:2], dtype=torch.bool, device=hidden.device)
    frames = []
    pooled = []
    for i in range(hidden.shape[0]):
        valid = hidden[i][frame_mask[i].bool()]
        frames.append(valid.cpu().numpy())
        pooled.append(valid.mean(dim=0).cpu().numpy())
    return np.stack(pooled), frames


def extract_embeddings(config: ExtractorConfig, model=None, feature_extractor=None) -> list[Path]:
    """Process every language in the manifest; returns written EMB1 paths."""
    if model is None or feature_extractor is None:
        model, feature_extractor = load_model(config.model_id, config.device)
    languages = read_manifest(config.manifest)
    manifest_dir = Path(config.manifest).parent
    config.out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for entry in languages:
        lang_id = entry["lang_id"]
        clip_ids = []
        waveforms = []
        for clip in entry["clips"]:
            audio = clip.get("audio")
            if audio is None:
                print(f"warning: {lang_id}/{clip['clip_id']} has no audio, skipped",
                      file=sys.stderr)
                continue
            path = Path(audio)
            if not path.is_absolute():
                path = manifest_dir / path
            try:
                waveforms.append(read_wav_mono_16k(path))
                clip_ids.append(clip["clip_id"])
            except ExtractionError as e:
                print(f"warning: decode failure, skipped: {e}", file=sys.stderr)
        if not waveforms:
            print(f"warning: {lang_id} has no decodable clips, skipped", file=sys.stderr)
            continue
        rows = []
        frame_dumps = []
        for start in range(0, len(waveforms), config.batch_size):
            pooled, frames = pool_clip_batch(
                model, feature_extractor,
                waveforms[start : start + config.batch_size],
                config.device,
            )
            rows.append(pooled)
            frame_dumps.extend(frames)
        emb_path = config.out_dir / f"{lang_id}.emb"
        write_emb1(np.vstack(rows), emb_path, clip_ids)
        written.append(emb_path)
        if config.frames_dump:
            dump_dir = config.out_dir / f"{lang_id}.frames"
            dump_dir.mkdir(exist_ok=True)
            for clip_id, frames in zip(clip_ids, frame_dumps):
                np.save(dump_dir / f"{clip_id}.npy", frames)
    return written


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="mms-extract",
        description="Extract per-clip MMS-LID hidden-state embeddings to EMB1 files",
    )
    parser.add_argument("command", choices=["extract"])
    parser.add_argument("--model", required=True,
                        help="126 | 256 | 1024 | 4017 or a full model identifier")
    parser.add_argument("--manifest", required=True, type=Path)
    parser.add_argument("--out", required=True, type=Path)
    parser.add_argument("--device", default="cpu")
    parser.add_argument("--batch-size", type=int, default=4)
    parser.add_argument("--frames-dump", action="store_true")
    args = parser.parse_args(argv)
    config = ExtractorConfig(
        model=args.model,
        manifest=args.manifest,
        out_dir=args.out,
        device=args.device,
        batch_size=args.batch_size,
        frames_dump=args.frames_dump,
    )
    try:
        written = extract_embeddings(config)
    except (ExtractionError, OSError, json.JSONDecodeError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    for path in written:
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
