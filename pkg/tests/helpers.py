"""Shared test utilities: an independent Newick parser oracle and
synthetic corpus builders."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from langtree import corpus


class NewickNode:
    def __init__(self, name=None, length=0.0, label=None, children=None):
        self.name = name
        self.length = length
        self.label = label
        self.children = children or []

    def leaves(self):
        if not self.children:
            return frozenset([self.name])
        out = frozenset()
        for c in self.children:
            out |= c.leaves()
        return out


def parse_newick(text: str) -> NewickNode:
    """Small recursive-descent Newick parser, independent of the writer."""
    text = text.strip()
    if text.startswith("["):  # leading bracket comment
        text = text[text.index("]") + 1 :].strip()
    assert text.endswith(";")
    s = text[:-1]
    pos = 0

    def parse_node():
        nonlocal pos
        node = NewickNode()
        if s[pos] == "(":
            pos += 1
            node.children.append(parse_node())
            while s[pos] == ",":
                pos += 1
                node.children.append(parse_node())
            assert s[pos] == ")"
            pos += 1
            start = pos
            while pos < len(s) and s[pos] not in ":,();":
                pos += 1
            if pos > start:
                node.label = s[start:pos]
        else:
            start = pos
            while pos < len(s) and s[pos] not in ":,();":
                pos += 1
            node.name = s[start:pos]
        if pos < len(s) and s[pos] == ":":
            pos += 1
            start = pos
            while pos < len(s) and s[pos] not in ",();":
                pos += 1
            node.length = float(s[start:pos])
        return node

    root = parse_node()
    assert pos == len(s)
    return root


def newick_clade_heights(root: NewickNode) -> dict[frozenset, float]:
    """Map each internal node's leaf set to its ultrametric height."""
    depths = {}

    def walk(node, depth):
        depths[id(node)] = depth
        for c in node.children:
            walk(c, depth + c.length)

    walk(root, 0.0)
    leaf_depth = None
    out = {}

    def collect(node):
        nonlocal leaf_depth
        if not node.children:
            leaf_depth = depths[id(node)]
            return
        for c in node.children:
            collect(c)

    collect(root)

    def heights(node):
        if node.children:
            out[node.leaves()] = leaf_depth - depths[id(node)]
            for c in node.children:
                heights(c)

    heights(root)
    return out


def newick_support_labels(root: NewickNode) -> dict[frozenset, int]:
    out = {}

    def walk(node):
        if node.children:
            if node.label is not None:
                out[node.leaves()] = int(node.label)
            for c in node.children:
                walk(c)

    walk(root)
    return out


def write_corpus(
    tmpdir: Path,
    lang_specs: list[dict],
    embeddings: dict[str, np.ndarray],
    audio: dict[str, list[np.ndarray]] | None = None,
    sample_rate: int = 16000,
) -> Path:
    """Write a manifest plus EMB1 (and optional WAV) files into tmpdir.

    lang_specs entries: lang_id, family, subfamily, optional group_tags.
    """
    tmpdir = Path(tmpdir)
    tmpdir.mkdir(parents=True, exist_ok=True)
    languages = []
    for spec in lang_specs:
        lang_id = spec["lang_id"]
        rows = embeddings[lang_id]
        clip_ids = [f"{lang_id}_clip{i}" for i in range(rows.shape[0])]
        corpus.write_embeddings(rows, tmpdir / f"{lang_id}.emb", clip_ids=clip_ids)
        clips = []
        if audio is not None:
            for i, samples in enumerate(audio[lang_id]):
                wav = tmpdir / f"{lang_id}_{i}.wav"
                corpus.write_wav(corpus.AudioClip(samples, sample_rate), wav)
                clips.append({"clip_id": f"{lang_id}_clip{i}", "audio": wav.name})
            # pad clip list to match embedding rows when audio is shorter
            for i in range(len(clips), len(clip_ids)):
                clips.append({"clip_id": clip_ids[i], "audio": None})
        else:
            clips = [{"clip_id": cid, "audio": None} for cid in clip_ids]
        languages.append(
            {
                "lang_id": lang_id,
                "display_name": spec.get("display_name", lang_id),
                "family": spec["family"],
                "subfamily": spec["subfamily"],
                "group_tags": sorted(spec.get("group_tags", [])),
                "seen_1k": spec.get("seen_1k", False),
                "seen_4k": spec.get("seen_4k", False),
                "clips": clips,
                "embeddings": f"{lang_id}.emb",
            }
        )
    manifest = tmpdir / "manifest.json"
    manifest.write_text(json.dumps({"languages": languages}, indent=1))
    return manifest


def blob_corpus(
    tmpdir: Path,
    n_families: int = 4,
    langs_per_family: int = 5,
    clips_per_lang: int = 6,
    dim: int = 8,
    separation: float = 10.0,
    noise: float = 1.0,
    seed: int = 42,
    group_tag_family: int | None = None,
):
    """Synthetic corpus: well-separated family blobs with per-clip noise."""
    rng = np.random.default_rng(seed)
    lang_specs = []
    embeddings = {}
    family_centers = rng.normal(0, separation, size=(n_families, dim))
    for f in range(n_families):
        for l in range(langs_per_family):
            lang_id = f"f{f}l{l}"
            center = family_centers[f] + rng.normal(0, noise, dim)
            clips = center + rng.normal(0, noise, size=(clips_per_lang, dim))
            embeddings[lang_id] = clips
            tags = {"TARGET"} if group_tag_family == f else set()
            lang_specs.append(
                {
                    "lang_id": lang_id,
                    "family": f"family{f}",
                    "subfamily": f"family{f}",
                    "group_tags": tags,
                }
            )
    manifest = write_corpus(Path(tmpdir), lang_specs, embeddings)
    return manifest, lang_specs, embeddings


def hierarchical_corpus(
    tmpdir: Path,
    n_families: int = 3,
    subfamilies_per_family: int = 3,
    langs_per_subfamily: int = 5,
    clips_per_lang: int = 4,
    dim: int = 10,
    seed: int = 7,
    target_family: int = 0,
):
    """Nested Gaussian offsets: family >> subfamily >> language >> clip."""
    rng = np.random.default_rng(seed)
    lang_specs = []
    embeddings = {}
    for f in range(n_families):
        f_center = rng.normal(0, 100.0, dim)
        for s in range(subfamilies_per_family):
            s_center = f_center + rng.normal(0, 10.0, dim)
            for l in range(langs_per_subfamily):
                lang_id = f"f{f}s{s}l{l}"
                center = s_center + rng.normal(0, 1.0, dim)
                embeddings[lang_id] = center + rng.normal(
                    0, 0.1, size=(clips_per_lang, dim)
                )
                tags = {"TARGET"} if f == target_family else set()
                lang_specs.append(
                    {
                        "lang_id": lang_id,
                        "family": f"family{f}",
                        "subfamily": f"family{f}_sub{s}",
                        "group_tags": tags,
                    }
                )
    manifest = write_corpus(Path(tmpdir), lang_specs, embeddings)
    return manifest, lang_specs, embeddings


def sine_clip(freq: float, seconds: float = 1.0, rate: int = 16000, amp: float = 0.5):
    t = np.arange(int(seconds * rate)) / rate
    return amp * np.sin(2 * np.pi * freq * t)
