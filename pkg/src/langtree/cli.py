"""Command-line pipeline driver."""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__, acoustics, corpus, render, stats
from .boot import BootstrapConfig, bootstrap_support, consensus_report
from .centroid import build_matrix, standardize
from .cluster import cut_at_k, pairwise_distances, to_newick, ward_linkage
from .metrics import Partition, sweep_k, target_eval
from .projection import pca_fit_project


class ValidationError(ValueError):
    pass


def _config_hash(args: argparse.Namespace) -> str:
    # the output directory is not an analysis parameter; identical runs into
    # different directories must hash identically
    resolved = {k: str(v) for k, v in sorted(vars(args).items()) if k != "out"}
    return hashlib.sha256(json.dumps(resolved, sort_keys=True).encode()).hexdigest()[:12]


def _header(args: argparse.Namespace) -> str:
    return f"# langtree v{__version__} config={_config_hash(args)}"


def _write_tsv(path: Path, args: argparse.Namespace, columns: list[str], rows) -> None:
    lines = [_header(args), "\t".join(columns)]
    for row in rows:
        lines.append("\t".join(str(v) for v in row))
    path.write_text("\n".join(lines) + "\n")


def _write_config(args: argparse.Namespace, out: Path) -> None:
    resolved = {k: str(v) for k, v in sorted(vars(args).items()) if k != "func"}
    resolved["version"] = __version__
    (out / "run_config.json").write_text(json.dumps(resolved, indent=2) + "\n")


def _load_pipeline(args: argparse.Namespace):
    records, clips, emb = corpus.load_embedding_set(args.manifest)
    lang_order = [r.lang_id for r in records]
    raw = build_matrix(emb, lang_order)
    matrix = raw if getattr(args, "raw_centroids", False) else standardize(raw)
    return records, clips, emb, matrix


def _reference_tree(matrix):
    return ward_linkage(pairwise_distances(matrix), labels=matrix.lang_ids)


def _truth_partition(records, level: str = "subfamily") -> Partition:
    labels = [getattr(r, level) for r in records]
    return Partition.from_labels([r.lang_id for r in records], labels)


def _target_set(records, tag: str) -> set[str]:
    return {r.lang_id for r in records if tag in r.group_tags}


def cmd_centroids(args, out: Path) -> list[Path]:
    records, clips, emb, matrix = _load_pipeline(args)
    path = out / "centroids.emb"
    corpus.write_embeddings(matrix.values, path, clip_ids=matrix.lang_ids)
    return [path]


def cmd_cluster(args, out: Path) -> list[Path]:
    records, _, _, matrix = _load_pipeline(args)
    tree = _reference_tree(matrix)
    comment = _header(args).lstrip("# ")
    (out / "tree.newick").write_text(f"[{comment}]\n" + to_newick(tree) + "\n")
    (out / "tree.svg").write_text(render.dendrogram_svg(tree, comment=comment))
    return [out / "tree.newick", out / "tree.svg"]


def cmd_sweep(args, out: Path) -> list[Path]:
    records, _, _, matrix = _load_pipeline(args)
    tree = _reference_tree(matrix)
    result = sweep_k(tree, _truth_partition(records), args.k_min, args.k_max)
    rows = [(k, f"{a:.6f}", f"{n:.6f}") for k, a, n in result.rows]
    _write_tsv(out / "sweep.tsv", args, ["K", "ARI", "NMI"], rows)
    return [out / "sweep.tsv"]


def cmd_bootstrap(args, out: Path) -> list[Path]:
    records, _, emb, matrix = _load_pipeline(args)
    tree = _reference_tree(matrix)
    config = BootstrapConfig(replicates=args.replicates, base_seed=args.seed)
    supports = bootstrap_support(
        emb, tree, config, reference_stats=matrix, threads=args.threads
    )
    report = consensus_report(tree, supports, threshold=0.5)
    comment = _header(args).lstrip("# ")
    (out / "bootstrap.newick").write_text(f"[{comment}]\n" + report.newick + "\n")
    rows = [
        (",".join(sorted(clade)), f"{p:.4f}", len(clade))
        for clade, p in report.ranked
    ]
    _write_tsv(out / "bootstrap_support.tsv", args, ["clade_members", "support", "size"], rows)
    (out / "bootstrap.svg").write_text(
        render.dendrogram_svg(tree, supports=supports.supports, comment=comment)
    )
    return [out / "bootstrap.newick", out / "bootstrap_support.tsv", out / "bootstrap.svg"]


def cmd_target_eval(args, out: Path) -> list[Path]:
    records, _, _, matrix = _load_pipeline(args)
    tree = _reference_tree(matrix)
    target = _target_set(records, args.target_tag)
    if not target:
        raise ValidationError(f"no languages carry group tag '{args.target_tag}'")
    rows = []
    for k in range(args.k_min, args.k_max + 1):
        ev = target_eval(Partition(assignment=cut_at_k(tree, k)), target)
        rows.append((k, f"{ev.precision:.6f}", f"{ev.recall:.6f}", f"{ev.f1:.6f}",
                     ",".join(sorted(ev.members))))
    _write_tsv(out / "target_eval.tsv", args,
               ["K", "precision", "recall", "f1", "cluster_members"], rows)
    return [out / "target_eval.tsv"]


def _language_feature_table(args, records) -> dict[str, dict[str, float]]:
    audio = corpus.manifest_audio_paths(args.manifest)
    table = {}
    for rec in records:
        paths = audio.get(rec.lang_id, [])
        if not paths:
            raise ValidationError(f"{rec.lang_id}: no audio clips in manifest")
        feats = []
        for p in paths:
            clip = corpus.read_wav(p, require_rate=16000)
            try:
                feats.append(acoustics.clip_features(clip))
            except acoustics.SilentClipError:
                print(f"warning: skipping silent clip {p}", file=sys.stderr)
        table[rec.lang_id] = acoustics.language_features(feats)
    return table


def cmd_features(args, out: Path) -> list[Path]:
    records, _ = corpus.load_manifest(args.manifest)
    table = _language_feature_table(args, records)
    rows = [
        [rec.lang_id] + [f"{table[rec.lang_id][name]:.6f}" for name in acoustics.FEATURE_NAMES]
        for rec in records
    ]
    _write_tsv(out / "features.tsv", args, ["lang_id"] + list(acoustics.FEATURE_NAMES), rows)
    return [out / "features.tsv"]


def _read_feature_table(path: Path) -> dict[str, dict[str, float]]:
    lines = [l for l in path.read_text().splitlines() if not l.startswith("#")]
    names = lines[0].split("\t")[1:]
    table = {}
    for line in lines[1:]:
        cells = line.split("\t")
        table[cells[0]] = dict(zip(names, map(float, cells[1:])))
    return table


def _features_for_stats(args, records, out: Path) -> dict[str, dict[str, float]]:
    cached = out / "features.tsv"
    if cached.exists():
        return _read_feature_table(cached)
    return _language_feature_table(args, records)


def cmd_dims(args, out: Path) -> list[Path]:
    records, _, _, matrix = _load_pipeline(args)
    table = _features_for_stats(args, records, out)
    target = _target_set(records, args.target_tag)
    if not target:
        raise ValidationError(f"no languages carry group tag '{args.target_tag}'")
    analysis = stats.dimension_analysis(
        matrix, target, table, alpha=args.alpha, pooled=args.student
    )
    rows = [("Sig. Dimensions", len(analysis.sig_dims_fdr), len(analysis.sig_dims_bonf))]
    for name in acoustics.FEATURE_NAMES:
        f_fdr = analysis.feature_frequency["fdr"][name]
        f_bonf = analysis.feature_frequency["bonferroni"][name]
        rows.append((
            name,
            "--" if f_fdr == 0.0 else f"{f_fdr:.1f}",
            "--" if f_bonf == 0.0 else f"{f_bonf:.1f}",
        ))
    _write_tsv(out / "dims.tsv", args, ["feature", "FDR", "Bonferroni"], rows)
    return [out / "dims.tsv"]


def cmd_acoustic_test(args, out: Path) -> list[Path]:
    records, _ = corpus.load_manifest(args.manifest)
    table = _features_for_stats(args, records, out)
    target = _target_set(records, args.target_tag)
    if not target:
        raise ValidationError(f"no languages carry group tag '{args.target_tag}'")
    contrast = stats.acoustic_contrast(table, target)
    rows = [(r.feature, r.direction, f"{r.d:+.2f}", f"{r.p_value:.2e}") for r in contrast]
    _write_tsv(out / "acoustic_contrast.tsv", args,
               ["feature", "direction", "cohens_d", "p_value"], rows)
    return [out / "acoustic_contrast.tsv"]


def cmd_pca(args, out: Path) -> list[Path]:
    records, _, _, matrix = _load_pipeline(args)
    model, scores = pca_fit_project(matrix, q=2)
    families = {r.lang_id: r.family for r in records}
    rows = [
        (lang, families[lang], f"{scores[i, 0]:.6f}", f"{scores[i, 1]:.6f}")
        for i, lang in enumerate(matrix.lang_ids)
    ]
    _write_tsv(out / "pca.tsv", args, ["lang_id", "family", "pc1", "pc2"], rows)
    (out / "pca.svg").write_text(
        render.scatter_svg(
            matrix.lang_ids,
            [families[l] for l in matrix.lang_ids],
            scores,
            comment=_header(args).lstrip("# "),
        )
    )
    return [out / "pca.tsv", out / "pca.svg"]


def cmd_all(args, out: Path) -> list[Path]:
    written = []
    written += cmd_centroids(args, out)
    written += cmd_cluster(args, out)
    written += cmd_sweep(args, out)
    written += cmd_bootstrap(args, out)
    written += cmd_target_eval(args, out)
    written += cmd_features(args, out)
    written += cmd_dims(args, out)
    written += cmd_acoustic_test(args, out)
    written += cmd_pca(args, out)
    return written


COMMANDS = {
    "centroids": cmd_centroids,
    "cluster": cmd_cluster,
    "render": cmd_cluster,  # alias: build tree and emit Newick + SVG
    "sweep": cmd_sweep,
    "bootstrap": cmd_bootstrap,
    "target-eval": cmd_target_eval,
    "features": cmd_features,
    "dims": cmd_dims,
    "acoustic-test": cmd_acoustic_test,
    "pca": cmd_pca,
    "all": cmd_all,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="langtree",
        description="Language-relatedness analysis over speech-model embeddings",
    )
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--manifest", required=True)
    parser.add_argument("--out", required=True)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--replicates", type=int, default=1000)
    parser.add_argument("--k-min", type=int, default=2)
    parser.add_argument("--k-max", type=int, default=20)
    parser.add_argument("--alpha", type=float, default=0.05)
    parser.add_argument("--target-tag", default="POA")
    parser.add_argument("--threads", type=int, default=1)
    parser.add_argument("--student", action="store_true",
                        help="pooled-variance t-tests instead of Welch")
    parser.add_argument("--raw-centroids", action="store_true",
                        help="skip column standardization")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    out = Path(args.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
        _write_config(args, out)
        written = COMMANDS[args.command](args, out)
    except (corpus.CorpusError, ValidationError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except OSError as e:
        print(f"I/O error: {e}", file=sys.stderr)
        return 2
    for path in written:
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
