"""Command-line interface.

Exit codes: 0 success, 1 completed with per-utterance failures, 2 invalid
invocation or configuration.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from .augment import (AugmentError, augment_transcript, read_transcripts,
                      tokenize_text, write_augmented, apply_label_overrides)
from .config import (Config, ConfigError, config_from_dict, config_hash,
                     load_config, save_config)
from .corpus import CorpusError, CorpusIndex, batch_annotate, batch_evaluate
from .evaluate import EvalError, label_report
from .fixtures import generate_corpus
from .ingest import load_lexicon
from .labeler import read_annotations_jsonl

_CONFIG_FLAGS = (
    ("frame_period", float), ("f0_min", float), ("f0_max", float),
    ("voicing_threshold", float), ("scales_per_octave", int),
    ("period_min", float), ("period_max", float),
    ("link_window_factor", float), ("oov_policy", str),
)
_PAIR_FLAGS = ("energy_band", "word_band", "phrase_band",
               "prominence_thresholds", "boundary_thresholds")
_WEIGHT_FLAGS = ("weight_f0", "weight_energy", "weight_duration")


def config_options(fn):
    """Attach --config plus per-key override flags to a command."""
    fn = click.option("--config", "config_path", type=click.Path(exists=True),
                      default=None, help="TOML config file.")(fn)
    for name, cast in _CONFIG_FLAGS:
        flag = "--" + name.replace("_", "-")
        fn = click.option(flag, name, type=cast, default=None)(fn)
    for name in _PAIR_FLAGS:
        flag = "--" + name.replace("_", "-")
        fn = click.option(flag, name, type=(float, float), default=None,
                          nargs=2)(fn)
    for name in _WEIGHT_FLAGS:
        flag = "--" + name.replace("_", "-")
        fn = click.option(flag, name, type=float, default=None)(fn)
    return fn


def build_config(config_path: str | None, **flags) -> Config:
    """Layer CLI flags over the TOML file over the defaults."""
    try:
        base = load_config(config_path) if config_path else Config()
        overrides: dict = {}
        for name, _cast in _CONFIG_FLAGS:
            if flags.get(name) is not None:
                overrides[name] = flags[name]
        for name in _PAIR_FLAGS:
            if flags.get(name) is not None:
                overrides[name] = list(flags[name])
        weights = {key.split("_", 1)[1]: flags[key]
                   for key in _WEIGHT_FLAGS if flags.get(key) is not None}
        if weights:
            overrides["weights"] = weights
        return config_from_dict(overrides, base=base)
    except (ConfigError, OSError) as exc:
        raise click.UsageError(str(exc)) from exc


def _load_index(corpus: str | None, manifest: str | None) -> CorpusIndex:
    if (corpus is None) == (manifest is None):
        raise click.UsageError("give exactly one of --corpus or --manifest")
    try:
        if corpus:
            return CorpusIndex.from_directory(corpus)
        return CorpusIndex.from_manifest(manifest)
    except CorpusError as exc:
        raise click.UsageError(str(exc)) from exc


@click.group()
def main() -> None:
    """Prosody labeling, TTS input augmentation, and objective evaluation."""


@main.command()
@click.option("--out", "out_dir", required=True, type=click.Path())
@click.option("--count", default=20, show_default=True)
@click.option("--seed", default=42, show_default=True)
@click.option("--sample-rate", default=16000, show_default=True)
def fixtures(out_dir: str, count: int, seed: int, sample_rate: int) -> None:
    """Generate the synthetic corpus with designed prosody."""
    try:
        designs = generate_corpus(out_dir, count=count, seed=seed,
                                  sample_rate=sample_rate)
    except ValueError as exc:
        raise click.UsageError(str(exc)) from exc
    click.echo(f"wrote {len(designs)} utterances to {out_dir}")


@main.command()
@click.option("--corpus", type=click.Path(exists=True), default=None)
@click.option("--manifest", type=click.Path(exists=True), default=None)
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--summary", "summary_path", type=click.Path(), default=None)
@click.option("--parallelism", default=1, show_default=True)
@config_options
def annotate(corpus, manifest, out_path, summary_path, parallelism,
             config_path, **flags) -> None:
    """Label a corpus; writes JSONL annotations and prints a summary."""
    cfg = build_config(config_path, **flags)
    index = _load_index(corpus, manifest)
    if parallelism < 1:
        raise click.UsageError("parallelism must be >= 1")
    _records, summary = batch_annotate(index, cfg, out_path=out_path,
                                       parallelism=parallelism)
    if summary_path:
        Path(summary_path).write_text(
            json.dumps(summary.to_dict(), indent=2) + "\n", encoding="utf-8")
    click.echo(f"annotated {summary.n_done}/{len(index)} utterances "
               f"(config {summary.config_hash})")
    click.echo(f"prominence classes: {list(summary.prominence_counts)}  "
               f"boundary classes: {list(summary.boundary_counts)}")
    for utt_id, error in summary.failures:
        click.echo(f"failed {utt_id}: {error}", err=True)
    if summary.n_failed:
        sys.exit(1)


@main.command()
@click.option("--metadata", required=True, type=click.Path(exists=True),
              help="id|text or id<TAB>text transcript file.")
@click.option("--annotations", "annotations_path", required=True,
              type=click.Path(exists=True))
@click.option("--lexicon", "lexicon_path", required=True,
              type=click.Path(exists=True))
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--override-labels", "override_path", type=click.Path(exists=True),
              default=None, help="JSONL {id, labels: [[p, b], ...]}.")
@click.option("--oov-policy", type=click.Choice(["graphemes", "error"]),
              default="graphemes", show_default=True)
def augment(metadata, annotations_path, lexicon_path, out_path,
            override_path, oov_policy) -> None:
    """Render transcripts with prosody class tokens."""
    texts = read_transcripts(metadata)
    annotations = read_annotations_jsonl(annotations_path)
    lexicon = load_lexicon(lexicon_path)
    overrides: dict[str, list] = {}
    if override_path:
        with open(override_path, encoding="utf-8") as fh:
            for line in fh:
                if line.strip():
                    row = json.loads(line)
                    overrides[row["id"]] = [tuple(x) for x in row["labels"]]

    items = []
    failures = []
    for utt_id, text in texts.items():
        if utt_id not in annotations:
            failures.append((utt_id, "no annotations"))
            continue
        try:
            words = annotations[utt_id]
            if utt_id in overrides:
                words = apply_label_overrides(words, overrides[utt_id])
            line = augment_transcript(tokenize_text(text, utt_id), words,
                                      lexicon, oov_policy)
            items.append((utt_id, line))
        except AugmentError as exc:
            failures.append((utt_id, str(exc)))
    write_augmented(out_path, items)
    click.echo(f"augmented {len(items)}/{len(texts)} utterances")
    for utt_id, error in failures:
        click.echo(f"failed {utt_id}: {error}", err=True)
    if failures:
        sys.exit(1)


@main.command()
@click.option("--ref", "ref_dir", required=True, type=click.Path(exists=True))
@click.option("--syn", "syn_specs", multiple=True, required=True,
              help="NAME=DIR, repeatable for multiple systems.")
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--oracle-labels", type=click.Path(exists=True), default=None)
@click.option("--predicted-labels", "predicted_specs", multiple=True,
              help="NAME=FILE predicted-annotation JSONL per system.")
@config_options
def evaluate(ref_dir, syn_specs, out_path, oracle_labels, predicted_specs,
             config_path, **flags) -> None:
    """Compare synthesized corpora against a reference corpus."""
    cfg = build_config(config_path, **flags)
    try:
        ref_index = CorpusIndex.from_directory(ref_dir)
        syn_indices = {}
        for spec in syn_specs:
            name, _, path = spec.partition("=")
            if not path:
                raise click.UsageError(f"--syn needs NAME=DIR, got {spec!r}")
            syn_indices[name] = CorpusIndex.from_directory(path)
    except CorpusError as exc:
        raise click.UsageError(str(exc)) from exc

    oracle = read_annotations_jsonl(oracle_labels) if oracle_labels else None
    predicted = None
    if predicted_specs:
        predicted = {}
        for spec in predicted_specs:
            name, _, path = spec.partition("=")
            if not path:
                raise click.UsageError(
                    f"--predicted-labels needs NAME=FILE, got {spec!r}")
            predicted[name] = read_annotations_jsonl(path)

    try:
        report = batch_evaluate(ref_index, syn_indices, cfg,
                                oracle_labels=oracle,
                                predicted_labels=predicted)
    except (CorpusError, EvalError) as exc:
        raise click.UsageError(str(exc)) from exc
    Path(out_path).write_text(json.dumps(report, indent=2) + "\n",
                              encoding="utf-8")
    for name, system in report["systems"].items():
        agg = system["aggregates"]
        click.echo(f"{name}: f0 rmse {agg['f0']['mean_rmse']:.4f} st, "
                   f"energy rmse {agg['energy']['mean_rmse']:.4f} dB, "
                   f"dtw {agg['mean_dtw_cost']:.2f}")
    n_failed = sum(len(s["failures"]) for s in report["systems"].values())
    if n_failed:
        click.echo(f"{n_failed} utterance comparisons failed", err=True)
        sys.exit(1)


@main.command("compare-labels")
@click.argument("oracle_path", type=click.Path(exists=True))
@click.argument("predicted_path", type=click.Path(exists=True))
@click.option("--out", "out_path", type=click.Path(), default=None)
def compare_labels(oracle_path, predicted_path, out_path) -> None:
    """Score predicted annotation labels against oracle labels."""
    try:
        report = label_report(read_annotations_jsonl(oracle_path),
                              read_annotations_jsonl(predicted_path))
    except (EvalError, ValueError) as exc:
        raise click.UsageError(str(exc)) from exc
    payload = report.to_dict()
    if out_path:
        Path(out_path).write_text(json.dumps(payload, indent=2) + "\n",
                                  encoding="utf-8")
    for kind in ("prominence", "boundary"):
        scores = payload[kind]
        click.echo(f"{kind}: accuracy {scores['accuracy']:.4f}, "
                   f"f1 {['%.3f' % f for f in scores['f1']]}")


@main.command()
@click.argument("annotations_path", type=click.Path(exists=True))
def stats(annotations_path) -> None:
    """Summarize label distributions in an annotations JSONL file."""
    try:
        records = read_annotations_jsonl(annotations_path)
    except ValueError as exc:
        raise click.UsageError(str(exc)) from exc
    words = [a for anns in records.values() for a in anns]
    if not words:
        raise click.UsageError("no annotations found")
    p_counts = [0, 0, 0]
    b_counts = [0, 0, 0]
    for a in words:
        p_counts[a.p_class] += 1
        b_counts[a.b_class] += 1
    click.echo(f"utterances: {len(records)}")
    click.echo(f"words:      {len(words)}")
    click.echo(f"p_class:    0={p_counts[0]} 1={p_counts[1]} 2={p_counts[2]}")
    click.echo(f"b_class:    0={b_counts[0]} 1={b_counts[1]} 2={b_counts[2]}")
    mean_p = sum(a.prominence for a in words) / len(words)
    mean_b = sum(a.boundary for a in words) / len(words)
    click.echo(f"mean prominence: {mean_p:.4f}")
    click.echo(f"mean boundary:   {mean_b:.4f}")


@main.command("show-config")
@click.option("--out", "out_path", type=click.Path(), default=None)
@config_options
def show_config(out_path, config_path, **flags) -> None:
    """Print (or save) the effective configuration as TOML."""
    cfg = build_config(config_path, **flags)
    if out_path:
        save_config(out_path, cfg)
    from .config import dumps_toml
    click.echo(dumps_toml(cfg), nl=False)
    click.echo(f"# hash: {config_hash(cfg)}")


@main.command()
@click.option("--corpus", type=click.Path(exists=True), default=None)
@click.option("--manifest", type=click.Path(exists=True), default=None)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8532, show_default=True)
@click.option("--static", "static_dir", type=click.Path(exists=True),
              default=None, help="Directory of UI assets to serve at /.")
@config_options
def serve(corpus, manifest, host, port, static_dir, config_path, **flags) -> None:
    """Serve the HTTP API (and optionally a static UI) over a corpus."""
    cfg = build_config(config_path, **flags)
    index = _load_index(corpus, manifest)
    from .server import run_server
    click.echo(f"serving {len(index)} utterances on http://{host}:{port}")
    run_server(index, cfg, host=host, port=port, static_dir=static_dir)


if __name__ == "__main__":
    main()
