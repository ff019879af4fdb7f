"""Subcommand CLI tying the pipeline stages into reproducible runs.

Stages: ingest -> split -> embed -> train-eval, plus analyze for the
distant-supervision label audit. Every command writes its primary outputs
into the configured output directory together with a sidecar recording the
resolved configuration hash, the seed, and sha256 fingerprints of the
inputs, so reruns are checkable byte for byte.
"""

from __future__ import annotations

import argparse
import configparser
import hashlib
import json
import sys
from dataclasses import asdict, dataclass, fields
from pathlib import Path

from .corpus import (
    disagreement_table,
    load_dataset,
    load_histories,
    relabel_distant,
    save_dataset,
)
from .embed import Method, load_embedding_store, write_embedding_store
from .errors import ConfigError, SarcontextError
from .evaluation import RunResult, f1_score, results_table
from .models import (
    ExperimentConfig,
    ModelKind,
    Prediction,
    predict,
    save_checkpoint,
    train_classifier,
    write_predictions,
)
from .pipeline import (
    EmbedSettings,
    build_embeddings,
    examples_for,
    prepare_corpus,
)
from .preprocess import load_word_vectors
from .split import write_manifest

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_USAGE = 2


@dataclass(frozen=True)
class PipelineConfig:
    """Resolved settings for one command invocation."""

    dataset: str = ""
    histories: str = ""
    word_vectors: str = "random"
    out: str = "runs"
    seed: int = 0
    word_dim: int = 100
    composition_dim: int = 100
    embedding_dim: int = 100
    epochs: int = 30
    learning_rate: float = 0.001
    batch_size: int = 16
    method: str = "wcascade"
    model: str = "siarn"
    valid_bucket: int = 8
    test_bucket: int = 9
    min_words: int = 3
    tags: str = "sarcasm sarcastic satire irony"

    def tag_set(self) -> frozenset[str]:
        parts = [p for p in self.tags.replace(",", " ").split() if p]
        if not parts:
            raise ConfigError("tags must name at least one hashtag")
        return frozenset(parts)

    def experiment(self) -> ExperimentConfig:
        return ExperimentConfig(
            word_dim=self.word_dim,
            composition_dim=self.composition_dim,
            embedding_dim=self.embedding_dim,
            epochs=self.epochs,
            learning_rate=self.learning_rate,
            batch_size=self.batch_size,
            seed=self.seed,
        )


# config keys grouped into sections for the file format; the namespace is
# flat, so a later section cannot reuse a key name
_SECTIONS = {
    "paths": ("dataset", "histories", "word_vectors", "out"),
    "experiment": (
        "seed",
        "word_dim",
        "composition_dim",
        "embedding_dim",
        "epochs",
        "learning_rate",
        "batch_size",
    ),
    "embed": ("method",),
    "model": ("model",),
    "split": ("valid_bucket", "test_bucket", "min_words"),
    "corpus": ("tags",),
}
_KEY_SECTION = {key: sec for sec, keys in _SECTIONS.items() for key in keys}
_FIELD_TYPES = {f.name: f.type for f in fields(PipelineConfig)}


def _coerce(key: str, raw: str):
    kind = _FIELD_TYPES[key]
    try:
        if kind == "int":
            return int(raw)
        if kind == "float":
            return float(raw)
        return raw
    except ValueError:
        raise ConfigError(f"config key {key} expects {kind}, got {raw!r}") from None


def read_config_file(path: str | Path) -> dict:
    """Flat key/value pairs from an INI-style sectioned file."""
    parser = configparser.ConfigParser()
    try:
        with open(path, encoding="utf-8") as fh:
            parser.read_file(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except configparser.Error as exc:
        raise ConfigError(f"malformed config file {path}: {exc}") from None
    values: dict = {}
    for section in parser.sections():
        if section not in _SECTIONS:
            raise ConfigError(f"unknown config section [{section}] in {path}")
        for key, raw in parser.items(section):
            if key not in _KEY_SECTION or _KEY_SECTION[key] != section:
                raise ConfigError(f"unknown key {key!r} in section [{section}]")
            values[key] = _coerce(key, raw)
    return values


def resolve_config(args: argparse.Namespace) -> PipelineConfig:
    """File values first, then any command-line overrides."""
    values = read_config_file(args.config) if args.config else {}
    for key in _FIELD_TYPES:
        override = getattr(args, key, None)
        if override is not None:
            values[key] = override
    return PipelineConfig(**values)


def config_hash(config: PipelineConfig) -> str:
    blob = json.dumps(asdict(config), sort_keys=True).encode("utf-8")
    return hashlib.sha256(blob).hexdigest()


def _fingerprint(path: str | Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            digest.update(chunk)
    return digest.hexdigest()


def _require_file(path: str, what: str) -> Path:
    if not path:
        raise ConfigError(f"no {what} path configured")
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"{what} path does not exist: {path}")
    return p


def _out_dir(config: PipelineConfig) -> Path:
    out = Path(config.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_sidecar(
    config: PipelineConfig, command: str, inputs: dict[str, str | Path]
) -> None:
    sidecar = {
        "command": command,
        "config": asdict(config),
        "config_hash": config_hash(config),
        "seed": config.seed,
        "inputs": {
            name: {"path": str(path), "sha256": _fingerprint(path)}
            for name, path in sorted(inputs.items())
        },
    }
    path = _out_dir(config) / f"{command}.sidecar.json"
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(sidecar, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _load_inputs(config: PipelineConfig, with_histories: bool):
    dataset_path = _require_file(config.dataset, "dataset")
    dataset = load_dataset(dataset_path)
    histories = {}
    if with_histories:
        histories_path = _require_file(config.histories, "histories")
        histories = load_histories(histories_path, dataset)
    return dataset, histories


def _prepare(config: PipelineConfig, with_histories: bool):
    dataset, histories = _load_inputs(config, with_histories)
    prepared = prepare_corpus(
        dataset,
        histories,
        seed=config.seed,
        tag_set=config.tag_set(),
        min_words=config.min_words,
        valid_bucket=config.valid_bucket,
        test_bucket=config.test_bucket,
    )
    return prepared


def cmd_ingest(config: PipelineConfig) -> dict:
    """Validate the corpus files and write a counts report."""
    dataset, histories = _load_inputs(config, with_histories=bool(config.histories))
    n_sarc, n_non = dataset.label_counts()
    report = {
        "dataset": {
            "name": dataset.name,
            "total": len(dataset),
            "sarcastic": n_sarc,
            "non_sarcastic": n_non,
            "users": len(dataset.users()),
        },
    }
    if histories:
        report["histories"] = {
            "users": len(histories),
            "tweets": sum(len(h.tweets) for h in histories.values()),
        }
    out = _out_dir(config)
    with open(out / "report.json", "w", encoding="utf-8", newline="\n") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")
    inputs = {"dataset": config.dataset}
    if histories:
        inputs["histories"] = config.histories
    _write_sidecar(config, "ingest", inputs)
    d = report["dataset"]
    print(
        f"{d['name']}: {d['total']} tweets "
        f"({d['sarcastic']} sarcastic / {d['non_sarcastic']} non-sarcastic), "
        f"{d['users']} users"
    )
    if histories:
        h = report["histories"]
        print(f"histories: {h['tweets']} tweets across {h['users']} users")
    return report


def cmd_split(config: PipelineConfig) -> dict:
    """Stratify by user and write the split manifest plus a size report."""
    raw_size = len(load_dataset(config.dataset))
    prepared = _prepare(config, with_histories=False)
    out = _out_dir(config)
    manifest_path = out / "split.jsonl"
    write_manifest(manifest_path, prepared.dataset, prepared.assignment, prepared.spec)
    report = {
        "train": len(prepared.train),
        "valid": len(prepared.valid),
        "test": len(prepared.test),
        "filtered_out": raw_size - len(prepared.dataset),
    }
    with open(out / "split-report.json", "w", encoding="utf-8", newline="\n") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")
    _write_sidecar(config, "split", {"dataset": config.dataset})
    print(
        f"train/valid/test = {report['train']}/{report['valid']}/{report['test']}"
        + (f" ({report['filtered_out']} filtered out)" if report["filtered_out"] else "")
        + f" -> {manifest_path}"
    )
    return report


def cmd_embed(config: PipelineConfig, method: str | None = None) -> Path:
    """Build user embeddings with the configured method and store them."""
    parsed = Method.parse(method if method is not None else config.method)
    prepared = _prepare(config, with_histories=True)
    settings = EmbedSettings(d_e=config.embedding_dim)
    embeddings = build_embeddings(prepared, parsed, settings, seed=config.seed)
    out = _out_dir(config)
    store_path = out / f"embeddings-{parsed.value}.txt"
    write_embedding_store(store_path, [embeddings[u] for u in sorted(embeddings)])
    _write_sidecar(
        config,
        f"embed-{parsed.value}",
        {"dataset": config.dataset, "histories": config.histories},
    )
    print(f"wrote {len(embeddings)} {parsed.value} embeddings -> {store_path}")
    return store_path


def cmd_train_eval(config: PipelineConfig, model_kind: str | None = None) -> RunResult:
    """Train the configured model, score the test split, update results.csv."""
    kind = ModelKind.parse(model_kind if model_kind is not None else config.model)
    prepared = _prepare(config, with_histories=False)
    out = _out_dir(config)
    slug = kind.name.lower()
    inputs: dict[str, str | Path] = {"dataset": config.dataset}

    embeddings = None
    if kind.needs_embedding:
        store_path = out / f"embeddings-{kind.method.value}.txt"
        if not store_path.is_file():
            raise ConfigError(
                f"no embedding store at {store_path}; run the embed command "
                f"with method={kind.method.value} first"
            )
        embeddings = load_embedding_store(store_path)
        inputs["embeddings"] = store_path

    word_matrix = None
    if kind.needs_text:
        if config.word_vectors != "random":
            _require_file(config.word_vectors, "word vectors")
            inputs["word_vectors"] = config.word_vectors
        word_matrix = load_word_vectors(
            config.word_vectors,
            prepared.vocab,
            dim=config.word_dim,
            seed=config.seed,
        )

    experiment = config.experiment()
    train_ex = examples_for(prepared, prepared.train, embeddings)
    valid_ex = examples_for(prepared, prepared.valid, embeddings)
    test_ex = examples_for(prepared, prepared.test, embeddings)
    trained = train_classifier(
        kind, train_ex, valid_ex, experiment, len(prepared.vocab), word_matrix
    )
    save_checkpoint(trained, out / f"model-{slug}.pt")

    predictions = predict(trained, test_ex)
    write_predictions(out / f"predictions-{slug}.jsonl", predictions)
    scored = [p for p in predictions if isinstance(p, Prediction)]
    scored_ids = {p.tweet_id for p in scored}
    golds = [t for t in prepared.test if t.id in scored_ids]
    result = f1_score(
        scored, golds, dataset=prepared.dataset.name, model=kind.name
    )
    _upsert_results(out / "results.csv", result)
    _write_sidecar(config, f"train-eval-{slug}", inputs)
    print(
        f"{kind.name} on {result.dataset}: test F1={result.f1:.3f} "
        f"(tp={result.tp} fp={result.fp} fn={result.fn} tn={result.tn}) "
        f"-> {out / 'results.csv'}"
    )
    return result


def _upsert_results(path: Path, result: RunResult) -> None:
    """Replace-or-add this (dataset, model) row, keeping canonical order."""
    rows: dict[tuple[str, str], RunResult] = {}
    if path.is_file():
        with open(path, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
        for line in lines[1:]:
            if not line.strip():
                continue
            dataset, model, f1, tp, fp, fn, tn = line.split(",")
            rows[(dataset, model)] = RunResult(
                dataset=dataset,
                model=model,
                f1=float(f1),
                tp=int(tp),
                fp=int(fp),
                fn=int(fn),
                tn=int(tn),
            )
    rows[(result.dataset, result.model)] = result
    rendered = results_table(list(rows.values()))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(rendered.csv)


def cmd_analyze(config: PipelineConfig) -> dict:
    """Audit manual labels against tag presence; write the relabeled corpus."""
    dataset, _ = _load_inputs(config, with_histories=False)
    tags = config.tag_set()
    table = disagreement_table(dataset, tags)
    relabeled = relabel_distant(dataset, tags)
    n_sarc, n_non = relabeled.label_counts()
    out = _out_dir(config)
    report = {
        "disagreement": {
            "sarcastic_with_tag": table.sarcastic_with_tag,
            "sarcastic_without_tag": table.sarcastic_without_tag,
            "nonsarcastic_with_tag": table.nonsarcastic_with_tag,
            "nonsarcastic_without_tag": table.nonsarcastic_without_tag,
        },
        "relabeled": {
            "name": relabeled.name,
            "sarcastic": n_sarc,
            "non_sarcastic": n_non,
        },
    }
    with open(out / "analysis.json", "w", encoding="utf-8", newline="\n") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")
    save_dataset(relabeled, out / "relabeled.jsonl")
    _write_sidecar(config, "analyze", {"dataset": config.dataset})
    t = report["disagreement"]
    print(
        "label vs tag: "
        f"sarcastic {t['sarcastic_with_tag']}+{t['sarcastic_without_tag']}, "
        f"non-sarcastic {t['nonsarcastic_with_tag']}+{t['nonsarcastic_without_tag']} "
        "(with+without tag)"
    )
    print(
        f"relabeled by tags: {report['relabeled']['sarcastic']} sarcastic "
        f"-> {out / 'relabeled.jsonl'}"
    )
    return report


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="INI config file")
    common.add_argument("--out", metavar="DIR", help="output directory")
    common.add_argument("--dataset", metavar="PATH")
    common.add_argument("--histories", metavar="PATH")
    common.add_argument("--word_vectors", metavar="PATH", help="path or 'random'")
    common.add_argument("--seed", type=int, metavar="N")
    common.add_argument("--word_dim", type=int, metavar="N")
    common.add_argument("--composition_dim", type=int, metavar="N")
    common.add_argument("--embedding_dim", type=int, metavar="N")
    common.add_argument("--epochs", type=int, metavar="N")
    common.add_argument("--learning_rate", type=float, metavar="F")
    common.add_argument("--batch_size", type=int, metavar="N")
    common.add_argument("--valid_bucket", type=int, metavar="N")
    common.add_argument("--test_bucket", type=int, metavar="N")
    common.add_argument("--min_words", type=int, metavar="N")
    common.add_argument("--tags", metavar="TAGS", help="space or comma separated")
    common.add_argument(
        "--method", metavar="M", help="embedding method: cascade|wcascade|ed|summary"
    )
    common.add_argument(
        "--model", metavar="M", help="model kind: siarn, ex-<method> or in-<method>"
    )

    parser = argparse.ArgumentParser(
        prog="sarcontext",
        description="contextual sarcasm detection pipeline",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("ingest", parents=[common], help="validate corpus files")
    sub.add_parser("split", parents=[common], help="write the split manifest")
    sub.add_parser("embed", parents=[common], help="build user embeddings")
    sub.add_parser("train-eval", parents=[common], help="train and score a model")
    sub.add_parser("analyze", parents=[common], help="label/tag audit and relabel")
    return parser


_COMMANDS = {
    "ingest": cmd_ingest,
    "split": cmd_split,
    "embed": cmd_embed,
    "train-eval": cmd_train_eval,
    "analyze": cmd_analyze,
}


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        config = resolve_config(args)
        _COMMANDS[args.command](config)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except FileNotFoundError as exc:
        print(f"error: missing file: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (SarcontextError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
