"""Command-line interface: ingest, train, rank, classify, kappa.

Every option can also come from a `key = value` config file (--config);
explicit flags win.  Each command writes a `<out>.config` sidecar recording
the fully resolved settings, so a run can be replayed exactly.  Exit codes:
0 success, 1 usage problem, 2 bad input data, 3 internal error.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from . import corpus, embedding, metrics, ranking, svm, tfidf
from .corpus import DocKind, DumpSource, Label
from .errors import DataError
from .vectorize import OovPolicy, vectorize as _vectorize


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # noqa: A003 - argparse API
        raise _UsageError(message)


@dataclass(frozen=True)
class _Opt:
    name: str
    caster: Callable[[str], object]
    default: object = None
    help: str = ""
    required: bool = False
    repeatable: bool = False


def _choice(*allowed: str) -> Callable[[str], str]:
    def cast(value: str) -> str:
        if value not in allowed:
            raise ValueError(f"must be one of {', '.join(allowed)}")
        return value

    cast.__name__ = "|".join(allowed)
    return cast


def _int_list(value: str) -> list[int]:
    try:
        return [int(p) for p in value.split(",") if p.strip()]
    except ValueError as exc:
        raise ValueError("expected comma-separated integers") from exc


_AGGREGATIONS = {"max": ranking.Aggregation.MAX, "mean": ranking.Aggregation.MEAN}
_OOV_POLICIES = {
    "ignore": OovPolicy.IGNORE,
    "zero": OovPolicy.ZERO_VECTOR,
    "lowfreq": OovPolicy.LOW_FREQ_AVERAGE,
}
_SOURCES = {
    "se": DumpSource.STACK_EXCHANGE_SE,
    "so": DumpSource.STACK_OVERFLOW,
    "other": DumpSource.OTHER,
}

_COMMANDS: dict[str, list[_Opt]] = {
    "ingest": [
        _Opt("posts", str, help="posts dump XML (repeatable)", repeatable=True),
        _Opt("comments", str, help="comments dump XML (repeatable)", repeatable=True),
        _Opt("source", _choice("se", "so", "other"), default="other"),
        _Opt("out", str, required=True, help="output sentence file (one per line)"),
    ],
    "train": [
        _Opt("sentences", str, required=True, help="cleaned sentence file from ingest"),
        _Opt("out", str, required=True, help="output model file"),
        _Opt("window", int, default=5),
        _Opt("dim", int, default=300),
        _Opt("negatives", int, default=10),
        _Opt("min_count", int, default=5),
        _Opt("epochs", int, default=5),
        _Opt("chunk_size", int, default=50),
        _Opt("initial_lr", float, default=0.025),
        _Opt("seed", int, default=0),
        _Opt("workers", int, default=1),
        _Opt("subsample", float, default=0.0),
    ],
    "rank": [
        _Opt("tweets", str, required=True, help="tweet file, one per line"),
        _Opt("source_sentences", str, required=True, help="cleaned corpus sentence file"),
        _Opt("method", _choice("embedding", "tfidf"), default="embedding"),
        _Opt("model", str, help="embedding model file (embedding method only)"),
        _Opt("aggregation", _choice("max", "mean"), default="max"),
        _Opt("oov_policy", _choice("ignore", "zero", "lowfreq"), default="ignore"),
        _Opt("max_chars", int, default=140),
        _Opt("sample_size", int, default=1000),
        _Opt("seed", int, default=0),
        _Opt("labels", str, help="optional tweet_id<TAB>{0,1} relevance labels"),
        _Opt("k_list", _int_list, default=[50, 100, 200], help="accuracy@K cutoffs"),
        _Opt("out", str, required=True, help="output ranking TSV"),
    ],
    "classify": [
        _Opt("comments", str, required=True, help="label<TAB>text comment file"),
        _Opt("features", _choice("embedding", "ntf"), default="embedding"),
        _Opt("model", str, help="embedding model file (embedding features only)"),
        _Opt("oov_policy", _choice("ignore", "zero", "lowfreq"), default="ignore"),
        _Opt("kernel", _choice("puk", "rbf", "linear"), default="puk"),
        _Opt("C", float, default=1.0),
        _Opt("gamma", float, default=1.0),
        _Opt("omega", float, default=1.0),
        _Opt("sigma", float, default=1.0),
        _Opt("tol", float, default=1e-3),
        _Opt("folds", int, default=10),
        _Opt("seed", int, default=0),
        _Opt("out", str, required=True, help="output metrics file (text; .json added too)"),
    ],
    "kappa": [
        _Opt("labels_a", str, required=True, help="first rater's labels, one 0/1 per line"),
        _Opt("labels_b", str, required=True, help="second rater's labels, one 0/1 per line"),
        _Opt("out", str, help="optional JSON output path"),
    ],
}


def _build_parser() -> _Parser:
    parser = _Parser(prog="textsift", description=__doc__, add_help=True)
    sub = parser.add_subparsers(dest="command", metavar="command")
    for command, opts in _COMMANDS.items():
        p = sub.add_parser(command, add_help=True)
        p.add_argument("--config", default=None, help="key = value config file")
        for opt in opts:
            flag = "--" + opt.name.replace("_", "-")
            if opt.repeatable:
                p.add_argument(flag, dest=opt.name, action="append", default=None, help=opt.help)
            else:
                p.add_argument(flag, dest=opt.name, type=str, default=None, help=opt.help)
    return parser


def _read_config_file(path: str) -> dict[str, str]:
    table: dict[str, str] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise _UsageError(f"{path}:{lineno}: expected 'key = value'")
            table[key.strip()] = value.strip()
    return table


def _resolve(command: str, args: argparse.Namespace) -> dict[str, object]:
    opts = _COMMANDS[command]
    known = {o.name: o for o in opts}
    file_values: dict[str, str] = {}
    if args.config:
        file_values = _read_config_file(args.config)
        unknown = set(file_values) - set(known)
        if unknown:
            raise _UsageError(f"unknown config keys for {command}: {', '.join(sorted(unknown))}")
    resolved: dict[str, object] = {}
    for opt in opts:
        raw_cli = getattr(args, opt.name)
        if raw_cli is not None:
            if opt.repeatable:
                value: object = [opt.caster(v) for v in raw_cli]
            else:
                try:
                    value = opt.caster(raw_cli)
                except ValueError as exc:
                    raise _UsageError(f"--{opt.name.replace('_', '-')}: {exc}") from exc
        elif opt.name in file_values:
            try:
                raw = file_values[opt.name]
                value = [opt.caster(v) for v in raw.split()] if opt.repeatable else opt.caster(raw)
            except ValueError as exc:
                raise _UsageError(f"config key {opt.name}: {exc}") from exc
        else:
            value = opt.default
        if value is None and opt.required:
            raise _UsageError(f"missing required option --{opt.name.replace('_', '-')}")
        resolved[opt.name] = value
    return resolved


def _format_value(value: object) -> str:
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, list):
        return ",".join(_format_value(v) for v in value)
    return str(value)


def _write_sidecar(out_path: str, command: str, resolved: dict[str, object]) -> None:
    lines = [f"command = {command}"]
    for name in sorted(resolved):
        value = resolved[name]
        if value is None:
            continue
        lines.append(f"{name} = {_format_value(value)}")
    Path(str(out_path) + ".config").write_text("\n".join(lines) + "\n", encoding="utf-8")


# ----------------------------------------------------------------------------- commands


def _cmd_ingest(cfg: dict[str, object]) -> int:
    posts = cfg["posts"] or []
    comments = cfg["comments"] or []
    if not posts and not comments:
        raise _UsageError("ingest needs at least one --posts or --comments file")
    source = _SOURCES[str(cfg["source"])]
    stats = {
        "posts_rows": 0,
        "comments_rows": 0,
        "documents": 0,
        "sentences": 0,
        "skipped_no_body": 0,
    }
    out_path = str(cfg["out"])
    with open(out_path, "w", encoding="utf-8", newline="") as out:
        for kind, paths, rows_key in (
            (DocKind.POST, posts, "posts_rows"),
            (DocKind.COMMENT, comments, "comments_rows"),
        ):
            for path in paths:
                with open(path, "rb") as fh:
                    reader = corpus.parse_dump(fh, kind, source)
                    for doc in reader:
                        stats["documents"] += 1
                        for raw_sentence in corpus.split_sentences(corpus.strip_html(doc.body)):
                            clean = corpus.normalize(raw_sentence, origin_id=doc.id)
                            if clean.tokens:
                                out.write(clean.text + "\n")
                                stats["sentences"] += 1
                    stats[rows_key] += reader.stats.rows_read
                    stats["skipped_no_body"] += reader.stats.skipped_no_body
    if stats["sentences"] == 0:
        raise DataError("ingest produced no sentences (empty dump?)")
    block = "\n".join(f"{k}={v}" for k, v in stats.items())
    print(block)
    Path(out_path + ".stats").write_text(block + "\n", encoding="utf-8")
    _write_sidecar(out_path, "ingest", cfg)
    return 0


def _load_sentence_file(path: str) -> list[corpus.CleanSentence]:
    sentences = []
    with open(path, encoding="utf-8") as fh:
        for idx, line in enumerate(fh):
            sentences.append(corpus.normalize(line, origin_id=str(idx)))
    return sentences


def _cmd_train(cfg: dict[str, object]) -> int:
    config = embedding.TrainingConfig(
        window=int(cfg["window"]),
        dim=int(cfg["dim"]),
        negatives=int(cfg["negatives"]),
        min_count=int(cfg["min_count"]),
        epochs=int(cfg["epochs"]),
        chunk_size=int(cfg["chunk_size"]),
        initial_lr=float(cfg["initial_lr"]),
        seed=int(cfg["seed"]),
        workers=int(cfg["workers"]),
        subsample=float(cfg["subsample"]),
    )
    try:
        config.validate()
    except ValueError as exc:
        raise _UsageError(str(exc)) from exc
    sentences = _load_sentence_file(str(cfg["sentences"]))
    model = embedding.train(sentences, config)
    out_path = str(cfg["out"])
    embedding.save_model(model, out_path)
    _write_sidecar(out_path, "train", cfg)
    print(f"vocabulary_size={len(model.vocab)}")
    return 0


def _read_rank_labels(path: str) -> dict[str, bool]:
    labels: dict[str, bool] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n")
            if not line:
                continue
            tweet_id, sep, value = line.partition("\t")
            if not sep or value not in ("0", "1"):
                raise DataError(f"line {lineno}: expected 'tweet_id<TAB>0|1'")
            labels[tweet_id] = value == "1"
    return labels


def _cmd_rank(cfg: dict[str, object]) -> int:
    method = str(cfg["method"])
    if method == "embedding" and not cfg["model"]:
        raise _UsageError("--model is required when method=embedding")
    tweets = corpus.load_tweets(str(cfg["tweets"]))
    sources = _load_sentence_file(str(cfg["source_sentences"]))
    query = ranking.select_instances(
        sources,
        max_chars=int(cfg["max_chars"]),
        sample_size=int(cfg["sample_size"]),
        seed=int(cfg["seed"]),
    )
    aggregation = _AGGREGATIONS[str(cfg["aggregation"])]
    if method == "embedding":
        model = embedding.load_model(str(cfg["model"]))
        policy = _OOV_POLICIES[str(cfg["oov_policy"])]
        ranked = ranking.rank(tweets, query, model, policy=policy, aggregation=aggregation)
    else:
        tfidf_model = tfidf.fit(sources)
        ranked = tfidf.rank_tfidf(tweets, query, tfidf_model, aggregation=aggregation)

    with open(str(cfg["tweets"]), encoding="utf-8") as fh:
        original = {str(i): line.rstrip("\n") for i, line in enumerate(fh)}
    out_path = str(cfg["out"])
    ranking.write_ranked_tsv(ranked, original, out_path)
    _write_sidecar(out_path, "rank", cfg)

    if cfg["labels"]:
        labels = _read_rank_labels(str(cfg["labels"]))
        report = metrics.MetricReport(
            accuracy_at_k={
                k: metrics.accuracy_at_k(ranked, labels, k) for k in list(cfg["k_list"])  # type: ignore[arg-type]
            }
        )
        Path(out_path + ".metrics").write_text(report.to_text(), encoding="utf-8")
        Path(out_path + ".metrics.json").write_text(report.to_json(), encoding="utf-8")
        print(report.to_text(), end="")
    return 0


def _cmd_classify(cfg: dict[str, object]) -> int:
    features_kind = str(cfg["features"])
    if features_kind == "embedding" and not cfg["model"]:
        raise _UsageError("--model is required when features=embedding")
    labeled = corpus.load_labeled_comments(str(cfg["comments"]))
    if not labeled:
        raise DataError("comment file is empty")
    token_lists = [sentence.tokens for sentence, _ in labeled]
    y = [1 if label is Label.INFORMATIVE else -1 for _, label in labeled]

    if features_kind == "embedding":
        model = embedding.load_model(str(cfg["model"]))
        policy = _OOV_POLICIES[str(cfg["oov_policy"])]
        X = np.stack([_vectorize(toks, model, policy).values for toks in token_lists])
    else:
        vocab = svm.ntf_vocabulary(token_lists)
        if not vocab:
            raise DataError("ntf vocabulary is empty (no term appears in two comments)")
        X = np.stack([svm.normalized_tf_features(toks, vocab) for toks in token_lists])

    kernel_kind = str(cfg["kernel"])
    if kernel_kind == "puk":
        kernel = svm.KernelSpec.puk(float(cfg["omega"]), float(cfg["sigma"]))
    elif kernel_kind == "rbf":
        kernel = svm.KernelSpec.rbf(float(cfg["gamma"]))
    else:
        kernel = svm.KernelSpec.linear()

    result = svm.cross_validate(
        X,
        y,
        k=int(cfg["folds"]),
        C=float(cfg["C"]),
        kernel=kernel,
        tol=float(cfg["tol"]),
        seed=int(cfg["seed"]),
    )
    report = result.pooled_report
    out_path = str(cfg["out"])
    Path(out_path).write_text(report.to_text(), encoding="utf-8")
    Path(out_path + ".json").write_text(report.to_json(), encoding="utf-8")
    _write_sidecar(out_path, "classify", cfg)
    print(report.to_text(), end="")
    return 0


def _read_binary_labels(path: str) -> list[int]:
    labels = []
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            token = raw.strip()
            if not token:
                continue
            if token not in ("0", "1"):
                raise DataError(f"line {lineno}: expected 0 or 1, got {token!r}")
            labels.append(int(token))
    return labels


def _cmd_kappa(cfg: dict[str, object]) -> int:
    labels_a = _read_binary_labels(str(cfg["labels_a"]))
    labels_b = _read_binary_labels(str(cfg["labels_b"]))
    try:
        value = metrics.cohen_kappa(labels_a, labels_b)
    except ValueError as exc:
        raise DataError(str(exc)) from exc
    print(f"kappa={value:.6f}")
    if cfg["out"]:
        out_path = str(cfg["out"])
        report = metrics.MetricReport(kappa=value)
        Path(out_path).write_text(report.to_json(), encoding="utf-8")
        _write_sidecar(out_path, "kappa", cfg)
    return 0


_HANDLERS = {
    "ingest": _cmd_ingest,
    "train": _cmd_train,
    "rank": _cmd_rank,
    "classify": _cmd_classify,
    "kappa": _cmd_kappa,
}


def main(argv: Sequence[str] | None = None) -> int:
    parser = _build_parser()
    try:
        try:
            args = parser.parse_args(argv)
        except SystemExit as exc:  # --help
            return int(exc.code or 0)
        if not args.command:
            parser.print_usage(sys.stderr)
            return 1
        cfg = _resolve(args.command, args)
        return _HANDLERS[args.command](cfg)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except (DataError, OSError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - last-resort mapping to exit code
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
