"""Command-line entry point; a thin client over the service endpoints.

By default requests run against an in-process instance of the service, so
batch jobs need no running daemon; ``--server URL`` targets a remote
``normcluster serve`` instead. Exit codes: 0 success, 1 input error,
2 runtime failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from filelock import FileLock

from .client import ServiceClient, ServiceError

WORKERS_ENV = "NORMCLUSTER_WORKERS"


class InputError(ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    # unknown flags and missing arguments are input errors, not crashes
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _read_text(path: str, what: str) -> str:
    p = Path(path)
    if not p.is_file():
        raise InputError(f"{what} not found: {path}")
    return p.read_text(encoding="utf-8")


def _read_json(path: str, what: str):
    text = _read_text(path, what)
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{what} {path} is not valid JSON: {exc.msg}") from None


def _read_jsonl(path: str, what: str) -> list[dict]:
    rows = []
    for lineno, line in enumerate(_read_text(path, what).splitlines(), start=1):
        if not line.strip():
            continue
        try:
            rows.append(json.loads(line))
        except json.JSONDecodeError:
            raise InputError(f"{what} {path} line {lineno}: invalid JSON") from None
    return rows


def _write_or_stdout(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8", newline="\n")
    else:
        sys.stdout.write(text)


def _focus_words_arg(path: str | None) -> list[str] | None:
    if not path:
        return None
    return [
        line.strip()
        for line in _read_text(path, "focus word list").splitlines()
        if line.strip() and not line.lstrip().startswith("#")
    ]


def _workers(args) -> int | None:
    if getattr(args, "workers", None) is not None:
        return args.workers
    env = os.environ.get(WORKERS_ENV)
    if env:
        try:
            return int(env)
        except ValueError:
            raise InputError(f"{WORKERS_ENV} must be an integer, got {env!r}") from None
    return None


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="normcluster", description=__doc__)
    common = _Parser(add_help=False)
    common.add_argument("--server", help="base URL of a running service (default: in-process)")

    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("validate", parents=[common], help="check a corpus file against the format contract")
    p.add_argument("--corpus", required=True)

    p = sub.add_parser("cluster", parents=[common], help="cluster one corpus and emit a composition report")
    p.add_argument("--corpus", required=True)
    p.add_argument("--mode", default="sentence_direct")
    p.add_argument("--algo", required=True, choices=["kmeans", "dbscan"])
    p.add_argument("--k", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--restarts", type=int, default=10)
    p.add_argument("--max-iter", type=int, default=300)
    p.add_argument("--tol", type=float, default=1e-4)
    p.add_argument("--eps", type=float)
    p.add_argument("--min-members", type=int)
    p.add_argument("--focus-words", help="file with one cue pattern per line")
    p.add_argument("--out", help="composition TSV path (default: stdout)")

    p = sub.add_parser("sweep", parents=[common], help="run every configuration in a sweep spec")
    p.add_argument("--spec", required=True, help="sweep spec JSON file")
    p.add_argument("--corpora", help="directory of <model_id>.jsonl corpus files")
    p.add_argument("--out", help="results JSONL path")
    p.add_argument("--workers", type=int, help=f"parallel runs (fallback: ${WORKERS_ENV}, then spec)")
    p.add_argument("--dry-run", action="store_true", help="print the config count and exit")

    p = sub.add_parser("rank", parents=[common], help="rank sweep results and emit chart data")
    p.add_argument("--results", required=True, help="results JSONL from sweep")
    p.add_argument("--top", type=int, default=20)
    p.add_argument("--out", help="chart TSV path (default: stdout)")

    p = sub.add_parser("fit", parents=[common], help="fit a gated kNN classifier on a labeled corpus")
    p.add_argument("--corpus", required=True)
    p.add_argument("--mode", default="sentence_direct")
    p.add_argument("--threshold", type=float, default=0.6)
    p.add_argument("--k", type=int, default=3)
    p.add_argument("--focus-words")
    p.add_argument("--out", required=True, help="model JSON path")

    p = sub.add_parser("classify", parents=[common], help="predict categories for a corpus")
    p.add_argument("--model", required=True)
    p.add_argument("--corpus", required=True)
    p.add_argument("--mode", default="sentence_direct")
    p.add_argument("--focus-words")
    p.add_argument("--out", help="predictions JSONL path (default: stdout)")
    p.add_argument("--calibrate", help="comma-separated thresholds: print positive counts instead")

    p = sub.add_parser("evaluate", parents=[common], help="category-strict precision/recall per prediction file")
    p.add_argument("--predictions", required=True, action="append", help="predictions JSONL (repeatable)")
    p.add_argument("--gold", required=True, help="JSON object mapping record id to gold label")

    p = sub.add_parser("segment", parents=[common], help="split a document into sentence-like elements")
    p.add_argument("--text", required=True, help="UTF-8 text file")
    p.add_argument("--doc-id")
    p.add_argument("--out", help="segments JSONL path (default: stdout)")

    p = sub.add_parser("mine", parents=[common], help="mine a segmented document for normative candidates")
    p.add_argument("--model", required=True)
    p.add_argument("--segments", required=True, help="segments JSONL from `segment`")
    p.add_argument("--embeddings", required=True, help="corpus JSONL keyed by sentence id")
    p.add_argument("--mode", default="sentence_direct")
    p.add_argument("--focus-words")
    p.add_argument("--ledger", help="rejection ledger JSONL; rejected sentences are skipped")
    p.add_argument("--out", help="review TSV path (default: stdout)")

    p = sub.add_parser("merge", parents=[common], help="merge reviewed verdicts into the training corpus")
    p.add_argument("--training", required=True)
    p.add_argument("--review", required=True)
    p.add_argument("--embeddings", required=True)
    p.add_argument("--mode", default="sentence_direct")
    p.add_argument("--focus-words")
    p.add_argument("--out", required=True, help="merged training corpus path")
    p.add_argument("--ledger", help="rejection ledger JSONL to append to")

    p = sub.add_parser("serve", help="run the service under uvicorn")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)

    return parser


# --- handlers ----------------------------------------------------------------


def _cmd_validate(client: ServiceClient, args) -> int:
    result = client.validate(_read_text(args.corpus, "corpus"))
    print(f"records: {result['records']}")
    print(f"dim: {result['dim']}")
    print(f"labeled: {result['labeled']}")
    print(f"model_ids: {', '.join(result['model_ids'])}")
    for label, count in sorted(result["label_counts"].items()):
        print(f"  {label}: {count}")
    return 0


def _cmd_cluster(client: ServiceClient, args) -> int:
    payload = {
        "corpus_jsonl": _read_text(args.corpus, "corpus"),
        "mode": args.mode,
        "algorithm": args.algo,
        "focus_words": _focus_words_arg(args.focus_words),
    }
    if args.algo == "kmeans":
        if args.k is None:
            raise InputError("--k is required with --algo kmeans")
        payload["kmeans"] = {
            "k": args.k,
            "seed": args.seed,
            "restarts": args.restarts,
            "max_iter": args.max_iter,
            "tol": args.tol,
        }
    else:
        if args.eps is None or args.min_members is None:
            raise InputError("--eps and --min-members are required with --algo dbscan")
        payload["dbscan"] = {"eps": args.eps, "min_members": args.min_members}
    result = client.cluster(payload)
    if result["composition_tsv"] is None:
        raise InputError("corpus must be fully labeled to report cluster composition")
    if result["awh"]:
        print(
            f"clusters: {result['n_clusters']}  awh: {result['awh']['value']:.6g}",
            file=sys.stderr,
        )
    else:
        print(f"clusters: {result['n_clusters']}  awh: n/a (all noise)", file=sys.stderr)
    _write_or_stdout(result["composition_tsv"], args.out)
    return 0


def _load_corpora_dir(directory: str) -> dict[str, str]:
    root = Path(directory)
    if not root.is_dir():
        raise InputError(f"corpora directory not found: {directory}")
    corpora = {}
    for path in sorted(root.glob("*.jsonl")):
        corpora[path.stem] = path.read_text(encoding="utf-8")
    if not corpora:
        raise InputError(f"no .jsonl corpus files in {directory}")
    return corpora


def _cmd_sweep(client: ServiceClient, args) -> int:
    spec = _read_json(args.spec, "sweep spec")
    if args.dry_run:
        counts = client.grid(spec)
        print(f"configs: {counts['total']} (dbscan: {counts['dbscan']}, kmeans: {counts['kmeans']})")
        return 0
    if not args.corpora or not args.out:
        raise InputError("--corpora and --out are required unless --dry-run is given")
    corpora = _load_corpora_dir(args.corpora)
    result = client.sweep(spec, corpora, workers=_workers(args))
    lines = [json.dumps(row, ensure_ascii=False) for row in result["results"]]
    Path(args.out).write_text("".join(line + "\n" for line in lines), encoding="utf-8", newline="\n")
    print(f"{len(result['results'])} runs, {result['failures']} failures -> {args.out}", file=sys.stderr)
    return 0


def _cmd_rank(client: ServiceClient, args) -> int:
    rows = _read_jsonl(args.results, "results file")
    result = client.rank(rows, args.top)
    _write_or_stdout(result["chart_tsv"], args.out)
    return 0


def _cmd_fit(client: ServiceClient, args) -> int:
    result = client.fit(
        {
            "corpus_jsonl": _read_text(args.corpus, "training corpus"),
            "mode": args.mode,
            "gate_threshold": args.threshold,
            "k": args.k,
            "focus_words": _focus_words_arg(args.focus_words),
        }
    )
    Path(args.out).write_text(
        json.dumps(result["model"], ensure_ascii=False, indent=2) + "\n", encoding="utf-8", newline="\n"
    )
    print(f"fitted on {result['samples']} samples (dim {result['dim']}) -> {args.out}", file=sys.stderr)
    return 0


def _cmd_classify(client: ServiceClient, args) -> int:
    model = _read_json(args.model, "model file")
    corpus_jsonl = _read_text(args.corpus, "corpus")
    if args.calibrate:
        try:
            thresholds = [float(t) for t in args.calibrate.split(",") if t.strip()]
        except ValueError:
            raise InputError(f"--calibrate expects comma-separated floats, got {args.calibrate!r}") from None
        result = client.calibrate(
            {
                "model": model,
                "corpus_jsonl": corpus_jsonl,
                "mode": args.mode,
                "thresholds": thresholds,
                "focus_words": _focus_words_arg(args.focus_words),
            }
        )
        print("threshold\tpositives")
        for threshold, positives in result["rows"]:
            print(f"{threshold:g}\t{positives}")
        return 0
    result = client.predict(
        {
            "model": model,
            "corpus_jsonl": corpus_jsonl,
            "mode": args.mode,
            "focus_words": _focus_words_arg(args.focus_words),
        }
    )
    lines = [json.dumps(row, ensure_ascii=False) for row in result["predictions"]]
    _write_or_stdout("".join(line + "\n" for line in lines), args.out)
    print(f"{result['positives']} positives of {len(result['predictions'])}", file=sys.stderr)
    return 0


def _cmd_evaluate(client: ServiceClient, args) -> int:
    gold = _read_json(args.gold, "gold labels")
    if not isinstance(gold, dict):
        raise InputError("gold file must be a JSON object mapping record id to label")
    for path in args.predictions:
        rows = _read_jsonl(path, "predictions file")
        predictions = [{"record_id": r["record_id"], "label": r["label"]} for r in rows]
        result = client.evaluate(predictions, gold)
        print(f"{Path(path).stem}\t{result['summary']}")
    return 0


def _cmd_segment(client: ServiceClient, args) -> int:
    doc_id = args.doc_id or Path(args.text).stem
    result = client.segment(doc_id, _read_text(args.text, "text file"))
    lines = [
        json.dumps({"doc_id": result["doc_id"], **row}, ensure_ascii=False) for row in result["sentences"]
    ]
    _write_or_stdout("".join(line + "\n" for line in lines), args.out)
    print(f"{len(result['sentences'])} sentences", file=sys.stderr)
    return 0


def _read_segments(path: str) -> tuple[str, list[dict]]:
    rows = _read_jsonl(path, "segments file")
    if not rows:
        raise InputError(f"segments file {path} is empty")
    doc_ids = {row.get("doc_id") for row in rows}
    if len(doc_ids) != 1 or None in doc_ids:
        raise InputError("segments file must carry exactly one doc_id")
    sentences = [
        {"sentence_id": r["sentence_id"], "text": r["text"], "start": r["start"], "end": r["end"]}
        for r in rows
    ]
    return doc_ids.pop(), sentences


def _cmd_mine(client: ServiceClient, args) -> int:
    doc_id, sentences = _read_segments(args.segments)
    rejected = []
    if args.ledger and Path(args.ledger).is_file():
        rejected = [
            [row["doc_id"], row["sentence_id"]] for row in _read_jsonl(args.ledger, "rejection ledger")
        ]
    result = client.mine(
        {
            "model": _read_json(args.model, "model file"),
            "doc_id": doc_id,
            "sentences": sentences,
            "embeddings_jsonl": _read_text(args.embeddings, "embeddings corpus"),
            "mode": args.mode,
            "rejected": rejected,
            "focus_words": _focus_words_arg(args.focus_words),
        }
    )
    _write_or_stdout(result["review_tsv"], args.out)
    print(f"{len(result['entries'])} candidates", file=sys.stderr)
    return 0


def _cmd_merge(client: ServiceClient, args) -> int:
    result = client.merge(
        {
            "training_jsonl": _read_text(args.training, "training corpus"),
            "review_tsv": _read_text(args.review, "review file"),
            "embeddings_jsonl": _read_text(args.embeddings, "embeddings corpus"),
            "mode": args.mode,
            "focus_words": _focus_words_arg(args.focus_words),
        }
    )
    out = Path(args.out)
    # the training set has one writer at a time; hold an advisory lock
    with FileLock(str(out) + ".lock"):
        out.write_text(result["merged_jsonl"], encoding="utf-8", newline="\n")
    if args.ledger and result["rejections"]:
        with open(args.ledger, "a", encoding="utf-8", newline="\n") as fh:
            for rejection in result["rejections"]:
                fh.write(json.dumps(rejection, ensure_ascii=False) + "\n")
    print(
        f"accepted {result['accepted']}, rejected {len(result['rejections'])} -> {args.out}",
        file=sys.stderr,
    )
    return 0


def _cmd_serve(args) -> int:
    import uvicorn

    from .service.app import create_app

    uvicorn.run(create_app(), host=args.host, port=args.port)
    return 0


_HANDLERS = {
    "validate": _cmd_validate,
    "cluster": _cmd_cluster,
    "sweep": _cmd_sweep,
    "rank": _cmd_rank,
    "fit": _cmd_fit,
    "classify": _cmd_classify,
    "evaluate": _cmd_evaluate,
    "segment": _cmd_segment,
    "mine": _cmd_mine,
    "merge": _cmd_merge,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    if args.command == "serve":
        return _cmd_serve(args)

    try:
        with ServiceClient(base_url=getattr(args, "server", None)) as client:
            return _HANDLERS[args.command](client, args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ServiceError as exc:
        print(f"error: {exc.detail}", file=sys.stderr)
        return 1 if exc.is_input_error else 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # runtime failure
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
