"""FastAPI service wrapping the core package.

All endpoints are stateless compute over request payloads; files stay with
the client. Core input problems (malformed corpora, incompatible modes,
bad parameters) surface as 400 responses with the core error message.
"""

from __future__ import annotations

from collections import Counter

import numpy as np
from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .. import __version__
from ..bootstrap import (
    ReviewBatch,
    SegmentedDocument,
    Sentence,
    mine,
    parse_review_tsv,
    review_tsv,
    segment,
)
from ..classifier import (
    calibrate_gate,
    evaluate,
    fit_from_corpus,
    model_from_dict,
    model_to_dict,
    predict_corpus,
    Prediction,
)
from ..corpus import (
    CategoryLabel,
    DEFAULT_FOCUS_WORDS,
    EmbeddingRecord,
    ExtractionMode,
    FocusWordList,
    corpus_to_jsonl,
    parse_corpus,
    resolve_corpus,
)
from ..homogeneity import NoClustersError, awh, composition_report, composition_tsv
from ..clustering import DbscanParams, KMeansParams, dbscan, kmeans
from ..sweep import SweepSpec, chart_tsv, generate_grid, grid_counts, rank_rows, run_sweep, summarize
from . import schemas


def _focus_words(entries) -> FocusWordList:
    return FocusWordList(entries) if entries else DEFAULT_FOCUS_WORDS


def _mode(value: str) -> ExtractionMode:
    try:
        return ExtractionMode(value)
    except ValueError:
        raise ValueError(
            f"unknown extraction mode {value!r}; expected one of "
            f"{[m.value for m in ExtractionMode]}"
        ) from None


def _composition_rows(rows) -> list[schemas.CompositionRowOut]:
    return [
        schemas.CompositionRowOut(
            cluster_id=r.cluster_id,
            size=r.size,
            counts={label.value: count for label, count in r.counts.items()},
            majority=r.majority.value,
            homogeneity=r.homogeneity,
            weighed_homogeneity=r.weighed_homogeneity,
        )
        for r in rows
    ]


def create_app() -> FastAPI:
    app = FastAPI(title="normcluster", version=__version__)

    @app.exception_handler(ValueError)
    async def _value_error(request: Request, exc: ValueError):
        return JSONResponse(status_code=400, content={"detail": str(exc)})

    @app.get("/health", response_model=schemas.HealthResponse)
    def health():
        return schemas.HealthResponse(status="ok", version=__version__)

    @app.post("/corpus/validate", response_model=schemas.ValidateResponse)
    def validate(req: schemas.ValidateRequest):
        corpus = parse_corpus(req.corpus_jsonl)
        label_counts = Counter(r.label.value for r in corpus.records if r.label is not None)
        return schemas.ValidateResponse(
            records=len(corpus),
            dim=corpus.dim,
            labeled=sum(1 for r in corpus.records if r.label is not None),
            model_ids=corpus.model_ids(),
            label_counts=dict(label_counts),
        )

    @app.post("/cluster", response_model=schemas.ClusterResponse)
    def cluster(req: schemas.ClusterRequest):
        corpus = parse_corpus(req.corpus_jsonl)
        points, fallbacks = resolve_corpus(corpus, _mode(req.mode), _focus_words(req.focus_words))
        if req.algorithm == "kmeans":
            if req.kmeans is None:
                raise ValueError("kmeans parameters missing")
            opts = req.kmeans
            assignment = kmeans(
                points,
                KMeansParams(k=opts.k, seed=opts.seed, restarts=opts.restarts, max_iter=opts.max_iter, tol=opts.tol),
            )
        elif req.algorithm == "dbscan":
            if req.dbscan is None:
                raise ValueError("dbscan parameters missing")
            assignment = dbscan(points, DbscanParams(eps=req.dbscan.eps, min_members=req.dbscan.min_members))
        else:
            raise ValueError(f"unknown algorithm {req.algorithm!r}")

        labels = corpus.labels()
        score = None
        rows = None
        tsv = None
        if all(l is not None for l in labels) and labels:
            try:
                score = awh(assignment, labels)
            except NoClustersError:
                score = None
            report = composition_report(assignment, labels)
            rows = _composition_rows(report)
            tsv = composition_tsv(report)
        return schemas.ClusterResponse(
            assignment=[int(c) for c in assignment.labels],
            n_clusters=assignment.n_clusters,
            inertia=assignment.inertia,
            awh=schemas.AwhOut(value=score.value, n_clusters=score.n_clusters, n_samples=score.n_samples)
            if score
            else None,
            composition=rows,
            composition_tsv=tsv,
            focus_fallbacks=len(fallbacks),
        )

    @app.post("/grid", response_model=schemas.GridResponse)
    def grid(req: schemas.GridRequest):
        spec = SweepSpec.from_dict(req.spec.model_dump())
        total, n_dbscan, n_kmeans = grid_counts(spec)
        return schemas.GridResponse(total=total, dbscan=n_dbscan, kmeans=n_kmeans)

    @app.post("/sweep", response_model=schemas.SweepResponse)
    def sweep(req: schemas.SweepRequest):
        spec = SweepSpec.from_dict(req.spec.model_dump())
        corpora = {model_id: parse_corpus(text) for model_id, text in req.corpora.items()}
        for model_id, corpus in corpora.items():
            stray = [r.id for r in corpus.records if r.model_id != model_id]
            if stray:
                raise ValueError(
                    f"corpus keyed {model_id!r} contains records for another model (first: {stray[0]!r})"
                )
        grid = generate_grid(spec)
        workers = req.workers if req.workers is not None else spec.workers
        results = run_sweep(corpora, grid, workers=workers, focus_words=spec.focus_words)
        rows = [schemas.RunSummaryOut(**summarize(r)) for r in results]
        return schemas.SweepResponse(results=rows, failures=sum(1 for r in results if r.failure))

    @app.post("/rank", response_model=schemas.RankResponse)
    def rank(req: schemas.RankRequest):
        rows = [r.model_dump() for r in req.results]
        ranked = rank_rows(rows, req.top_n)
        return schemas.RankResponse(
            ranked=[schemas.RunSummaryOut(**row) for row in ranked],
            chart_tsv=chart_tsv(ranked),
        )

    @app.post("/classifier/fit", response_model=schemas.FitResponse)
    def classifier_fit(req: schemas.FitRequest):
        corpus = parse_corpus(req.corpus_jsonl)
        model = fit_from_corpus(
            corpus,
            mode=_mode(req.mode),
            gate_threshold=req.gate_threshold,
            k=req.k,
            focus_words=_focus_words(req.focus_words),
        )
        return schemas.FitResponse(
            model=schemas.ClassifierModelOut(**model_to_dict(model)),
            samples=len(model.labels),
            dim=int(model.centroid.shape[0]),
        )

    @app.post("/classifier/predict", response_model=schemas.PredictResponse)
    def classifier_predict(req: schemas.PredictRequest):
        model = model_from_dict(req.model.model_dump())
        corpus = parse_corpus(req.corpus_jsonl)
        predictions = predict_corpus(model, corpus, _mode(req.mode), _focus_words(req.focus_words))
        outs = [
            schemas.PredictionOut(
                record_id=p.record_id,
                label=p.label.value,
                gate_similarity=p.gate_similarity,
                neighbor_ids=list(p.neighbor_ids),
            )
            for p in predictions
        ]
        positives = sum(1 for p in predictions if p.label is not CategoryLabel.NON_NORMATIVE)
        return schemas.PredictResponse(predictions=outs, positives=positives)

    @app.post("/classifier/calibrate", response_model=schemas.CalibrateResponse)
    def classifier_calibrate(req: schemas.CalibrateRequest):
        model = model_from_dict(req.model.model_dump())
        corpus = parse_corpus(req.corpus_jsonl)
        points, _ = resolve_corpus(corpus, _mode(req.mode), _focus_words(req.focus_words))
        return schemas.CalibrateResponse(rows=calibrate_gate(model, points, req.thresholds))

    @app.post("/classifier/evaluate", response_model=schemas.EvaluateResponse)
    def classifier_evaluate(req: schemas.EvaluateRequest):
        predictions = [
            Prediction(record_id=p.record_id, label=CategoryLabel(p.label), gate_similarity=0.0)
            for p in req.predictions
        ]
        gold = {rid: CategoryLabel(value) for rid, value in req.gold.items()}
        result = evaluate(predictions, gold)
        return schemas.EvaluateResponse(
            positives=result.positives,
            true_positives=result.true_positives,
            gold_positives=result.gold_positives,
            precision=result.precision,
            recall=result.recall,
            summary=result.summary(),
        )

    @app.post("/segment", response_model=schemas.SegmentResponse)
    def segment_doc(req: schemas.SegmentRequest):
        doc = segment(req.text, req.doc_id)
        return schemas.SegmentResponse(
            doc_id=doc.doc_id,
            sentences=[
                schemas.SentenceOut(sentence_id=s.sentence_id, text=s.text, start=s.start, end=s.end)
                for s in doc.sentences
            ],
        )

    @app.post("/mine", response_model=schemas.MineResponse)
    def mine_doc(req: schemas.MineRequest):
        model = model_from_dict(req.model.model_dump())
        doc = SegmentedDocument(
            doc_id=req.doc_id,
            sentences=tuple(
                Sentence(sentence_id=s.sentence_id, text=s.text, start=s.start, end=s.end)
                for s in req.sentences
            ),
        )
        embeddings = _embedding_map(req.embeddings_jsonl, req.mode, req.focus_words)
        batch = mine(model, doc, embeddings, rejected={tuple(pair) for pair in req.rejected})
        return schemas.MineResponse(
            entries=[
                schemas.ReviewEntryOut(
                    sentence_id=e.sentence_id,
                    doc_id=e.doc_id,
                    text=e.text,
                    predicted=e.predicted.value,
                    gate_similarity=e.gate_similarity,
                    status=e.status,
                    accepted_label=e.accepted_label.value if e.accepted_label else None,
                )
                for e in batch.entries
            ],
            review_tsv=review_tsv(batch),
        )

    @app.post("/merge", response_model=schemas.MergeResponse)
    def merge_doc(req: schemas.MergeRequest):
        training = parse_corpus(req.training_jsonl)
        batch = parse_review_tsv(req.review_tsv)
        embeddings_corpus = parse_corpus(req.embeddings_jsonl)
        embeddings = _embedding_map(req.embeddings_jsonl, req.mode, req.focus_words)
        merged_records, rejections, accepted = _merge_records(training, batch, embeddings, embeddings_corpus)
        return schemas.MergeResponse(
            merged_jsonl=corpus_to_jsonl(merged_records),
            accepted=accepted,
            rejections=[schemas.RejectionOut(doc_id=d, sentence_id=s) for d, s in rejections],
        )

    def _embedding_map(embeddings_jsonl: str, mode: str, focus_words) -> dict[str, np.ndarray]:
        corpus = parse_corpus(embeddings_jsonl)
        points, _ = resolve_corpus(corpus, _mode(mode), _focus_words(focus_words))
        return {record.id: vec for record, vec in zip(corpus.records, points)}

    return app


def _merge_records(training, batch: ReviewBatch, embeddings, embeddings_corpus):
    """Training corpus + one accepted record per accepted review entry."""
    pending = batch.pending()
    if pending:
        raise ValueError(f"{len(pending)} review entries are still pending")
    existing_ids = {r.id for r in training.records}
    model_id = embeddings_corpus.records[0].model_id if embeddings_corpus.records else ""
    merged = list(training.records)
    rejections = []
    accepted = 0
    for entry in batch.entries:
        if entry.status == "rejected":
            rejections.append((entry.doc_id, entry.sentence_id))
            continue
        new_id = f"{entry.doc_id}#{entry.sentence_id}"
        if new_id in existing_ids:
            raise ValueError(f"sample {new_id!r} is already in the training set")
        if entry.sentence_id not in embeddings:
            raise ValueError(f"accepted entry {entry.sentence_id!r} has no embedding")
        if entry.accepted_label is None:
            raise ValueError(f"accepted entry {entry.sentence_id!r} carries no category")
        merged.append(
            EmbeddingRecord(
                id=new_id,
                text=entry.text,
                model_id=model_id,
                sentence_vector=tuple(float(x) for x in embeddings[entry.sentence_id]),
                label=entry.accepted_label,
                source_doc=entry.doc_id,
            )
        )
        accepted += 1
    return merged, rejections, accepted


app = create_app()
