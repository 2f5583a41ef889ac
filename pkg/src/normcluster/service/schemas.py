"""Request/response models for the normcluster service.

Corpora travel as verbatim JSONL text so the service enforces exactly the
same format contract as the file interchange; everything else is typed
JSON. Endpoints are stateless: clients keep the files, the service does
the computing.
"""

from __future__ import annotations

from typing import Optional

from pydantic import BaseModel, Field


class HealthResponse(BaseModel):
    status: str
    version: str


class ValidateRequest(BaseModel):
    corpus_jsonl: str


class ValidateResponse(BaseModel):
    records: int
    dim: Optional[int]
    labeled: int
    model_ids: list[str]
    label_counts: dict[str, int]


class KMeansOptions(BaseModel):
    k: int
    seed: int = 0
    restarts: int = 10
    max_iter: int = 300
    tol: float = 1e-4


class DbscanOptions(BaseModel):
    eps: float
    min_members: int


class AwhOut(BaseModel):
    value: float
    n_clusters: int
    n_samples: int


class CompositionRowOut(BaseModel):
    cluster_id: Optional[int]  # None marks the noise row
    size: int
    counts: dict[str, int]
    majority: str
    homogeneity: float
    weighed_homogeneity: float


class ClusterRequest(BaseModel):
    corpus_jsonl: str
    mode: str
    algorithm: str
    kmeans: Optional[KMeansOptions] = None
    dbscan: Optional[DbscanOptions] = None
    focus_words: Optional[list[str]] = None


class ClusterResponse(BaseModel):
    assignment: list[int]
    n_clusters: int
    inertia: Optional[float]
    awh: Optional[AwhOut]
    composition: Optional[list[CompositionRowOut]]
    composition_tsv: Optional[str]
    focus_fallbacks: int


class ModelIn(BaseModel):
    id: str
    family: str


class DbscanGrid(BaseModel):
    eps: list[float]
    min_members: list[int]


class KMeansGrid(BaseModel):
    k: list[int]
    restarts: int = 10
    max_iter: int = 300
    tol: float = 1e-4


class SweepSpecIn(BaseModel):
    models: list[ModelIn]
    dbscan: Optional[DbscanGrid] = None
    kmeans: Optional[KMeansGrid] = None
    master_seed: int = 0
    workers: int = 1
    focus_words: Optional[list[str]] = None


class GridRequest(BaseModel):
    spec: SweepSpecIn


class GridResponse(BaseModel):
    total: int
    dbscan: int
    kmeans: int


class SweepRequest(BaseModel):
    spec: SweepSpecIn
    #: model_id -> corpus JSONL text
    corpora: dict[str, str]
    workers: Optional[int] = None


class RunSummaryOut(BaseModel):
    index: int
    algorithm: str
    model_id: str
    mode: str
    params: dict
    score: Optional[float]
    n_clusters: Optional[int]
    n_samples: Optional[int]
    focus_fallbacks: int
    failure: Optional[str]


class SweepResponse(BaseModel):
    results: list[RunSummaryOut]
    failures: int


class RankRequest(BaseModel):
    results: list[RunSummaryOut]
    top_n: Optional[int] = Field(default=None, ge=0)


class RankResponse(BaseModel):
    ranked: list[RunSummaryOut]
    chart_tsv: str


class ClassifierModelOut(BaseModel):
    model_id: str
    gate_threshold: float
    k: int
    centroid: list[float]
    training: list[dict]


class FitRequest(BaseModel):
    corpus_jsonl: str
    mode: str = "sentence_direct"
    gate_threshold: float = 0.6
    k: int = 3
    focus_words: Optional[list[str]] = None


class FitResponse(BaseModel):
    model: ClassifierModelOut
    samples: int
    dim: int


class PredictRequest(BaseModel):
    model: ClassifierModelOut
    corpus_jsonl: str
    mode: str = "sentence_direct"
    focus_words: Optional[list[str]] = None


class PredictionOut(BaseModel):
    record_id: str
    label: str
    gate_similarity: float
    neighbor_ids: list[int]


class PredictResponse(BaseModel):
    predictions: list[PredictionOut]
    positives: int


class CalibrateRequest(BaseModel):
    model: ClassifierModelOut
    corpus_jsonl: str
    mode: str = "sentence_direct"
    thresholds: list[float]
    focus_words: Optional[list[str]] = None


class CalibrateResponse(BaseModel):
    rows: list[tuple[float, int]]


class PredictionIn(BaseModel):
    record_id: str
    label: str


class EvaluateRequest(BaseModel):
    predictions: list[PredictionIn]
    gold: dict[str, str]


class EvaluateResponse(BaseModel):
    positives: int
    true_positives: int
    gold_positives: int
    precision: float
    recall: float
    summary: str


class SegmentRequest(BaseModel):
    doc_id: str
    text: str


class SentenceOut(BaseModel):
    sentence_id: str
    text: str
    start: int
    end: int


class SegmentResponse(BaseModel):
    doc_id: str
    sentences: list[SentenceOut]


class MineRequest(BaseModel):
    model: ClassifierModelOut
    doc_id: str
    sentences: list[SentenceOut]
    #: corpus JSONL whose record ids are sentence ids
    embeddings_jsonl: str
    mode: str = "sentence_direct"
    rejected: list[tuple[str, str]] = Field(default_factory=list)
    focus_words: Optional[list[str]] = None


class ReviewEntryOut(BaseModel):
    sentence_id: str
    doc_id: str
    text: str
    predicted: str
    gate_similarity: float
    status: str
    accepted_label: Optional[str] = None


class MineResponse(BaseModel):
    entries: list[ReviewEntryOut]
    review_tsv: str


class MergeRequest(BaseModel):
    training_jsonl: str
    review_tsv: str
    embeddings_jsonl: str
    mode: str = "sentence_direct"
    focus_words: Optional[list[str]] = None


class RejectionOut(BaseModel):
    doc_id: str
    sentence_id: str


class MergeResponse(BaseModel):
    merged_jsonl: str
    accepted: int
    rejections: list[RejectionOut]
