"""Centroid-gated k-nearest-neighbor classification of normative statements.

A query is first compared to the centroid of all training samples; cosine
similarity below the gate threshold means the sentence is deemed
non-normative and is not classified. Queries that pass the gate get the
plurality label of their k nearest training samples by cosine distance,
with plurality ties resolved by the single nearest neighbor.

Evaluation is category-strict: a positive only counts as a true positive
when its predicted category matches gold exactly.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from collections import Counter
from pathlib import Path
from typing import Mapping, Sequence, Union

import numpy as np

from .corpus import (
    CATEGORY_LABELS,
    DEFAULT_FOCUS_WORDS,
    CategoryLabel,
    Corpus,
    ExtractionMode,
    FocusWordList,
    resolve_corpus,
)

DEFAULT_GATE_THRESHOLD = 0.6
DEFAULT_K = 3


def cosine_similarity(a: np.ndarray, b: np.ndarray) -> float:
    na = np.linalg.norm(a)
    nb = np.linalg.norm(b)
    if na == 0.0 or nb == 0.0:
        raise ValueError("cosine similarity is undefined for a zero vector")
    return float(np.dot(a, b) / (na * nb))


@dataclass
class ClassifierModel:
    vectors: np.ndarray
    labels: list[CategoryLabel]
    centroid: np.ndarray
    gate_threshold: float = DEFAULT_GATE_THRESHOLD
    k: int = DEFAULT_K
    model_id: str = ""


@dataclass(frozen=True)
class Prediction:
    record_id: str
    label: CategoryLabel
    gate_similarity: float
    #: Indices into the training set; empty when the gate screened the query out.
    neighbor_ids: tuple[int, ...] = ()


@dataclass(frozen=True)
class PrEvaluation:
    positives: int
    true_positives: int
    gold_positives: int
    precision: float
    recall: float

    @classmethod
    def from_counts(cls, positives: int, true_positives: int, gold_positives: int) -> "PrEvaluation":
        if min(positives, true_positives, gold_positives) < 0:
            raise ValueError("counts must be non-negative")
        if true_positives > min(positives, gold_positives):
            raise ValueError("true positives cannot exceed positives or gold positives")
        return cls(
            positives=positives,
            true_positives=true_positives,
            gold_positives=gold_positives,
            precision=true_positives / positives if positives else 0.0,
            recall=true_positives / gold_positives if gold_positives else 0.0,
        )

    def summary(self) -> str:
        """``precision/recall`` rounded half-even to two decimals."""
        return f"{_fmt2(self.precision)}/{_fmt2(self.recall)}"


def _fmt2(value: float) -> str:
    text = f"{round(value, 2):.2f}".rstrip("0").rstrip(".")
    return text or "0"


def fit(
    samples: Sequence[tuple[Sequence[float], CategoryLabel]],
    gate_threshold: float = DEFAULT_GATE_THRESHOLD,
    k: int = DEFAULT_K,
    model_id: str = "",
) -> ClassifierModel:
    """Store the training samples verbatim and their component-wise mean."""
    if not samples:
        raise ValueError("cannot fit on an empty sample list")
    labels = []
    for _, label in samples:
        if label not in CATEGORY_LABELS:
            raise ValueError(f"training labels must be one of the four categories, got {label!r}")
        labels.append(label)
    vectors = np.asarray([np.asarray(v, dtype=np.float64) for v, _ in samples])
    if vectors.ndim != 2:
        raise ValueError("training vectors must share one dimensionality")
    if not (-1.0 <= gate_threshold <= 1.0):
        raise ValueError("gate_threshold must lie in [-1, 1]")
    if k < 1 or k % 2 == 0:
        raise ValueError("k must be a positive odd integer")
    if k > len(samples):
        raise ValueError(f"k={k} exceeds the number of training samples ({len(samples)})")
    if np.any(np.linalg.norm(vectors, axis=1) == 0.0):
        raise ValueError("training vectors must be non-zero")
    centroid = vectors.mean(axis=0)
    if np.linalg.norm(centroid) == 0.0:
        raise ValueError("training centroid is the zero vector; the gate is undefined")
    return ClassifierModel(
        vectors=vectors,
        labels=labels,
        centroid=centroid,
        gate_threshold=gate_threshold,
        k=k,
        model_id=model_id,
    )


def fit_from_corpus(
    corpus: Corpus,
    mode: ExtractionMode = ExtractionMode.SENTENCE_DIRECT,
    gate_threshold: float = DEFAULT_GATE_THRESHOLD,
    k: int = DEFAULT_K,
    focus_words: FocusWordList = DEFAULT_FOCUS_WORDS,
) -> ClassifierModel:
    missing = [r.id for r in corpus.records if r.label is None]
    if missing:
        raise ValueError(f"training corpus has unlabeled records (first: {missing[0]!r})")
    points, _ = resolve_corpus(corpus, mode, focus_words)
    samples = list(zip(points, [r.label for r in corpus.records]))
    model_id = corpus.records[0].model_id if corpus.records else ""
    return fit(samples, gate_threshold=gate_threshold, k=k, model_id=model_id)


def predict(model: ClassifierModel, query: Sequence[float], record_id: str = "") -> Prediction:
    """Gate against the centroid, then vote among the k nearest neighbors."""
    q = np.asarray(query, dtype=np.float64)
    if q.shape != model.centroid.shape:
        raise ValueError(f"query dimension {q.shape} does not match model dimension {model.centroid.shape}")
    gate_sim = cosine_similarity(q, model.centroid)
    if gate_sim < model.gate_threshold:
        return Prediction(record_id=record_id, label=CategoryLabel.NON_NORMATIVE, gate_similarity=gate_sim)

    norms = np.linalg.norm(model.vectors, axis=1) * np.linalg.norm(q)
    sims = model.vectors @ q / norms
    distances = 1.0 - sims
    order = np.argsort(distances, kind="stable")  # distance ties go to the lower index
    nearest = tuple(int(i) for i in order[: model.k])
    votes = Counter(model.labels[i] for i in nearest)
    top = max(votes.values())
    winners = [label for label, count in votes.items() if count == top]
    label = winners[0] if len(winners) == 1 else model.labels[nearest[0]]
    return Prediction(record_id=record_id, label=label, gate_similarity=gate_sim, neighbor_ids=nearest)


def predict_corpus(
    model: ClassifierModel,
    corpus: Corpus,
    mode: ExtractionMode = ExtractionMode.SENTENCE_DIRECT,
    focus_words: FocusWordList = DEFAULT_FOCUS_WORDS,
) -> list[Prediction]:
    points, _ = resolve_corpus(corpus, mode, focus_words)
    return [predict(model, vec, record_id=rec.id) for vec, rec in zip(points, corpus.records)]


def evaluate(
    predictions: Sequence[Prediction], gold: Mapping[str, CategoryLabel]
) -> PrEvaluation:
    """Category-strict precision/recall against a gold id-to-label map.

    Gold positives are counted over the whole gold map, so sentences the
    classifier never returned still count toward the recall denominator.
    """
    positives = 0
    true_positives = 0
    for pred in predictions:
        if pred.record_id not in gold:
            raise ValueError(f"prediction id {pred.record_id!r} missing from gold labels")
        if pred.label is CategoryLabel.NON_NORMATIVE:
            continue
        positives += 1
        if gold[pred.record_id] == pred.label:
            true_positives += 1
    gold_positives = sum(1 for label in gold.values() if label is not CategoryLabel.NON_NORMATIVE)
    return PrEvaluation.from_counts(positives, true_positives, gold_positives)


def calibrate_gate(
    model: ClassifierModel, queries: Sequence[Sequence[float]], thresholds: Sequence[float]
) -> list[tuple[float, int]]:
    """Positive counts per candidate gate threshold, for picking one empirically."""
    sims = [cosine_similarity(np.asarray(q, dtype=np.float64), model.centroid) for q in queries]
    return [(t, sum(1 for s in sims if s >= t)) for t in thresholds]


def model_to_dict(model: ClassifierModel) -> dict:
    return {
        "model_id": model.model_id,
        "gate_threshold": model.gate_threshold,
        "k": model.k,
        "centroid": [float(x) for x in model.centroid],
        "training": [
            {"vector": [float(x) for x in vec], "label": label.value}
            for vec, label in zip(model.vectors, model.labels)
        ],
    }


def model_from_dict(obj: dict) -> ClassifierModel:
    try:
        samples = [
            (entry["vector"], CategoryLabel(entry["label"])) for entry in obj["training"]
        ]
        model = fit(
            samples,
            gate_threshold=float(obj["gate_threshold"]),
            k=int(obj["k"]),
            model_id=str(obj.get("model_id", "")),
        )
        model.centroid = np.asarray(obj["centroid"], dtype=np.float64)
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed classifier model: {exc}") from None
    if model.centroid.shape != model.vectors[0].shape:
        raise ValueError("stored centroid dimension does not match training vectors")
    return model


def save_model(model: ClassifierModel, path: Union[str, Path]) -> None:
    Path(path).write_text(json.dumps(model_to_dict(model), ensure_ascii=False, indent=2) + "\n", encoding="utf-8")


def load_model(path: Union[str, Path]) -> ClassifierModel:
    return model_from_dict(json.loads(Path(path).read_text(encoding="utf-8")))
