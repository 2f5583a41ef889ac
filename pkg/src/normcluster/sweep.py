"""Configuration-grid generation, sweep execution and result ranking.

A sweep spec names embedding models (with a family tag), the DBSCAN and
k-means parameter lists and a master seed. Word-family models contribute
two embedding sources (focus word and token mean); sentence-family models
(sbert or classical) contribute one. The grid is the cross product of
sources and algorithm parameterizations, DBSCAN block first. Every run is
isolated: a degenerate configuration records a failure marker instead of
aborting the sweep.
"""

from __future__ import annotations

import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from time import perf_counter
from typing import Mapping, Optional, Sequence

from .clustering import ClusterAssignment, DbscanParams, KMeansParams, dbscan, kmeans
from .corpus import Corpus, ExtractionMode, FocusWordList, DEFAULT_FOCUS_WORDS, resolve_corpus
from .homogeneity import AwhScore, CompositionRow, NoClustersError, awh, composition_report

logger = logging.getLogger(__name__)

MODEL_FAMILIES = ("word", "sbert", "classical")

#: Embedding sources contributed by one model, per family.
FAMILY_MODES: dict[str, tuple[ExtractionMode, ...]] = {
    "word": (ExtractionMode.FOCUS_WORD, ExtractionMode.TOKEN_MEAN),
    "sbert": (ExtractionMode.SENTENCE_DIRECT,),
    "classical": (ExtractionMode.SENTENCE_DIRECT,),
}


@dataclass(frozen=True)
class ModelSpec:
    model_id: str
    family: str

    def __post_init__(self):
        if self.family not in MODEL_FAMILIES:
            raise ValueError(f"unknown model family {self.family!r} (expected one of {MODEL_FAMILIES})")


@dataclass
class SweepSpec:
    models: list[ModelSpec]
    dbscan_eps: list[float] = field(default_factory=list)
    dbscan_min_members: list[int] = field(default_factory=list)
    kmeans_k: list[int] = field(default_factory=list)
    kmeans_restarts: int = 10
    kmeans_max_iter: int = 300
    kmeans_tol: float = 1e-4
    master_seed: int = 0
    workers: int = 1
    focus_words: Optional[FocusWordList] = None

    @classmethod
    def from_dict(cls, obj: dict) -> "SweepSpec":
        if not isinstance(obj.get("models"), list) or not obj["models"]:
            raise ValueError("sweep spec needs a non-empty 'models' list")
        models = []
        for m in obj["models"]:
            if not isinstance(m, dict) or "id" not in m or "family" not in m:
                raise ValueError("each model needs 'id' and 'family'")
            models.append(ModelSpec(model_id=str(m["id"]), family=str(m["family"])))

        spec = cls(models=models)
        if "dbscan" in obj and obj["dbscan"] is not None:
            section = obj["dbscan"]
            spec.dbscan_eps = [float(e) for e in section.get("eps", [])]
            spec.dbscan_min_members = [int(m) for m in section.get("min_members", [])]
            if not spec.dbscan_eps or not spec.dbscan_min_members:
                raise ValueError("dbscan section must list eps and min_members values")
        if "kmeans" in obj and obj["kmeans"] is not None:
            section = obj["kmeans"]
            spec.kmeans_k = [int(k) for k in section.get("k", [])]
            if not spec.kmeans_k:
                raise ValueError("kmeans section must list k values")
            spec.kmeans_restarts = int(section.get("restarts", spec.kmeans_restarts))
            spec.kmeans_max_iter = int(section.get("max_iter", spec.kmeans_max_iter))
            spec.kmeans_tol = float(section.get("tol", spec.kmeans_tol))
        if not spec.dbscan_eps and not spec.kmeans_k:
            raise ValueError("sweep spec configures neither dbscan nor kmeans")
        spec.master_seed = int(obj.get("master_seed", 0))
        spec.workers = int(obj.get("workers", 1))
        if obj.get("focus_words"):
            spec.focus_words = FocusWordList(obj["focus_words"])
        return spec

    @classmethod
    def from_json(cls, text: str) -> "SweepSpec":
        return cls.from_dict(json.loads(text))

    def sources(self) -> list[tuple[str, ExtractionMode]]:
        return [(m.model_id, mode) for m in self.models for mode in FAMILY_MODES[m.family]]


@dataclass(frozen=True)
class RunConfig:
    algorithm: str  # "kmeans" | "dbscan"
    model_id: str
    mode: ExtractionMode
    kmeans_params: Optional[KMeansParams] = None
    dbscan_params: Optional[DbscanParams] = None

    def param_string(self) -> str:
        if self.algorithm == "kmeans":
            return f"k={self.kmeans_params.k}"
        return f"eps={self.dbscan_params.eps:g},min_members={self.dbscan_params.min_members}"

    def params_dict(self) -> dict:
        if self.algorithm == "kmeans":
            p = self.kmeans_params
            return {"k": p.k, "seed": p.seed, "restarts": p.restarts, "max_iter": p.max_iter, "tol": p.tol}
        p = self.dbscan_params
        return {"eps": p.eps, "min_members": p.min_members}


@dataclass
class RunResult:
    index: int
    config: RunConfig
    score: Optional[AwhScore] = None
    failure: Optional[str] = None
    composition: Optional[list[CompositionRow]] = None
    assignment: Optional[ClusterAssignment] = None
    focus_fallbacks: int = 0
    wall_time: float = 0.0


def grid_counts(spec: SweepSpec) -> tuple[int, int, int]:
    """Analytic (total, dbscan, kmeans) config counts for a spec."""
    n_sources = len(spec.sources())
    n_dbscan = n_sources * len(spec.dbscan_eps) * len(spec.dbscan_min_members)
    n_kmeans = n_sources * len(spec.kmeans_k)
    return n_dbscan + n_kmeans, n_dbscan, n_kmeans


def generate_grid(spec: SweepSpec) -> list[RunConfig]:
    """Enumerate the full cross product, DBSCAN block before k-means.

    k-means seeds derive from the master seed plus the config's grid
    position, so runs are independent yet reproducible.
    """
    configs: list[RunConfig] = []
    sources = spec.sources()
    for model_id, mode in sources:
        for eps in spec.dbscan_eps:
            for min_members in spec.dbscan_min_members:
                configs.append(
                    RunConfig(
                        algorithm="dbscan",
                        model_id=model_id,
                        mode=mode,
                        dbscan_params=DbscanParams(eps=eps, min_members=min_members),
                    )
                )
    for model_id, mode in sources:
        for k in spec.kmeans_k:
            configs.append(
                RunConfig(
                    algorithm="kmeans",
                    model_id=model_id,
                    mode=mode,
                    kmeans_params=KMeansParams(
                        k=k,
                        seed=spec.master_seed + len(configs),
                        restarts=spec.kmeans_restarts,
                        max_iter=spec.kmeans_max_iter,
                        tol=spec.kmeans_tol,
                    ),
                )
            )
    return configs


def _run_one(index: int, config: RunConfig, corpus: Corpus, words: FocusWordList) -> RunResult:
    start = perf_counter()
    result = RunResult(index=index, config=config)
    try:
        labels = corpus.labels()
        if any(l is None for l in labels):
            raise ValueError(f"corpus for {config.model_id!r} has unlabeled records")
        points, fallback_ids = resolve_corpus(corpus, config.mode, words)
        result.focus_fallbacks = len(fallback_ids)
        if config.algorithm == "kmeans":
            assignment = kmeans(points, config.kmeans_params)
        else:
            assignment = dbscan(points, config.dbscan_params)
        result.assignment = assignment
        result.score = awh(assignment, labels)
        result.composition = composition_report(assignment, labels)
    except NoClustersError:
        result.failure = "all points are noise"
    except Exception as exc:  # record, never abort the sweep
        result.failure = f"{type(exc).__name__}: {exc}"
    result.wall_time = perf_counter() - start
    return result


def run_sweep(
    corpora: Mapping[str, Corpus],
    grid: Sequence[RunConfig],
    workers: int = 1,
    focus_words: Optional[FocusWordList] = None,
) -> list[RunResult]:
    """Execute every config; results keep grid order regardless of scheduling."""
    missing = sorted({cfg.model_id for cfg in grid} - set(corpora))
    if missing:
        raise ValueError(f"no corpus provided for model(s): {', '.join(missing)}")
    words = focus_words or DEFAULT_FOCUS_WORDS
    jobs = [(i, cfg, corpora[cfg.model_id]) for i, cfg in enumerate(grid)]
    if workers <= 1:
        results = [_run_one(i, cfg, corpus, words) for i, cfg, corpus in jobs]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda job: _run_one(job[0], job[1], job[2], words), jobs))
    failed = sum(1 for r in results if r.failure)
    logger.info("sweep finished: %d runs, %d failures", len(results), failed)
    return results


def summarize(result: RunResult) -> dict:
    """Flat, JSON-ready summary of one run (stable key order).

    Wall time is kept off the summary so results files are byte-identical
    across reruns with the same seed.
    """
    cfg = result.config
    params = cfg.params_dict()
    params.pop("seed", None)
    return {
        "index": result.index,
        "algorithm": cfg.algorithm,
        "model_id": cfg.model_id,
        "mode": cfg.mode.value,
        "params": params,
        "score": result.score.value if result.score else None,
        "n_clusters": result.score.n_clusters if result.score else None,
        "n_samples": result.score.n_samples if result.score else None,
        "focus_fallbacks": result.focus_fallbacks,
        "failure": result.failure,
    }


def results_jsonl(results: Sequence[RunResult]) -> str:
    return "".join(json.dumps(summarize(r), ensure_ascii=False) + "\n" for r in results)


def _params_string(row: dict) -> str:
    params = row["params"]
    if row["algorithm"] == "kmeans":
        return f"k={params['k']}"
    return f"eps={params['eps']:g},min_members={params['min_members']}"


def rank_rows(rows: Sequence[dict], top_n: Optional[int] = None) -> list[dict]:
    """Filter out failures, sort by score descending, truncate to top_n.

    Ties order by (algorithm, model_id, mode, params, index) ascending so
    rankings are deterministic.
    """
    scored = [r for r in rows if r.get("failure") is None and r.get("score") is not None]
    scored.sort(
        key=lambda r: (-r["score"], r["algorithm"], r["model_id"], r["mode"], _params_string(r), r["index"])
    )
    if top_n is not None:
        scored = scored[:top_n]
    return scored


def rank_results(results: Sequence[RunResult], top_n: Optional[int] = None) -> list[RunResult]:
    by_index = {r.index: r for r in results}
    ranked = rank_rows([summarize(r) for r in results], top_n)
    return [by_index[row["index"]] for row in ranked]


def chart_tsv(ranked_rows: Sequence[dict]) -> str:
    """Tabular data behind a top-N bar chart; one row per ranked run."""
    lines = ["\t".join(["rank", "model_id", "mode", "algorithm", "params", "score"])]
    for rank, row in enumerate(ranked_rows, start=1):
        lines.append(
            "\t".join(
                [
                    str(rank),
                    row["model_id"],
                    row["mode"],
                    row["algorithm"],
                    _params_string(row),
                    f"{row['score']:.6g}",
                ]
            )
        )
    return "".join(line + "\n" for line in lines)
