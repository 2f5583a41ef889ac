import itertools
import json

import numpy as np
import pytest

from normcluster.corpus import CATEGORY_LABELS, Corpus, EmbeddingRecord, ExtractionMode
from normcluster.sweep import (
    ModelSpec,
    SweepSpec,
    chart_tsv,
    generate_grid,
    grid_counts,
    rank_results,
    rank_rows,
    results_jsonl,
    run_sweep,
    summarize,
)


def small_corpus(model_id: str, centers_scale=10.0, n_per=3, dim=4, seed=0) -> Corpus:
    """Tiny labeled sentence corpus with one blob per category."""
    rng = np.random.default_rng(seed)
    records = []
    for i, category in enumerate(CATEGORY_LABELS):
        center = np.zeros(dim)
        center[i % dim] = centers_scale
        for j in range(n_per):
            vec = center + rng.normal(0.0, 0.3, dim)
            records.append(
                EmbeddingRecord(
                    id=f"{model_id}-{i}-{j}",
                    text="x",
                    model_id=model_id,
                    sentence_vector=tuple(float(v) for v in vec),
                    label=category,
                )
            )
    return Corpus(records=records, dim=dim)


def spec_of(models, dbscan=None, kmeans=None, **kw) -> SweepSpec:
    obj = {"models": models}
    if dbscan:
        obj["dbscan"] = dbscan
    if kmeans:
        obj["kmeans"] = kmeans
    obj.update(kw)
    return SweepSpec.from_dict(obj)


# --- grid generation ------------------------------------------------------------


def test_reference_grid_counts(full_sweep_spec):
    spec = SweepSpec.from_dict(full_sweep_spec)
    total, n_dbscan, n_kmeans = grid_counts(spec)
    assert (total, n_dbscan, n_kmeans) == (875, 825, 50)
    grid = generate_grid(spec)
    assert len(grid) == 875
    assert sum(1 for c in grid if c.algorithm == "dbscan") == 825
    assert sum(1 for c in grid if c.algorithm == "kmeans") == 50


def test_reference_grid_source_count(full_sweep_spec):
    spec = SweepSpec.from_dict(full_sweep_spec)
    # 3 word models x 2 modes + 17 sbert + 2 classical = 25 embedding sources
    assert len(spec.sources()) == 25


def test_singleton_grid():
    spec = spec_of([{"id": "m", "family": "sbert"}], kmeans={"k": [4]})
    grid = generate_grid(spec)
    assert len(grid) == 1
    assert grid[0].algorithm == "kmeans"
    assert grid[0].mode is ExtractionMode.SENTENCE_DIRECT


def test_grid_cross_product_count():
    spec = spec_of(
        [{"id": "a", "family": "sbert"}, {"id": "b", "family": "classical"}],
        dbscan={"eps": [1.0, 2.0], "min_members": [2, 3]},
    )
    grid = generate_grid(spec)
    expected = len(list(itertools.product(["a", "b"], [1.0, 2.0], [2, 3])))
    assert len(grid) == expected == 8


@pytest.mark.parametrize(
    "families,n_eps,n_mm,n_k",
    [(["word"], 3, 2, 2), (["word", "sbert"], 1, 1, 1), (["sbert", "classical", "word"], 4, 3, 0)],
)
def test_grid_size_matches_formula(families, n_eps, n_mm, n_k):
    models = [{"id": f"m{i}", "family": fam} for i, fam in enumerate(families)]
    sources = sum(2 if f == "word" else 1 for f in families)
    spec = spec_of(
        models,
        dbscan={"eps": [float(i + 1) for i in range(n_eps)], "min_members": list(range(2, 2 + n_mm))}
        if n_eps
        else None,
        kmeans={"k": list(range(2, 2 + n_k))} if n_k else None,
    )
    assert len(generate_grid(spec)) == sources * (n_eps * n_mm + n_k)


def test_kmeans_seeds_derive_from_master_seed():
    spec = spec_of([{"id": "m", "family": "sbert"}], kmeans={"k": [4, 5]}, master_seed=100)
    grid = generate_grid(spec)
    assert [c.kmeans_params.seed for c in grid] == [100, 101]


def test_spec_validation_errors():
    with pytest.raises(ValueError, match="models"):
        SweepSpec.from_dict({"models": []})
    with pytest.raises(ValueError, match="eps"):
        spec_of([{"id": "m", "family": "sbert"}], dbscan={"eps": [], "min_members": [2]})
    with pytest.raises(ValueError, match="k values"):
        spec_of([{"id": "m", "family": "sbert"}], kmeans={"k": []})
    with pytest.raises(ValueError, match="neither"):
        spec_of([{"id": "m", "family": "sbert"}])
    with pytest.raises(ValueError, match="family"):
        ModelSpec(model_id="m", family="huge")


# --- sweep execution --------------------------------------------------------------


def test_run_sweep_single_kmeans_config():
    spec = spec_of([{"id": "m", "family": "sbert"}], kmeans={"k": [4]})
    results = run_sweep({"m": small_corpus("m")}, generate_grid(spec))
    assert len(results) == 1
    score = results[0].score
    assert score is not None
    assert 0.0 < score.value <= 0.25


def test_run_sweep_records_all_noise_failure_and_continues():
    spec = spec_of(
        [{"id": "m", "family": "sbert"}],
        dbscan={"eps": [0.001], "min_members": [2]},
        kmeans={"k": [4]},
    )
    results = run_sweep({"m": small_corpus("m")}, generate_grid(spec))
    assert len(results) == 2
    assert results[0].failure == "all points are noise"
    assert results[0].score is None
    assert results[1].score is not None


def test_run_sweep_preflight_missing_corpus():
    spec = spec_of([{"id": "m", "family": "sbert"}, {"id": "n", "family": "sbert"}], kmeans={"k": [2]})
    with pytest.raises(ValueError, match="no corpus provided.*n"):
        run_sweep({"m": small_corpus("m")}, generate_grid(spec))


def test_run_sweep_unlabeled_corpus_marks_failure():
    corpus = small_corpus("m")
    records = [
        EmbeddingRecord(id=r.id, text=r.text, model_id=r.model_id, sentence_vector=r.sentence_vector)
        for r in corpus.records
    ]
    spec = spec_of([{"id": "m", "family": "sbert"}], kmeans={"k": [2]})
    results = run_sweep({"m": Corpus(records=records, dim=corpus.dim)}, generate_grid(spec))
    assert results[0].failure is not None
    assert "unlabeled" in results[0].failure


def test_run_sweep_deterministic_and_worker_invariant():
    spec = spec_of(
        [{"id": "m", "family": "sbert"}],
        dbscan={"eps": [0.5, 5.0], "min_members": [2]},
        kmeans={"k": [2, 4]},
        master_seed=11,
    )
    corpora = {"m": small_corpus("m")}
    grid = generate_grid(spec)
    first = results_jsonl(run_sweep(corpora, grid, workers=1))
    second = results_jsonl(run_sweep(corpora, grid, workers=1))
    parallel = results_jsonl(run_sweep(corpora, grid, workers=4))
    assert first == second == parallel


def test_full_grid_run_counts(full_sweep_spec):
    spec = SweepSpec.from_dict(full_sweep_spec)
    grid = generate_grid(spec)
    corpora = {}
    for i, model in enumerate(spec.models):
        corpus = small_corpus(model.model_id, seed=i)
        if model.family == "word":
            # word models need token-bearing records
            from normcluster.corpus import Token

            corpus = Corpus(
                records=[
                    EmbeddingRecord(
                        id=r.id,
                        text="tax now",
                        model_id=r.model_id,
                        tokens=(Token("tax", r.sentence_vector), Token("now", r.sentence_vector)),
                        label=r.label,
                    )
                    for r in corpus.records
                ],
                dim=corpus.dim,
            )
        corpora[model.model_id] = corpus
    results = run_sweep(corpora, grid, workers=8)
    assert len(results) == 875
    assert [r.index for r in results] == list(range(875))
    by_algo = {"dbscan": 0, "kmeans": 0}
    for r in results:
        by_algo[r.config.algorithm] += 1
    assert by_algo == {"dbscan": 825, "kmeans": 50}


# --- ranking -----------------------------------------------------------------------


def _summary(index, algorithm, score, model="m", mode="sentence_direct", failure=None):
    params = {"k": 4} if algorithm == "kmeans" else {"eps": 2.0, "min_members": 2}
    return {
        "index": index,
        "algorithm": algorithm,
        "model_id": model,
        "mode": mode,
        "params": params,
        "score": score,
        "n_clusters": 4 if score else None,
        "n_samples": 40 if score else None,
        "focus_fallbacks": 0,
        "failure": failure,
    }


def test_rank_orders_by_score_descending():
    rows = [_summary(0, "kmeans", 0.1), _summary(1, "dbscan", 0.19), _summary(2, "kmeans", 0.17)]
    ranked = rank_rows(rows, None)
    assert [r["score"] for r in ranked] == [0.19, 0.17, 0.1]


def test_rank_excludes_failures_and_truncates():
    rows = [_summary(i, "kmeans", 0.2 - i * 0.01) for i in range(5)]
    rows.append(_summary(9, "dbscan", None, failure="all points are noise"))
    ranked = rank_rows(rows, 3)
    assert len(ranked) == 3
    assert all(r["failure"] is None for r in ranked)


def test_rank_all_failed_is_empty():
    rows = [_summary(0, "dbscan", None, failure="boom")]
    assert rank_rows(rows, 20) == []


def test_rank_tie_break_is_deterministic():
    rows = [
        _summary(0, "kmeans", 0.25, model="zeta"),
        _summary(1, "kmeans", 0.25, model="alpha"),
        _summary(2, "dbscan", 0.25, model="zeta"),
    ]
    ranked = rank_rows(rows, None)
    assert [(r["algorithm"], r["model_id"]) for r in ranked] == [
        ("dbscan", "zeta"),
        ("kmeans", "alpha"),
        ("kmeans", "zeta"),
    ]


def test_rank_results_wraps_run_results():
    spec = spec_of([{"id": "m", "family": "sbert"}], kmeans={"k": [4, 5]})
    results = run_sweep({"m": small_corpus("m")}, generate_grid(spec))
    ranked = rank_results(results, 1)
    assert len(ranked) == 1
    assert ranked[0].score.value == max(r.score.value for r in results if r.score)


def test_chart_tsv_shape():
    rows = [_summary(0, "kmeans", 0.19), _summary(1, "dbscan", 0.17)]
    text = chart_tsv(rank_rows(rows, 20))
    lines = text.strip().split("\n")
    assert lines[0] == "rank\tmodel_id\tmode\talgorithm\tparams\tscore"
    assert lines[1].split("\t") == ["1", "m", "sentence_direct", "kmeans", "k=4", "0.19"]
    assert lines[2].split("\t")[4] == "eps=2,min_members=2"
    assert chart_tsv([]) .strip().count("\n") == 0  # header only


def test_results_jsonl_round_trip():
    spec = spec_of([{"id": "m", "family": "sbert"}], kmeans={"k": [4]})
    results = run_sweep({"m": small_corpus("m")}, generate_grid(spec))
    lines = results_jsonl(results).strip().split("\n")
    rows = [json.loads(line) for line in lines]
    assert rows == [summarize(r) for r in results]
    assert "wall_time" not in rows[0]
