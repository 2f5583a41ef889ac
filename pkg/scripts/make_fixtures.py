#!/usr/bin/env python3
"""Regenerate the committed test fixtures under tests/fixtures/.

Everything is seeded, so reruns are byte-identical. The script asserts the
properties the test suite relies on (segment count, sweep winner, gate
pass count) before writing, so a broken regeneration fails loudly.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from normcluster import (
    CategoryLabel,
    EmbeddingRecord,
    ExtractionMode,
    SweepSpec,
    Token,
    fit_from_corpus,
    generate_grid,
    mine,
    parse_corpus,
    rank_results,
    resolve_corpus,
    run_sweep,
    segment,
    write_corpus,
)

FIXTURES = Path(__file__).resolve().parent.parent / "tests" / "fixtures"

DIM = 16
CATEGORIES = [
    CategoryLabel.DEONTOLOGICAL,
    CategoryLabel.RAWLSIAN,
    CategoryLabel.PROCEDURAL,
    CategoryLabel.LIBERTARIAN,
]

SENTENCES = {
    CategoryLabel.DEONTOLOGICAL: [
        "It is just to tax citizens with equal income equally.",
        "A fair tax treats every person with the same earnings alike.",
        "Taxing equals unequally violates a basic moral duty.",
        "Equal treatment before the tax law is a moral requirement.",
        "Justice demands that taxation respect the equality of persons.",
        "A tax that singles out some earners is morally wrong.",
        "The tax code must honour the moral equality of all taxpayers.",
        "Morally, identical incomes deserve identical tax burdens.",
        "It is unjust to tax two equal earners differently.",
        "Respect for persons forbids arbitrary tax distinctions.",
    ],
    CategoryLabel.RAWLSIAN: [
        "A just tax system redistributes wealth toward the least advantaged.",
        "Taxation is fair when it would be chosen behind a veil of ignorance.",
        "Tax policy should maximize the position of the worst off.",
        "Redistribution from rich to poor is the core duty of taxation.",
        "A fair income tax narrows the gap between rich and poor.",
        "Progressive taxation is required to protect the disadvantaged.",
        "The tax system is just only if the poorest would endorse it unknowingly.",
        "Taxes should fund strong redistribution toward those with least.",
        "Behind the veil, rational agents pick redistributive tax schemes.",
        "Income taxation must serve the least favoured members of society.",
    ],
    CategoryLabel.PROCEDURAL: [
        "Tax rules are legitimate when they emerge from democratic debate.",
        "Taxation should result from open parliamentary deliberation.",
        "A tax bill is just if fair procedures produced it.",
        "Public reasoning about tax proposals grounds their authority.",
        "Democratic process, not outcome, legitimates the tax code.",
        "Tax policy gains legitimacy through inclusive consultation.",
        "Only openly debated tax reforms deserve public acceptance.",
        "The justice of taxation rests on the fairness of its adoption process.",
        "Citizens owe taxes because the rules passed a legitimate vote.",
        "Deliberative bodies should settle how income is taxed.",
    ],
    CategoryLabel.LIBERTARIAN: [
        "Taxation should be kept to the minimum necessary.",
        "Most taxes are an illegitimate taking of private property.",
        "Income tax beyond basic funding of courts is unjustified.",
        "A minimal state needs only minimal taxation.",
        "Compulsory taxes infringe the liberty of owners.",
        "Taxing voluntary exchanges is rarely legitimate.",
        "Property rights sharply limit what taxation may claim.",
        "The smallest possible tax burden is the only just burden.",
        "Redistribution through taxes violates individual entitlement.",
        "People should keep what they earn; taxation must stay minimal.",
    ],
}

# three toy-word records deliberately carry no cue word, so the focus-word
# routine has to fall back to the token mean for them
NO_CUE_TEXTS = {
    (CategoryLabel.PROCEDURAL, 4): "Open debate legitimates public levies.",
    (CategoryLabel.PROCEDURAL, 6): "Fair procedures ground fiscal authority.",
    (CategoryLabel.LIBERTARIAN, 3): "A minimal state funds only courts and defence.",
}

FILLERS = [
    "The committee reviewed the draft statute in its {} session.",
    "Parliament heard testimony from {} industry witnesses.",
    "The report compares filing volumes across {} provinces.",
    "Auditors published the {} quarterly compliance summary.",
    "The working group tabled amendment number {}.",
    "Officials summarized enforcement statistics for year {}.",
    "The schedule lists {} exempt transaction classes.",
    "Delegates debated the timetable for another {} weeks.",
    "The annex reproduces form {} without commentary.",
    "Researchers catalogued {} historical rate changes.",
]

NORMATIVE_POSITIONS = {
    4: (CategoryLabel.RAWLSIAN, 1),
    12: (CategoryLabel.DEONTOLOGICAL, 0),
    23: (CategoryLabel.PROCEDURAL, 1),
    31: (CategoryLabel.LIBERTARIAN, 0),
    40: (CategoryLabel.RAWLSIAN, 2),
    49: (CategoryLabel.PROCEDURAL, 3),
}

PARAGRAPH_SIZES = [5, 4, 6, 5, 7, 4, 5, 6, 5, 8]

SBERT_MODELS = [
    "paraphrase-TinyBERT-L6-v2",
    "paraphrase-distilroberta-base-v2",
    "paraphrase-mpnet-base-v2",
    "paraphrase-multilingual-mpnet-base-v2",
    "paraphrase-MiniLM-L12-v2",
    "paraphrase-MiniLM-L6-v2",
    "paraphrase-albert-small-v2",
    "paraphrase-multilingual-MiniLM-L12-v2",
    "paraphrase-MiniLM-L3-v2",
    "nli-mpnet-base-v2",
    "nli-roberta-base-v2",
    "nli-distilroberta-base-v2",
    "distiluse-base-multilingual-cased-v1",
    "stsb-mpnet-base-v2",
    "stsb-distilroberta-base-v2",
    "distiluse-base-multilingual-cased-v2",
    "stsb-roberta-base-v2",
]
WORD_MODELS = ["bert-base-cased", "bert-large-cased", "roberta-large"]
CLASSICAL_MODELS = ["average_word_embeddings_glove.6B.300d", "average_word_embeddings_komninos"]


def _round(vec) -> list[float]:
    return [round(float(x), 6) for x in vec]


def _cluster_center(i: int) -> np.ndarray:
    center = np.zeros(DIM)
    center[4 * i] = 60.0
    return center


def _gate_center(i: int) -> np.ndarray:
    center = np.zeros(DIM)
    center[15] = 20.0
    center[i] = 8.0
    return center


def _tokenize(text: str) -> list[str]:
    return [w.strip(".,;:!?" + "’") for w in text.split() if w.strip(".,;:!?")]


def make_sentence_corpus(rng) -> list[EmbeddingRecord]:
    records = []
    for i, category in enumerate(CATEGORIES):
        for j, text in enumerate(SENTENCES[category]):
            vec = _cluster_center(i) + rng.normal(0.0, 2.0, DIM)
            records.append(
                EmbeddingRecord(
                    id=f"sb{i * 10 + j:02d}",
                    text=text,
                    model_id="toy-sbert",
                    sentence_vector=tuple(_round(vec)),
                    label=category,
                )
            )
    return records


def make_word_corpus(rng) -> list[EmbeddingRecord]:
    records = []
    for i, category in enumerate(CATEGORIES):
        for j in range(10):
            text = NO_CUE_TEXTS.get((category, j), SENTENCES[category][j])
            words = _tokenize(text)
            tokens = tuple(
                Token(word, tuple(_round(_cluster_center(i) + rng.normal(0.0, 8.0, DIM))))
                for word in words
            )
            records.append(
                EmbeddingRecord(
                    id=f"wb{i * 10 + j:02d}",
                    text=text,
                    model_id="toy-word",
                    tokens=tokens,
                    label=category,
                )
            )
    return records


def make_gate_corpus(rng) -> list[EmbeddingRecord]:
    records = []
    for i, category in enumerate(CATEGORIES):
        for j, text in enumerate(SENTENCES[category]):
            vec = _gate_center(i) + rng.normal(0.0, 1.0, DIM)
            records.append(
                EmbeddingRecord(
                    id=f"tr{i * 10 + j:02d}",
                    text=text,
                    model_id="toy-gate",
                    sentence_vector=tuple(_round(vec)),
                    label=category,
                )
            )
    return records


def make_article() -> str:
    sentences = []
    filler_idx = 0
    for position in range(55):
        if position in NORMATIVE_POSITIONS:
            category, variant = NORMATIVE_POSITIONS[position]
            sentences.append(SENTENCES[category][variant])
        else:
            template = FILLERS[filler_idx % len(FILLERS)]
            sentences.append(template.format(filler_idx + 1))
            filler_idx += 1
    paragraphs = []
    cursor = 0
    for size in PARAGRAPH_SIZES:
        paragraphs.append(" ".join(sentences[cursor : cursor + size]))
        cursor += size
    assert cursor == 55
    return "\n\n".join(paragraphs) + "\n"


def make_article_embeddings(doc, rng) -> list[EmbeddingRecord]:
    records = []
    for position, sentence in enumerate(doc.sentences):
        if position in NORMATIVE_POSITIONS:
            category, _ = NORMATIVE_POSITIONS[position]
            vec = _gate_center(CATEGORIES.index(category)) + rng.normal(0.0, 1.0, DIM)
        else:
            vec = np.zeros(DIM)
            vec[4:14] = rng.normal(0.0, 4.0, 10)
            if np.linalg.norm(vec) == 0.0:
                vec[4] = 1.0
        records.append(
            EmbeddingRecord(
                id=sentence.sentence_id,
                text=sentence.text,
                model_id="toy-gate",
                sentence_vector=tuple(_round(vec)),
                source_doc=doc.doc_id,
            )
        )
    return records


def sweep_fixture_spec() -> dict:
    return {
        "models": [
            {"id": "toy-sbert", "family": "sbert"},
            {"id": "toy-word", "family": "word"},
        ],
        "dbscan": {"eps": [2.0, 2.5, 3.0, 3.5, 4.0, 4.5, 5.0, 5.5, 6.0, 6.5, 7.0], "min_members": [2, 3, 4]},
        "kmeans": {"k": [4, 5]},
        "master_seed": 7,
        "workers": 1,
    }


def sweep_full_spec() -> dict:
    models = [{"id": m, "family": "word"} for m in WORD_MODELS]
    models += [{"id": m, "family": "sbert"} for m in SBERT_MODELS]
    models += [{"id": m, "family": "classical"} for m in CLASSICAL_MODELS]
    return {
        "models": models,
        "dbscan": {"eps": [2.0, 2.5, 3.0, 3.5, 4.0, 4.5, 5.0, 5.5, 6.0, 6.5, 7.0], "min_members": [2, 3, 4]},
        "kmeans": {"k": [4, 5]},
        "master_seed": 0,
        "workers": 1,
    }


def evaluation_fixture() -> tuple[list[dict], dict]:
    # 3 positives, 2 true positives, 3 gold positives -> 0.67/0.67
    predictions = [
        {"record_id": "q1", "label": "Rawlsian", "gate_similarity": 0.91, "neighbor_ids": [0, 1, 2]},
        {"record_id": "q2", "label": "Procedural", "gate_similarity": 0.84, "neighbor_ids": [3, 4, 5]},
        {"record_id": "q3", "label": "Deontological", "gate_similarity": 0.71, "neighbor_ids": [6, 7, 8]},
        {"record_id": "q4", "label": "NonNormative", "gate_similarity": 0.41, "neighbor_ids": []},
        {"record_id": "q5", "label": "NonNormative", "gate_similarity": 0.22, "neighbor_ids": []},
    ]
    gold = {
        "q1": "Rawlsian",
        "q2": "Procedural",
        "q3": "NonNormative",
        "q4": "Libertarian",
        "q5": "NonNormative",
    }
    return predictions, gold


def main() -> None:
    FIXTURES.mkdir(parents=True, exist_ok=True)
    (FIXTURES / "corpora").mkdir(exist_ok=True)

    rng = np.random.default_rng(20210813)
    sentence_records = make_sentence_corpus(rng)
    word_records = make_word_corpus(rng)
    gate_records = make_gate_corpus(rng)

    article_text = make_article()
    doc = segment(article_text, "article-1")
    assert len(doc.sentences) == 55, f"expected 55 sentences, got {len(doc.sentences)}"
    texts = [s.text for s in doc.sentences]
    for position, (category, variant) in NORMATIVE_POSITIONS.items():
        assert texts[position] == SENTENCES[category][variant]

    article_records = make_article_embeddings(doc, rng)

    write_corpus(sentence_records, FIXTURES / "corpora" / "toy-sbert.jsonl")
    write_corpus(word_records, FIXTURES / "corpora" / "toy-word.jsonl")
    write_corpus(gate_records, FIXTURES / "train_gate.jsonl")
    (FIXTURES / "article.txt").write_text(article_text, encoding="utf-8", newline="\n")
    write_corpus(article_records, FIXTURES / "article_embeddings.jsonl")

    gold = {}
    for position, sentence in enumerate(doc.sentences):
        if position in NORMATIVE_POSITIONS:
            gold[sentence.sentence_id] = NORMATIVE_POSITIONS[position][0].value
        else:
            gold[sentence.sentence_id] = CategoryLabel.NON_NORMATIVE.value
    (FIXTURES / "gold_article.json").write_text(
        json.dumps(gold, indent=2) + "\n", encoding="utf-8", newline="\n"
    )

    (FIXTURES / "sweep_fixture.json").write_text(
        json.dumps(sweep_fixture_spec(), indent=2) + "\n", encoding="utf-8", newline="\n"
    )
    (FIXTURES / "sweep_full.json").write_text(
        json.dumps(sweep_full_spec(), indent=2) + "\n", encoding="utf-8", newline="\n"
    )

    predictions, eval_gold = evaluation_fixture()
    (FIXTURES / "predictions_art1.jsonl").write_text(
        "".join(json.dumps(p) + "\n" for p in predictions), encoding="utf-8", newline="\n"
    )
    (FIXTURES / "gold_art1.json").write_text(
        json.dumps(eval_gold, indent=2) + "\n", encoding="utf-8", newline="\n"
    )

    # --- sanity: the committed fixtures support the acceptance criteria ----
    spec = SweepSpec.from_dict(sweep_fixture_spec())
    corpora = {
        "toy-sbert": parse_corpus((FIXTURES / "corpora" / "toy-sbert.jsonl").read_text()),
        "toy-word": parse_corpus((FIXTURES / "corpora" / "toy-word.jsonl").read_text()),
    }
    results = run_sweep(corpora, generate_grid(spec))
    top = rank_results(results, 5)
    assert top, "fixture sweep produced no scored runs"
    best = top[0]
    assert best.config.algorithm == "kmeans" and best.config.kmeans_params.k == 4, best.config
    assert best.score.value >= 0.2, best.score
    majorities = [row.majority for row in best.composition if row.cluster_id is not None]
    assert sorted(m.value for m in majorities) == sorted(c.value for c in CATEGORIES)

    gate_corpus = parse_corpus((FIXTURES / "train_gate.jsonl").read_text())
    model = fit_from_corpus(gate_corpus, ExtractionMode.SENTENCE_DIRECT)
    article_corpus = parse_corpus((FIXTURES / "article_embeddings.jsonl").read_text())
    points, _ = resolve_corpus(article_corpus, ExtractionMode.SENTENCE_DIRECT)
    embeddings = {r.id: v for r, v in zip(article_corpus.records, points)}
    batch = mine(model, doc, embeddings)
    assert len(batch.entries) == len(NORMATIVE_POSITIONS), f"{len(batch.entries)} gate passes"
    predicted = {e.sentence_id: e.predicted for e in batch.entries}
    for position, (category, _) in NORMATIVE_POSITIONS.items():
        sid = doc.sentences[position].sentence_id
        assert predicted[sid] is category, (sid, predicted[sid], category)

    print(f"fixtures written to {FIXTURES}")
    print(f"sweep fixture: {len(results)} runs, best {best.config.param_string()} "
          f"{best.config.model_id}/{best.config.mode.value} awh={best.score.value:.4f}")


if __name__ == "__main__":
    main()
