import math

import numpy as np
import pytest

from normcluster.bootstrap import (
    ReviewBatch,
    ReviewEntry,
    append_rejections,
    load_rejections,
    merge_reviews,
    mine,
    parse_review_tsv,
    review_tsv,
    segment,
)
from normcluster.classifier import fit, fit_from_corpus, predict
from normcluster.corpus import CategoryLabel, ExtractionMode, resolve_corpus

D, R, P, L = (
    CategoryLabel.DEONTOLOGICAL,
    CategoryLabel.RAWLSIAN,
    CategoryLabel.PROCEDURAL,
    CategoryLabel.LIBERTARIAN,
)


# --- segmentation ----------------------------------------------------------------


def test_segment_two_terminals():
    doc = segment("Tax is due. Pay it!", "d")
    assert [s.text for s in doc.sentences] == ["Tax is due.", "Pay it!"]


def test_segment_abbreviation_blocks_split():
    doc = segment("Dr. Smith pays VAT.", "d")
    assert [s.text for s in doc.sentences] == ["Dr. Smith pays VAT."]


def test_segment_single_letter_initial():
    doc = segment("Judge J. Smith ruled. The case closed.", "d")
    assert [s.text for s in doc.sentences] == ["Judge J. Smith ruled.", "The case closed."]


def test_segment_semicolon_and_question():
    doc = segment("Is it just? Hardly; few agree.", "d")
    assert [s.text for s in doc.sentences] == ["Is it just?", "Hardly;", "few agree."]


def test_segment_newline_fragments():
    doc = segment("Capital gains review\nThe rate rose. It fell.", "d")
    assert [s.text for s in doc.sentences] == ["Capital gains review", "The rate rose.", "It fell."]


def test_segment_empty_text():
    assert segment("", "d").sentences == ()
    assert segment("   \n \n", "d").sentences == ()


def test_segment_spans_are_faithful(article_text):
    doc = segment(article_text, "article-1")
    previous_end = -1
    for sentence in doc.sentences:
        assert sentence.start > previous_end
        assert article_text[sentence.start : sentence.end] == sentence.text
        previous_end = sentence.end


def test_segment_ids_unique_and_ordered(article_text):
    doc = segment(article_text, "article-1")
    ids = [s.sentence_id for s in doc.sentences]
    assert len(set(ids)) == len(ids)
    assert ids == sorted(ids)


def test_segment_article_fixture_counts(article_text):
    doc = segment(article_text, "article-1")
    assert len(doc.sentences) == 55


def test_segment_idempotent_on_rejoined_output():
    text = "Tax is due. Pay it! Is that fair? The vote passed; the rate holds."
    first = segment(text, "d")
    rejoined = " ".join(s.text for s in first.sentences)
    second = segment(rejoined, "d")
    assert [s.text for s in first.sentences] == [s.text for s in second.sentences]


def test_segment_abbreviation_mid_document():
    text = "Rates differ, e.g. in provinces. Etc. is not the end here."
    doc = segment(text, "d")
    assert len(doc.sentences) == 2


# --- mining ------------------------------------------------------------------------


def _gate_setup(gate_corpus, article_text, article_embeddings):
    model = fit_from_corpus(gate_corpus, ExtractionMode.SENTENCE_DIRECT)
    doc = segment(article_text, "article-1")
    points, _ = resolve_corpus(article_embeddings, ExtractionMode.SENTENCE_DIRECT)
    embeddings = {r.id: v for r, v in zip(article_embeddings.records, points)}
    return model, doc, embeddings


def test_mine_keeps_only_gate_passers(gate_corpus, article_text, article_embeddings, article_gold):
    model, doc, embeddings = _gate_setup(gate_corpus, article_text, article_embeddings)
    batch = mine(model, doc, embeddings)
    assert len(batch.entries) == 6
    # per-sentence oracle: batch must contain exactly the predicted positives
    expected = {
        s.sentence_id
        for s in doc.sentences
        if predict(model, embeddings[s.sentence_id]).label is not CategoryLabel.NON_NORMATIVE
    }
    assert {e.sentence_id for e in batch.entries} == expected
    for entry in batch.entries:
        assert article_gold[entry.sentence_id] == entry.predicted.value
        assert entry.status == "pending"


def test_mine_orders_by_gate_similarity(gate_corpus, article_text, article_embeddings):
    model, doc, embeddings = _gate_setup(gate_corpus, article_text, article_embeddings)
    sims = [e.gate_similarity for e in mine(model, doc, embeddings).entries]
    assert sims == sorted(sims, reverse=True)


def test_mine_ordering_contract():
    # three crafted embeddings with gate similarities 0.9, 0.7, 0.8
    model = fit([((1.0, 0.0), D), ((0.9, 0.1), R), ((0.9, -0.1), P)], gate_threshold=0.6)
    centroid_angle = math.atan2(model.centroid[1], model.centroid[0])
    def at_cos(c):
        a = centroid_angle + math.acos(c)
        return [math.cos(a), math.sin(a)]
    doc = segment("One. Two. Three.", "d")
    embeddings = {
        "s0001": at_cos(0.9),
        "s0002": at_cos(0.7),
        "s0003": at_cos(0.8),
    }
    batch = mine(model, doc, embeddings)
    assert [e.sentence_id for e in batch.entries] == ["s0001", "s0003", "s0002"]


def test_mine_skips_rejected(gate_corpus, article_text, article_embeddings):
    model, doc, embeddings = _gate_setup(gate_corpus, article_text, article_embeddings)
    first = mine(model, doc, embeddings)
    rejected = {("article-1", first.entries[0].sentence_id)}
    second = mine(model, doc, embeddings, rejected=rejected)
    assert len(second.entries) == 5
    assert first.entries[0].sentence_id not in {e.sentence_id for e in second.entries}


def test_mine_missing_embedding(gate_corpus, article_text, article_embeddings):
    model, doc, embeddings = _gate_setup(gate_corpus, article_text, article_embeddings)
    embeddings.pop(doc.sentences[0].sentence_id)
    with pytest.raises(ValueError, match="no embedding"):
        mine(model, doc, embeddings)


# --- merging -----------------------------------------------------------------------


def _reviewed_batch(batch: ReviewBatch, accept: int, reject: int) -> ReviewBatch:
    entries = []
    for i, entry in enumerate(batch.entries):
        if i < accept:
            entries.append(
                ReviewEntry(
                    **{**entry.__dict__, "status": "accepted", "accepted_label": entry.predicted}
                )
            )
        elif i < accept + reject:
            entries.append(ReviewEntry(**{**entry.__dict__, "status": "rejected"}))
        else:
            entries.append(entry)
    return ReviewBatch(entries=tuple(entries))


def test_merge_counts_and_ledger(gate_corpus, article_text, article_embeddings):
    model, doc, embeddings = _gate_setup(gate_corpus, article_text, article_embeddings)
    batch = _reviewed_batch(mine(model, doc, embeddings), accept=2, reject=4)
    training = [(np.asarray(r.sentence_vector), r.label) for r in gate_corpus.records]
    merged, rejections = merge_reviews(training, batch, embeddings)
    assert len(merged) == 42
    assert len(rejections) == 4
    # originals retained verbatim, in order
    for (vec, label), record in zip(merged[:40], gate_corpus.records):
        assert label is record.label
        assert np.array_equal(vec, np.asarray(record.sentence_vector))


def test_merge_refit_centroid_oracle(gate_corpus, article_text, article_embeddings):
    model, doc, embeddings = _gate_setup(gate_corpus, article_text, article_embeddings)
    batch = _reviewed_batch(mine(model, doc, embeddings), accept=2, reject=4)
    training = [(np.asarray(r.sentence_vector), r.label) for r in gate_corpus.records]
    merged, _ = merge_reviews(training, batch, embeddings)
    refit = fit(merged)
    total = np.zeros(16)
    for vec, _ in merged:
        total += vec
    assert np.allclose(refit.centroid, total / 42, atol=1e-12)


def test_merge_rejects_pending(gate_corpus, article_text, article_embeddings):
    model, doc, embeddings = _gate_setup(gate_corpus, article_text, article_embeddings)
    batch = mine(model, doc, embeddings)
    training = [(np.asarray(r.sentence_vector), r.label) for r in gate_corpus.records]
    with pytest.raises(ValueError, match="pending"):
        merge_reviews(training, batch, embeddings)


def test_merge_requires_embeddings_for_accepted(gate_corpus, article_text, article_embeddings):
    model, doc, embeddings = _gate_setup(gate_corpus, article_text, article_embeddings)
    batch = _reviewed_batch(mine(model, doc, embeddings), accept=6, reject=0)
    embeddings.pop(batch.entries[0].sentence_id)
    training = [(np.asarray(r.sentence_vector), r.label) for r in gate_corpus.records]
    with pytest.raises(ValueError, match="no embedding"):
        merge_reviews(training, batch, embeddings)


def test_remine_after_merge_respects_ledger(tmp_path, gate_corpus, article_text, article_embeddings):
    model, doc, embeddings = _gate_setup(gate_corpus, article_text, article_embeddings)
    batch = _reviewed_batch(mine(model, doc, embeddings), accept=4, reject=2)
    training = [(np.asarray(r.sentence_vector), r.label) for r in gate_corpus.records]
    _, rejections = merge_reviews(training, batch, embeddings)
    ledger = tmp_path / "rejections.jsonl"
    append_rejections(ledger, rejections)
    rejected = load_rejections(ledger)
    assert rejected == set(rejections)
    again = mine(model, doc, embeddings, rejected=rejected)
    assert {e.sentence_id for e in again.entries}.isdisjoint({sid for _, sid in rejections})
    assert len(again.entries) == 4


# --- review file -----------------------------------------------------------------


def test_review_tsv_round_trip(gate_corpus, article_text, article_embeddings):
    model, doc, embeddings = _gate_setup(gate_corpus, article_text, article_embeddings)
    batch = mine(model, doc, embeddings)
    parsed = parse_review_tsv(review_tsv(batch))
    assert [e.sentence_id for e in parsed.entries] == [e.sentence_id for e in batch.entries]
    assert all(e.status == "pending" for e in parsed.entries)
    assert [e.predicted for e in parsed.entries] == [e.predicted for e in batch.entries]


def test_review_tsv_verdict_parsing():
    header = "sentence_id\tdoc_id\ttext\tpredicted_category\tgate_similarity\tverdict"
    body = "\n".join(
        [
            header,
            "s1\td\tTax is due.\tRawlsian\t0.91\taccept:Procedural",
            "s2\td\tPay it.\tRawlsian\t0.88\treject",
            "s3\td\tMore text.\tProcedural\t0.7\t",
        ]
    )
    batch = parse_review_tsv(body)
    assert batch.entries[0].status == "accepted"
    assert batch.entries[0].accepted_label is P
    assert batch.entries[1].status == "rejected"
    assert batch.entries[2].status == "pending"


def test_review_tsv_bad_verdicts():
    header = "sentence_id\tdoc_id\ttext\tpredicted_category\tgate_similarity\tverdict"
    with pytest.raises(ValueError, match="bad verdict"):
        parse_review_tsv(header + "\ns1\td\tx\tRawlsian\t0.9\tmaybe")
    with pytest.raises(ValueError, match="NonNormative"):
        parse_review_tsv(header + "\ns1\td\tx\tRawlsian\t0.9\taccept:NonNormative")
    with pytest.raises(ValueError, match="header"):
        parse_review_tsv("sentence\tstuff\n")


def test_review_tsv_sanitizes_tabs():
    entry = ReviewEntry(
        sentence_id="s1",
        doc_id="d",
        text="has\ttab and\nnewline",
        predicted=R,
        gate_similarity=0.8,
    )
    text = review_tsv(ReviewBatch(entries=(entry,)))
    parsed = parse_review_tsv(text)
    assert parsed.entries[0].text == "has tab and newline"
