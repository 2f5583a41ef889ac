"""Document mining and the expert-review loop.

Documents are split into sentence-like elements by a rule-based splitter,
classified sentence by sentence, and the positives are exported as a
review batch ordered by gate similarity. Experts fill a verdict column
(``accept:<Category>`` or ``reject``); merging appends accepted samples to
the training set and records rejections in an append-only ledger keyed by
(doc_id, sentence_id) so a rejected sentence is never suggested again.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Collection, Mapping, Optional, Sequence, Union

import numpy as np

from .classifier import ClassifierModel, predict
from .corpus import CategoryLabel

#: Tokens before a period that do not end a sentence. Single-letter
#: initials ("J.") are guarded separately.
ABBREVIATIONS = frozenset(
    """
    dr mr mrs ms prof sr jr st vs etc e.g i.e cf al fig figs no nos eq
    inc ltd co corp dept govt approx sec secs art para paras pp vol ch
    ed eds univ assn est resp
    """.split()
)

_TERMINAL = re.compile(r"[.!?;]+(?=\s|$)")
_LAST_WORD = re.compile(r"(\S+)$")


@dataclass(frozen=True)
class Sentence:
    sentence_id: str
    text: str
    start: int
    end: int


@dataclass(frozen=True)
class SegmentedDocument:
    doc_id: str
    sentences: tuple[Sentence, ...]


def _blocked_by_abbreviation(prefix: str, terminal: str) -> bool:
    if not terminal.startswith("."):
        return False
    match = _LAST_WORD.search(prefix)
    if match is None:
        return False
    word = match.group(1).rstrip(".").lstrip("(\"'").lower()
    if not word:
        return False
    if word in ABBREVIATIONS:
        return True
    return len(word) == 1 and word.isalpha()


def segment(text: str, doc_id: str) -> SegmentedDocument:
    """Split text into sentence-like elements with character spans.

    Breaks occur at sentence-final punctuation (``. ! ? ;``) followed by
    whitespace, and at line ends, so headings and list fragments become
    elements of their own. An abbreviation stop-list blocks false splits
    after tokens like "Dr." or single-letter initials.
    """
    sentences: list[Sentence] = []
    offset = 0
    for line in text.split("\n"):
        cursor = 0
        for match in _TERMINAL.finditer(line):
            if _blocked_by_abbreviation(line[: match.start()], match.group(0)):
                continue
            _append_sentence(sentences, line, cursor, match.end(), offset, doc_id)
            cursor = match.end()
        _append_sentence(sentences, line, cursor, len(line), offset, doc_id)
        offset += len(line) + 1
    return SegmentedDocument(doc_id=doc_id, sentences=tuple(sentences))


def _append_sentence(
    sentences: list[Sentence], line: str, start: int, end: int, offset: int, doc_id: str
) -> None:
    chunk = line[start:end]
    stripped = chunk.strip()
    if not stripped:
        return
    lead = len(chunk) - len(chunk.lstrip())
    abs_start = offset + start + lead
    sentences.append(
        Sentence(
            sentence_id=f"s{len(sentences) + 1:04d}",
            text=stripped,
            start=abs_start,
            end=abs_start + len(stripped),
        )
    )


@dataclass(frozen=True)
class ReviewEntry:
    sentence_id: str
    doc_id: str
    text: str
    predicted: CategoryLabel
    gate_similarity: float
    #: "pending" | "accepted" | "rejected"
    status: str = "pending"
    accepted_label: Optional[CategoryLabel] = None


@dataclass(frozen=True)
class ReviewBatch:
    entries: tuple[ReviewEntry, ...]

    def pending(self) -> list[ReviewEntry]:
        return [e for e in self.entries if e.status == "pending"]


def mine(
    model: ClassifierModel,
    doc: SegmentedDocument,
    embeddings: Mapping[str, Sequence[float]],
    rejected: Collection[tuple[str, str]] = (),
) -> ReviewBatch:
    """Classify every sentence; keep the positives as pending review entries.

    Entries are ordered by gate similarity descending (document order on
    ties). Sentences already rejected for this document are skipped.
    """
    entries = []
    for sentence in doc.sentences:
        if (doc.doc_id, sentence.sentence_id) in rejected:
            continue
        if sentence.sentence_id not in embeddings:
            raise ValueError(f"no embedding for sentence {sentence.sentence_id!r}")
        prediction = predict(model, embeddings[sentence.sentence_id], record_id=sentence.sentence_id)
        if prediction.label is CategoryLabel.NON_NORMATIVE:
            continue
        entries.append(
            ReviewEntry(
                sentence_id=sentence.sentence_id,
                doc_id=doc.doc_id,
                text=sentence.text,
                predicted=prediction.label,
                gate_similarity=prediction.gate_similarity,
            )
        )
    entries.sort(key=lambda e: -e.gate_similarity)
    return ReviewBatch(entries=tuple(entries))


def merge_reviews(
    training: Sequence[tuple[Sequence[float], CategoryLabel]],
    batch: ReviewBatch,
    embeddings: Mapping[str, Sequence[float]],
) -> tuple[list[tuple[np.ndarray, CategoryLabel]], list[tuple[str, str]]]:
    """Append accepted samples to the training set; collect rejections.

    Every entry must carry a verdict. The original training samples are
    always retained; the returned rejections feed the ledger.
    """
    still_pending = batch.pending()
    if still_pending:
        raise ValueError(f"{len(still_pending)} review entries are still pending")
    merged = [(np.asarray(vec, dtype=np.float64), label) for vec, label in training]
    rejections = []
    for entry in batch.entries:
        if entry.status == "rejected":
            rejections.append((entry.doc_id, entry.sentence_id))
            continue
        if entry.accepted_label is None:
            raise ValueError(f"accepted entry {entry.sentence_id!r} carries no category")
        if entry.sentence_id not in embeddings:
            raise ValueError(f"accepted entry {entry.sentence_id!r} has no embedding")
        merged.append((np.asarray(embeddings[entry.sentence_id], dtype=np.float64), entry.accepted_label))
    return merged, rejections


# --- review file (TSV) ------------------------------------------------------

REVIEW_COLUMNS = ("sentence_id", "doc_id", "text", "predicted_category", "gate_similarity", "verdict")


def _sanitize(text: str) -> str:
    return re.sub(r"[\t\r\n]+", " ", text)


def review_tsv(batch: ReviewBatch) -> str:
    lines = ["\t".join(REVIEW_COLUMNS)]
    for e in batch.entries:
        verdict = ""
        if e.status == "rejected":
            verdict = "reject"
        elif e.status == "accepted":
            verdict = f"accept:{e.accepted_label.value}"
        lines.append(
            "\t".join(
                [
                    e.sentence_id,
                    e.doc_id,
                    _sanitize(e.text),
                    e.predicted.value,
                    f"{e.gate_similarity:.6f}",
                    verdict,
                ]
            )
        )
    return "".join(line + "\n" for line in lines)


def parse_review_tsv(text: str) -> ReviewBatch:
    lines = [line for line in text.split("\n") if line.strip()]
    if not lines or lines[0].split("\t") != list(REVIEW_COLUMNS):
        raise ValueError("review file must start with the standard header row")
    entries = []
    for lineno, line in enumerate(lines[1:], start=2):
        cells = line.split("\t")
        if len(cells) < 5:
            raise ValueError(f"review line {lineno}: expected {len(REVIEW_COLUMNS)} columns")
        verdict = cells[5].strip() if len(cells) > 5 else ""
        entry = ReviewEntry(
            sentence_id=cells[0],
            doc_id=cells[1],
            text=cells[2],
            predicted=CategoryLabel(cells[3]),
            gate_similarity=float(cells[4]),
        )
        if verdict == "reject":
            entry = replace(entry, status="rejected")
        elif verdict.startswith("accept:"):
            label = CategoryLabel(verdict.split(":", 1)[1])
            if label is CategoryLabel.NON_NORMATIVE:
                raise ValueError(f"review line {lineno}: cannot accept as NonNormative")
            entry = replace(entry, status="accepted", accepted_label=label)
        elif verdict:
            raise ValueError(f"review line {lineno}: bad verdict {verdict!r}")
        entries.append(entry)
    return ReviewBatch(entries=tuple(entries))


# --- rejection ledger (append-only JSONL) -----------------------------------


def load_rejections(path: Union[str, Path]) -> set[tuple[str, str]]:
    path = Path(path)
    if not path.exists():
        return set()
    rejected = set()
    for line in path.read_text(encoding="utf-8").splitlines():
        if not line.strip():
            continue
        obj = json.loads(line)
        rejected.add((obj["doc_id"], obj["sentence_id"]))
    return rejected


def append_rejections(path: Union[str, Path], rejections: Sequence[tuple[str, str]]) -> None:
    with open(path, "a", encoding="utf-8", newline="\n") as fh:
        for doc_id, sentence_id in rejections:
            fh.write(json.dumps({"doc_id": doc_id, "sentence_id": sentence_id}) + "\n")
