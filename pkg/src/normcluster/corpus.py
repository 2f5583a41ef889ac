"""Embedding corpus I/O and vector extraction.

A corpus is line-delimited JSON, one record per line. Every vector in a
corpus (token vectors and sentence vectors alike) must share one
dimensionality. Records carry either per-token vectors, a pre-pooled
sentence vector, or both; gold category labels are optional.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import IO, Iterable, Optional, Union

import numpy as np

logger = logging.getLogger(__name__)


class CategoryLabel(str, Enum):
    """The four normative categories plus the non-normative bucket."""

    DEONTOLOGICAL = "Deontological"
    RAWLSIAN = "Rawlsian"
    PROCEDURAL = "Procedural"
    LIBERTARIAN = "Libertarian"
    NON_NORMATIVE = "NonNormative"


#: Labels a gold-annotated sample may carry. NonNormative marks sentences
#: the classifier gate screens out; it never appears in corpora or training.
CATEGORY_LABELS: tuple[CategoryLabel, ...] = (
    CategoryLabel.DEONTOLOGICAL,
    CategoryLabel.RAWLSIAN,
    CategoryLabel.PROCEDURAL,
    CategoryLabel.LIBERTARIAN,
)


class ExtractionMode(str, Enum):
    """How a record is reduced to a single vector.

    FOCUS_WORD picks the embedding of the highest-priority cue word,
    TOKEN_MEAN averages all token vectors, SENTENCE_DIRECT uses the
    pre-pooled sentence vector as delivered by the model.
    """

    FOCUS_WORD = "focus_word"
    TOKEN_MEAN = "token_mean"
    SENTENCE_DIRECT = "sentence_direct"


class CorpusFormatError(ValueError):
    """Raised for malformed corpus input; carries the offending line number."""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


@dataclass(frozen=True)
class Token:
    surface: str
    vector: tuple[float, ...]


@dataclass(frozen=True)
class EmbeddingRecord:
    """One text unit with its vectors and optional gold category."""

    id: str
    text: str
    model_id: str
    tokens: Optional[tuple[Token, ...]] = None
    sentence_vector: Optional[tuple[float, ...]] = None
    label: Optional[CategoryLabel] = None
    source_doc: Optional[str] = None


@dataclass
class Corpus:
    records: list[EmbeddingRecord] = field(default_factory=list)
    dim: Optional[int] = None

    def __len__(self) -> int:
        return len(self.records)

    def labels(self) -> list[Optional[CategoryLabel]]:
        return [r.label for r in self.records]

    def model_ids(self) -> list[str]:
        seen: dict[str, None] = {}
        for r in self.records:
            seen.setdefault(r.model_id)
        return list(seen)


class FocusWordList:
    """Ordered cue-word patterns; earlier entries outrank later ones.

    A pattern is either a literal word or a prefix ending in ``*``.
    Matching is case-insensitive on the token surface. Hyphenated entries
    such as ``revenue-raising`` are matched against single tokens as
    literals; a tokenizer that splits them simply never produces a match.
    """

    def __init__(self, entries: Iterable[str]):
        cleaned = [e.strip() for e in entries if e.strip()]
        if not cleaned:
            raise ValueError("focus word list must not be empty")
        self.entries: tuple[str, ...] = tuple(cleaned)

    def __iter__(self):
        return iter(self.entries)

    def __len__(self) -> int:
        return len(self.entries)

    @staticmethod
    def pattern_matches(pattern: str, surface: str) -> bool:
        surface = surface.lower()
        pattern = pattern.lower()
        if pattern.endswith("*"):
            return surface.startswith(pattern[:-1])
        return surface == pattern

    @classmethod
    def from_file(cls, path: Union[str, Path]) -> "FocusWordList":
        lines = Path(path).read_text(encoding="utf-8").splitlines()
        return cls(line for line in lines if line.strip() and not line.lstrip().startswith("#"))


#: Expert-compiled cue words for the focus-word routine, in priority order.
DEFAULT_FOCUS_WORDS = FocusWordList(
    [
        "taxation",
        "tax*",
        "VAT",
        "revenue-raising",
        "redistribution",
        "income",
        "reward",
        "pay",
    ]
)


def _as_vector(value, line: int, what: str) -> tuple[float, ...]:
    if not isinstance(value, list) or not value:
        raise CorpusFormatError(f"{what} must be a non-empty array of numbers", line)
    out = []
    for x in value:
        if isinstance(x, bool) or not isinstance(x, (int, float)):
            raise CorpusFormatError(f"{what} contains a non-numeric entry", line)
        out.append(float(x))
    return tuple(out)


def _parse_label(value, line: int) -> CategoryLabel:
    try:
        label = CategoryLabel(value)
    except ValueError:
        raise CorpusFormatError(f"unknown label {value!r}", line) from None
    if label not in CATEGORY_LABELS:
        raise CorpusFormatError(f"label {label.value!r} is not allowed on corpus records", line)
    return label


def parse_corpus(stream: Union[IO[bytes], IO[str], str, bytes]) -> Corpus:
    """Parse a JSONL corpus, enforcing uniform dimensionality and unique ids.

    Accepts a file object, str or bytes. Empty input yields an empty corpus
    with undefined dimensionality.
    """
    if isinstance(stream, (str, bytes)):
        data = stream
    else:
        data = stream.read()
    if isinstance(data, bytes):
        data = data.decode("utf-8")

    records: list[EmbeddingRecord] = []
    seen_ids: set[str] = set()
    dim: Optional[int] = None

    # the format is LF-delimited; splitlines() would also break on
    # unicode separators that are legal inside JSON strings
    for lineno, line in enumerate(data.split("\n"), start=1):
        line = line.rstrip("\r")
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise CorpusFormatError(f"invalid JSON ({exc.msg})", lineno) from None
        if not isinstance(obj, dict):
            raise CorpusFormatError("record must be a JSON object", lineno)

        for key in ("id", "text", "model_id"):
            if not isinstance(obj.get(key), str):
                raise CorpusFormatError(f"missing or invalid {key!r}", lineno)
        for key in ("id", "model_id"):
            if not obj[key]:
                raise CorpusFormatError(f"{key!r} must be non-empty", lineno)
        rec_id = obj["id"]
        if rec_id in seen_ids:
            raise CorpusFormatError(f"duplicate record id {rec_id!r}", lineno)
        seen_ids.add(rec_id)

        tokens: Optional[tuple[Token, ...]] = None
        if obj.get("tokens") is not None:
            raw = obj["tokens"]
            if not isinstance(raw, list) or not raw:
                raise CorpusFormatError("tokens, when present, must be a non-empty array", lineno)
            toks = []
            for t in raw:
                if not isinstance(t, dict) or not isinstance(t.get("t"), str):
                    raise CorpusFormatError('each token must be an object {"t": str, "v": [float]}', lineno)
                toks.append(Token(t["t"], _as_vector(t.get("v"), lineno, "token vector")))
            tokens = tuple(toks)

        sentence_vector = None
        if obj.get("sentence_vector") is not None:
            sentence_vector = _as_vector(obj["sentence_vector"], lineno, "sentence_vector")

        if tokens is None and sentence_vector is None:
            raise CorpusFormatError("record has neither tokens nor sentence_vector", lineno)

        label = _parse_label(obj["label"], lineno) if obj.get("label") is not None else None

        for vec in ([t.vector for t in tokens] if tokens else []) + ([sentence_vector] if sentence_vector else []):
            if dim is None:
                dim = len(vec)
            elif len(vec) != dim:
                raise CorpusFormatError(
                    f"vector dimension {len(vec)} does not match corpus dimension {dim}", lineno
                )

        records.append(
            EmbeddingRecord(
                id=rec_id,
                text=obj["text"],
                model_id=obj["model_id"],
                tokens=tokens,
                sentence_vector=sentence_vector,
                label=label,
                source_doc=obj.get("source_doc"),
            )
        )

    return Corpus(records=records, dim=dim)


def load_corpus(path: Union[str, Path]) -> Corpus:
    with open(path, "rb") as fh:
        try:
            return parse_corpus(fh)
        except CorpusFormatError as exc:
            raise CorpusFormatError(f"{path}: {exc}", None) from None


def record_to_dict(record: EmbeddingRecord) -> dict:
    obj: dict = {"id": record.id, "text": record.text, "model_id": record.model_id}
    if record.tokens is not None:
        obj["tokens"] = [{"t": t.surface, "v": list(t.vector)} for t in record.tokens]
    if record.sentence_vector is not None:
        obj["sentence_vector"] = list(record.sentence_vector)
    if record.label is not None:
        obj["label"] = record.label.value
    if record.source_doc is not None:
        obj["source_doc"] = record.source_doc
    return obj


def corpus_to_jsonl(records: Iterable[EmbeddingRecord]) -> str:
    lines = [json.dumps(record_to_dict(r), ensure_ascii=False) for r in records]
    return "".join(line + "\n" for line in lines)


def write_corpus(records: Iterable[EmbeddingRecord], path: Union[str, Path]) -> None:
    Path(path).write_text(corpus_to_jsonl(records), encoding="utf-8", newline="\n")


def select_focus_token(
    record: EmbeddingRecord, words: FocusWordList = DEFAULT_FOCUS_WORDS
) -> Optional[tuple[np.ndarray, str]]:
    """Return the vector of the first token matching the highest-priority pattern.

    Patterns are tried in list order; within one pattern, tokens are scanned
    left to right and the leftmost match wins. Returns None when no token
    matches any pattern.
    """
    if not record.tokens:
        raise ValueError(f"record {record.id!r} has no tokens")
    for pattern in words:
        for token in record.tokens:
            if FocusWordList.pattern_matches(pattern, token.surface):
                return np.asarray(token.vector, dtype=np.float64), pattern
    return None


def token_mean(record: EmbeddingRecord) -> np.ndarray:
    """Component-wise mean over all token vectors."""
    if not record.tokens:
        raise ValueError(f"record {record.id!r} has no tokens")
    return np.mean([t.vector for t in record.tokens], axis=0, dtype=np.float64)


@dataclass(frozen=True)
class ResolvedVector:
    vector: np.ndarray
    #: True when FOCUS_WORD found no cue and fell back to the token mean.
    fallback: bool = False
    matched_pattern: Optional[str] = None


def resolve_embedding(
    record: EmbeddingRecord,
    mode: ExtractionMode,
    words: FocusWordList = DEFAULT_FOCUS_WORDS,
) -> ResolvedVector:
    """Reduce a record to one vector under the given extraction routine.

    FOCUS_WORD falls back to the token mean when no cue word matches, so a
    corpus resolves to the same number of points in every mode; the fallback
    is flagged on the result and in the audit log.
    """
    if mode is ExtractionMode.SENTENCE_DIRECT:
        if record.sentence_vector is None:
            raise ValueError(f"record {record.id!r} has no sentence_vector")
        return ResolvedVector(np.asarray(record.sentence_vector, dtype=np.float64))
    if mode is ExtractionMode.TOKEN_MEAN:
        return ResolvedVector(token_mean(record))
    if mode is ExtractionMode.FOCUS_WORD:
        match = select_focus_token(record, words)
        if match is None:
            logger.debug("record %s: no focus word matched, using token mean", record.id)
            return ResolvedVector(token_mean(record), fallback=True)
        vec, pattern = match
        return ResolvedVector(vec, matched_pattern=pattern)
    raise ValueError(f"unknown extraction mode: {mode!r}")


def resolve_corpus(
    corpus: Corpus,
    mode: ExtractionMode,
    words: FocusWordList = DEFAULT_FOCUS_WORDS,
) -> tuple[np.ndarray, list[str]]:
    """Resolve every record; returns an (n, d) matrix and the ids that fell back."""
    if not corpus.records:
        raise ValueError("cannot resolve an empty corpus")
    rows = []
    fallback_ids = []
    for record in corpus.records:
        resolved = resolve_embedding(record, mode, words)
        rows.append(resolved.vector)
        if resolved.fallback:
            fallback_ids.append(record.id)
    if fallback_ids:
        logger.info("%d of %d records fell back to token mean", len(fallback_ids), len(rows))
    return np.vstack(rows), fallback_ids
