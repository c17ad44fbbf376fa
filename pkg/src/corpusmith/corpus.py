"""Corpus ingestion: documents, sentences, and packed training sequences.

The document is the unit of provenance. Splitting yields sentence records
whose ids are "<doc_id>#<idx>"; packing yields training sequences whose
ids are "<doc_id>#seq<j>". Sequences never mix tokens from different
documents.
"""

from __future__ import annotations

import unicodedata
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Iterable, Iterator, Sequence, TypeVar

from .errors import DataError
from .fileio import iter_jsonl, require_field, write_jsonl
from .rng import Xoshiro256StarStar, stream

T = TypeVar("T")

DEFAULT_MAX_LEN = 512

_TERMINATORS = frozenset(".!?")
_CLOSERS = frozenset("\"')]}’”»")
_OPENERS = frozenset("\"'([{‘“«")


@dataclass
class Document:
    id: str
    domain: str
    text: str


@dataclass
class SentenceRecord:
    sent_id: str
    doc_id: str
    idx: int
    text: str
    token_count: int


@dataclass
class PackedSequence:
    seq_id: str
    doc_id: str
    tokens: list[str]


def _load_abbreviations() -> frozenset[str]:
    raw = resources.files("corpusmith").joinpath("data/abbreviations.txt").read_text("utf-8")
    words = set()
    for line in raw.splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            words.add(line)
    return frozenset(words)


_ABBREVIATIONS = _load_abbreviations()


def _is_punct(ch: str) -> bool:
    return unicodedata.category(ch).startswith("P")


def sequence_tokens(text: str) -> list[str]:
    """Whitespace tokens with case and punctuation kept."""
    return text.split()


def analysis_tokens(text: str) -> list[str]:
    """Lowercased whitespace tokens, edge punctuation stripped, pure
    punctuation and pure digit tokens dropped."""
    out = []
    for token in text.lower().split():
        start = 0
        end = len(token)
        while start < end and _is_punct(token[start]):
            start += 1
        while end > start and _is_punct(token[end - 1]):
            end -= 1
        token = token[start:end]
        if not token or token.isdigit():
            continue
        out.append(token)
    return out


def tokenize(text: str, mode: str = "analysis") -> list[str]:
    """Tokenize in "analysis" or "sequence" mode."""
    if mode == "analysis":
        return analysis_tokens(text)
    if mode == "sequence":
        return sequence_tokens(text)
    raise DataError(f"unknown tokenizer mode: {mode!r}")


def _word_before(text: str, dot: int) -> str:
    """The maximal alnum-or-dot run that ends just before text[dot]."""
    start = dot
    while start > 0 and (text[start - 1].isalnum() or text[start - 1] == "."):
        start -= 1
    return text[start:dot]


def split_sentences(doc: Document) -> list[SentenceRecord]:
    """Split a document into sentence records.

    A boundary is a run of terminator characters (. ! ?), optionally
    followed by closing quotes or brackets, then whitespace, then an
    uppercase letter or opening quote. A single period is not a boundary
    when the preceding word is a known abbreviation or a lone initial.
    Sentences are contiguous trimmed slices of the source text, so
    whitespace-normalized concatenation reconstructs the document.
    """
    text = doc.text
    records: list[SentenceRecord] = []
    start = 0
    i = 0
    n = len(text)

    def emit(chunk: str) -> None:
        chunk = chunk.strip()
        if not chunk:
            return
        idx = len(records)
        records.append(
            SentenceRecord(
                sent_id=f"{doc.id}#{idx}",
                doc_id=doc.id,
                idx=idx,
                text=chunk,
                token_count=len(sequence_tokens(chunk)),
            )
        )

    while i < n:
        if text[i] not in _TERMINATORS:
            i += 1
            continue
        run_end = i + 1
        while run_end < n and text[run_end] in _TERMINATORS:
            run_end += 1
        tail = run_end
        while tail < n and text[tail] in _CLOSERS:
            tail += 1
        # Whitespace, then a capital or opening quote, must follow.
        ws = tail
        while ws < n and text[ws].isspace():
            ws += 1
        boundary = ws > tail and ws < n and (text[ws].isupper() or text[ws] in _OPENERS)
        if boundary and run_end - i == 1 and text[i] == ".":
            word = _word_before(text, i)
            if word.lower() in _ABBREVIATIONS:
                boundary = False
            elif len(word) == 1 and word.isalpha() and word.isupper():
                boundary = False
        if boundary:
            emit(text[start:tail])
            start = ws
            i = ws
        else:
            i = run_end
    emit(text[start:])
    return records


def _truncate(tokens: list[str], max_len: int, gen: Xoshiro256StarStar) -> list[str]:
    # Coin decides which end survives: heads keeps the tail, tails the head.
    if gen.coin():
        return tokens[len(tokens) - max_len :]
    return tokens[:max_len]


def pack_sequences(
    docs: Iterable[Document], max_len: int = DEFAULT_MAX_LEN, seed: int = 0
) -> Iterator[PackedSequence]:
    """Greedily pack each document's sentences into sequences of at most
    max_len whitespace tokens.

    Sentences stay contiguous and never cross document boundaries. A
    sentence that alone exceeds max_len is truncated to max_len, keeping
    either its head or its tail on a per-document seeded coin flip.
    """
    if max_len < 1:
        raise DataError(f"max_len must be >= 1, got {max_len}")
    for doc in docs:
        gen = stream(seed, doc.id)
        current: list[str] = []
        buffers: list[list[str]] = []
        for sentence in split_sentences(doc):
            tokens = sequence_tokens(sentence.text)
            if not tokens:
                continue
            if len(tokens) > max_len:
                if current:
                    buffers.append(current)
                    current = []
                buffers.append(_truncate(tokens, max_len, gen))
            elif len(current) + len(tokens) > max_len:
                buffers.append(current)
                current = list(tokens)
            else:
                current.extend(tokens)
        if current:
            buffers.append(current)
        for counter, tokens in enumerate(buffers):
            yield PackedSequence(
                seq_id=f"{doc.id}#seq{counter}", doc_id=doc.id, tokens=tokens
            )


def dedup_sentences(records: Iterable[SentenceRecord]) -> list[SentenceRecord]:
    """Drop exact duplicates of trimmed sentence text, keeping first hits."""
    seen: set[str] = set()
    out = []
    for record in records:
        key = record.text.strip()
        if key in seen:
            continue
        seen.add(key)
        out.append(record)
    return out


def sample_items(items: Sequence[T], n: int, seed: int) -> list[T]:
    """Uniform sample of n items without replacement, original order kept.

    Runs a Fisher-Yates prefix shuffle over the index range and returns
    the selected items sorted by their position in the input.
    """
    size = len(items)
    if n < 0:
        raise DataError(f"sample size must be >= 0, got {n}")
    if n > size:
        raise DataError(f"sample size {n} exceeds population size {size}")
    gen = Xoshiro256StarStar(seed)
    indices = list(range(size))
    for i in range(n):
        j = i + gen.next_below(size - i)
        indices[i], indices[j] = indices[j], indices[i]
    return [items[i] for i in sorted(indices[:n])]


def sample_documents(docs: Sequence[Document], n: int, seed: int) -> list[Document]:
    """Seeded uniform document sample, input order preserved."""
    return sample_items(docs, n, seed)


# ---------------------------------------------------------------------------
# JSONL serialization


def read_documents(path: str | Path) -> list[Document]:
    docs = []
    seen_ids: set[str] = set()
    for lineno, obj in iter_jsonl(path):
        where = f"{path}:{lineno}"
        doc = Document(
            id=require_field(obj, "id", str, where),
            domain=require_field(obj, "domain", str, where),
            text=require_field(obj, "text", str, where),
        )
        if not doc.id:
            raise DataError(f"{where}: field 'id' must be non-empty")
        if doc.id in seen_ids:
            raise DataError(f"{where}: duplicate document id '{doc.id}'")
        seen_ids.add(doc.id)
        docs.append(doc)
    return docs


def write_documents(path: str | Path, docs: Iterable[Document]) -> int:
    return write_jsonl(
        path, ({"id": d.id, "domain": d.domain, "text": d.text} for d in docs)
    )


def read_sentences(path: str | Path) -> list[SentenceRecord]:
    records = []
    for lineno, obj in iter_jsonl(path):
        where = f"{path}:{lineno}"
        record = SentenceRecord(
            sent_id=require_field(obj, "sent_id", str, where),
            doc_id=require_field(obj, "doc_id", str, where),
            idx=require_field(obj, "idx", int, where),
            text=require_field(obj, "text", str, where),
            token_count=require_field(obj, "token_count", int, where),
        )
        if record.idx < 0:
            raise DataError(f"{where}: field 'idx' must be >= 0")
        if record.token_count != len(sequence_tokens(record.text)):
            raise DataError(
                f"{where}: token_count {record.token_count} does not match text"
            )
        records.append(record)
    return records


def write_sentences(path: str | Path, records: Iterable[SentenceRecord]) -> int:
    return write_jsonl(
        path,
        (
            {
                "sent_id": r.sent_id,
                "doc_id": r.doc_id,
                "idx": r.idx,
                "text": r.text,
                "token_count": r.token_count,
            }
            for r in records
        ),
    )


def read_sequences(path: str | Path) -> list[PackedSequence]:
    out = []
    for lineno, obj in iter_jsonl(path):
        where = f"{path}:{lineno}"
        tokens = require_field(obj, "tokens", list, where)
        for t in tokens:
            if not isinstance(t, str):
                raise DataError(f"{where}: field 'tokens' must contain strings")
        out.append(
            PackedSequence(
                seq_id=require_field(obj, "seq_id", str, where),
                doc_id=require_field(obj, "doc_id", str, where),
                tokens=tokens,
            )
        )
    return out


def write_sequences(path: str | Path, seqs: Iterable[PackedSequence]) -> int:
    return write_jsonl(
        path,
        ({"seq_id": s.seq_id, "doc_id": s.doc_id, "tokens": s.tokens} for s in seqs),
    )


def sentences_to_documents(records: Iterable[SentenceRecord], domain: str) -> list[Document]:
    """Wrap sentence records as single-sentence documents (for packing)."""
    return [Document(id=r.sent_id, domain=domain, text=r.text) for r in records]
