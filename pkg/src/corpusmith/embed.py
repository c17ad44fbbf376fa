"""Sentence embeddings: TF-IDF weighting over a signed random projection.

The embedder is fit once (vocabulary, document frequencies, projection)
and then applied to any sentence batch. Each vocabulary term owns one
projection row of entries +-1/sqrt(dim), drawn from a stream keyed by
(seed, term), so refitting with the same inputs and seed reproduces the
model bit for bit. Embedding a sentence is TF * IDF weighting of its
in-vocabulary terms, a float64 accumulation through the projection, L2
normalization, and a cast to float32. Vectors depend only on the model
and the sentence text, never on batch composition.
"""

from __future__ import annotations

import hashlib
import json
import math
import struct
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .corpus import SentenceRecord, analysis_tokens
from .errors import DataError
from .fileio import atomic_write

DEFAULT_DIM = 64
DEFAULT_MAX_VOCAB = 20_000

_MAGIC = b"EMB1"


@dataclass
class EmbedderModel:
    terms: list[str]
    doc_freqs: list[int]
    idf: np.ndarray
    dim: int
    projection: np.ndarray
    seed: int
    fitted_on: str
    term_index: dict[str, int] = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if not self.term_index:
            self.term_index = {t: i for i, t in enumerate(self.terms)}

    def fingerprint(self) -> str:
        """Digest of everything that determines the embedding function."""
        digest = hashlib.sha256()
        digest.update(b"embedder\x00")
        digest.update(self.fitted_on.encode("utf-8"))
        digest.update(struct.pack("<qq", self.dim, self.seed))
        for term, df in zip(self.terms, self.doc_freqs):
            digest.update(term.encode("utf-8"))
            digest.update(struct.pack("<q", df))
        return digest.hexdigest()


@dataclass
class EmbeddingMatrix:
    ids: list[str]
    vectors: np.ndarray
    model_fingerprint: str | None = None
    zero_rows: list[int] = field(default_factory=list)


def corpus_fingerprint(sentences: Iterable[SentenceRecord]) -> str:
    """Digest of (sent_id, text) pairs in order."""
    digest = hashlib.sha256()
    for record in sentences:
        digest.update(record.sent_id.encode("utf-8"))
        digest.update(b"\x1f")
        digest.update(record.text.encode("utf-8"))
        digest.update(b"\x1e")
    return digest.hexdigest()


def _projection_row(term: str, seed: int, dim: int) -> np.ndarray:
    from .rng import stream

    gen = stream(seed, "proj", term)
    bits = gen.u64_block(dim) >> np.uint64(63)
    scale = np.float32(1.0 / math.sqrt(dim))
    return np.where(bits.astype(bool), scale, -scale).astype(np.float32)


def fit_embedder(
    sentences: Sequence[SentenceRecord],
    dim: int = DEFAULT_DIM,
    max_vocab: int = DEFAULT_MAX_VOCAB,
    seed: int = 0,
) -> EmbedderModel:
    """Fit vocabulary, IDF, and projection on a sentence corpus.

    Vocabulary is the max_vocab most document-frequent analysis terms,
    ties broken lexicographically. IDF uses the smoothed form
    ln((1 + n) / (1 + df)) + 1.
    """
    if dim < 1:
        raise DataError(f"embedding dim must be >= 1, got {dim}")
    if max_vocab < 1:
        raise DataError(f"max_vocab must be >= 1, got {max_vocab}")
    if not sentences:
        raise DataError("cannot fit an embedder on an empty corpus")
    df_counts: Counter[str] = Counter()
    for record in sentences:
        df_counts.update(set(analysis_tokens(record.text)))
    ranked = sorted(df_counts.items(), key=lambda item: (-item[1], item[0]))[:max_vocab]
    terms = [term for term, _ in ranked]
    doc_freqs = [count for _, count in ranked]
    n = len(sentences)
    idf = np.array(
        [math.log((1 + n) / (1 + df)) + 1.0 for df in doc_freqs], dtype=np.float64
    )
    projection = np.empty((len(terms), dim), dtype=np.float32)
    for i, term in enumerate(terms):
        projection[i] = _projection_row(term, seed, dim)
    return EmbedderModel(
        terms=terms,
        doc_freqs=doc_freqs,
        idf=idf,
        dim=dim,
        projection=projection,
        seed=seed,
        fitted_on=corpus_fingerprint(sentences),
    )


def embed_batch(
    model: EmbedderModel, sentences: Sequence[SentenceRecord]
) -> EmbeddingMatrix:
    """Embed sentences row by row.

    Rows are unit L2 norm float32. A sentence with no in-vocabulary terms
    becomes a zero row and its position is recorded in zero_rows; such
    rows must not enter similarity search.
    """
    ids = [record.sent_id for record in sentences]
    vectors = np.zeros((len(sentences), model.dim), dtype=np.float32)
    zero_rows = []
    proj64 = model.projection.astype(np.float64)
    for row, record in enumerate(sentences):
        counts = Counter(analysis_tokens(record.text))
        acc = np.zeros(model.dim, dtype=np.float64)
        hit = False
        for term, tf in sorted(counts.items()):
            col = model.term_index.get(term)
            if col is None:
                continue
            hit = True
            acc += (tf * model.idf[col]) * proj64[col]
        norm = math.sqrt(float(np.dot(acc, acc)))
        if not hit or norm == 0.0:
            zero_rows.append(row)
            continue
        vectors[row] = (acc / norm).astype(np.float32)
    return EmbeddingMatrix(
        ids=ids,
        vectors=vectors,
        model_fingerprint=model.fingerprint(),
        zero_rows=zero_rows,
    )


def _sidecar_paths(path: Path) -> tuple[Path, Path]:
    return (
        path.with_name(path.name + ".ids"),
        path.with_name(path.name + ".meta.json"),
    )


def write_embeddings(path: str | Path, matrix: EmbeddingMatrix) -> None:
    """Write the EMB1 binary plus .ids and .meta.json sidecars.

    EMB1 layout: magic "EMB1", u32 row count, u32 dim, then row-major
    float32 vector data, all little-endian. Ids live one per line in the
    .ids sidecar; the model fingerprint and zero-row flags live in the
    .meta.json sidecar because the binary has no field for them.
    """
    path = Path(path)
    rows, dim = matrix.vectors.shape
    if len(matrix.ids) != rows:
        raise DataError(f"id count {len(matrix.ids)} does not match {rows} rows")
    with atomic_write(path, binary=True) as handle:
        handle.write(_MAGIC)
        handle.write(struct.pack("<II", rows, dim))
        handle.write(np.ascontiguousarray(matrix.vectors, dtype="<f4").tobytes())
    ids_path, meta_path = _sidecar_paths(path)
    with atomic_write(ids_path) as handle:
        for sent_id in matrix.ids:
            handle.write(sent_id + "\n")
    with atomic_write(meta_path) as handle:
        json.dump(
            {
                "model_fingerprint": matrix.model_fingerprint,
                "rows": rows,
                "dim": dim,
                "zero_rows": matrix.zero_rows,
            },
            handle,
            sort_keys=True,
        )
        handle.write("\n")


def read_embeddings(path: str | Path) -> EmbeddingMatrix:
    """Read an EMB1 file and its sidecars back into memory."""
    path = Path(path)
    if not path.exists():
        raise DataError(f"{path}: no such file")
    blob = path.read_bytes()
    if len(blob) < 12 or blob[:4] != _MAGIC:
        raise DataError(f"{path}: not an EMB1 embedding file")
    rows, dim = struct.unpack("<II", blob[4:12])
    expected = 12 + rows * dim * 4
    if len(blob) != expected:
        raise DataError(
            f"{path}: expected {expected} bytes for {rows}x{dim} float32, got {len(blob)}"
        )
    vectors = np.frombuffer(blob, dtype="<f4", offset=12).reshape(rows, dim).copy()
    ids_path, meta_path = _sidecar_paths(path)
    if not ids_path.exists():
        raise DataError(f"{ids_path}: missing ids sidecar")
    ids = ids_path.read_text("utf-8").splitlines()
    if len(ids) != rows:
        raise DataError(f"{ids_path}: {len(ids)} ids for {rows} vector rows")
    fingerprint = None
    zero_rows: list[int] = []
    if meta_path.exists():
        meta = json.loads(meta_path.read_text("utf-8"))
        fingerprint = meta.get("model_fingerprint")
        zero_rows = list(meta.get("zero_rows", []))
    return EmbeddingMatrix(
        ids=ids,
        vectors=vectors,
        model_fingerprint=fingerprint,
        zero_rows=zero_rows,
    )
