"""Cheap n-gram language models for cross-domain similarity probes.

These models exist to rank domains by fit, not to be good LMs: additive
smoothing over a closed vocabulary plus a single unknown class. Every
conditional sums to exactly 1 over vocabulary + UNK, so cross-entropies
are comparable across domains.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

from .corpus import Document, analysis_tokens, sample_documents
from .errors import DataError
from .fileio import atomic_write
from .rng import derive_seed

DEFAULT_ORDER = 3
DEFAULT_ALPHA = 0.1
DEFAULT_HOLDOUT_FRACTION = 0.2

BOS = "<s>"
UNK = "<unk>"


@dataclass
class NgramLM:
    order: int
    alpha: float
    domain: str
    vocab: frozenset[str]
    counts: dict[tuple[str, ...], dict[str, int]] = field(default_factory=dict)
    context_totals: dict[tuple[str, ...], int] = field(default_factory=dict)

    def _map(self, token: str) -> str:
        return token if token in self.vocab else UNK

    def prob(self, context: tuple[str, ...], token: str) -> float:
        """P(token | context) with additive smoothing.

        Out-of-vocabulary tokens, in the context or the target, map to
        UNK. The denominator smooths over |vocab| + 1 classes, so the
        distribution sums to one including the UNK class.
        """
        if len(context) != self.order - 1:
            raise DataError(
                f"context length {len(context)} does not match order {self.order}"
            )
        mapped = tuple(t if t == BOS else self._map(t) for t in context)
        target = self._map(token)
        table = self.counts.get(mapped)
        count = table.get(target, 0) if table else 0
        total = self.context_totals.get(mapped, 0)
        v = len(self.vocab)
        return (count + self.alpha) / (total + self.alpha * (v + 1))


def _doc_events(tokens: Sequence[str], order: int):
    """(context, token) pairs with BOS left-padding, one per token."""
    padded = [BOS] * (order - 1) + list(tokens)
    for i in range(len(tokens)):
        yield tuple(padded[i : i + order - 1]), padded[i + order - 1]


def train_ngram(
    docs: Sequence[Document],
    order: int = DEFAULT_ORDER,
    alpha: float = DEFAULT_ALPHA,
    domain: str | None = None,
) -> NgramLM:
    """Count n-grams over the analysis tokens of a document corpus.

    Each document is one token stream: contexts are padded with BOS on
    the left and no end-of-document event is scored. The vocabulary is
    every training token.
    """
    if order < 1:
        raise DataError(f"order must be >= 1, got {order}")
    if alpha <= 0:
        raise DataError(f"alpha must be > 0, got {alpha}")
    if not docs:
        raise DataError("cannot train on an empty corpus")
    if domain is None:
        domain = docs[0].domain
    vocab: set[str] = set()
    counts: dict[tuple[str, ...], dict[str, int]] = {}
    totals: dict[tuple[str, ...], int] = {}
    for doc in docs:
        tokens = analysis_tokens(doc.text)
        vocab.update(tokens)
        for context, token in _doc_events(tokens, order):
            table = counts.setdefault(context, {})
            table[token] = table.get(token, 0) + 1
            totals[context] = totals.get(context, 0) + 1
    return NgramLM(
        order=order,
        alpha=alpha,
        domain=domain,
        vocab=frozenset(vocab),
        counts=counts,
        context_totals=totals,
    )


def eval_loss(lm: NgramLM, heldout: Sequence[Document]) -> float:
    """Mean negative log-likelihood per token over held-out documents."""
    terms = []
    for doc in heldout:
        tokens = analysis_tokens(doc.text)
        for context, token in _doc_events(tokens, lm.order):
            terms.append(-math.log(lm.prob(context, token)))
    if not terms:
        raise DataError("held-out sample has no tokens to score")
    return math.fsum(terms) / len(terms)


@dataclass
class LossMatrix:
    domains: list[str]
    loss: list[list[float]]
    holdout_docs: dict[str, int] = field(default_factory=dict)


def split_holdout(
    docs: Sequence[Document], fraction: float, seed: int
) -> tuple[list[Document], list[Document]]:
    """(train, heldout) split; both sides non-empty, heldout seeded."""
    if not 0.0 < fraction < 1.0:
        raise DataError(f"holdout fraction must be in (0, 1), got {fraction}")
    if len(docs) < 2:
        raise DataError(f"need at least 2 documents to split, got {len(docs)}")
    n_hold = int(round(len(docs) * fraction))
    n_hold = max(1, min(n_hold, len(docs) - 1))
    heldout = sample_documents(docs, n_hold, seed)
    held_ids = {d.id for d in heldout}
    train = [d for d in docs if d.id not in held_ids]
    return train, heldout


def cross_domain_matrix(
    corpora: Mapping[str, Sequence[Document]],
    order: int = DEFAULT_ORDER,
    alpha: float = DEFAULT_ALPHA,
    holdout_fraction: float = DEFAULT_HOLDOUT_FRACTION,
    seed: int = 0,
) -> LossMatrix:
    """Loss of each domain's model on each domain's held-out documents.

    Row i, column j is the loss of the model trained on domain i's
    training split, evaluated on domain j's held-out split. Splits are
    seeded per domain, so adding a domain never changes another domain's
    split.
    """
    if len(corpora) < 2:
        raise DataError("cross-domain matrix needs at least two domains")
    domains = list(corpora.keys())
    models = {}
    heldouts = {}
    holdout_docs = {}
    for name in domains:
        train, heldout = split_holdout(
            corpora[name], holdout_fraction, derive_seed(seed, "holdout", name)
        )
        models[name] = train_ngram(train, order=order, alpha=alpha, domain=name)
        heldouts[name] = heldout
        holdout_docs[name] = len(heldout)
    loss = [
        [eval_loss(models[row], heldouts[col]) for col in domains] for row in domains
    ]
    return LossMatrix(domains=domains, loss=loss, holdout_docs=holdout_docs)


def write_loss_tsv(path: str | Path, matrix: LossMatrix) -> None:
    """Losses as a TSV with four decimal places."""
    with atomic_write(path) as handle:
        handle.write("model\t" + "\t".join(matrix.domains) + "\n")
        for name, row in zip(matrix.domains, matrix.loss):
            cells = "\t".join(f"{value:.4f}" for value in row)
            handle.write(f"{name}\t{cells}\n")


def write_loss_json(path: str | Path, matrix: LossMatrix) -> None:
    """Full-precision losses keyed by model domain, then eval domain."""
    payload = {
        "domains": matrix.domains,
        "holdout_docs": matrix.holdout_docs,
        "loss": {
            row: {col: matrix.loss[i][j] for j, col in enumerate(matrix.domains)}
            for i, row in enumerate(matrix.domains)
        },
    }
    with atomic_write(path) as handle:
        json.dump(payload, handle, sort_keys=True, indent=2)
        handle.write("\n")
