"""Masking augmentation over packed sequences.

Each position is masked independently with probability p. Draws come
from a stream keyed by (base_seed, seq_id, epoch), so any sequence/epoch
pair can be regenerated in isolation and the corpus can be written in
any order without changing a single mask.

Source tokens that could be mistaken for the sentinel (the sentinel
itself, or an already-escaped form) get a backslash prepended before
masking, and unmask() strips it again, so reconstruction is exact even
for adversarial inputs.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator

from .corpus import PackedSequence
from .errors import DataError
from .fileio import iter_jsonl, require_field, write_jsonl
from .rng import stream

MASK_TOKEN = "<mask>"
DEFAULT_MASK_PROB = 0.15

_SENTINEL_LIKE = re.compile(r"\\*<mask>$")


@dataclass
class MaskedSequence:
    seq_id: str
    epoch: int
    tokens: list[str]
    masked_positions: list[int]
    originals: list[str]


def escape_token(token: str) -> str:
    """Prepend a backslash to anything that looks like the sentinel."""
    if _SENTINEL_LIKE.fullmatch(token):
        return "\\" + token
    return token


def unescape_token(token: str) -> str:
    if _SENTINEL_LIKE.fullmatch(token) and token.startswith("\\"):
        return token[1:]
    return token


def mask_sequence(
    seq: PackedSequence, p: float, epoch: int, base_seed: int
) -> MaskedSequence:
    """Mask one sequence for one epoch.

    Every position draws one uniform double; positions with draw < p are
    replaced by the sentinel. originals[i] is the (escaped) token that
    stood at masked_positions[i].
    """
    if not 0.0 <= p <= 1.0:
        raise DataError(f"mask probability must be in [0, 1], got {p}")
    if epoch < 0:
        raise DataError(f"epoch must be >= 0, got {epoch}")
    escaped = [escape_token(t) for t in seq.tokens]
    gen = stream(base_seed, seq.seq_id, epoch)
    draws = gen.double_block(len(escaped))
    tokens = list(escaped)
    positions = []
    originals = []
    for i in range(len(escaped)):
        if draws[i] < p:
            positions.append(i)
            originals.append(escaped[i])
            tokens[i] = MASK_TOKEN
    return MaskedSequence(
        seq_id=seq.seq_id,
        epoch=epoch,
        tokens=tokens,
        masked_positions=positions,
        originals=originals,
    )


def unmask(masked: MaskedSequence) -> PackedSequence:
    """Invert mask_sequence exactly, recovering the source tokens."""
    tokens = list(masked.tokens)
    if len(masked.masked_positions) != len(masked.originals):
        raise DataError(
            f"{masked.seq_id}/epoch {masked.epoch}: positions and originals differ in length"
        )
    for pos, original in zip(masked.masked_positions, masked.originals):
        if pos < 0 or pos >= len(tokens):
            raise DataError(
                f"{masked.seq_id}/epoch {masked.epoch}: masked position {pos} out of range"
            )
        tokens[pos] = original
    return PackedSequence(
        seq_id=masked.seq_id,
        doc_id=masked.seq_id.rsplit("#seq", 1)[0],
        tokens=[unescape_token(t) for t in tokens],
    )


def augment_epochs(
    seqs: Iterable[PackedSequence],
    epochs: int,
    p: float = DEFAULT_MASK_PROB,
    base_seed: int = 0,
) -> Iterator[MaskedSequence]:
    """Yield each sequence masked once per epoch, epoch-major order."""
    if epochs < 1:
        raise DataError(f"epochs must be >= 1, got {epochs}")
    seqs = list(seqs)
    for epoch in range(epochs):
        for seq in seqs:
            yield mask_sequence(seq, p, epoch, base_seed)


def write_masked(path: str | Path, masked: Iterable[MaskedSequence]) -> int:
    return write_jsonl(
        path,
        (
            {
                "seq_id": m.seq_id,
                "epoch": m.epoch,
                "tokens": m.tokens,
                "masked_positions": m.masked_positions,
                "originals": m.originals,
            }
            for m in masked
        ),
    )


def read_masked(path: str | Path) -> list[MaskedSequence]:
    out = []
    for lineno, obj in iter_jsonl(path):
        where = f"{path}:{lineno}"
        out.append(
            MaskedSequence(
                seq_id=require_field(obj, "seq_id", str, where),
                epoch=require_field(obj, "epoch", int, where),
                tokens=require_field(obj, "tokens", list, where),
                masked_positions=require_field(obj, "masked_positions", list, where),
                originals=require_field(obj, "originals", list, where),
            )
        )
    return out
