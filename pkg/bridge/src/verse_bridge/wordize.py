"""Aggregate a subword model's next-step distribution into word candidates.

The wire protocol deals in words while the underlying model deals in
subword pieces. A word candidate starts from one high-probability first
piece and is completed greedily: keep appending the argmax piece while it
continues the current word, summing piece logprobs along the path. Paths
that surface the same word collapse to the best-scoring path.
"""

from __future__ import annotations

import unicodedata
from dataclasses import dataclass
from typing import Callable, Sequence

# Word-start markers used by byte-level BPE ("Ġ") and sentencepiece ("▁").
BOUNDARY_PREFIXES = ("Ġ", "▁", " ")
# Characters that may glue a continuation piece onto a French word.
WORD_JOINERS = "'’-"


@dataclass(frozen=True)
class WordCandidate:
    token: str
    logprob: float


@dataclass(frozen=True)
class PieceLm:
    """The slice of a subword language model that wordize needs."""

    # prefix piece ids -> logprobs over the piece vocabulary
    step: Callable[[tuple[int, ...]], Sequence[float]]
    # piece id -> piece string, boundary markers included
    pieces: tuple[str, ...]
    special_ids: frozenset[int]
    eos_id: int
    # piece ids -> surface text
    text: Callable[[Sequence[int]], str]


def starts_word(piece: str) -> bool:
    return piece.startswith(BOUNDARY_PREFIXES)


def continues_word(piece: str) -> bool:
    """True when the piece extends the current word rather than ending it."""
    if not piece or starts_word(piece):
        return False
    head = piece[0]
    return head.isalnum() or head in WORD_JOINERS


def visible(word: str) -> bool:
    """False for words of only control, format, or separator characters.

    A model with untrained byte pieces can surface zero-width output;
    such a token would render as a phantom gap in a verse.
    """
    return any(
        not unicodedata.category(ch).startswith(("C", "Z")) for ch in word
    )


def wordize(
    lm: PieceLm,
    context: tuple[int, ...],
    k: int,
    branch_factor: int | None = None,
    max_pieces: int = 6,
) -> list[WordCandidate]:
    if k < 1:
        raise ValueError("k must be at least 1")
    base = lm.step(context)
    order = sorted(range(len(base)), key=lambda i: (-base[i], i))
    branches = branch_factor if branch_factor is not None else max(2 * k, 12)

    best: dict[str, float] = {}

    def offer(word: str, logprob: float) -> None:
        if visible(word) and (word not in best or logprob > best[word]):
            best[word] = logprob

    taken = 0
    for piece_id in order:
        # Keep branching past the requested width until k distinct words
        # exist, bounded so a degenerate model cannot force a vocab scan.
        if (len(best) >= k and taken >= branches) or taken >= 8 * branches:
            break
        if piece_id == lm.eos_id:
            offer(lm.pieces[piece_id], float(base[piece_id]))
            taken += 1
            continue
        if piece_id in lm.special_ids:
            continue
        taken += 1
        ids = [piece_id]
        total = float(base[piece_id])
        while len(ids) < max_pieces:
            logprobs = lm.step(context + tuple(ids))
            nxt = min(range(len(logprobs)), key=lambda i: (-logprobs[i], i))
            if nxt == lm.eos_id or nxt in lm.special_ids:
                break
            if not continues_word(lm.pieces[nxt]):
                break
            ids.append(nxt)
            total += float(logprobs[nxt])
        offer(lm.text(ids).strip(), total)

    ranked = sorted(best.items(), key=lambda item: (-item[1], item[0]))
    return [WordCandidate(token, logprob) for token, logprob in ranked[:k]]
