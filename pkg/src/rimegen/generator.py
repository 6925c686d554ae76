"""Rhyme-conditioned greedy decoding of verses and poems.

Each step fetches the backend's top-k next tokens, scores every
candidate as logprob plus a weighted rhyme indicator against the input
verse and the tokens generated so far, and emits the best one. The
end-of-sequence token is withheld until the verse reaches its minimum
length, and the structural separator token is never a candidate.
"""

from __future__ import annotations

import unicodedata
from dataclasses import dataclass, field
from typing import Sequence

from rimegen.corpus import KeywordSet
from rimegen.lm import (
    SEP_TOKEN,
    LmBackend,
    LmContext,
    TokenCandidate,
    tokenize,
)
from rimegen.phonetics import Lexicon, VowelSet, normalize_token, rhymes_any


class GenerationError(Exception):
    """Raised when a verse cannot be produced.

    ``partial`` holds the per-verse diagnostics of whatever verses
    completed before the failure.
    """

    def __init__(self, message: str, partial: tuple = ()) -> None:
        super().__init__(message)
        self.partial = partial


@dataclass(frozen=True)
class GenerationConfig:
    """Every decoding knob, with the stated defaults.

    length_penalty rescales completed-sequence scores, which greedy
    decoding never compares; it is recorded for manifests but inert.
    """

    k: int = 10
    min_tokens: int = 4
    max_tokens: int = 20
    rhyme_weight: float = 0.5
    length_penalty: float = 1.0
    n_verses: int = 4
    seed: int = 0

    def __post_init__(self) -> None:
        if self.k < 1:
            raise ValueError("k must be at least 1")
        if not 1 <= self.min_tokens <= self.max_tokens:
            raise ValueError("need 1 <= min_tokens <= max_tokens")
        if self.rhyme_weight < 0:
            raise ValueError("rhyme_weight must be >= 0")
        if self.n_verses < 1:
            raise ValueError("n_verses must be at least 1")


@dataclass
class GenerationState:
    """Mutable per-verse decoding state."""

    reference_tokens: set[str]
    generated: list[str]
    cumulative_rhyme_count: int


@dataclass(frozen=True)
class ScoredCandidate:
    """A candidate after rhyme re-ranking."""

    token: str
    logprob: float
    indicator: int
    score: float


@dataclass(frozen=True)
class StepTrace:
    """One decoding step: the re-ranked candidates and the choice."""

    context_length: int
    candidates: tuple[ScoredCandidate, ...]
    chosen: str


@dataclass(frozen=True)
class VerseTrace:
    """Diagnostics for one generated verse."""

    input_text: str
    tokens: tuple[str, ...]
    text: str
    rhyme_count: int
    steps: tuple[StepTrace, ...]


@dataclass(frozen=True)
class Poem:
    keywords: KeywordSet
    verses: tuple[str, ...]
    traces: tuple[VerseTrace, ...] = field(default=())


def rhyme_indicator(
    candidate: str,
    state: GenerationState,
    lexicon: Lexicon,
    vowels: VowelSet,
) -> int:
    """1 iff the candidate rhymes with any reference token, else 0."""
    for reference in state.reference_tokens:
        if rhymes_any(candidate, reference, lexicon, vowels):
            return 1
    return 0


def rerank(
    candidates: Sequence[TokenCandidate],
    state: GenerationState,
    lexicon: Lexicon,
    vowels: VowelSet,
    rhyme_weight: float,
) -> list[ScoredCandidate]:
    """Score candidates as logprob + weight * indicator and sort.

    Ties break by logprob descending, then token ascending, so the
    ranking is deterministic and reduces to the input order at weight 0.
    """
    if not candidates:
        raise ValueError("candidates must be non-empty")
    scored = [
        ScoredCandidate(
            token=c.token,
            logprob=c.logprob,
            indicator=(ind := rhyme_indicator(c.token, state, lexicon, vowels)),
            score=c.logprob + rhyme_weight * ind,
        )
        for c in candidates
    ]
    scored.sort(key=lambda c: (-c.score, -c.logprob, c.token))
    return scored


def detokenize(tokens: Sequence[str]) -> str:
    """Join tokens: punctuation attaches left, clitics attach right."""
    parts: list[str] = []
    for token in tokens:
        if parts and all(
            unicodedata.category(ch).startswith("P") for ch in token
        ):
            parts[-1] += token
        elif parts and parts[-1].endswith(("'", "’")):
            parts[-1] += token
        else:
            parts.append(token)
    return " ".join(parts)


def generate_verse(
    input_text: str,
    backend: LmBackend,
    lexicon: Lexicon,
    vowels: VowelSet,
    config: GenerationConfig,
) -> VerseTrace:
    """Decode one verse conditioned on the input text."""
    input_tokens = tokenize(input_text)
    if not input_tokens:
        raise GenerationError("input text produced no tokens")
    references = {
        norm for tok in input_tokens if (norm := normalize_token(tok))
    }
    state = GenerationState(
        reference_tokens=references, generated=[], cumulative_rhyme_count=0
    )
    eos = backend.eos_token
    steps: list[StepTrace] = []
    while len(state.generated) < config.max_tokens:
        context = LmContext.for_generation(input_tokens, state.generated)
        candidates = backend.top_k(context, config.k)
        filtered = [
            c
            for c in candidates
            if c.token != SEP_TOKEN
            and (c.token != eos or len(state.generated) >= config.min_tokens)
        ]
        if not filtered:
            raise GenerationError("vocabulary exhausted")
        ranked = rerank(filtered, state, lexicon, vowels, config.rhyme_weight)
        best = ranked[0]
        steps.append(
            StepTrace(
                context_length=len(context.tokens),
                candidates=tuple(ranked),
                chosen=best.token,
            )
        )
        if best.token == eos:
            break
        state.generated.append(best.token)
        state.cumulative_rhyme_count += best.indicator
        norm = normalize_token(best.token)
        if norm:
            state.reference_tokens.add(norm)
    return VerseTrace(
        input_text=input_text,
        tokens=tuple(state.generated),
        text=detokenize(state.generated),
        rhyme_count=state.cumulative_rhyme_count,
        steps=tuple(steps),
    )


def generate_poem(
    keywords: KeywordSet,
    backend: LmBackend,
    lexicon: Lexicon,
    vowels: VowelSet,
    config: GenerationConfig,
) -> Poem:
    """Chain verses: keywords feed verse 1, each verse feeds the next."""
    traces: list[VerseTrace] = []
    verses: list[str] = []
    input_text = keywords.joined()
    for _ in range(config.n_verses):
        try:
            trace = generate_verse(input_text, backend, lexicon, vowels, config)
        except GenerationError as exc:
            exc.partial = tuple(traces)
            raise
        traces.append(trace)
        verses.append(trace.text)
        input_text = trace.text
    return Poem(keywords=keywords, verses=tuple(verses), traces=tuple(traces))
