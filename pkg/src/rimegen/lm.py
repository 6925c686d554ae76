"""Interpolated n-gram language model over keyword/verse pairs.

The model scores sequences of the form ``input <sep> output <eos>`` with
absolute discounting at every order, backing off recursively down to a
uniform floor over the vocabulary, so every probability is strictly
positive and logprobs stay finite.
"""

from __future__ import annotations

import json
import math
import re
import unicodedata
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Protocol, Sequence

from rimegen.corpus import TrainingPair

SEP_TOKEN = "<sep>"
EOS_TOKEN = "<eos>"
DEFAULT_ORDER = 3
DEFAULT_DISCOUNT = 0.75

_MAGIC = "rimegen-ngram"
_FILE_VERSION = 1

# Any run of backslashes followed by a reserved spelling must gain one
# more backslash, so unescaping stays unambiguous.
_RESERVED_RE = re.compile(
    r"\\*(?:%s|%s)\Z" % (re.escape(SEP_TOKEN), re.escape(EOS_TOKEN))
)
# Split after an apostrophe when a letter follows: l'amant -> l' + amant.
_CLITIC_RE = re.compile(r"(?<=['\u2019])(?=[^\W\d_])")


class LmError(Exception):
    """Raised for unusable training inputs or model files."""


def tokenize(text: str) -> list[str]:
    """Split text into word and punctuation tokens.

    Whitespace separates chunks; punctuation is peeled off chunk edges
    one character at a time; apostrophe clitics split after the
    apostrophe. Interior hyphens stay inside their word.
    """
    tokens: list[str] = []
    for chunk in text.split():
        start, stop = 0, len(chunk)
        while start < stop and _is_punct(chunk[start]):
            start += 1
        while stop > start and _is_punct(chunk[stop - 1]):
            stop -= 1
        tokens.extend(chunk[:start])
        core = chunk[start:stop]
        if core:
            tokens.extend(_CLITIC_RE.split(core))
        tokens.extend(chunk[stop:])
    return tokens


def _is_punct(char: str) -> bool:
    return unicodedata.category(char).startswith("P")


def escape_reserved(tokens: Iterable[str]) -> list[str]:
    """Prefix a backslash to tokens that would collide with markers."""
    return [
        "\\" + token if _RESERVED_RE.fullmatch(token) else token
        for token in tokens
    ]


@dataclass(frozen=True)
class TokenCandidate:
    """One next-token proposal from a backend."""

    token: str
    logprob: float

    def __post_init__(self) -> None:
        if not math.isfinite(self.logprob):
            raise ValueError(f"non-finite logprob for token {self.token!r}")


@dataclass(frozen=True)
class LmContext:
    """Conditioning sequence: escaped input, one separator, escaped output."""

    tokens: tuple[str, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "tokens", tuple(self.tokens))
        if self.tokens.count(SEP_TOKEN) != 1:
            raise ValueError("context must contain exactly one separator")

    @classmethod
    def for_generation(
        cls,
        input_tokens: Sequence[str],
        generated_tokens: Sequence[str] = (),
    ) -> "LmContext":
        return cls(
            tuple(escape_reserved(input_tokens))
            + (SEP_TOKEN,)
            + tuple(escape_reserved(generated_tokens))
        )

    def extended(self, token: str) -> "LmContext":
        return LmContext(self.tokens + (token,))


class LmBackend(Protocol):
    """What the generator needs from any next-token source."""

    @property
    def eos_token(self) -> str: ...

    def top_k(self, context: LmContext, k: int) -> list[TokenCandidate]: ...


def encode_pair(pair: TrainingPair) -> list[str]:
    tokens = escape_reserved(tokenize(pair.input))
    tokens.append(SEP_TOKEN)
    tokens.extend(escape_reserved(tokenize(pair.output)))
    tokens.append(EOS_TOKEN)
    return tokens


class NgramModel:
    """Count-based model with absolute discounting and exact top-k."""

    def __init__(
        self,
        order: int,
        discount: float,
        counts: Sequence[dict[tuple[str, ...], Counter]],
        seed: int = 0,
    ) -> None:
        if order < 2:
            raise ValueError("order must be at least 2")
        if not 0.0 < discount < 1.0:
            raise ValueError("discount must be strictly between 0 and 1")
        if len(counts) != order or () not in counts[0]:
            raise LmError("count tables do not match the model order")
        self.order = order
        self.discount = discount
        self.seed = seed
        self._levels: list[dict[tuple[str, ...], tuple[Counter, int, int]]] = [
            {
                ctx: (counter, sum(counter.values()), len(counter))
                for ctx, counter in counts[length].items()
            }
            for length in range(order)
        ]
        self._unigram = counts[0][()]
        self.vocab: tuple[str, ...] = tuple(sorted(self._unigram))
        # Tokens absent from every matched context rank purely by
        # unigram count, so this order bounds the exact top-k search.
        self._unigram_rank = sorted(
            self.vocab, key=lambda t: (-self._unigram[t], t)
        )

    @property
    def eos_token(self) -> str:
        return EOS_TOKEN

    @property
    def sep_token(self) -> str:
        return SEP_TOKEN

    def _chain(
        self, context_tokens: Sequence[str]
    ) -> list[tuple[Counter, int, int]]:
        use = tuple(context_tokens)[max(0, len(context_tokens) - self.order + 1):]
        chain = []
        for length in range(len(use), -1, -1):
            entry = self._levels[length].get(use[len(use) - length:])
            if entry is not None:
                chain.append(entry)
        return chain

    def prob(self, token: str, context_tokens: Sequence[str]) -> float:
        p = 0.0
        coef = 1.0
        for counter, total, distinct in self._chain(context_tokens):
            count = counter.get(token, 0)
            if count:
                p += coef * max(count - self.discount, 0.0) / total
            coef *= self.discount * distinct / total
        return p + coef / len(self.vocab)

    def full_distribution(self, context: LmContext) -> dict[str, float]:
        probs = dict.fromkeys(self.vocab, 0.0)
        coef = 1.0
        for counter, total, distinct in self._chain(context.tokens):
            scale = coef / total
            for token, count in counter.items():
                probs[token] += (count - self.discount) * scale
            coef *= self.discount * distinct / total
        floor = coef / len(self.vocab)
        for token in probs:
            probs[token] += floor
        return probs

    def top_k(self, context: LmContext, k: int) -> list[TokenCandidate]:
        """Exact k best next tokens, ties broken by token string.

        Only tokens seen in some matched context plus a bounded prefix
        of the unigram ranking can reach the top k, so the search never
        touches the whole vocabulary.
        """
        if k < 1:
            raise ValueError("k must be at least 1")
        chain = self._chain(context.tokens)
        extras: dict[str, float] = {}
        coef = 1.0
        for counter, total, distinct in chain[:-1]:
            scale = coef / total
            for token, count in counter.items():
                extras[token] = (
                    extras.get(token, 0.0) + (count - self.discount) * scale
                )
            coef *= self.discount * distinct / total
        _, uni_total, uni_distinct = chain[-1]
        uni_scale = coef / uni_total
        floor = coef * self.discount * uni_distinct / uni_total / len(self.vocab)

        needed = min(k, len(self.vocab))
        pool = set(extras)
        pool.update(self._unigram_rank[: needed + len(extras)])
        scored = {
            token: extras.get(token, 0.0)
            + max(self._unigram[token] - self.discount, 0.0) * uni_scale
            + floor
            for token in pool
        }
        ranked = sorted(scored.items(), key=lambda kv: (-kv[1], kv[0]))
        return [
            TokenCandidate(token, math.log(p)) for token, p in ranked[:needed]
        ]

    def sequence_logprob(self, tokens: Sequence[str]) -> float:
        return sum(
            math.log(self.prob(token, tokens[:i]))
            for i, token in enumerate(tokens)
        )

    def perplexity(self, pairs: Iterable[TrainingPair]) -> float:
        total = 0.0
        n_tokens = 0
        for pair in pairs:
            seq = encode_pair(pair)
            total += self.sequence_logprob(seq)
            n_tokens += len(seq)
        if n_tokens == 0:
            raise LmError("no tokens to score")
        return math.exp(-total / n_tokens)

    def save(self, path: str | Path) -> None:
        header = {
            "format": _MAGIC,
            "version": _FILE_VERSION,
            "order": self.order,
            "discount": self.discount,
            "seed": self.seed,
            "vocab_size": len(self.vocab),
        }
        lines = [json.dumps(header, ensure_ascii=False, sort_keys=True)]
        for length, level in enumerate(self._levels):
            for ctx in sorted(level):
                record = {
                    "n": length,
                    "context": list(ctx),
                    "counts": dict(sorted(level[ctx][0].items())),
                }
                lines.append(json.dumps(record, ensure_ascii=False, sort_keys=True))
        Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "NgramModel":
        try:
            text = Path(path).read_text(encoding="utf-8")
        except (OSError, UnicodeDecodeError) as exc:
            raise LmError(f"cannot read model file: {exc}") from exc
        lines = text.splitlines()
        if not lines:
            raise LmError("empty model file")
        header = _parse_record(lines[0], 1)
        if header.get("format") != _MAGIC:
            raise LmError("not a rimegen n-gram model file")
        if header.get("version") != _FILE_VERSION:
            raise LmError(f"unsupported model file version {header.get('version')!r}")
        try:
            order = int(header["order"])
            discount = float(header["discount"])
            seed = int(header["seed"])
        except (KeyError, TypeError, ValueError) as exc:
            raise LmError(f"malformed model header: {exc}") from exc
        counts: list[dict[tuple[str, ...], Counter]] = [{} for _ in range(order)]
        for lineno, line in enumerate(lines[1:], start=2):
            record = _parse_record(line, lineno)
            try:
                length = record["n"]
                ctx = tuple(record["context"])
                table = record["counts"]
            except (KeyError, TypeError) as exc:
                raise LmError(f"model file line {lineno}: {exc}") from exc
            if (
                not isinstance(length, int)
                or not 0 <= length < order
                or len(ctx) != length
                or not all(isinstance(t, str) for t in ctx)
                or not isinstance(table, dict)
                or not all(
                    isinstance(t, str) and isinstance(c, int) and c > 0
                    for t, c in table.items()
                )
            ):
                raise LmError(f"model file line {lineno}: malformed count record")
            counts[length][ctx] = Counter(table)
        if () not in counts[0]:
            raise LmError("model file is missing unigram counts")
        vocab = set(counts[0][()])
        for level in counts[1:]:
            for counter in level.values():
                if not vocab.issuperset(counter):
                    raise LmError("model file counts a token with no unigram entry")
        return cls(order, discount, counts, seed=seed)


def _parse_record(line: str, lineno: int) -> dict:
    try:
        record = json.loads(line)
    except json.JSONDecodeError as exc:
        raise LmError(f"model file line {lineno}: not valid JSON") from exc
    if not isinstance(record, dict):
        raise LmError(f"model file line {lineno}: expected a JSON object")
    return record


def train_ngram(
    pairs: Sequence[TrainingPair],
    order: int = DEFAULT_ORDER,
    discount: float = DEFAULT_DISCOUNT,
    seed: int = 0,
) -> NgramModel:
    """Count n-grams of every length up to ``order`` over encoded pairs."""
    if order < 2:
        raise ValueError("order must be at least 2")
    pairs = list(pairs)
    if not pairs:
        raise LmError("no training pairs")
    counts: list[dict[tuple[str, ...], Counter]] = [{} for _ in range(order)]
    for pair in pairs:
        seq = encode_pair(pair)
        for i, token in enumerate(seq):
            for length in range(min(i, order - 1) + 1):
                ctx = tuple(seq[i - length : i])
                counts[length].setdefault(ctx, Counter())[token] += 1
    return NgramModel(order, discount, counts, seed=seed)
