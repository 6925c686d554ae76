"""Poem corpus ingestion: cleaning, stanza splitting, keyword extraction,
training-pair construction, and train/validation splitting.

The cleaned character repertoire is an allowlist: Latin-script letters,
punctuation, decimal digits, and whitespace. Dash, quote, and space
variants are unified before filtering, so the surviving punctuation is
plain ASCII dashes and straight quotes.
"""
from __future__ import annotations

import functools
import json
import math
import random
import re
import unicodedata
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from pathlib import Path

from .phonetics import normalize_token

__all__ = [
    "CorpusError",
    "KeywordError",
    "Stanza",
    "KeywordSet",
    "TrainingPair",
    "CorpusStats",
    "clean_text",
    "split_stanzas",
    "extract_keywords",
    "build_pairs",
    "split_train_val",
    "build_stats",
    "word_tokens",
    "ingest_dir",
    "read_poem_text",
    "write_stanzas",
    "read_stanzas",
    "write_keywords",
    "read_keywords",
    "write_pairs",
    "read_pairs",
]

MAX_KEYWORDS = 4


class CorpusError(Exception):
    """Raised for unreadable or malformed corpus inputs."""


class KeywordError(CorpusError):
    """Raised when a stanza yields no keyword candidates."""


@dataclass(frozen=True)
class Stanza:
    id: str
    source: str
    lines: tuple[str, ...]

    def __post_init__(self) -> None:
        if not self.lines or any(not ln.strip() for ln in self.lines):
            raise ValueError("stanza lines must be non-empty")

    def text(self) -> str:
        return "\n".join(self.lines)


@dataclass(frozen=True)
class KeywordSet:
    keywords: tuple[str, ...]

    def __post_init__(self) -> None:
        if not 1 <= len(self.keywords) <= MAX_KEYWORDS:
            raise ValueError(f"keyword count must be 1..{MAX_KEYWORDS}")
        if len(set(self.keywords)) != len(self.keywords):
            raise ValueError("duplicate keywords")
        if any(k != k.lower() for k in self.keywords):
            raise ValueError("keywords must be lowercase")

    def joined(self) -> str:
        return " ".join(self.keywords)


@dataclass(frozen=True)
class TrainingPair:
    input: str
    output: str

    def __post_init__(self) -> None:
        if not self.output:
            raise ValueError("pair output must be non-empty")


@dataclass(frozen=True)
class CorpusStats:
    """Per-token document frequency over stanzas."""

    n_stanzas: int
    doc_freq: Counter


# Dash variants outside the Pd category that still read as dashes.
_EXTRA_DASHES = {"−"}  # minus sign

_SINGLE_QUOTES = set("‘’‚‛′‵‹›ʼʹ`´")
_DOUBLE_QUOTES = set("“”„‟″«»")


@functools.lru_cache(maxsize=4096)
def _map_char(ch: str) -> str | None:
    """Cleaned replacement for a single character, or None to drop it.

    Combining marks are handled by the caller (they depend on context);
    this covers everything else.
    """
    if ch == "\n":
        return "\n"
    if ch in _SINGLE_QUOTES:
        return "'"
    if ch in _DOUBLE_QUOTES:
        return '"'
    cat = unicodedata.category(ch)
    if cat == "Pd" or ch in _EXTRA_DASHES:
        return "-"
    if cat == "Zs" or ch == "\t":
        return " "
    if cat.startswith("L"):
        return ch if "LATIN" in unicodedata.name(ch, "") else None
    if cat.startswith("P"):
        return ch
    if cat == "Nd":
        return ch
    return None


def clean_text(raw: str) -> str:
    """Normalize a poem text to the cleaned repertoire.

    NFC normalization, unified dashes/quotes/spaces, non-Latin letters
    dropped, space runs collapsed per line, line structure preserved.
    Idempotent.
    """
    text = unicodedata.normalize("NFC", raw)
    text = text.replace("\r\n", "\n").replace("\r", "\n")
    out: list[str] = []
    prev_kept_letter = False
    for ch in text:
        cat = unicodedata.category(ch)
        if cat in ("Mn", "Mc", "Me"):
            # Keep a combining mark only on a surviving letter; NFC has
            # already fused every precomposable pair, so what remains
            # cannot compose on a second pass.
            if prev_kept_letter:
                out.append(ch)
            continue
        mapped = _map_char(ch)
        if mapped is not None:
            out.append(mapped)
        prev_kept_letter = mapped is not None and cat.startswith("L")
    lines = "".join(out).split("\n")
    return "\n".join(re.sub(r" +", " ", line).strip() for line in lines)


def read_poem_text(path: str | Path) -> str:
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        raise CorpusError(f"{path}: {exc}") from exc
    try:
        return data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise CorpusError(f"{path}: invalid UTF-8 at byte {exc.start}") from exc


def split_stanzas(poem_lines: list[str], source: str) -> list[Stanza]:
    """Group cleaned lines into stanzas at blank-line boundaries."""
    stanzas: list[Stanza] = []
    current: list[str] = []
    for line in poem_lines:
        if line.strip():
            current.append(line)
        elif current:
            stanzas.append(Stanza(f"{source}:{len(stanzas) + 1}", source, tuple(current)))
            current = []
    if current:
        stanzas.append(Stanza(f"{source}:{len(stanzas) + 1}", source, tuple(current)))
    return stanzas


_WORD_RE = re.compile(r"[^\W\d_]+")


def word_tokens(text: str) -> list[str]:
    """Alphabetic word runs; clitic apostrophes split words apart."""
    return _WORD_RE.findall(text)


@functools.lru_cache(maxsize=1)
def default_stopwords() -> frozenset[str]:
    text = resources.files("rimegen.data").joinpath("stopwords_fr.txt").read_text("utf-8")
    return frozenset(
        ln.strip() for ln in text.splitlines() if ln.strip() and not ln.startswith("#")
    )


def build_stats(stanzas: list[Stanza]) -> CorpusStats:
    doc_freq: Counter = Counter()
    for stanza in stanzas:
        seen = {w.lower() for w in word_tokens(stanza.text())}
        doc_freq.update(seen)
    return CorpusStats(n_stanzas=len(stanzas), doc_freq=doc_freq)


def extract_keywords(
    stanza: Stanza,
    stats: CorpusStats,
    max_k: int = MAX_KEYWORDS,
    stopwords: frozenset[str] | None = None,
) -> KeywordSet:
    """Up to ``max_k`` content words ranked by TF-IDF.

    Candidates are lowercased words of length >= 3 outside the stopword
    list. Ties break by earliest position in the stanza, then
    lexicographically.
    """
    if stopwords is None:
        stopwords = default_stopwords()
    tf: Counter = Counter()
    first_pos: dict[str, int] = {}
    for pos, word in enumerate(word_tokens(stanza.text())):
        word = word.lower()
        if len(word) < 3 or word in stopwords:
            continue
        tf[word] += 1
        first_pos.setdefault(word, pos)
    if not tf:
        raise KeywordError(f"no keywords extractable from stanza {stanza.id}")

    def idf(word: str) -> float:
        return math.log((1 + stats.n_stanzas) / (1 + stats.doc_freq[word])) + 1.0

    ranked = sorted(tf, key=lambda w: (-tf[w] * idf(w), first_pos[w], w))
    return KeywordSet(tuple(ranked[: max(1, max_k)]))


def build_pairs(stanza: Stanza, keywords: KeywordSet | None) -> list[TrainingPair]:
    """Seq2seq pairs for one stanza: keywords -> first line, then each
    line -> next line. Without keywords only the verse pairs are built."""
    pairs: list[TrainingPair] = []
    if keywords is not None:
        pairs.append(TrainingPair(keywords.joined(), stanza.lines[0]))
    for prev, cur in zip(stanza.lines, stanza.lines[1:]):
        pairs.append(TrainingPair(prev, cur))
    return pairs


def split_train_val(
    stanzas: list[Stanza], ratio: float = 0.8, seed: int = 0
) -> tuple[list[Stanza], list[Stanza]]:
    """Deterministic shuffled split with |train| = floor(ratio * N)."""
    if not 0 < ratio < 1:
        raise ValueError("ratio must be strictly between 0 and 1")
    shuffled = list(stanzas)
    random.Random(seed).shuffle(shuffled)
    n_train = math.floor(Fraction(str(ratio)) * len(shuffled))
    return shuffled[:n_train], shuffled[n_train:]


@dataclass
class IngestResult:
    stanzas: list[Stanza]
    n_files: int
    n_poems: int
    skipped: list[str] = field(default_factory=list)


def ingest_dir(in_dir: str | Path) -> IngestResult:
    """Clean and split every ``.txt`` poem file in a directory.

    One file is one poem; unreadable files are skipped and reported.
    """
    in_dir = Path(in_dir)
    files = sorted(in_dir.glob("*.txt"))
    stanzas: list[Stanza] = []
    skipped: list[str] = []
    n_poems = 0
    for path in files:
        try:
            raw = read_poem_text(path)
        except CorpusError as exc:
            skipped.append(str(exc))
            continue
        n_poems += 1
        cleaned = clean_text(raw)
        stanzas.extend(split_stanzas(cleaned.split("\n"), path.stem))
    return IngestResult(stanzas=stanzas, n_files=len(files), n_poems=n_poems, skipped=skipped)


def _write_jsonl(path: str | Path, records) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for record in records:
            fh.write(json.dumps(record, ensure_ascii=False) + "\n")


def _read_jsonl(path: str | Path) -> list[dict]:
    records = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusError(f"{path}: line {lineno}: not a JSON record") from exc
            if not isinstance(record, dict):
                raise CorpusError(f"{path}: line {lineno}: expected an object")
            records.append(record)
    return records


def write_stanzas(path: str | Path, stanzas: list[Stanza]) -> None:
    _write_jsonl(
        path,
        ({"id": s.id, "source": s.source, "lines": list(s.lines)} for s in stanzas),
    )


def read_stanzas(path: str | Path) -> list[Stanza]:
    stanzas = []
    for record in _read_jsonl(path):
        try:
            stanzas.append(Stanza(record["id"], record["source"], tuple(record["lines"])))
        except (KeyError, TypeError, ValueError) as exc:
            raise CorpusError(f"{path}: bad stanza record: {exc}") from exc
    return stanzas


def write_keywords(path: str | Path, keyword_map: dict[str, KeywordSet]) -> None:
    _write_jsonl(
        path,
        ({"id": sid, "keywords": list(ks.keywords)} for sid, ks in keyword_map.items()),
    )


def read_keywords(path: str | Path) -> dict[str, KeywordSet]:
    out: dict[str, KeywordSet] = {}
    for record in _read_jsonl(path):
        try:
            out[record["id"]] = KeywordSet(tuple(record["keywords"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise CorpusError(f"{path}: bad keyword record: {exc}") from exc
    return out


def write_pairs(path: str | Path, pairs: list[TrainingPair]) -> None:
    _write_jsonl(path, ({"input": p.input, "output": p.output} for p in pairs))


def read_pairs(path: str | Path) -> list[TrainingPair]:
    pairs = []
    for record in _read_jsonl(path):
        try:
            pairs.append(TrainingPair(record["input"], record["output"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise CorpusError(f"{path}: bad pair record: {exc}") from exc
    return pairs


def corpus_keywords(stanzas: list[Stanza], stats: CorpusStats) -> dict[str, KeywordSet]:
    """Keyword sets for every stanza that yields candidates."""
    out: dict[str, KeywordSet] = {}
    for stanza in stanzas:
        try:
            out[stanza.id] = extract_keywords(stanza, stats)
        except KeywordError:
            continue
    return out
