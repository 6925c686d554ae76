"""Phonetic rhyme analysis over IPA pronunciation strings.

Pronunciations are compared segment-wise, where a segment is one base
character plus any combining marks (so a nasal vowel written as a base
vowel with a combining tilde counts as a single unit). Three relations
are recognized between a pair of pronunciations after they have been
equalized in length: full rhyme, assonance, and consonance. A pair that
is identical after equalization is never considered a rhyme.
"""
from __future__ import annotations

import functools
import unicodedata
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import BinaryIO, Iterator

__all__ = [
    "IpaString",
    "VowelSet",
    "RhymeRelation",
    "Lexicon",
    "LexiconError",
    "parse_ipa",
    "equalize",
    "classify",
    "load_lexicon",
    "rhymes_any",
    "normalize_token",
]

_COMBINING_CATEGORIES = ("Mn", "Mc", "Me")

CONSONANT_PLACEHOLDER = "C"
VOWEL_PLACEHOLDER = "V"


class LexiconError(Exception):
    """Raised when a pronunciation lexicon file cannot be parsed."""


@dataclass(frozen=True)
class IpaString:
    """A pronunciation as an ordered sequence of phonetic segments."""

    segments: tuple[str, ...]

    def __len__(self) -> int:
        return len(self.segments)

    def __str__(self) -> str:
        return "".join(self.segments)

    def __iter__(self) -> Iterator[str]:
        return iter(self.segments)


@dataclass(frozen=True)
class VowelSet:
    """IPA base characters classified as vowels.

    Classification looks only at a segment's base character: combining
    marks are ignored, and precomposed characters are decomposed first,
    so a nasal vowel is a vowel whether or not its tilde is fused.
    """

    vowels: frozenset[str]

    def __post_init__(self) -> None:
        if not self.vowels:
            raise ValueError("vowel set must not be empty")

    def is_vowel(self, segment: str) -> bool:
        return _base_character(segment) in self.vowels

    @classmethod
    def from_file(cls, path: str | Path) -> "VowelSet":
        chars = []
        for line in Path(path).read_text(encoding="utf-8").splitlines():
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            chars.append(unicodedata.normalize("NFC", line))
        return cls(frozenset(chars))

    @classmethod
    def default(cls) -> "VowelSet":
        """The shipped inventory of French oral and nasal vowel bases."""
        text = resources.files("rimegen.data").joinpath("vowels_fr.txt").read_text("utf-8")
        chars = [ln.strip() for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
        return cls(frozenset(chars))


@dataclass(frozen=True)
class RhymeRelation:
    """Classification outcome between two pronunciations."""

    full: bool
    assonance: bool
    consonance: bool

    @property
    def any(self) -> bool:
        return self.full or self.assonance or self.consonance


_NO_RHYME = RhymeRelation(False, False, False)


def _base_character(segment: str) -> str:
    decomposed = unicodedata.normalize("NFD", segment)
    for ch in decomposed:
        if unicodedata.category(ch) not in _COMBINING_CATEGORIES:
            return ch
    return decomposed[:1]


def parse_ipa(raw: str) -> IpaString:
    """Split a raw IPA string into segments.

    The input is NFC-normalized, then grouped into clusters of one base
    character plus any trailing combining marks. Concatenating the
    segments reproduces the normalized input.
    """
    normalized = unicodedata.normalize("NFC", raw)
    segments: list[str] = []
    for ch in normalized:
        if segments and unicodedata.category(ch) in _COMBINING_CATEGORIES:
            segments[-1] += ch
        else:
            segments.append(ch)
    return IpaString(tuple(segments))


def equalize(a: IpaString, b: IpaString) -> tuple[IpaString, IpaString]:
    """Trim the longer pronunciation from the front to equal lengths."""
    if len(a) > len(b):
        a = IpaString(a.segments[len(a) - len(b):])
    elif len(b) > len(a):
        b = IpaString(b.segments[len(b) - len(a):])
    return a, b


def classify(a: IpaString, b: IpaString, vowels: VowelSet) -> RhymeRelation:
    """Classify the rhyme relation between two pronunciations.

    Operates on the equalized pair. Full rhyme requires identical
    suffixes from the earliest first-vowel position; assonance requires
    identical strings after masking consonants (and at least one vowel);
    consonance requires identical strings after masking vowels (and at
    least one consonant). Equalized-identical pairs yield all-false.
    """
    return _classify_cached(a.segments, b.segments, vowels)


@functools.lru_cache(maxsize=1 << 16)
def _classify_cached(
    seg_a: tuple[str, ...], seg_b: tuple[str, ...], vowels: VowelSet
) -> RhymeRelation:
    a, b = equalize(IpaString(seg_a), IpaString(seg_b))
    if a.segments == b.segments:
        return _NO_RHYME

    vowel_mask_a = tuple(vowels.is_vowel(s) for s in a.segments)
    vowel_mask_b = tuple(vowels.is_vowel(s) for s in b.segments)

    full = False
    if any(vowel_mask_a) and any(vowel_mask_b):
        i = min(vowel_mask_a.index(True), vowel_mask_b.index(True))
        full = a.segments[i:] == b.segments[i:]

    masked_cons_a = tuple(s if v else CONSONANT_PLACEHOLDER for s, v in zip(a.segments, vowel_mask_a))
    masked_cons_b = tuple(s if v else CONSONANT_PLACEHOLDER for s, v in zip(b.segments, vowel_mask_b))
    assonance = masked_cons_a == masked_cons_b and any(vowel_mask_a)

    masked_vow_a = tuple(VOWEL_PLACEHOLDER if v else s for s, v in zip(a.segments, vowel_mask_a))
    masked_vow_b = tuple(VOWEL_PLACEHOLDER if v else s for s, v in zip(b.segments, vowel_mask_b))
    consonance = masked_vow_a == masked_vow_b and not all(vowel_mask_a)

    return RhymeRelation(full, assonance, consonance)


def normalize_token(token: str) -> str:
    """Canonical lexicon key: NFC, edge punctuation stripped, lowercased."""
    token = unicodedata.normalize("NFC", token).strip()
    start, end = 0, len(token)
    while start < end and unicodedata.category(token[start]).startswith("P"):
        start += 1
    while end > start and unicodedata.category(token[end - 1]).startswith("P"):
        end -= 1
    return token[start:end].lower()


@dataclass(frozen=True)
class Lexicon:
    """Read-only map from normalized tokens to pronunciations."""

    entries: dict[str, IpaString] = field(default_factory=dict)

    def lookup(self, token: str) -> IpaString | None:
        """Pronunciation for a token, or None when the lexicon has none."""
        return self.entries.get(normalize_token(token))

    def __len__(self) -> int:
        return len(self.entries)

    @classmethod
    def from_file(cls, path: str | Path) -> "Lexicon":
        with open(path, "rb") as stream:
            return load_lexicon(stream)


def load_lexicon(source: BinaryIO) -> Lexicon:
    """Parse a lexicon from a UTF-8 TSV byte stream.

    Each line holds ``token<TAB>ipa``; ``#``-prefixed and blank lines are
    ignored; later duplicate keys overwrite earlier ones.
    """
    entries: dict[str, IpaString] = {}
    for lineno, raw in enumerate(source.read().split(b"\n"), start=1):
        try:
            line = raw.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise LexiconError(f"line {lineno}: invalid UTF-8 at byte {exc.start}") from exc
        if not line.strip() or line.startswith("#"):
            continue
        fields = line.rstrip("\r").split("\t")
        if len(fields) != 2:
            raise LexiconError(
                f"line {lineno}: expected 2 tab-separated fields, got {len(fields)}"
            )
        token, ipa = fields
        key = normalize_token(token)
        if not key:
            raise LexiconError(f"line {lineno}: token normalizes to empty string")
        entries[key] = parse_ipa(ipa.strip())
    return Lexicon(entries)


def rhymes_any(token_a: str, token_b: str, lex: Lexicon, vowels: VowelSet) -> bool:
    """Whether two orthographic tokens stand in any rhyme relation.

    False when either token has no pronunciation or when the tokens
    normalize to the same string.
    """
    norm_a = normalize_token(token_a)
    norm_b = normalize_token(token_b)
    if not norm_a or not norm_b or norm_a == norm_b:
        return False
    pron_a = lex.entries.get(norm_a)
    pron_b = lex.entries.get(norm_b)
    if pron_a is None or pron_b is None:
        return False
    return classify(pron_a, pron_b, vowels).any
