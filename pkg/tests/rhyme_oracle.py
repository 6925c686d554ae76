"""Brute-force rhyme classifier used as an independent test oracle.

Operates on plain strings whose characters are single-codepoint segments;
performs the trim/mask/compare steps literally, with no shared code with
the package implementation.
"""


def oracle_classify(a: str, b: str, vowels: set[str]) -> tuple[bool, bool, bool]:
    """Return (full, assonance, consonance) for two segment strings."""
    # Trim the longer string from the front until lengths match.
    if len(a) > len(b):
        a = a[len(a) - len(b):]
    elif len(b) > len(a):
        b = b[len(b) - len(a):]

    # Identical strings never rhyme with themselves.
    if a == b:
        return (False, False, False)

    full = False
    first_vowel_a = next((i for i, ch in enumerate(a) if ch in vowels), None)
    first_vowel_b = next((i for i, ch in enumerate(b) if ch in vowels), None)
    if first_vowel_a is not None and first_vowel_b is not None:
        i = min(first_vowel_a, first_vowel_b)
        full = a[i:] == b[i:]

    masked_cons_a = "".join("C" if ch not in vowels else ch for ch in a)
    masked_cons_b = "".join("C" if ch not in vowels else ch for ch in b)
    assonance = masked_cons_a == masked_cons_b and any(ch in vowels for ch in a)

    masked_vow_a = "".join("V" if ch in vowels else ch for ch in a)
    masked_vow_b = "".join("V" if ch in vowels else ch for ch in b)
    consonance = masked_vow_a == masked_vow_b and any(ch not in vowels for ch in a)

    return (full, assonance, consonance)
