"""Small text helpers shared by the label tables."""

from __future__ import annotations

import re
import unicodedata

_TR_FOLD = str.maketrans({"ğ": "g", "ı": "i", "ş": "s", "ö": "o", "ü": "u", "ç": "c", "â": "a", "î": "i", "û": "u"})
_WORD = re.compile(r"[^\W\d_]+", re.UNICODE)


def fold(text: str) -> str:
    """Turkish-aware case fold that also strips diacritics.

    ``"İnce"``, ``"INCE"`` and ``"ınce"`` all fold to ``"ince"``, which is what
    speech-to-text output and hand-typed replies need.
    """
    text = text.replace("İ", "i").replace("I", "ı").lower()
    text = unicodedata.normalize("NFD", text.translate(_TR_FOLD))
    text = "".join(ch for ch in text if not unicodedata.combining(ch))
    return " ".join(text.split())


def words(text: str) -> list[str]:
    """Folded alphabetic tokens; apostrophe suffixes become separate tokens."""
    return _WORD.findall(fold(text))


def keyword_hit(keyword: str, tokens: list[str]) -> bool:
    """True if a folded keyword (possibly multi-word) occurs in ``tokens``.

    Keywords of five or more letters also match as a token prefix so that
    inflected forms ("erdoğana", "liderlik") are found.
    """
    parts = keyword.split()
    n = len(parts)
    for i in range(len(tokens) - n + 1):
        window = tokens[i : i + n]
        if window[:-1] != parts[:-1]:
            continue
        last, want = window[-1], parts[-1]
        if last == want or (len(want) >= 5 and last.startswith(want)):
            return True
    return False


def load_arrow_table(text: str) -> list[tuple[int, str, str]]:
    """Parse ``left => right`` lines, skipping blanks and ``#`` comments.

    Returns ``(line_number, left, right)`` triples in file order.
    """
    out = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=>" not in stripped:
            raise ValueError(f"line {lineno}: expected 'raw => Canonical', got {line!r}")
        left, right = stripped.split("=>", 1)
        left, right = left.strip(), right.strip()
        if not left or not right:
            raise ValueError(f"line {lineno}: empty side in {line!r}")
        out.append((lineno, left, right))
    return out
