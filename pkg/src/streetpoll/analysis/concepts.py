"""Concept canonicalization and inventory coverage."""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping

from .._text import load_arrow_table
from ..corpus import Concept, ConceptInventory, ConceptLabel

MERGE_MAP_NAME = "merge_map.txt"


def _key(text: str) -> str:
    return " ".join(text.split()).casefold()


@dataclass(frozen=True)
class MergeMap:
    """Reviewed free-form string → canonical concept table.

    Targets are canonical concepts only, so chains cannot form. Lookup of an
    unlisted string gives None; :func:`canonicalize_concept` turns that into Other.
    """

    entries: Mapping[str, Concept]

    def lookup(self, raw: str) -> Concept | None:
        return self.entries.get(_key(raw))

    @classmethod
    def parse(cls, text: str) -> "MergeMap":
        entries: dict[str, Concept] = {}
        for lineno, left, right in load_arrow_table(text):
            try:
                entries[_key(left)] = Concept.from_name(right)
            except ValueError as exc:
                raise ValueError(f"line {lineno}: {exc}") from None
        return cls(entries)

    @classmethod
    def load(cls, path: str | Path) -> "MergeMap":
        return cls.parse(Path(path).read_text(encoding="utf-8"))

    @classmethod
    def default(cls) -> "MergeMap":
        return cls.parse(resources.files("streetpoll.data").joinpath(MERGE_MAP_NAME).read_text("utf-8"))


def canonicalize_concept(
    raw: str, merge_map: MergeMap | None = None, inventory: ConceptInventory | None = None
) -> ConceptLabel:
    """Map a backend concept string onto the inventory.

    Order: exact inventory name (case and spacing ignored), then the merge
    map, then Other. ``raw`` is kept verbatim on the returned label.
    """
    merge_map = merge_map if merge_map is not None else MergeMap.default()
    allowed = set(inventory.concepts) if inventory is not None else set(Concept)
    allowed |= {Concept.OTHER, Concept.UNDECIDED}
    text = raw.strip()
    try:
        exact = Concept.from_name(text)
    except ValueError:
        exact = None
    if exact is not None and exact in allowed:
        return ConceptLabel(exact, raw)
    merged = merge_map.lookup(text)
    if merged is not None and merged in allowed:
        return ConceptLabel(merged, raw)
    return ConceptLabel(Concept.OTHER, raw)


def coverage_fraction(concepts: Iterable[Concept | None], inventory: ConceptInventory | None = None) -> float:
    """Fraction of motivated respondents whose concept is in the inventory.

    Absent concepts (no reason given) and Undecided are not motivations and
    are left out of the denominator. Returns 0.0 when nothing is left.
    """
    named = set(inventory.concepts) if inventory is not None else {c for c in Concept if c.named}
    motivated = [c for c in concepts if c is not None and c is not Concept.UNDECIDED]
    if not motivated:
        return 0.0
    return sum(1 for c in motivated if c in named) / len(motivated)
