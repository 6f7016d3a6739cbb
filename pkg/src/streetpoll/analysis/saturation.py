"""Cumulative distinct-concept curve and its stopping rule."""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Sequence

DEFAULT_WINDOW = 15


@dataclass(frozen=True)
class SaturationCurve:
    """``points[k-1] == (k, distinct concepts among the first k interviews)``."""

    points: tuple[tuple[int, int], ...]

    def __call__(self, sample_size: int) -> int:
        if not 1 <= sample_size <= len(self.points):
            raise IndexError(sample_size)
        return self.points[sample_size - 1][1]

    def __len__(self) -> int:
        return len(self.points)

    def new_per_sample(self) -> list[int]:
        prev, out = 0, []
        for _, d in self.points:
            out.append(d - prev)
            prev = d
        return out

    def to_tsv(self) -> str:
        lines = ["sample_size\tdistinct_concepts\tnew_concepts"]
        for (k, d), new in zip(self.points, self.new_per_sample()):
            lines.append(f"{k}\t{d}\t{new}")
        return "\n".join(lines) + "\n"


def saturation_curve(free_concepts: Sequence[str], shuffle_seed: int | None = None) -> SaturationCurve:
    """One raw concept string per interview, in analysis order.

    With ``shuffle_seed`` the order is permuted first (seeded, reproducible).
    """
    items = list(free_concepts)
    if shuffle_seed is not None:
        random.Random(shuffle_seed).shuffle(items)
    seen: set[str] = set()
    points = []
    for k, raw in enumerate(items, start=1):
        seen.add(" ".join(raw.split()).casefold())
        points.append((k, len(seen)))
    return SaturationCurve(tuple(points))


def stable_point(curve: SaturationCurve, window: int = DEFAULT_WINDOW) -> int | None:
    """Smallest n with no new concept over the next ``window`` samples."""
    if window < 1:
        raise ValueError("window must be >= 1")
    for n in range(1, len(curve) - window + 1):
        if curve(n) == curve(n + window):
            return n
    return None
