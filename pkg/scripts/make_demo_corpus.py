#!/usr/bin/env python3
"""Regenerate the packaged demo corpus under src/streetpoll/demo/.

The demo is synthetic: twelve videos from three channels with fixed
per-location respondent counts and candidate mixes, and fixed per-concept
supports (see VIDEOS and CONCEPT_SUPPORT below). Utterances are
built from keyword-bearing phrases so the rule-based mock backend can recover
every label exactly at error rate 0.

    python scripts/make_demo_corpus.py [--out DIR] [--seed N]

Output is deterministic for a given seed.
"""

from __future__ import annotations

import argparse
import csv
import random
from pathlib import Path

from streetpoll.captions import format_timestamp

# video_id, channel, location, (RTE, KK, INCE, OTHER/UNDECIDED)
VIDEOS = [
    ("v01", "Medyali", "Bakırköy", (7, 14, 6, 3)),
    ("v02", "Medyali", "Bağcılar", (9, 9, 0, 8)),
    ("v03", "Medyali", "Esenler", (14, 11, 2, 1)),
    ("v04", "Medyali", "Tuzla", (5, 15, 6, 6)),
    ("v05", "Zeyrek", "Pendik", (10, 5, 4, 4)),
    ("v06", "Zeyrek", "Üsküdar", (8, 9, 1, 3)),
    ("v07", "Zeyrek", "Kadıköy", (3, 17, 6, 3)),
    ("v08", "Zeyrek", "Şişli", (5, 13, 2, 1)),
    ("v09", "Halk Ekranı", "Avcılar", (5, 7, 7, 3)),
    ("v10", "Halk Ekranı", "Ankara", (13, 9, 2, 7)),
    ("v11", "Halk Ekranı", "Bolu", (9, 11, 5, 4)),
    ("v12", "Halk Ekranı", "Kocaeli", (15, 12, 5, 1)),
]
BAGCILAR = "v02"
BAGCILAR_RAW_INCE = 2  # of Bağcılar's "other" respondents, these named İnce

# concept -> (RTE, KK, INCE) support
CONCEPT_SUPPORT = {
    "Leadership": (34, 8, 2),
    "Change": (0, 27, 6),
    "Economy": (1, 14, 3),
    "Development": (17, 0, 0),
    "Honesty": (1, 10, 2),
    "Stability": (10, 0, 0),
    "Intimacy": (0, 4, 4),
    "Reliable": (3, 3, 1),
    "Persistence": (2, 1, 3),
    "HadEnough": (0, 5, 0),
    "Justice": (0, 3, 0),
    "Faith": (2, 0, 0),
}
OTHER_CONCEPT = {"RTE": 8, "KK": 12, "INCE": 6}
UNDECIDED_TOTAL = 30
OTHER_GROUP_OTHER_CONCEPT = 6

CANDIDATE_PHRASES = {
    "RTE": ["ben oyumu erdoğana veriyorum", "tayyip erdoğan", "erdoğan diyorum", "oyum recep tayyip erdoğana"],
    "KK": ["kılıçdaroğlu", "kemal kılıçdaroğlu'na vereceğim", "oyum kılıçdaroğlu'na", "kılıçdaroğlu diyorum"],
    "INCE": ["muharrem ince'ye", "ince diyorum", "oyum muharrem ince'ye", "ben ince'ye vereceğim"],
    "OTHER": ["sinan oğan", "cem uzan'a vereceğim", "oyum demirtaş'a", "sinan oğan diyorum"],
    "UNDECIDED": ["henüz kararsızım", "valla kararsızım", "kararsızım daha düşüneceğim"],
}
INCE_IN_BAGCILAR = ["muharrem ince'ye", "ben ince'ye vereceğim"]
CONCEPT_PHRASES = {
    "Leadership": ["o gerçek bir lider", "dünya lideri", "karizmatik bir lider"],
    "Change": ["bu ülkede değişim lazım", "artık değişim istiyoruz"],
    "Economy": ["ekonomi çok kötü", "pahalılık her yerde halk fakir"],
    "Development": ["memlekete çok hizmet etti", "hizmet getirdi yol yaptı"],
    "Honesty": ["dürüst bir adam", "yolsuzluk yapmaz"],
    "Stability": ["istikrar bozulmasın", "ülkede istikrar olsun"],
    "Intimacy": ["halk onu seviyor", "çok samimi biri"],
    "Reliable": ["ona güveniyorum", "sözüne güven olur"],
    "Persistence": ["çok mücadele etti", "her zorluğa direnç gösterdi"],
    "HadEnough": ["artık bıktık", "yeter artık bu düzen"],
    "Justice": ["herkese adalet getirecek", "adalet için"],
    "Faith": ["dindar bir insan"],
    "Other": ["ailem de ona oy veriyor", "bölgemiz için", "gençler için", "emekliler için"],
}
FILLERS = (
    "yani şimdi bence açıkçası valla bu sefer kesinlikle evet tabii herkes gibi düşünüyorum "
    "memleket için iyi olacak abi işte ne diyeyim bakın"
).split()
QUESTIONS = ["Kime oy vereceksiniz?", "Merhaba kime oy vereceksiniz?", "Seçimde kime oy vereceksiniz?"]
FOLLOW_UPS = ["Siz?", "Peki siz?", "Sizin tercihiniz?"]


def _concept_pools(rng: random.Random) -> dict[str, list[str | None]]:
    pools: dict[str, list[str | None]] = {"RTE": [], "KK": [], "INCE": []}
    for concept, support in CONCEPT_SUPPORT.items():
        for cand, n in zip(("RTE", "KK", "INCE"), support):
            pools[cand] += [concept] * n
    totals = {cand: sum(v[3][idx] for v in VIDEOS) for idx, cand in enumerate(("RTE", "KK", "INCE"))}
    for cand in pools:
        pools[cand] += ["Other"] * OTHER_CONCEPT[cand]
        pools[cand] += [None] * (totals[cand] - len(pools[cand]))
        rng.shuffle(pools[cand])
    return pools


def _respondents(rng: random.Random):
    """Yield per-video respondent lists of (stance, raw candidate, concept)."""
    pools = _concept_pools(rng)
    other_total = sum(v[3][3] for v in VIDEOS)
    other_kinds = ["UNDECIDED"] * UNDECIDED_TOTAL + ["OTHER"] * (other_total - UNDECIDED_TOTAL)
    rng.shuffle(other_kinds)
    other_concepts: list[str | None] = ["Other"] * OTHER_GROUP_OTHER_CONCEPT
    other_concepts += [None] * (other_kinds.count("OTHER") - OTHER_GROUP_OTHER_CONCEPT)
    rng.shuffle(other_concepts)

    per_video = {}
    for vid, _, _, (rte, kk, ince, other) in VIDEOS:
        people = []
        for cand, n in (("RTE", rte), ("KK", kk), ("INCE", ince)):
            for _ in range(n):
                people.append((cand, cand, pools[cand].pop()))
        kinds = [other_kinds.pop() for _ in range(other)]
        if vid == BAGCILAR:
            # the İnce voters here count as Other; keep them out of the undecided tally
            for j in range(BAGCILAR_RAW_INCE):
                if kinds[j] == "UNDECIDED":
                    swap = next(k for k, kind in enumerate(other_kinds) if kind == "OTHER")
                    other_kinds[swap] = "UNDECIDED"
                    kinds[j] = "OTHER"
        for j, kind in enumerate(kinds):
            if kind == "UNDECIDED":
                people.append(("UNDECIDED", "OTHER_UNDECIDED", "Undecided"))
            else:
                raw = "INCE" if vid == BAGCILAR and j < BAGCILAR_RAW_INCE else "OTHER_UNDECIDED"
                stance = "INCE_AS_OTHER" if raw == "INCE" else "OTHER"
                people.append((stance, raw, other_concepts.pop()))
        rng.shuffle(people)
        per_video[vid] = people
    return per_video


def _utterance(rng: random.Random, stance: str, concept: str | None) -> tuple[str, str | None]:
    if stance == "INCE_AS_OTHER":
        phrase = rng.choice(INCE_IN_BAGCILAR)
    else:
        phrase = rng.choice(CANDIDATE_PHRASES[stance])
    before = rng.sample(FILLERS, rng.randint(0, 4))
    after = [rng.choice(FILLERS) for _ in range(rng.choice([0, 0, 2, 5, 10, 18, 30]))]
    reason = None
    parts = before + [phrase]
    if concept is not None and stance != "UNDECIDED":
        reason = rng.choice(CONCEPT_PHRASES[concept])
        parts += ["çünkü", reason]
    parts += after
    return " ".join(parts), reason


def _segments(rng: random.Random, people: list) -> list[list]:
    out, i = [], 0
    while i < len(people):
        size = rng.choices([1, 2, 3], weights=[60, 30, 10])[0]
        out.append(people[i : i + size])
        i += size
    return out


def build(out: Path, seed: int) -> None:
    rng = random.Random(seed)
    per_video = _respondents(rng)
    (out / "captions").mkdir(parents=True, exist_ok=True)
    (out / "processed").mkdir(parents=True, exist_ok=True)
    manifest = ["# Synthetic demo corpus; regenerate with scripts/make_demo_corpus.py", ""]
    truth_rows = []
    for vid, channel, location, _ in VIDEOS:
        manifest += [
            "[[videos]]",
            f'video_id = "{vid}"',
            f'channel = "{channel}"',
            f'location = "{location}"',
            f'captions = "captions/{vid}.txt"',
            f'processed = "processed/{vid}.txt"',
        ]
        if vid == BAGCILAR:
            manifest.append('overrides = ["INCE=OTHER_UNDECIDED"]')
        manifest.append("")

        t = rng.randint(1, 5)
        processed_blocks, raw_lines = [], []
        for seg_idx, seg in enumerate(_segments(rng, per_video[vid]), start=1):
            lines = []

            def say(tag: str, text: str) -> None:
                nonlocal t
                lines.append(f"[{format_timestamp(t)}] {tag}: {text}")
                words = text.split()
                # raw captions break long turns into several cues
                for k in range(0, len(words), 9):
                    raw_lines.append(f"{format_timestamp(t + k // 3)} {' '.join(words[k:k + 9])}")
                t += max(2, len(words) // 3 + 1)

            say("Reporter", rng.choice(QUESTIONS))
            for c_idx, (stance, raw_cand, concept) in enumerate(seg, start=1):
                if c_idx > 1:
                    say("Reporter", rng.choice(FOLLOW_UPS))
                text, reason = _utterance(rng, stance, concept)
                say(f"Citizen {c_idx}", text)
                if stance == "UNDECIDED":
                    reason = "undecided"
                truth_rows.append([vid, seg_idx, c_idx, raw_cand, concept or "", reason or ""])
            processed_blocks.append("\n".join(lines) + "\n")
            t += rng.randint(2, 8)
        (out / "processed" / f"{vid}.txt").write_text("---\n".join(processed_blocks), encoding="utf-8")
        (out / "captions" / f"{vid}.txt").write_text("\n".join(raw_lines) + "\n", encoding="utf-8")

    (out / "corpus.toml").write_text("\n".join(manifest), encoding="utf-8")
    with (out / "ground_truth.csv").open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["video_id", "interview_idx", "citizen_idx", "candidate", "concept", "reason"])
        writer.writerows(truth_rows)


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    default_out = Path(__file__).resolve().parents[1] / "src" / "streetpoll" / "demo"
    parser.add_argument("--out", type=Path, default=default_out)
    parser.add_argument("--seed", type=int, default=2023)
    args = parser.parse_args()
    build(args.out, args.seed)
    print(f"wrote demo corpus to {args.out}")


if __name__ == "__main__":
    main()
