"""Run directory layout and (de)serialization of batches and conversations."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any

from .annotate.types import AnnotationBatch, AnnotationRow, ChatTurn
from .corpus import Candidate, Concept, ConceptLabel

PROMPTS = "prompts"
CONVERSATIONS = "conversations"
BATCHES = "batches"
REPORTS = "reports"


def stem(video_id: str, condition: str) -> str:
    return f"{video_id}.{condition}"


def dump_json(data: Any) -> str:
    return json.dumps(data, ensure_ascii=False, indent=2, sort_keys=True) + "\n"


def row_to_dict(row: AnnotationRow) -> dict:
    return {
        "interview": row.citizen_ref[0],
        "citizen": row.citizen_ref[1],
        "candidate": row.candidate.value if row.candidate else None,
        "undecided": row.undecided,
        "reason": row.reason,
        "concept": row.concept.value.value if row.concept else None,
        "concept_raw": row.concept.raw_text if row.concept else None,
    }


def row_from_dict(d: dict) -> AnnotationRow:
    concept = None
    if d.get("concept") is not None:
        concept = ConceptLabel(Concept(d["concept"]), d.get("concept_raw") or "")
    candidate = Candidate(d["candidate"]) if d.get("candidate") else None
    return AnnotationRow((d.get("interview"), int(d["citizen"])), candidate, d.get("reason"), concept,
                         bool(d.get("undecided")))


def batch_to_dict(batch: AnnotationBatch, condition: str, status: str = "ok") -> dict:
    return {
        "video_id": batch.video_id,
        "condition": condition,
        "status": status,
        "declared_count": batch.declared_count,
        "turns_used": batch.turns_used,
        "backend_id": batch.backend_id,
        "warnings": list(batch.warnings),
        "rows": [row_to_dict(r) for r in batch.rows],
    }


def batch_from_dict(d: dict) -> AnnotationBatch:
    return AnnotationBatch(
        video_id=d["video_id"],
        declared_count=d.get("declared_count"),
        rows=[row_from_dict(r) for r in d.get("rows", [])],
        turns_used=int(d.get("turns_used", 0)),
        backend_id=d.get("backend_id", ""),
        warnings=list(d.get("warnings", [])),
    )


def conversation_to_list(turns: list[ChatTurn]) -> list[dict]:
    return [t.as_message() for t in turns]


def read_batches(run_dir: Path) -> dict[tuple[str, str], AnnotationBatch]:
    """All batches in ``run_dir/batches`` keyed by ``(video_id, condition)``."""
    out = {}
    for path in sorted((run_dir / BATCHES).glob("*.json")):
        data = json.loads(path.read_text(encoding="utf-8"))
        out[(data["video_id"], data["condition"])] = batch_from_dict(data)
    return out


def write_text(path: Path, text: str, force: bool) -> None:
    if path.exists() and not force:
        raise FileExistsError(f"{path} exists (use --force to overwrite)")
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")
