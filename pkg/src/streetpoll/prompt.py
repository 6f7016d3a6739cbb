"""Annotation prompt assembly.

Templates are plain-text resources per locale with ``{captions}`` and
``{concepts}`` placeholders. Assembly is a pure function of its inputs.
"""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .captions import ProcessedTranscript, RawCaptionDocument, render_processed, render_raw
from .corpus import ConceptInventory

LOCALES = ("en", "tr")
_PLACEHOLDERS = ("{captions}", "{concepts}")


class PromptError(ValueError):
    pass


@dataclass(frozen=True)
class PromptTemplate:
    locale: str
    text: str

    def __post_init__(self) -> None:
        for ph in _PLACEHOLDERS:
            if self.text.count(ph) != 1:
                raise PromptError(f"template {self.locale!r} must contain {ph} exactly once")
        if self.text.index("{captions}") > self.text.index("{concepts}"):
            raise PromptError("captions must come before the concept list")

    @property
    def preamble(self) -> str:
        """Everything before the captions block (intro and rules)."""
        return self.text[: self.text.index("{captions}")]

    @property
    def question_block(self) -> str:
        return self.text[self.text.index("{concepts}") + len("{concepts}") :]

    @classmethod
    def load(cls, locale: str = "en", path: str | Path | None = None) -> "PromptTemplate":
        if path is not None:
            return cls(locale, Path(path).read_text(encoding="utf-8"))
        if locale not in LOCALES:
            raise PromptError(f"no packaged template for locale {locale!r}")
        return cls(locale, resources.files("streetpoll.templates").joinpath(f"{locale}.txt").read_text("utf-8"))


@dataclass(frozen=True)
class PromptInstance:
    template: PromptTemplate
    captions_block: str
    concepts_block: str
    final_text: str
    video_id: str = ""


def render_concepts(inventory: ConceptInventory) -> str:
    return "".join(f"- {c.value}: {explanation}\n" for c, explanation in inventory.entries)


def build_prompt(
    transcript: RawCaptionDocument | ProcessedTranscript,
    inventory: ConceptInventory,
    locale: str = "en",
    template: PromptTemplate | None = None,
) -> PromptInstance:
    if len(inventory) == 0:
        raise PromptError("concept inventory is empty")
    if isinstance(transcript, RawCaptionDocument):
        if not transcript.cues:
            raise PromptError("nothing to annotate")
        captions = render_raw(transcript)
    else:
        if not transcript.segments:
            raise PromptError("nothing to annotate")
        captions = render_processed(transcript)
    template = template or PromptTemplate.load(locale)
    concepts = render_concepts(inventory)
    head, rest = template.text.split("{captions}")
    middle, tail = rest.split("{concepts}")
    final = head + captions.rstrip("\n") + middle + concepts.rstrip("\n") + tail
    return PromptInstance(template, captions, concepts, final, transcript.video_id)
