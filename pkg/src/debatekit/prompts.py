"""Prompt template assets and rendering.

Templates live under ``debatekit/prompts/`` as plain text with ``{slot}``
placeholders. Rendering is literal substitution: two renders with identical
inputs are byte-identical, and unresolved slots survive untouched so a
missing value is visible instead of silently blank. A leading ``#~`` line
carries the asset version and is stripped at load time.
"""

from __future__ import annotations

from functools import lru_cache
from importlib import resources

from .model import DebateError


class TemplateError(DebateError):
    pass


_TEMPLATE_NAMES = {
    "main_claim_generation",
    "counterargument_generation",
    "main_claim_selection",
    "opening_stage",
    "rebuttal_stage",
    "closing_stage",
    "audience_feedback",
    "impact_instruction",
    "tuple_extraction",
    "revise_with_feedback",
    "revise_to_length",
    "definitions",
}


@lru_cache(maxsize=None)
def _load_raw(name: str) -> tuple[str, str]:
    if name not in _TEMPLATE_NAMES:
        raise TemplateError(f"unknown template {name!r}")
    text = (
        resources.files("debatekit")
        .joinpath(f"prompts/{name}.txt")
        .read_text(encoding="utf-8")
    )
    version = "0"
    if text.startswith("#~"):
        header, _, text = text.partition("\n")
        version = header[2:].strip().removeprefix("version=")
    return version, text


def template_version(name: str) -> str:
    return _load_raw(name)[0]


def load_template(name: str) -> str:
    return _load_raw(name)[1]


def render(template: str, **slots: str) -> str:
    out = template
    for key, value in slots.items():
        out = out.replace("{" + key + "}", value)
    return out


def render_template(name: str, **slots: str) -> str:
    return render(load_template(name), **slots)
