"""Simulated-audience feedback on a draft statement.

One panel call per cycle: the prompt carries the motion, debate history,
the draft, and, when retrieval hit, the nearest human debate flow tree as
a style/allocation reference. The reply is parsed strictly against the
template's section headings; partial feedback never leaks downstream.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass
from typing import Optional

from .model import DebateError, Stage, Stance
from .prompts import load_template, render
from .providers import ChatProvider, ChatRequest, chat_exchange

log = logging.getLogger(__name__)


class AudienceError(DebateError):
    pass


@dataclass(frozen=True)
class FeedbackIssue:
    issue: str
    impact: str
    suggestion: str


@dataclass(frozen=True)
class AudienceFeedback:
    clarity: str
    engagement: str
    evidence: str
    persuasion: str
    issues: tuple[FeedbackIssue, ...] = ()

    def __post_init__(self) -> None:
        for name in ("clarity", "engagement", "evidence", "persuasion"):
            if not getattr(self, name).strip():
                raise AudienceError(f"feedback dimension {name!r} is empty")
        object.__setattr__(self, "issues", tuple(self.issues))

    def as_text(self) -> str:
        lines = [
            f"Core Message Clarity: {self.clarity}",
            f"Engagement Impact: {self.engagement}",
            f"Evidence Presentation: {self.evidence}",
            f"Persuasive Elements: {self.persuasion}",
        ]
        for i, issue in enumerate(self.issues, 1):
            lines.append(f"Issue {i}: {issue.issue}")
            lines.append(f"  Impact on Audience: {issue.impact}")
            lines.append(f"  Minimal Revision Suggestion: {issue.suggestion}")
        return "\n".join(lines)


_RETRIEVAL_HEADING = "## Retrieval Information"
_AFTER_RETRIEVAL = "### Input Information"

_DIMENSIONS = (
    ("clarity", "Core Message Clarity"),
    ("engagement", "Engagement Impact"),
    ("evidence", "Evidence Presentation"),
    ("persuasion", "Persuasive Elements"),
)

_ISSUE_HEADS = ("Issue", "Impact on Audience", "Minimal Revision Suggestion")


def assemble_audience_prompt(
    motion_text: str,
    history: str,
    statement_text: str,
    side: Stance,
    stage: Stage,
    retrieved_tree: Optional[str] = None,
) -> str:
    """Pure prompt assembly; the retrieval section is omitted on a miss."""
    template = load_template("audience_feedback")
    if not retrieved_tree:
        start = template.index(_RETRIEVAL_HEADING)
        end = template.index(_AFTER_RETRIEVAL)
        template = template[:start] + template[end:]
    return render(
        template,
        **{
            "stage": stage.value,
            "motion": motion_text,
            "history": history or "(start of debate)",
            "side": side.value,
            "statement": statement_text,
            "retrieval debate flow tree": retrieved_tree or "",
        },
    )


def _heading_positions(text: str, headings: tuple[str, ...]) -> list[tuple[int, int, str]]:
    """Locate heading-anchored fields, tolerating markdown and numbering."""
    found: list[tuple[int, int, str]] = []
    for heading in headings:
        pattern = re.compile(
            r"^[ \t>*#\-]*(?:\*\*)?(?:\d+\.\s*)?" + re.escape(heading) + r"\s*(?:\*\*)?\s*[:.]",
            re.MULTILINE | re.IGNORECASE,
        )
        for m in pattern.finditer(text):
            found.append((m.start(), m.end(), heading))
    found.sort()
    return found


def _strip_value(raw: str) -> str:
    return raw.strip().strip("*").strip()


def parse_feedback_reply(reply: str) -> AudienceFeedback:
    """Heading-anchored parse of the panel reply.

    Requires all four dimensions; every issue must carry all three
    sub-fields or the parse fails.
    """
    analysis_part = reply
    issues_part = ""
    split = re.split(r"critical issues and minimal revision suggestions\]?", reply,
                     maxsplit=1, flags=re.IGNORECASE)
    if len(split) == 2:
        analysis_part, issues_part = split

    headings = tuple(h for _, h in _DIMENSIONS)
    positions = _heading_positions(analysis_part, headings)
    values: dict[str, str] = {}
    for i, (start, end, heading) in enumerate(positions):
        stop = positions[i + 1][0] if i + 1 < len(positions) else len(analysis_part)
        values[heading] = _strip_value(analysis_part[end:stop])
    missing = [h for h in headings if not values.get(h)]
    if missing:
        raise AudienceError(f"feedback reply is missing dimensions: {missing}")

    issues: list[FeedbackIssue] = []
    if issues_part:
        spans = _heading_positions(issues_part, _ISSUE_HEADS)
        fields: list[tuple[str, str]] = []
        for i, (start, end, heading) in enumerate(spans):
            stop = spans[i + 1][0] if i + 1 < len(spans) else len(issues_part)
            fields.append((heading, _strip_value(issues_part[end:stop])))
        i = 0
        while i < len(fields):
            if fields[i][0] != "Issue":
                raise AudienceError("issue block does not start with Issue")
            if (
                i + 2 >= len(fields)
                or fields[i + 1][0] != "Impact on Audience"
                or fields[i + 2][0] != "Minimal Revision Suggestion"
            ):
                raise AudienceError("issue block is missing a sub-field")
            issues.append(
                FeedbackIssue(fields[i][1], fields[i + 1][1], fields[i + 2][1])
            )
            i += 3

    return AudienceFeedback(
        clarity=values["Core Message Clarity"],
        engagement=values["Engagement Impact"],
        evidence=values["Evidence Presentation"],
        persuasion=values["Persuasive Elements"],
        issues=tuple(issues),
    )


def audience_feedback(
    motion_text: str,
    history: str,
    statement_text: str,
    side: Stance,
    stage: Stage,
    provider: ChatProvider,
    retrieved_tree: Optional[str] = None,
    temperature: float = 0.0,
) -> AudienceFeedback:
    """Run one feedback panel call; an unparseable reply is retried once."""
    prompt = assemble_audience_prompt(
        motion_text, history, statement_text, side, stage, retrieved_tree
    )
    request = ChatRequest(prompt=prompt, temperature=temperature,
                          issuer="audience.panel")
    reply = chat_exchange(provider, request)
    try:
        return parse_feedback_reply(reply)
    except AudienceError:
        log.warning("audience feedback parse failed; retrying once")
        reply = chat_exchange(provider, request)
        return parse_feedback_reply(reply)
