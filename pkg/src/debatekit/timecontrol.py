"""Speech-time control: duration estimation, budget search, hard cutting.

Word count correlates with speaking time but does not pin it down, so the
controller measures each candidate statement with a pluggable duration
estimator and searches over the word budget: bracket the target range by
doubling, then bisect, stopping the moment a measurement lands in range or
the iteration cap is hit.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Protocol

from .model import DebateError, Statement, count_words, text_digest

log = logging.getLogger(__name__)

WORDS_PER_MINUTE = 130.0
MIN_WORD_BUDGET = 30
MAX_WORD_BUDGET = 2000
DEFAULT_MAX_ITER = 10


class TimeControlError(DebateError):
    def __init__(self, message: str, trace: Optional["FitTrace"] = None) -> None:
        super().__init__(message)
        self.trace = trace


@dataclass(frozen=True)
class TimeRange:
    """Target speaking window [t_l, t_r] in seconds."""

    t_l: float
    t_r: float

    def __post_init__(self) -> None:
        if not 0 < self.t_l < self.t_r:
            raise ValueError("require 0 < t_l < t_r")

    def contains(self, seconds: float) -> bool:
        return self.t_l <= seconds <= self.t_r


@dataclass
class BudgetInterval:
    """Word-budget bracket: n_l measures short of the range, n_r beyond it."""

    n_l: Optional[int] = None
    n_r: Optional[int] = None

    @property
    def bracketed(self) -> bool:
        return self.n_l is not None and self.n_r is not None


class FitOutcome(Enum):
    IN_RANGE = "in_range"
    MAX_ITERATIONS = "max_iterations"


@dataclass(frozen=True)
class FitIteration:
    word_budget: int
    duration: float
    statement_hash: str


@dataclass
class FitTrace:
    iterations: list[FitIteration] = field(default_factory=list)
    outcome: FitOutcome = FitOutcome.IN_RANGE

    def to_payload(self) -> dict:
        return {
            "outcome": self.outcome.value,
            "iterations": [
                {"word_budget": i.word_budget, "duration": i.duration,
                 "statement_hash": i.statement_hash}
                for i in self.iterations
            ],
        }


class DurationEstimator(Protocol):
    def estimate(self, text: str) -> float: ...


class RateEstimator:
    """Rate-based stub: duration proportional to word count."""

    def __init__(self, words_per_minute: float = WORDS_PER_MINUTE) -> None:
        if words_per_minute <= 0:
            raise ValueError("rate must be positive")
        self.words_per_minute = words_per_minute

    def estimate(self, text: str) -> float:
        return count_words(text) / self.words_per_minute * 60.0


def estimate_duration(text: str, estimator: DurationEstimator) -> float:
    """Estimated speaking time in seconds; empty text is a degenerate 0."""
    seconds = float(estimator.estimate(text))
    if seconds < 0:
        raise TimeControlError("estimator returned a negative duration")
    return seconds


class StatementReviser(Protocol):
    def revise(self, text: str, word_budget: int) -> str: ...


def _clamp_budget(n: int) -> int:
    return max(MIN_WORD_BUDGET, min(MAX_WORD_BUDGET, n))


def fit_to_time(
    draft: Statement,
    target: TimeRange,
    reviser: StatementReviser,
    estimator: DurationEstimator,
    max_iter: int = DEFAULT_MAX_ITER,
    words_per_minute: float = WORDS_PER_MINUTE,
) -> tuple[Statement, FitTrace]:
    """Revise a statement until its measured duration falls in the target.

    The draft is measured first and returned untouched if already in range.
    Each iteration asks the reviser for a version at one word budget and
    measures it; budgets move by doubling or halving until both bracket
    endpoints exist, then by bisection. After max_iter iterations the
    latest revision is returned with outcome MAX_ITERATIONS.
    """
    trace = FitTrace()
    duration = estimate_duration(draft.text, estimator)
    if target.contains(duration):
        fitted = Statement(
            side=draft.side, stage=draft.stage, text=draft.text,
            plan=draft.plan, estimated_duration=duration,
        )
        return fitted, trace

    bracket = BudgetInterval()

    def note(n: int, measured: float) -> None:
        if measured < target.t_l:
            bracket.n_l = n if bracket.n_l is None else max(bracket.n_l, n)
        elif measured > target.t_r:
            bracket.n_r = n if bracket.n_r is None else min(bracket.n_r, n)

    note(draft.word_count, duration)

    midpoint_minutes = (target.t_l + target.t_r) / 2.0 / 60.0
    budget = _clamp_budget(round(words_per_minute * midpoint_minutes))

    latest_text = draft.text
    latest_duration = duration
    for _ in range(max_iter):
        try:
            latest_text = reviser.revise(latest_text, budget)
        except Exception as exc:  # noqa: BLE001 - reviser faults vary
            trace.outcome = FitOutcome.MAX_ITERATIONS
            raise TimeControlError(f"reviser failed: {exc}", trace=trace) from exc
        latest_duration = estimate_duration(latest_text, estimator)
        trace.iterations.append(
            FitIteration(budget, latest_duration, text_digest(latest_text))
        )
        if target.contains(latest_duration):
            trace.outcome = FitOutcome.IN_RANGE
            fitted = Statement(
                side=draft.side, stage=draft.stage, text=latest_text,
                plan=draft.plan, estimated_duration=latest_duration,
            )
            return fitted, trace

        note(budget, latest_duration)
        if bracket.bracketed:
            budget = _clamp_budget((bracket.n_l + bracket.n_r) // 2)
        elif bracket.n_r is None:
            # everything measured short so far: push the budget up
            budget = _clamp_budget(budget * 2)
        else:
            budget = _clamp_budget(budget // 2)

    trace.outcome = FitOutcome.MAX_ITERATIONS
    log.warning("fit_to_time hit the iteration cap; keeping the latest revision")
    fitted = Statement(
        side=draft.side, stage=draft.stage, text=latest_text,
        plan=draft.plan, estimated_duration=latest_duration,
    )
    return fitted, trace


# ---------------------------------------------------------------------------
# Sentence splitting and the hard cut

_SENTENCE_END_RE = re.compile(r"[.!?]+(?=\s|$)")


def split_sentences(text: str) -> list[str]:
    """Split on terminal punctuation followed by whitespace or end of text.

    Deliberately simple: abbreviations are not special-cased. A trailing
    fragment without terminal punctuation counts as a final sentence.
    """
    sentences: list[str] = []
    start = 0
    for m in _SENTENCE_END_RE.finditer(text):
        end = m.end()
        chunk = text[start:end].strip()
        if chunk:
            sentences.append(chunk)
        start = end
    tail = text[start:].strip()
    if tail:
        sentences.append(tail)
    return sentences


def sentence_boundaries(text: str) -> list[int]:
    """Offsets just past each sentence end, so text[:offset] is a prefix."""
    offsets = [m.end() for m in _SENTENCE_END_RE.finditer(text)]
    if text.strip() and (not offsets or offsets[-1] < len(text.rstrip())):
        offsets.append(len(text))
    return offsets


@dataclass(frozen=True)
class HardCutResult:
    statement: Statement
    trimmed: bool
    #: True when even the first sentence exceeded the limit
    emptied: bool


def hard_cut(
    statement: Statement,
    limit: float,
    estimator: DurationEstimator,
    sentence_splitter=sentence_boundaries,
) -> HardCutResult:
    """Trim to the longest sentence-boundary prefix within the limit.

    The output is an exact prefix of the input text. Idempotent; if no
    prefix fits, the statement text is emptied and the degenerate case
    flagged.
    """
    if estimate_duration(statement.text, estimator) <= limit:
        return HardCutResult(statement, trimmed=False, emptied=False)

    best = 0
    for end in sentence_splitter(statement.text):
        if estimate_duration(statement.text[:end], estimator) <= limit:
            best = max(best, end)
    text = statement.text[:best]
    cut = Statement(
        side=statement.side, stage=statement.stage, text=text,
        plan=statement.plan,
        estimated_duration=estimate_duration(text, estimator) if text else 0.0,
    )
    return HardCutResult(cut, trimmed=True, emptied=best == 0)


# ---------------------------------------------------------------------------
# Reviser stubs


class ObedientStubReviser:
    """Emits exactly the requested number of words, as plain sentences."""

    def __init__(self, words_per_sentence: int = 10) -> None:
        self.words_per_sentence = max(1, words_per_sentence)

    def revise(self, text: str, word_budget: int) -> str:
        words: list[str] = []
        i = 0
        while len(words) < word_budget:
            word = f"word{i % self.words_per_sentence}"
            i += 1
            if len(words) + 1 == word_budget or i % self.words_per_sentence == 0:
                word += "."
            words.append(word)
        return " ".join(words[:word_budget])


class ConstantStubReviser:
    """Ignores the budget entirely; models a model that won't follow it."""

    def __init__(self, text: str) -> None:
        self.text = text

    def revise(self, text: str, word_budget: int) -> str:
        return self.text


class PromptReviser:
    """Rewrites a statement toward a word budget with one chat call."""

    def __init__(self, provider, temperature: float = 0.0) -> None:
        self.provider = provider
        self.temperature = temperature

    def revise(self, text: str, word_budget: int) -> str:
        from .prompts import render_template
        from .providers import ChatRequest, chat_exchange

        prompt = render_template(
            "revise_to_length", statement=text, n_words=str(word_budget)
        )
        return chat_exchange(
            self.provider,
            ChatRequest(prompt=prompt, temperature=self.temperature,
                        issuer="timecontrol.revise"),
        )
