"""Deterministic offline provider: answers every pipeline prompt sensibly.

The stub routes on distinctive markers of the shipped templates and derives
all content from hashes of the prompt, so full debates run end to end with
zero randomness and byte-identical outputs across runs. Statements follow
quoting conventions ("We put forward the claim: ...") that the extraction
route recognizes, closing the loop between drafting and tree updates.
"""

from __future__ import annotations

import hashlib
import json
import re
from typing import Optional

from .model import Stance
from .providers import ChatRequest, ProviderError

PROPOSE_PATTERN = 'We put forward the claim: "{0}".'
REINFORCE_PATTERN = 'We reinforce our claim: "{0}".'
ATTACK_PATTERN = 'We challenge the claim: "{0}".'
REBUT_PATTERN = 'We answer the attack: "{0}".'

_PROPOSE_RE = re.compile(r'We put forward the claim: "([^"]+)"')
_REINFORCE_RE = re.compile(r'We reinforce our claim: "([^"]+)"')
_ATTACK_RE = re.compile(r'We challenge the claim: "([^"]+)"')
_REBUT_RE = re.compile(r'We answer the attack: "([^"]+)"')

_TREE_LINE_RE = re.compile(
    r"\[(pro|con)\]\[(proposed|attacked|solved)\]\[v=(\d+)\] (.+)$", re.MULTILINE
)


def _h6(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()[:6]


def stub_main_claim(motion_text: str, side: Stance, index: int) -> str:
    """The claim text the stub proposer emits for (motion, side, index)."""
    return (
        f"Stub {side.value} claim {index + 1} on this motion "
        f"({_h6(motion_text + side.value + str(index))})"
    )


def _side_from_act(prompt: str) -> Stance:
    m = re.search(r"to (support|oppose) th(?:e|is) topic", prompt)
    if m is None:
        m = re.search(r"Your position: (support|oppose) the motion", prompt)
    if m is None:
        raise ProviderError("stub could not infer the side from the prompt")
    return Stance.PRO if m.group(1) == "support" else Stance.CON


def _exact_words(sentences: list[str], n_words: int) -> str:
    """Join sentences, then pad (or trim) to exactly n_words words."""
    words = " ".join(sentences).split()
    if len(words) >= n_words:
        words = words[:n_words]
        if not words[-1].endswith("."):
            words[-1] += "."
        return " ".join(words)
    i = 0
    while len(words) < n_words:
        word = f"point{i}"
        i += 1
        if len(words) + 1 == n_words or i % 12 == 0:
            word += "."
        words.append(word)
    return " ".join(words)


def _section(prompt: str, start_marker: str, end_marker: Optional[str]) -> str:
    start = prompt.find(start_marker)
    if start < 0:
        return ""
    start += len(start_marker)
    if end_marker is None:
        return prompt[start:]
    end = prompt.find(end_marker, start)
    return prompt[start:end] if end >= 0 else prompt[start:]


class DeterministicDebateStub:
    """Offline chat provider covering every template the engine uses."""

    def __init__(self) -> None:
        self.calls = 0

    def chat(self, request: ChatRequest) -> str:
        self.calls += 1
        prompt = request.prompt
        if "## Task: Generate Strategic Counter-Arguments" in prompt:
            return self._main_claims(prompt)
        if "## Task: Anticipate Counter-Arguments" in prompt:
            return self._counterarguments(prompt)
        if "## Task: Select Persuasive Claims" in prompt:
            return self._selection(prompt)
        if "## Task: Frame the Debate" in prompt:
            return self._definitions(prompt)
        if "Output only a number among 0, 1, or 2" in prompt:
            return self._impact_class(prompt)
        if "## Task: Extract Debate Action Tuples" in prompt:
            return self._extract_tuples(prompt)
        if "You are a panel of debate audience members" in prompt:
            return self._audience_feedback(prompt)
        if "## Task: Minimal Revision" in prompt:
            return self._minimal_revision(prompt)
        if "## Task: Fit the Statement to a Word Budget" in prompt:
            return self._fit_to_budget(prompt)
        if "Now it comes the opening phase" in prompt:
            return self._opening(prompt)
        if "Now it comes the rebuttal phase" in prompt:
            return self._rebuttal(prompt)
        if "Now it comes the closing statement" in prompt:
            return self._closing(prompt)
        raise ProviderError(f"stub has no route for prompt: {prompt[:80]!r}")

    # -- preparation routes

    def _main_claims(self, prompt: str) -> str:
        side = _side_from_act(prompt)
        motion = _section(prompt, "debate on the motion: ", "\n").strip()
        m = re.search(r"Generate (\d+) persuasive counter-arguments", prompt)
        n = int(m.group(1)) if m else 3
        return json.dumps([stub_main_claim(motion, side, i) for i in range(n)])

    def _counterarguments(self, prompt: str) -> str:
        m = re.search(r"Write (\d+) strong counter-arguments", prompt)
        n = int(m.group(1)) if m else 3
        side_m = re.search(r"that the (pro|con) side would raise", prompt)
        side = side_m.group(1) if side_m else "pro"
        chain = _section(prompt, "down to the latest reply:\n", "\n\nWrite").strip()
        last = chain.splitlines()[-1] if chain else prompt[:40]
        h = _h6(last)
        items = [
            {
                "claim": f"Stub {side} counter {j + 1} to ({h})",
                "support": f"Stub supporting reasoning {j + 1} for ({h})",
            }
            for j in range(n)
        ]
        return json.dumps(items)

    def _selection(self, prompt: str) -> str:
        m = re.search(r"Claims to select from \(All Level-0 claims\): (\[.*?\])", prompt)
        if m is None:
            raise ProviderError("stub selection route found no claims list")
        claims = json.loads(m.group(1))[:3]
        return json.dumps(
            {
                "selection": {
                    "claims": claims,
                    "framework": "Three independent pillars converging on the motion.",
                    "explanation": "Each claim covers a distinct angle so no single "
                                   "rebuttal can carry the debate.",
                }
            }
        )

    def _definitions(self, prompt: str) -> str:
        side = _side_from_act(prompt)
        return (
            f"We read every key term in the motion in its plain, everyday sense, and the "
            f"{side.value} side will argue on that common ground. The debate should be "
            f"judged on which side better protects the long-term public interest."
        )

    def _impact_class(self, prompt: str) -> str:
        digest = hashlib.sha256(prompt.encode("utf-8")).digest()
        return str(digest[0] % 3)

    # -- extraction

    def _extract_tuples(self, prompt: str) -> str:
        statement = _section(prompt, "## Statement by the", "## Output")
        found: list[tuple[int, dict]] = []
        for m in _PROPOSE_RE.finditer(statement):
            found.append((m.start(), {
                "action": "propose", "claim": m.group(1),
                "argument": f"Stub argument for ({_h6(m.group(1))})", "target": None,
            }))
        for m in _REINFORCE_RE.finditer(statement):
            found.append((m.start(), {
                "action": "reinforce", "claim": m.group(1),
                "argument": f"Fresh stub support ({_h6(m.group(1))})",
                "target": m.group(1),
            }))
        for m in _ATTACK_RE.finditer(statement):
            found.append((m.start(), {
                "action": "attack", "claim": f"Counter to ({_h6(m.group(1))})",
                "argument": f"Stub objection ({_h6(m.group(1))})", "target": m.group(1),
            }))
        for m in _REBUT_RE.finditer(statement):
            found.append((m.start(), {
                "action": "rebut", "claim": f"Defense against ({_h6(m.group(1))})",
                "argument": f"Stub defense ({_h6(m.group(1))})", "target": m.group(1),
            }))
        found.sort(key=lambda pair: pair[0])
        return json.dumps([item for _, item in found])

    # -- feedback and revision

    def _audience_feedback(self, prompt: str) -> str:
        return (
            "[Comprehensive Analysis]\n"
            "Core Message Clarity: The core message comes through clearly and the "
            "structure is easy to follow.\n"
            "Engagement Impact: The delivery is steady but could use one vivid image "
            "to anchor the main point.\n"
            "Evidence Presentation: Points are asserted more than evidenced; one "
            "concrete figure would help.\n"
            "Persuasive Elements: The framing connects with practical concerns and "
            "lands a credible call to action.\n"
            "[Critical Issues and Minimal Revision Suggestions]\n"
            "Issue: Evidence is thinner than the claims deserve.\n"
            "Impact on Audience: Listeners may discount otherwise strong points.\n"
            "Minimal Revision Suggestion: Attach one specific supporting fact to the "
            "strongest claim.\n"
        )

    def _minimal_revision(self, prompt: str) -> str:
        return _section(prompt, "## Statement\n", "\n\n## Audience Feedback").strip()

    def _fit_to_budget(self, prompt: str) -> str:
        m = re.search(r"total length is (\d+) words", prompt)
        if m is None:
            raise ProviderError("stub budget route found no word target")
        return _exact_words([], int(m.group(1)))

    # -- stage drafting

    def _tree_sections(self, prompt: str) -> tuple[str, str]:
        own = _section(prompt, "**Your Tree**: ", "**Opponent's Tree**:")
        oppo = _section(prompt, "**Opponent's Tree**: ", "\n\n##")
        return own, oppo

    def _tree_claims(self, section: str, side: Stance) -> list[str]:
        return [
            m.group(4)
            for m in _TREE_LINE_RE.finditer(section)
            if m.group(1) == side.value
        ]

    def _n_words(self, prompt: str) -> int:
        m = re.search(r"total is (\d+) words", prompt)
        if m is None:
            m = re.search(r"total words is (\d+)", prompt)
        if m is None:
            raise ProviderError("stub writer found no word budget")
        return int(m.group(1))

    def _opening(self, prompt: str) -> str:
        side = _side_from_act(prompt)
        n_words = self._n_words(prompt)
        claims_m = re.search(r"\*\*Your Main Claims\*\*: (\[.*?\])", prompt)
        claims = json.loads(claims_m.group(1)) if claims_m else []
        sentences = [f"As the {side.value} side, we open our case on this motion."]
        for claim in claims:
            sentences.append(PROPOSE_PATTERN.format(claim))
            sentences.append(
                f"Our reasoning here is direct and rests on the record ({_h6(claim)})."
            )
        text = _exact_words(sentences, n_words)
        return f"**Opening Plan**: Even split across the claims.\n**Statement**: {text}"

    def _rebuttal(self, prompt: str) -> str:
        side = _side_from_act(prompt)
        n_words = self._n_words(prompt)
        own_section, oppo_section = self._tree_sections(prompt)
        sentences = [f"As the {side.value} side, we take the exchanges head on."]
        own_claims = self._tree_claims(own_section, side)
        if own_claims:
            sentences.append(REINFORCE_PATTERN.format(own_claims[0]))
        oppo_claims = self._tree_claims(oppo_section, side.opposite)
        if oppo_claims:
            sentences.append(ATTACK_PATTERN.format(oppo_claims[0]))
        attacks_on_us = self._tree_claims(own_section, side.opposite)
        if attacks_on_us:
            sentences.append(REBUT_PATTERN.format(attacks_on_us[0]))
        text = _exact_words(sentences, n_words)
        return f"**Rebuttal Plan**: Defend first, then press the weakest point.\n**Statement**: {text}"

    def _closing(self, prompt: str) -> str:
        side = _side_from_act(prompt)
        n_words = self._n_words(prompt)
        own_section, _ = self._tree_sections(prompt)
        sentences = [f"As the {side.value} side, we close by drawing the threads together."]
        own_claims = self._tree_claims(own_section, side)
        if own_claims:
            sentences.append(REINFORCE_PATTERN.format(own_claims[0]))
        sentences.append("The balance of this debate favors our reading of the motion.")
        text = _exact_words(sentences, n_words)
        return f"**Closing Plan**: Weigh the battlegrounds and land the verdict.\n**Statement**: {text}"


def make_stub_collaborators(corpus_index=None):
    """Collaborator bundle wired entirely to deterministic offline stubs."""
    from .orchestrator import Collaborators
    from .providers import HashEmbedder

    return Collaborators.from_provider(
        DeterministicDebateStub(), HashEmbedder(), corpus_index=corpus_index
    )
