"""Command-line interface: run debates, rehearse, ingest corpora, validate.

Provider selection lives in a JSON config file with environment overrides;
credentials come only from the environment. Replay mode rejects any
request that was not recorded instead of falling through to a live call.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path
from typing import Optional

from .corpus import CorpusError, CorpusIndex, SegmentationError, build_index, ingest_debate
from .model import Claim, Motion, Stage, Stance
from .orchestrator import (
    Collaborators,
    StagePipelineConfig,
    run_debate,
    run_debate_paired,
    validate_statement,
)
from .providers import (
    GuardChatProvider,
    HashEmbedder,
    OpenAICompatibleChatProvider,
    ProviderRecording,
    RecordingChatProvider,
    RecordingEmbedder,
    ReplayChatProvider,
    ReplayEmbedder,
    RetryingChatProvider,
)
from .rehearsal import build_rehearsal_tree, render_rehearsal_outline
from .scoring import ScorePair, SeededStubScorer
from .semantic import NodeMatcher, flow_tree_to_string
from .serialization import parse, serialize
from .stubs import DeterministicDebateStub
from .timecontrol import RateEstimator

log = logging.getLogger(__name__)


def _load_config(path: Optional[str]) -> dict:
    if not path:
        return {}
    return json.loads(Path(path).read_text(encoding="utf-8"))


def _pipeline_config(raw: dict) -> StagePipelineConfig:
    return StagePipelineConfig.from_payload(raw.get("pipeline", {}))


def _build_chat_provider(raw: dict, replay: Optional[str]):
    provider_cfg = dict(raw.get("provider", {"kind": "stub"}))
    kind = os.environ.get("DEBATEKIT_PROVIDER", provider_cfg.get("kind", "stub"))
    if replay:
        recording = ProviderRecording.load(replay)
        return ReplayChatProvider(recording), recording
    if kind == "stub":
        return DeterministicDebateStub(), None
    if kind == "openai-compatible":
        provider = OpenAICompatibleChatProvider(
            endpoint=provider_cfg["endpoint"],
            model=provider_cfg["model"],
            timeout=float(provider_cfg.get("timeout", 60.0)),
        )
        return RetryingChatProvider(provider, retries=int(provider_cfg.get("retries", 2))), None
    if kind == "guard":
        return GuardChatProvider(), None
    raise SystemExit(f"unknown provider kind {kind!r}")


def _build_embedder(raw: dict, replay_recording: Optional[ProviderRecording]):
    embed_cfg = raw.get("embedder", {"kind": "hash"})
    kind = embed_cfg.get("kind", "hash")
    if replay_recording is not None and kind != "hash":
        return ReplayEmbedder(replay_recording, embed_cfg.get("model_tag", "recorded"))
    if kind == "hash":
        return HashEmbedder(dimension=int(embed_cfg.get("dimension", 32)))
    raise SystemExit(f"unknown embedder kind {kind!r}")


def _collaborators(
    raw: dict,
    replay: Optional[str],
    record_to: Optional[str],
    corpus_dir: Optional[str],
) -> tuple[Collaborators, Optional[tuple[ProviderRecording, Path]]]:
    chat, replay_recording = _build_chat_provider(raw, replay)
    embedder = _build_embedder(raw, replay_recording)
    recorder = None
    if record_to:
        recording = ProviderRecording(provider_tag=raw.get("provider", {}).get("kind", "stub"))
        chat = RecordingChatProvider(chat, recording)
        embedder = RecordingEmbedder(embedder, recording)
        recorder = (recording, Path(record_to))
    corpus_index = CorpusIndex.load(corpus_dir) if corpus_dir else None
    config = _pipeline_config(raw)
    collab = Collaborators.from_provider(
        chat, embedder, corpus_index=corpus_index,
        words_per_minute=config.words_per_minute,
    )
    return collab, recorder


# ---------------------------------------------------------------------------
# Subcommands


def cmd_run(args: argparse.Namespace) -> int:
    raw = _load_config(args.config)
    config = _pipeline_config(raw)
    motion = Motion(args.motion)

    if args.paired:
        def factory() -> Collaborators:
            collab, _ = _collaborators(raw, args.replay, None, args.corpus)
            return collab

        first, second = run_debate_paired(motion, config, factory, out_dir=args.out)
        print(f"original run: {len(first.state.transcript)} statements, "
              f"valid={first.all_valid}")
        print(f"swapped run:  {len(second.state.transcript)} statements, "
              f"valid={second.all_valid}")
        return 0 if (first.all_valid and second.all_valid) else 1

    record_to = str(Path(args.out) / "recording.jsonl") if args.out and args.record else None
    collab, recorder = _collaborators(raw, args.replay, record_to, args.corpus)
    result = run_debate(motion, config, collab, run_dir=args.out, resume=args.resume)
    if recorder is not None:
        recording, path = recorder
        recording.save(path)
    for statement, sidecar in zip(result.state.transcript, result.sidecars):
        marker = "ok" if sidecar.validity.valid else "INVALID"
        print(f"[{marker}] {statement.side.value:>3} {statement.stage.value:<8} "
              f"{statement.word_count} words, {statement.estimated_duration:.1f}s")
    print(f"all statements valid: {result.all_valid}")
    return 0 if result.all_valid else 1


def cmd_rehearse(args: argparse.Namespace) -> int:
    raw = _load_config(args.config)
    config = _pipeline_config(raw)
    chat, _ = _build_chat_provider(raw, args.replay)
    motion = Motion(args.motion)
    stance = Stance(args.stance)
    if args.scorer == "seeded":
        scorers = ScorePair.single(SeededStubScorer(seed=args.seed))
    else:
        from .scoring import PromptImpactScorer

        scorers = ScorePair.single(PromptImpactScorer(chat))
    from .rehearsal import PromptClaimProposer, PromptCounterargumentGenerator, propose_main_claims

    generator = PromptCounterargumentGenerator(chat)
    if args.claim:
        claims = [Claim(args.claim)]
    else:
        claims = propose_main_claims(
            motion, stance, config.n_main_claims, PromptClaimProposer(chat)
        )
    params = config.rehearsal_params()
    out_dir = Path(args.out) if args.out else None
    if out_dir is not None:
        out_dir.mkdir(parents=True, exist_ok=True)
    for i, claim in enumerate(claims):
        tree = build_rehearsal_tree(claim, stance, motion, params, generator, scorers)
        outline = render_rehearsal_outline(tree)
        print(outline)
        print()
        if out_dir is not None:
            (out_dir / f"rehearsal_{i:02d}.json").write_text(
                serialize(tree), encoding="utf-8"
            )
            (out_dir / f"rehearsal_{i:02d}.txt").write_text(outline + "\n", encoding="utf-8")
    return 0


def cmd_ingest(args: argparse.Namespace) -> int:
    raw = _load_config(args.config)
    config = _pipeline_config(raw)
    chat, replay_recording = _build_chat_provider(raw, args.replay)
    embedder = _build_embedder(raw, replay_recording)
    matcher = NodeMatcher(embedder, theta=config.theta)
    from .flow import PromptTupleExtractor

    extractor = PromptTupleExtractor(chat)
    paths = sorted(Path(args.transcripts).glob("*.txt")) + sorted(
        Path(args.transcripts).glob("*.md")
    )
    if not paths:
        print(f"no transcript files under {args.transcripts}", file=sys.stderr)
        return 1

    if args.dry_run:
        ok = 0
        for path in paths:
            try:
                from .corpus import segment_transcript

                motion_text, _ = segment_transcript(path.read_text(encoding="utf-8"))
                print(f"ok   {path.name}: {motion_text[:60]}")
                ok += 1
            except SegmentationError as exc:
                print(f"SKIP {path.name}: {exc}")
        print(f"{ok}/{len(paths)} transcripts segment cleanly")
        return 0

    entries = []
    for path in paths:
        try:
            entry = ingest_debate(
                path.read_text(encoding="utf-8"), path.stem, extractor, matcher,
                matcher.embedder,
            )
            entries.append(entry)
            print(f"ok   {path.name}: {entry.motion.text[:60]}")
        except (SegmentationError, CorpusError) as exc:
            print(f"SKIP {path.name}: {exc}", file=sys.stderr)
    index = build_index(entries, matcher.embedder)
    index.save(args.out)
    print(f"indexed {len(index.entries)} debates ({len(index.rows)} rows) -> {args.out}")
    if args.against_motion:
        overlap = index.motion_overlap(Motion(args.against_motion))
        if overlap:
            print(f"note: motion overlaps corpus debates {overlap} (reported, not enforced)")
    return 0


def cmd_validate(args: argparse.Namespace) -> int:
    from .model import Statement

    text = Path(args.statement).read_text(encoding="utf-8")
    statement = Statement(side=Stance(args.side), stage=Stage(args.stage), text=text)
    report = validate_statement(statement, statement.stage, RateEstimator())
    print(json.dumps(report.to_payload(), indent=2, sort_keys=True))
    return 0 if report.valid else 1


def cmd_render_tree(args: argparse.Namespace) -> int:
    value = parse(Path(args.tree).read_text(encoding="utf-8"))
    from .flow import DebateFlowTree
    from .model import DebateState
    from .rehearsal import RehearsalTree

    if isinstance(value, DebateFlowTree):
        print(flow_tree_to_string(value))
    elif isinstance(value, RehearsalTree):
        print(render_rehearsal_outline(value))
    elif isinstance(value, DebateState):
        for side in (Stance.PRO, Stance.CON):
            print(flow_tree_to_string(value.flow_trees[side]))
            print()
    else:
        print(f"cannot render documents of kind {type(value).__name__}", file=sys.stderr)
        return 1
    return 0


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .server import create_app

    raw = _load_config(args.config)
    config = _pipeline_config(raw)

    def factory() -> Collaborators:
        collab, _ = _collaborators(raw, args.replay, None, args.corpus)
        return collab

    app = create_app(factory, config=config, frontend_dir=args.frontend)
    uvicorn.run(app, host=args.host, port=args.port)
    return 0


def main(argv: Optional[list[str]] = None) -> int:
    parser = argparse.ArgumentParser(prog="debate", description=__doc__)
    parser.add_argument("--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a full Oxford-style debate")
    p_run.add_argument("--motion", required=True)
    p_run.add_argument("--config")
    p_run.add_argument("--out", help="run directory for transcripts and traces")
    p_run.add_argument("--paired", action="store_true", help="also run with swapped sides")
    p_run.add_argument("--replay", help="recording file to replay (no live calls)")
    p_run.add_argument("--record", action="store_true", help="record provider traffic")
    p_run.add_argument("--resume", action="store_true", help="resume from --out")
    p_run.add_argument("--corpus", help="corpus directory for audience retrieval")
    p_run.set_defaults(func=cmd_run)

    p_reh = sub.add_parser("rehearse", help="build and print rehearsal trees")
    p_reh.add_argument("--motion", required=True)
    p_reh.add_argument("--stance", choices=[s.value for s in Stance], required=True)
    p_reh.add_argument("--claim", help="rehearse one claim instead of proposing")
    p_reh.add_argument("--config")
    p_reh.add_argument("--replay")
    p_reh.add_argument("--out", help="directory for tree documents")
    p_reh.add_argument("--scorer", choices=["seeded", "prompt"], default="prompt")
    p_reh.add_argument("--seed", type=int, default=0)
    p_reh.set_defaults(func=cmd_rehearse)

    p_ing = sub.add_parser("ingest", help="ingest human transcripts into a corpus")
    p_ing.add_argument("--transcripts", required=True)
    p_ing.add_argument("--out", required=True)
    p_ing.add_argument("--config")
    p_ing.add_argument("--replay")
    p_ing.add_argument("--dry-run", action="store_true")
    p_ing.add_argument("--against-motion", help="report motion overlap with the corpus")
    p_ing.set_defaults(func=cmd_ingest)

    p_val = sub.add_parser("validate", help="format/time validity of a statement file")
    p_val.add_argument("--statement", required=True)
    p_val.add_argument("--stage", choices=[s.value for s in Stage], required=True)
    p_val.add_argument("--side", choices=[s.value for s in Stance], required=True)
    p_val.set_defaults(func=cmd_validate)

    p_ren = sub.add_parser("render-tree", help="print a tree document as an outline")
    p_ren.add_argument("--tree", required=True)
    p_ren.set_defaults(func=cmd_render_tree)

    p_srv = sub.add_parser("serve", help="serve interactive arena sessions over HTTP")
    p_srv.add_argument("--host", default="127.0.0.1")
    p_srv.add_argument("--port", type=int, default=8008)
    p_srv.add_argument("--config")
    p_srv.add_argument("--replay")
    p_srv.add_argument("--corpus")
    p_srv.add_argument("--frontend", help="directory with the built browser client")
    p_srv.set_defaults(func=cmd_serve)

    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
