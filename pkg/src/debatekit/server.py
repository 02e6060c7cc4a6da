"""HTTP interface for interactive human-vs-engine debate sessions.

The server wraps the same DebateSession the offline orchestrator uses and
adds no semantics of its own: a session's state after any request sequence
equals the state an offline run produces from the equivalent statement
sequence. Engine turns that precede the human's first slot are played at
session creation, so the cursor always rests on a human turn or the end.
"""

from __future__ import annotations

import json
import logging
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterator, Optional

from fastapi import FastAPI, HTTPException, Request
from fastapi.responses import StreamingResponse
from fastapi.staticfiles import StaticFiles

from .model import DebateState, Motion, Stance, Statement
from .orchestrator import Collaborators, DebateSession, StagePipelineConfig
from .semantic import flow_tree_to_string
from .serialization import serialize

log = logging.getLogger(__name__)

CollaboratorsFactory = Callable[[], Collaborators]


@dataclass
class SessionRecord:
    session_id: str
    human_side: Stance
    session: DebateSession
    lock: threading.Lock = field(default_factory=threading.Lock)
    #: request_id -> response payload, for idempotent retries
    responses: dict[str, dict] = field(default_factory=dict)

    @property
    def engine_side(self) -> Stance:
        return self.human_side.opposite


def _statement_payload(st: Statement) -> dict:
    return json.loads(serialize(st))


def session_view(record: SessionRecord) -> dict:
    state = record.session.state
    slot = state.next_slot()
    return {
        "session_id": record.session_id,
        "motion": {"text": state.motion.text, "id": state.motion.id},
        "human_side": record.human_side.value,
        "cursor": state.cursor,
        "done": slot is None,
        "awaiting": (
            {"side": slot[0].value, "stage": slot[1].value} if slot else None
        ),
        "schedule": [[s.value, g.value] for s, g in state.stage_schedule],
        "transcript": [_statement_payload(st) for st in state.transcript],
        "tree_strings": {
            s.value: flow_tree_to_string(state.flow_trees[s])
            for s in (Stance.PRO, Stance.CON)
        },
        "events_count": len(record.session.events),
    }


def _play_engine_turns(record: SessionRecord) -> list[dict]:
    """Advance through consecutive engine slots; returns their payloads."""
    played: list[dict] = []
    while True:
        slot = record.session.state.next_slot()
        if slot is None or slot[0] is record.human_side:
            break
        statement = record.session.play_stage(*slot)
        played.append(_statement_payload(statement))
    return played


def create_app(
    collaborators_factory: CollaboratorsFactory,
    config: Optional[StagePipelineConfig] = None,
    frontend_dir: Optional[str | Path] = None,
) -> FastAPI:
    app = FastAPI(title="debatekit arena", version="0.1.0")
    app.state.sessions = {}
    app.state.sessions_lock = threading.Lock()
    base_config = config or StagePipelineConfig()

    def get_record(session_id: str) -> SessionRecord:
        record = app.state.sessions.get(session_id)
        if record is None:
            raise HTTPException(status_code=404, detail=f"no session {session_id!r}")
        return record

    @app.post("/sessions", status_code=201)
    async def create_session(body: dict) -> dict:
        session_id = str(body.get("session_id", "")).strip()
        motion_text = str(body.get("motion", "")).strip()
        side_raw = str(body.get("human_side", "")).strip().lower()
        if not session_id:
            raise HTTPException(status_code=400, detail="session_id is required")
        if not motion_text:
            raise HTTPException(status_code=400, detail="motion is required")
        try:
            human_side = Stance(side_raw)
        except ValueError:
            raise HTTPException(status_code=400, detail=f"bad human_side {side_raw!r}")
        session_config = base_config
        if body.get("config"):
            try:
                session_config = StagePipelineConfig.from_payload(body["config"])
            except (ValueError, KeyError) as exc:
                raise HTTPException(status_code=400, detail=f"bad config: {exc}")

        with app.state.sessions_lock:
            if session_id in app.state.sessions:
                raise HTTPException(
                    status_code=409, detail=f"session {session_id!r} already exists"
                )
            state = DebateState.new(
                Motion(motion_text),
                pro="human" if human_side is Stance.PRO else "engine",
                con="human" if human_side is Stance.CON else "engine",
            )
            session = DebateSession(state, session_config, collaborators_factory())
            record = SessionRecord(session_id=session_id, human_side=human_side,
                                   session=session)
            app.state.sessions[session_id] = record

        with record.lock:
            # rehearsal material for the engine side is built up front
            session.prepare_side(record.engine_side)
            engine_statements = _play_engine_turns(record)
        view = session_view(record)
        view["engine_statements"] = engine_statements
        return view

    @app.get("/sessions/{session_id}")
    async def get_session(session_id: str) -> dict:
        return session_view(get_record(session_id))

    @app.post("/sessions/{session_id}/statements")
    async def submit_statement(session_id: str, body: dict) -> dict:
        record = get_record(session_id)
        request_id = str(body.get("request_id", "")).strip()
        text = str(body.get("text", ""))
        if not request_id:
            raise HTTPException(status_code=400, detail="request_id is required")
        if not text.strip():
            raise HTTPException(status_code=400, detail="statement text is empty")

        with record.lock:
            if request_id in record.responses:
                return record.responses[request_id]
            slot = record.session.state.next_slot()
            if slot is None:
                raise HTTPException(status_code=409, detail="debate is complete")
            side, stage = slot
            if side is not record.human_side:
                raise HTTPException(
                    status_code=409,
                    detail=f"out of turn: waiting on the engine ({side.value} {stage.value})",
                )
            statement = Statement(side=side, stage=stage, text=text)
            record.session.observe_statement(statement)
            engine_statements = _play_engine_turns(record)
            response = session_view(record)
            response["human_statement"] = _statement_payload(statement)
            response["engine_statements"] = engine_statements
            record.responses[request_id] = response
        return response

    @app.get("/sessions/{session_id}/trees")
    async def get_trees(session_id: str) -> dict:
        record = get_record(session_id)
        state = record.session.state
        return {
            "tree_strings": {
                s.value: flow_tree_to_string(state.flow_trees[s])
                for s in (Stance.PRO, Stance.CON)
            },
            "documents": {
                s.value: json.loads(serialize(state.flow_trees[s]))
                for s in (Stance.PRO, Stance.CON)
            },
        }

    @app.get("/sessions/{session_id}/events")
    async def get_events(session_id: str, request: Request) -> StreamingResponse:
        record = get_record(session_id)
        last_raw = request.headers.get("last-event-id") or request.query_params.get(
            "last_event_id", ""
        )
        try:
            last_seen = int(last_raw)
        except ValueError:
            last_seen = -1

        def stream() -> Iterator[str]:
            for event in list(record.session.events):
                if event["seq"] <= last_seen:
                    continue
                payload = json.dumps(event, sort_keys=True)
                yield f"id: {event['seq']}\nevent: pipeline\ndata: {payload}\n\n"
            yield "event: sync\ndata: {}\n\n"

        return StreamingResponse(stream(), media_type="text/event-stream")

    # serve the built browser client same-origin when it exists
    if frontend_dir is not None and Path(frontend_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(frontend_dir), html=True),
                  name="arena-ui")

    return app
