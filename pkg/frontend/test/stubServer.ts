// An in-memory fake of the arena server, faithful to its contract:
// schedule cursor, idempotent statement submission by request id, 409 on
// out-of-turn or duplicate-create, and the SSE event replay shape. Used to
// test the client without a network.

import type { SessionView, Side, StageName, StatementPayload } from "../src/api.js";

const SCHEDULE: [Side, StageName][] = [
  ["pro", "opening"],
  ["con", "opening"],
  ["pro", "rebuttal"],
  ["con", "rebuttal"],
  ["pro", "closing"],
  ["con", "closing"],
];

interface StubSession {
  sessionId: string;
  motion: string;
  humanSide: Side;
  transcript: StatementPayload[];
  responses: Map<string, SessionView>;
  events: { seq: number; phase: string; detail: string }[];
}

function statement(side: Side, stage: StageName, text: string): StatementPayload {
  const words = text.trim() === "" ? 0 : text.trim().split(/\s+/).length;
  return {
    side,
    stage,
    text,
    plan: null,
    word_count: words,
    estimated_duration: (words / 130) * 60,
  };
}

function treeStrings(session: StubSession): { pro: string; con: string } {
  // one proposed node per delivered statement, enough to exercise parsing
  const lines = { pro: ["[pro][root]"], con: ["[con][root]"] };
  session.transcript.forEach((st, i) => {
    lines[st.side].push(`  [${st.side}][proposed][v=0] point ${i} from ${st.side}`);
  });
  return { pro: lines.pro.join("\n"), con: lines.con.join("\n") };
}

function view(session: StubSession): SessionView {
  const cursor = session.transcript.length;
  const slot = cursor < SCHEDULE.length ? SCHEDULE[cursor] : null;
  return {
    session_id: session.sessionId,
    motion: { text: session.motion, id: "stub" },
    human_side: session.humanSide,
    cursor,
    done: slot === null,
    awaiting: slot ? { side: slot[0], stage: slot[1] } : null,
    schedule: SCHEDULE,
    transcript: [...session.transcript],
    tree_strings: treeStrings(session),
    events_count: session.events.length,
  };
}

function playEngineTurns(session: StubSession): StatementPayload[] {
  const played: StatementPayload[] = [];
  for (;;) {
    const cursor = session.transcript.length;
    if (cursor >= SCHEDULE.length) break;
    const [side, stage] = SCHEDULE[cursor];
    if (side === session.humanSide) break;
    const st = statement(side, stage, `Engine ${stage} statement number ${cursor}.`);
    session.transcript.push(st);
    session.events.push({
      seq: session.events.length,
      phase: "stage_complete",
      detail: `${side} ${stage}`,
    });
    played.push(st);
  }
  return played;
}

export interface StubServer {
  fetch: (url: string, init?: RequestInit) => Promise<Response>;
  sessions: Map<string, StubSession>;
  // when set, the next matching POST processes server-side but the
  // "network" fails before the response reaches the client
  dropNextStatementResponse: boolean;
  statementPostCount: number;
}

function json(status: number, body: unknown): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "Content-Type": "application/json" },
  });
}

export function makeStubServer(): StubServer {
  const server: StubServer = {
    sessions: new Map(),
    dropNextStatementResponse: false,
    statementPostCount: 0,
    fetch: async (url, init) => {
      const method = init?.method ?? "GET";
      const body = init?.body ? JSON.parse(String(init.body)) : {};
      const path = url.replace(/^https?:\/\/[^/]+/, "");

      if (method === "POST" && path === "/sessions") {
        const id = String(body.session_id ?? "");
        if (!id) return json(400, { detail: "session_id is required" });
        if (server.sessions.has(id)) {
          return json(409, { detail: `session ${id} already exists` });
        }
        const session: StubSession = {
          sessionId: id,
          motion: String(body.motion),
          humanSide: body.human_side as Side,
          transcript: [],
          responses: new Map(),
          events: [],
        };
        server.sessions.set(id, session);
        const engine = playEngineTurns(session);
        return json(201, { ...view(session), engine_statements: engine });
      }

      const statementMatch = path.match(/^\/sessions\/([^/]+)\/statements$/);
      if (method === "POST" && statementMatch) {
        const session = server.sessions.get(statementMatch[1]);
        if (!session) return json(404, { detail: "no such session" });
        server.statementPostCount += 1;
        const requestId = String(body.request_id ?? "");
        if (!requestId) return json(400, { detail: "request_id is required" });
        const stored = session.responses.get(requestId);
        if (stored) return json(200, stored);
        const cursor = session.transcript.length;
        if (cursor >= SCHEDULE.length) {
          return json(409, { detail: "debate is complete" });
        }
        const [side, stage] = SCHEDULE[cursor];
        if (side !== session.humanSide) {
          return json(409, { detail: `out of turn: waiting on the engine` });
        }
        if (!String(body.text ?? "").trim()) {
          return json(400, { detail: "statement text is empty" });
        }
        const human = statement(side, stage, String(body.text));
        session.transcript.push(human);
        const engine = playEngineTurns(session);
        const response: SessionView = {
          ...view(session),
          engine_statements: engine,
          human_statement: human,
        };
        session.responses.set(requestId, response);
        if (server.dropNextStatementResponse) {
          server.dropNextStatementResponse = false;
          throw new TypeError("network dropped");
        }
        return json(200, response);
      }

      const treesMatch = path.match(/^\/sessions\/([^/]+)\/trees$/);
      if (method === "GET" && treesMatch) {
        const session = server.sessions.get(treesMatch[1]);
        if (!session) return json(404, { detail: "no such session" });
        return json(200, { tree_strings: treeStrings(session), documents: {} });
      }

      const eventsMatch = path.match(/^\/sessions\/([^/]+)\/events/);
      if (method === "GET" && eventsMatch) {
        const session = server.sessions.get(eventsMatch[1]);
        if (!session) return json(404, { detail: "no such session" });
        const lastRaw = /last_event_id=(-?\d+)/.exec(path);
        const last = lastRaw ? Number(lastRaw[1]) : -1;
        const blocks = session.events
          .filter((e) => e.seq > last)
          .map((e) => `id: ${e.seq}\nevent: pipeline\ndata: ${JSON.stringify(e)}\n\n`);
        blocks.push("event: sync\ndata: {}\n\n");
        return new Response(blocks.join(""), {
          status: 200,
          headers: { "Content-Type": "text/event-stream" },
        });
      }

      const sessionMatch = path.match(/^\/sessions\/([^/]+)$/);
      if (method === "GET" && sessionMatch) {
        const session = server.sessions.get(sessionMatch[1]);
        if (!session) return json(404, { detail: "no such session" });
        return json(200, view(session));
      }

      return json(404, { detail: `no route for ${method} ${path}` });
    },
  };
  return server;
}
