// Typed client for the arena HTTP endpoints. The fetch implementation is
// injectable so tests can drive the client against a scripted server.

export type Side = "pro" | "con";
export type StageName = "opening" | "rebuttal" | "closing";

export interface StatementPayload {
  side: Side;
  stage: StageName;
  text: string;
  plan: string | null;
  word_count: number;
  estimated_duration: number | null;
}

export interface SessionView {
  session_id: string;
  motion: { text: string; id: string };
  human_side: Side;
  cursor: number;
  done: boolean;
  awaiting: { side: Side; stage: StageName } | null;
  schedule: [Side, StageName][];
  transcript: StatementPayload[];
  tree_strings: { pro: string; con: string };
  events_count: number;
  engine_statements?: StatementPayload[];
  human_statement?: StatementPayload;
}

export interface TreesPayload {
  tree_strings: { pro: string; con: string };
  documents: { pro: unknown; con: unknown };
}

export class ApiError extends Error {
  constructor(
    public status: number,
    public detail: string,
  ) {
    super(`HTTP ${status}: ${detail}`);
  }
}

type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

async function readJson(response: Response): Promise<unknown> {
  const body = await response.json().catch(() => ({}));
  if (!response.ok) {
    const detail =
      typeof body === "object" && body !== null && "detail" in body
        ? String((body as { detail: unknown }).detail)
        : response.statusText;
    throw new ApiError(response.status, detail);
  }
  return body;
}

export class ArenaClient {
  constructor(
    private baseUrl: string,
    private fetchImpl: FetchLike = (url, init) => fetch(url, init),
  ) {}

  async createSession(
    sessionId: string,
    motion: string,
    humanSide: Side,
  ): Promise<SessionView> {
    const response = await this.fetchImpl(`${this.baseUrl}/sessions`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({
        session_id: sessionId,
        motion,
        human_side: humanSide,
      }),
    });
    return (await readJson(response)) as SessionView;
  }

  async getSession(sessionId: string): Promise<SessionView> {
    const response = await this.fetchImpl(`${this.baseUrl}/sessions/${sessionId}`);
    return (await readJson(response)) as SessionView;
  }

  async getTrees(sessionId: string): Promise<TreesPayload> {
    const response = await this.fetchImpl(
      `${this.baseUrl}/sessions/${sessionId}/trees`,
    );
    return (await readJson(response)) as TreesPayload;
  }

  // Submission is idempotent on the server via the client-supplied request
  // id, so a network failure is safe to retry with the same id: the server
  // either never saw the request or replays its stored response.
  async submitStatement(
    sessionId: string,
    requestId: string,
    text: string,
    retries = 1,
  ): Promise<SessionView> {
    let lastError: unknown;
    for (let attempt = 0; attempt <= retries; attempt++) {
      try {
        const response = await this.fetchImpl(
          `${this.baseUrl}/sessions/${sessionId}/statements`,
          {
            method: "POST",
            headers: { "Content-Type": "application/json" },
            body: JSON.stringify({ request_id: requestId, text }),
          },
        );
        return (await readJson(response)) as SessionView;
      } catch (err) {
        if (err instanceof ApiError) throw err; // the server answered; no retry
        lastError = err;
      }
    }
    throw lastError instanceof Error
      ? lastError
      : new Error("network failure during submit");
  }

  eventsUrl(sessionId: string, lastEventId?: number): string {
    const suffix =
      lastEventId === undefined ? "" : `?last_event_id=${lastEventId}`;
    return `${this.baseUrl}/sessions/${sessionId}/events${suffix}`;
  }

  async fetchEvents(
    sessionId: string,
    lastEventId?: number,
  ): Promise<{ events: PipelineEvent[]; lastEventId: number }> {
    const response = await this.fetchImpl(this.eventsUrl(sessionId, lastEventId));
    if (!response.ok) {
      throw new ApiError(response.status, response.statusText);
    }
    const events = parseEventStream(await response.text());
    const newest = events.length
      ? events[events.length - 1].seq
      : (lastEventId ?? -1);
    return { events, lastEventId: newest };
  }
}

export interface PipelineEvent {
  seq: number;
  phase: string;
  detail: string;
}

// Parses a complete server-sent-event body into pipeline events. The
// server replays its event log and closes, so plain fetch + parse covers
// both live polling and reconnect-with-resume.
export function parseEventStream(body: string): PipelineEvent[] {
  const events: PipelineEvent[] = [];
  for (const block of body.split("\n\n")) {
    let eventType = "";
    let data = "";
    for (const line of block.split("\n")) {
      if (line.startsWith("event: ")) eventType = line.slice(7).trim();
      else if (line.startsWith("data: ")) data = line.slice(6);
    }
    if (eventType !== "pipeline" || !data) continue;
    const parsed = JSON.parse(data) as PipelineEvent;
    events.push({
      seq: parsed.seq,
      phase: parsed.phase,
      detail: parsed.detail ?? "",
    });
  }
  return events;
}
