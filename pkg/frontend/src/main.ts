// DOM wiring for the arena page. All state lives in the server responses
// and the draft textarea; every render is a projection of those.

import { ApiError, ArenaClient, type SessionView } from "./api.js";
import { hasChildren, type TreeRow } from "./treeString.js";
import { projectDraft, projectView, type ArenaView } from "./viewModel.js";
import { countdown } from "./timer.js";

const $ = <T extends HTMLElement>(id: string): T => {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing element #${id}`);
  return el as T;
};

const client = new ArenaClient("");
let sessionId = "";
let lastEventId = -1;
let turnStartedAt: number | null = null;
let timerHandle: number | undefined;
let currentView: ArenaView | null = null;

function renderTree(container: HTMLElement, rows: TreeRow[]): void {
  container.textContent = "";
  const stack: HTMLElement[] = [container];
  rows.forEach((row, index) => {
    while (stack.length > row.depth + 1) stack.pop();
    const parent = stack[stack.length - 1];
    const label = document.createElement("span");
    if (row.status === null) {
      label.textContent = `${row.side} flow tree`;
      label.className = "tree-root";
    } else {
      label.innerHTML = "";
      const badge = document.createElement("span");
      badge.className = `badge badge-${row.status}`;
      badge.textContent = row.status;
      const visits = document.createElement("span");
      visits.className = "visits";
      visits.textContent = `v=${row.visits}`;
      label.append(badge, ` [${row.side}] `, visits, ` ${row.claim}`);
    }
    if (hasChildren(rows, index)) {
      const details = document.createElement("details");
      details.open = true;
      const summary = document.createElement("summary");
      summary.append(label);
      details.append(summary);
      parent.append(details);
      stack.push(details);
    } else {
      const leaf = document.createElement("div");
      leaf.className = "leaf";
      leaf.append(label);
      parent.append(leaf);
      stack.push(leaf);
    }
  });
}

function render(view: ArenaView): void {
  currentView = view;
  $("motion").textContent = view.motionText;
  $("status").textContent = view.done
    ? "Debate complete."
    : view.humanTurn
      ? `Your turn: ${view.awaiting!.stage} (${view.humanSide})`
      : `Engine is preparing its ${view.awaiting?.stage ?? ""} statement`;
  renderTree($("tree-pro"), view.trees.pro);
  renderTree($("tree-con"), view.trees.con);

  const transcript = $("transcript");
  transcript.textContent = "";
  for (const entry of view.transcript) {
    const item = document.createElement("article");
    item.className = entry.byHuman ? "statement human" : "statement engine";
    const head = document.createElement("header");
    head.textContent = `${entry.side} ${entry.stage} — ${entry.wordCount} words` +
      (entry.duration !== null ? ` (~${Math.round(entry.duration)}s)` : "");
    const body = document.createElement("p");
    body.textContent = entry.text;
    item.append(head, body);
    transcript.append(item);
  }

  const editor = $<HTMLTextAreaElement>("draft");
  const submit = $<HTMLButtonElement>("submit");
  editor.disabled = !view.humanTurn;
  submit.disabled = !view.humanTurn;
  if (view.humanTurn && turnStartedAt === null) {
    turnStartedAt = Date.now();
  }
  if (!view.humanTurn) turnStartedAt = null;
  renderDraftMeta(view);
}

function renderDraftMeta(view: ArenaView): void {
  const editor = $<HTMLTextAreaElement>("draft");
  const draft = projectDraft(editor.value, view.stageLimit);
  $("draft-meta").textContent =
    `${draft.wordCount} words · ~${Math.round(draft.estimatedSeconds)}s` +
    (draft.overLimit ? " — over the stage limit" : "");
  if (view.stageLimit !== null && turnStartedAt !== null) {
    const elapsed = (Date.now() - turnStartedAt) / 1000;
    const clock = countdown(view.stageLimit, elapsed);
    $("clock").textContent = clock.display;
    $("clock").classList.toggle("expired", clock.expired);
  } else {
    $("clock").textContent = "–:––";
  }
}

function showError(message: string): void {
  const banner = $("error");
  banner.textContent = message;
  banner.hidden = message === "";
}

async function refresh(): Promise<ArenaView> {
  const view = projectView(await client.getSession(sessionId));
  render(view);
  return view;
}

async function drainEvents(): Promise<void> {
  try {
    const { events, lastEventId: newest } = await client.fetchEvents(
      sessionId,
      lastEventId < 0 ? undefined : lastEventId,
    );
    lastEventId = newest;
    if (events.length) {
      const latest = events[events.length - 1];
      $("pipeline").textContent = `${latest.phase}: ${latest.detail}`;
    }
  } catch {
    // connection loss: keep current data and show the reconnect state
    $("pipeline").textContent = "reconnecting…";
  }
}

async function submitDraft(): Promise<void> {
  const editor = $<HTMLTextAreaElement>("draft");
  const text = editor.value;
  if (!text.trim()) {
    showError("Write your statement first.");
    return;
  }
  showError("");
  const requestId = `req-${sessionId}-${crypto.randomUUID()}`;
  $<HTMLButtonElement>("submit").disabled = true;
  try {
    // the client retries on network failure with the same request id; the
    // server's idempotency guarantees no duplicate statement
    const response = await client.submitStatement(sessionId, requestId, text);
    editor.value = "";
    await drainEvents();
    render(projectView(response));
  } catch (err) {
    if (err instanceof ApiError) {
      showError(err.detail);
      await refresh();
    } else {
      showError("Network trouble; your draft is untouched. Try again.");
      $<HTMLButtonElement>("submit").disabled = false;
    }
  }
}

async function start(): Promise<void> {
  const params = new URLSearchParams(window.location.search);
  const motion = params.get("motion") ?? "This house would adopt the motion";
  const side = params.get("side") === "con" ? "con" : "pro";
  sessionId = params.get("session") ?? `arena-${crypto.randomUUID()}`;

  let view: SessionView;
  try {
    view = await client.createSession(sessionId, motion, side);
  } catch (err) {
    if (err instanceof ApiError && err.status === 409) {
      // reload of an existing session: reconstruct the view from GET
      view = await client.getSession(sessionId);
    } else {
      showError(err instanceof Error ? err.message : String(err));
      return;
    }
  }
  render(projectView(view));
  await drainEvents();

  $<HTMLButtonElement>("submit").addEventListener("click", () => void submitDraft());
  $<HTMLTextAreaElement>("draft").addEventListener("input", () => {
    if (currentView) renderDraftMeta(currentView);
  });
  timerHandle = window.setInterval(() => {
    void (async () => {
      const current = await client.getSession(sessionId).catch(() => null);
      if (current) {
        render(projectView(current));
        if (current.done && timerHandle !== undefined) {
          window.clearInterval(timerHandle);
        }
      }
    })();
  }, 2000);
}

window.addEventListener("DOMContentLoaded", () => void start());
