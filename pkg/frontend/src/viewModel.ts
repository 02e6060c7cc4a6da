// The arena view is a pure projection of server responses plus the local
// draft text: no other client-side state exists, so reloading the page
// and re-projecting the GET payloads reconstructs the identical view.

import type { SessionView, StatementPayload, Side, StageName } from "./api.js";
import { parseTreeString, type TreeRow } from "./treeString.js";
import { countWords, estimateSeconds, STAGE_LIMITS } from "./timer.js";

export interface TranscriptEntry {
  side: Side;
  stage: StageName;
  text: string;
  wordCount: number;
  duration: number | null;
  byHuman: boolean;
}

export interface ArenaView {
  sessionId: string;
  motionText: string;
  humanSide: Side;
  cursor: number;
  done: boolean;
  awaiting: { side: Side; stage: StageName } | null;
  humanTurn: boolean;
  stageLimit: number | null;
  transcript: TranscriptEntry[];
  trees: { pro: TreeRow[]; con: TreeRow[] };
  eventsCount: number;
}

export function projectView(view: SessionView): ArenaView {
  const awaiting = view.awaiting;
  return {
    sessionId: view.session_id,
    motionText: view.motion.text,
    humanSide: view.human_side,
    cursor: view.cursor,
    done: view.done,
    awaiting,
    humanTurn: awaiting !== null && awaiting.side === view.human_side,
    stageLimit: awaiting ? STAGE_LIMITS[awaiting.stage] : null,
    transcript: view.transcript.map((st: StatementPayload) => ({
      side: st.side,
      stage: st.stage,
      text: st.text,
      wordCount: st.word_count,
      duration: st.estimated_duration,
      byHuman: st.side === view.human_side,
    })),
    trees: {
      pro: parseTreeString(view.tree_strings.pro),
      con: parseTreeString(view.tree_strings.con),
    },
    eventsCount: view.events_count,
  };
}

export interface DraftState {
  text: string;
  wordCount: number;
  estimatedSeconds: number;
  overLimit: boolean;
}

export function projectDraft(text: string, stageLimit: number | null): DraftState {
  const estimated = estimateSeconds(text);
  return {
    text,
    wordCount: countWords(text),
    estimatedSeconds: estimated,
    overLimit: stageLimit !== null && estimated > stageLimit,
  };
}
