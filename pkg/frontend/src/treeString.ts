// Parser for the canonical debate-flow tree-string format, one line per
// node: "[side][root]" for the anchor, "[side][status][v=N] claim" below,
// with two spaces of indent per depth level. Rendering from parsed rows
// (rather than a bespoke payload) keeps the UI visually identical to the
// CLI output.

import type { Side } from "./api.js";

export type NodeStatus = "proposed" | "attacked" | "solved";

export interface TreeRow {
  side: Side;
  status: NodeStatus | null; // null marks the root anchor line
  visits: number;
  claim: string;
  depth: number;
}

const LINE = /^( *)\[(pro|con)\](?:\[root\]|\[(proposed|attacked|solved)\]\[v=(\d+)\] (.*))$/;

export function parseTreeString(rendered: string): TreeRow[] {
  const rows: TreeRow[] = [];
  const lines = rendered.split("\n");
  for (let i = 0; i < lines.length; i++) {
    const match = LINE.exec(lines[i]);
    if (!match) {
      throw new Error(`unparseable tree line ${i + 1}: ${JSON.stringify(lines[i])}`);
    }
    const indent = match[1].length;
    if (indent % 2 !== 0) {
      throw new Error(`odd indent on tree line ${i + 1}`);
    }
    rows.push({
      side: match[2] as Side,
      status: (match[3] as NodeStatus | undefined) ?? null,
      visits: match[4] === undefined ? 0 : Number(match[4]),
      claim: match[5] ?? "",
      depth: indent / 2,
    });
  }
  return rows;
}

// Children follow their parent with depth exactly one greater; a row with
// any following deeper row is expandable in the outline.
export function hasChildren(rows: TreeRow[], index: number): boolean {
  return index + 1 < rows.length && rows[index + 1].depth === rows[index].depth + 1;
}
