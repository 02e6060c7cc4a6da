// Word counting and the rate-based speaking-time estimate shown while the
// human types. The rate matches the engine's drafting budget (130 words
// per minute), so the live estimate agrees with what the server enforces.

export const WORDS_PER_MINUTE = 130;

export const STAGE_LIMITS: Record<string, number> = {
  opening: 240,
  rebuttal: 240,
  closing: 120,
};

export function countWords(text: string): number {
  const trimmed = text.trim();
  return trimmed === "" ? 0 : trimmed.split(/\s+/).length;
}

export function estimateSeconds(text: string): number {
  return (countWords(text) / WORDS_PER_MINUTE) * 60;
}

export function formatClock(seconds: number): string {
  const clamped = Math.max(0, Math.round(seconds));
  const minutes = Math.floor(clamped / 60);
  const rest = clamped % 60;
  return `${minutes}:${String(rest).padStart(2, "0")}`;
}

export interface Countdown {
  remaining: number;
  expired: boolean;
  display: string;
}

export function countdown(limitSeconds: number, elapsedSeconds: number): Countdown {
  const remaining = limitSeconds - elapsedSeconds;
  return {
    remaining,
    expired: remaining <= 0,
    display: formatClock(remaining),
  };
}
