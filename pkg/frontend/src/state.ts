// Client state store: a pure reducer over incoming server messages plus a
// few local actions. The server is authoritative; the rendered board always
// equals the last board it sent, never a local prediction.

import type { ServerMsg, SessionConfig } from "./protocol.js";

export interface SolvedBanner {
  puzzle: number;
  moves: number;
  optimal: number;
  elapsedS: number;
}

export interface ClientState {
  connection: "connecting" | "open" | "closed";
  playerId: string | null;
  sessionId: string | null;
  config: SessionConfig | null;
  board: number[] | null;
  puzzle: number | null;
  difficulty: number | null;
  moveCount: number;
  round: number | null; // null = no open round (input disabled)
  deadlineMs: number | null;
  myVote: number | null;
  tally: Record<string, number> | null;
  solved: SolvedBanner | null;
  summary: Record<string, unknown> | null;
  lastError: { code: string; detail: string } | null;
  clockOffsetMs: number; // serverTime - localTime, estimated at join
}

export type LocalAction =
  | { type: "local/socket"; status: "connecting" | "open" | "closed" }
  | { type: "local/vote_sent"; tile: number }
  | { type: "local/clock_offset"; offsetMs: number };

export type Action = ServerMsg | LocalAction;

export const initialState: ClientState = {
  connection: "connecting",
  playerId: null,
  sessionId: null,
  config: null,
  board: null,
  puzzle: null,
  difficulty: null,
  moveCount: 0,
  round: null,
  deadlineMs: null,
  myVote: null,
  tally: null,
  solved: null,
  summary: null,
  lastError: null,
  clockOffsetMs: 0,
};

export function reduce(state: ClientState, action: Action): ClientState {
  switch (action.type) {
    case "local/socket":
      return { ...state, connection: action.status };
    case "local/vote_sent":
      return { ...state, myVote: action.tile };
    case "local/clock_offset":
      return { ...state, clockOffsetMs: action.offsetMs };
    case "joined":
      return {
        ...state,
        playerId: action.player,
        sessionId: action.session,
        config: action.config,
      };
    case "state": {
      if (action.board === null || action.puzzle === null) {
        return { ...state, round: null, deadlineMs: null };
      }
      const newRound = action.round ?? null;
      const sameRound = newRound !== null && newRound === state.round;
      return {
        ...state,
        board: action.board,
        puzzle: action.puzzle,
        difficulty: action.difficulty ?? state.difficulty,
        moveCount: action.move_count ?? 0,
        round: newRound,
        deadlineMs: action.deadline_ms ?? null,
        myVote: sameRound ? state.myVote : null,
        tally: sameRound ? state.tally : null,
        solved: null, // a fresh puzzle/round clears the banner
      };
    }
    case "votes":
      if (action.round !== state.round) {
        return state; // stale tally from a closed round
      }
      return { ...state, tally: action.counts };
    case "moved":
      return {
        ...state,
        board: action.board ?? state.board,
        moveCount: action.move_count,
        round: null, // input disabled until the next state message
        deadlineMs: null,
      };
    case "solved":
      return {
        ...state,
        solved: {
          puzzle: action.puzzle,
          moves: action.moves,
          optimal: action.optimal,
          elapsedS: action.elapsed_s,
        },
      };
    case "session_end":
      return { ...state, summary: action.summary, round: null, deadlineMs: null };
    case "error":
      return { ...state, lastError: { code: action.code, detail: action.detail } };
    default:
      return state;
  }
}

/** The vote histogram is only shown in group mode with feedback enabled. */
export function showHistogram(state: ClientState): boolean {
  return (
    state.config !== null &&
    state.config.mode === "group" &&
    state.config.feedback_enabled
  );
}

/** Input is live only while a round is open. */
export function inputEnabled(state: ClientState): boolean {
  return state.round !== null && state.summary === null;
}

export function totalVotes(tally: Record<string, number> | null): number {
  if (!tally) return 0;
  return Object.values(tally).reduce((a, b) => a + b, 0);
}
