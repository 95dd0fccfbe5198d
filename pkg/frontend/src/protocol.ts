// Wire schema shared with the game server. One JSON object per WebSocket
// text frame; unknown fields are ignored on both sides.

export type Mode = "solo" | "group";

export interface SessionConfig {
  mode: Mode;
  round_seconds: number;
  session_minutes: number;
  inter_puzzle_delay: number;
  start_difficulty: number;
  difficulty_step: number;
  feedback_enabled: boolean;
  quorum: "all" | "majority";
  tie_break: "lowest" | "random";
  rng_seed: number;
}

export interface JoinedMsg {
  type: "joined";
  player: string;
  session: string;
  config: SessionConfig;
}

export interface StateMsg {
  type: "state";
  puzzle: number | null;
  board: number[] | null;
  difficulty?: number;
  move_count?: number;
  round?: number;
  deadline_ms?: number;
}

export interface VotesMsg {
  type: "votes";
  round: number;
  counts: Record<string, number>;
}

export interface MovedMsg {
  type: "moved";
  round: number;
  tile: number | null; // null = timed-out round with no votes
  board: number[] | null;
  move_count: number;
}

export interface SolvedMsg {
  type: "solved";
  puzzle: number;
  moves: number;
  optimal: number;
  elapsed_s: number;
}

export interface SessionEndMsg {
  type: "session_end";
  summary: Record<string, unknown>;
}

export interface ErrorMsg {
  type: "error";
  code: string;
  detail: string;
}

export type ServerMsg =
  | JoinedMsg
  | StateMsg
  | VotesMsg
  | MovedMsg
  | SolvedMsg
  | SessionEndMsg
  | ErrorMsg;

export interface JoinCmd {
  type: "join";
  mode: Mode;
  session: string;
  name: string;
}

export interface VoteCmd {
  type: "vote";
  round: number;
  tile: number;
}

export interface MoveCmd {
  type: "move";
  tile: number;
}

export type ClientCmd = JoinCmd | VoteCmd | MoveCmd;
