// DOM rendering. Pure functions of the state store; every frame rebuilds
// from the last server-sent snapshot (no client-side prediction).

import { adjacentTiles } from "./board.js";
import { secondsRemaining } from "./countdown.js";
import {
  ClientState,
  inputEnabled,
  showHistogram,
  totalVotes,
} from "./state.js";

export interface Refs {
  board: HTMLElement;
  status: HTMLElement;
  roundTimer: HTMLElement;
  sessionTimer: HTMLElement;
  histogram: HTMLElement;
  banner: HTMLElement;
  meta: HTMLElement;
}

export function grabRefs(root: Document): Refs {
  const get = (id: string) => {
    const el = root.getElementById(id);
    if (!el) throw new Error(`missing #${id}`);
    return el;
  };
  return {
    board: get("board"),
    status: get("status"),
    roundTimer: get("round-timer"),
    sessionTimer: get("session-timer"),
    histogram: get("histogram"),
    banner: get("banner"),
    meta: get("meta"),
  };
}

export function renderBoard(
  el: HTMLElement,
  state: ClientState,
  onTile: (tile: number) => void,
): void {
  el.replaceChildren();
  if (!state.board) {
    return;
  }
  const clickable = inputEnabled(state) ? adjacentTiles(state.board) : new Set<number>();
  for (const value of state.board) {
    const cell = document.createElement("button");
    cell.className = value === 0 ? "cell blank" : "cell tile";
    if (value !== 0) {
      cell.textContent = String(value);
      if (clickable.has(value)) {
        cell.classList.add("clickable");
        cell.disabled = false;
        cell.addEventListener("click", () => onTile(value));
      } else {
        cell.disabled = true; // clicks on non-adjacent tiles are inert
      }
      if (state.myVote === value) {
        cell.classList.add("my-vote");
      }
    } else {
      cell.disabled = true;
    }
    el.appendChild(cell);
  }
}

export function renderHistogram(el: HTMLElement, state: ClientState): void {
  el.replaceChildren();
  if (!showHistogram(state)) {
    el.style.display = "none";
    return;
  }
  el.style.display = "";
  const total = totalVotes(state.tally);
  const heading = document.createElement("div");
  heading.className = "histogram-title";
  heading.textContent = total ? `votes this round: ${total}` : "no votes yet";
  el.appendChild(heading);
  if (!state.tally) return;
  const max = Math.max(...Object.values(state.tally));
  for (const [tile, count] of Object.entries(state.tally).sort()) {
    const row = document.createElement("div");
    row.className = "bar-row";
    const label = document.createElement("span");
    label.className = "bar-label";
    label.textContent =
      state.myVote !== null && String(state.myVote) === tile ? `${tile}*` : tile;
    const bar = document.createElement("div");
    bar.className = "bar";
    bar.style.width = `${(count / max) * 100}%`;
    bar.textContent = String(count);
    row.append(label, bar);
    el.appendChild(row);
  }
}

export function renderChrome(refs: Refs, state: ClientState, nowMs: number): void {
  refs.status.textContent =
    state.connection !== "open"
      ? state.connection
      : state.summary
        ? "session over"
        : `${state.playerId ?? "?"} in ${state.sessionId ?? "?"}`;
  const left = secondsRemaining(state.deadlineMs, nowMs, state.clockOffsetMs);
  refs.roundTimer.textContent = state.round === null ? "-" : `${left}s`;
  refs.meta.textContent = state.puzzle
    ? `puzzle ${state.puzzle} | difficulty ${state.difficulty} | moves ${state.moveCount}`
    : "";
  if (state.summary) {
    refs.banner.textContent = `session over: solved ${state.summary["puzzles_solved"]}`;
    refs.banner.style.display = "";
  } else if (state.solved) {
    refs.banner.textContent =
      `solved in ${state.solved.moves} moves ` +
      `(optimal ${state.solved.optimal}) - next puzzle soon`;
    refs.banner.style.display = "";
  } else {
    refs.banner.style.display = "none";
  }
}
