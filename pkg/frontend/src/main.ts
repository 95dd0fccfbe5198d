// WebSocket glue: one socket, one reducer, render on every change.

import { estimateClockOffset } from "./countdown.js";
import type { ClientCmd, ServerMsg } from "./protocol.js";
import { grabRefs, renderBoard, renderChrome, renderHistogram } from "./render.js";
import { Action, ClientState, initialState, reduce } from "./state.js";

const params = new URLSearchParams(location.search);
const mode = params.get("mode") === "solo" ? "solo" : "group";
const session = params.get("session") ?? "new";
const name = params.get("name") ?? `anon-${Math.floor(Math.random() * 1000)}`;

const wsUrl = `ws://${location.hostname}:${params.get("port") ?? location.port}/ws`;
const socket = new WebSocket(wsUrl);

let state: ClientState = initialState;
const refs = grabRefs(document);
let offsetEstimated = false;

function dispatch(action: Action): void {
  state = reduce(state, action);
  render();
}

function sendCmd(cmd: ClientCmd): void {
  socket.send(JSON.stringify(cmd));
}

function onTile(tile: number): void {
  if (state.config?.mode === "solo") {
    sendCmd({ type: "move", tile });
  } else if (state.round !== null) {
    sendCmd({ type: "vote", round: state.round, tile });
  }
  dispatch({ type: "local/vote_sent", tile });
}

function render(): void {
  renderBoard(refs.board, state, onTile);
  renderHistogram(refs.histogram, state);
  renderChrome(refs, state, Date.now());
}

socket.addEventListener("open", () => {
  dispatch({ type: "local/socket", status: "open" });
  sendCmd({ type: "join", mode, session, name });
});

socket.addEventListener("close", () => {
  dispatch({ type: "local/socket", status: "closed" });
});

socket.addEventListener("message", (event) => {
  const message = JSON.parse(String(event.data)) as ServerMsg;
  if (
    !offsetEstimated &&
    message.type === "state" &&
    message.deadline_ms !== undefined &&
    state.config !== null
  ) {
    offsetEstimated = true;
    dispatch({
      type: "local/clock_offset",
      offsetMs: estimateClockOffset(
        message.deadline_ms,
        state.config.round_seconds,
        Date.now(),
      ),
    });
  }
  dispatch(message);
});

// countdown repaint at 4 Hz; the store itself only changes on messages
setInterval(() => renderChrome(refs, state, Date.now()), 250);
render();
