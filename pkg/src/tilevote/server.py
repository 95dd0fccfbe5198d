"""Networked front door: TCP (newline-delimited JSON) and WebSocket clients
speaking one message schema into per-session command queues.

Every session is a single-threaded engine instance owned by one asyncio
task; connections only enqueue commands, so client concurrency can never
interleave partial updates. Deadlines are driven two ways: a precise
one-shot timer armed at each session's next transition, plus a coarse
periodic tick as a safety net. All session events go to the append-only
log before they are broadcast.
"""

from __future__ import annotations

import asyncio
import json
import logging
import time
from dataclasses import dataclass, field, replace
from pathlib import Path

import websockets

from .board import IllegalMove
from .engine import (
    BadConfig,
    EngineError,
    Mode,
    NotParticipant,
    RoundClosed,
    Session,
    SessionConfig,
    SessionOver,
)
from .events import (
    Event,
    MoveExecuted,
    PuzzleSolved,
    RoundOpened,
    RoundPassed,
    SessionEnded,
    VoteTally,
)
from .eventlog import EventLogWriter
from .oracle import DistanceTable

log = logging.getLogger("tilevote.server")

MAX_PROTOCOL_ERRORS = 8  # bad lines tolerated per connection before dropping
SEND_QUEUE_LIMIT = 256  # outbound backlog before a slow client is dropped


@dataclass
class ServerConfig:
    host: str = "127.0.0.1"
    port: int = 8750
    ws_port: int | None = None  # defaults to port + 1
    tick_ms: int = 100
    send_timeout: float = 5.0
    log_dir: str | Path | None = "logs"
    grace_seconds: float = 0.0  # disconnect grace before the seat is released
    defaults: SessionConfig = field(default_factory=SessionConfig)

    def resolved_ws_port(self) -> int:
        return self.ws_port if self.ws_port is not None else self.port + 1


def now_ms() -> int:
    return int(time.time() * 1000)


class ClientConn:
    """One connected client; transport-specific send/close in subclasses."""

    _counter = 0

    def __init__(self, server: "GameServer"):
        ClientConn._counter += 1
        self.conn_id = f"c{ClientConn._counter}"
        self.server = server
        self.player_id: str | None = None
        self.host: SessionHost | None = None
        self.name = ""
        self.errors = 0
        self.outbox: asyncio.Queue[str | None] = asyncio.Queue(SEND_QUEUE_LIMIT)
        self.closed = False

    def send(self, message: dict) -> None:
        if self.closed:
            return
        try:
            self.outbox.put_nowait(json.dumps(message, separators=(",", ":")))
        except asyncio.QueueFull:
            log.warning("dropping slow connection %s", self.conn_id)
            self.server.loop.create_task(self.close())

    async def _writer_loop(self) -> None:
        while True:
            line = await self.outbox.get()
            if line is None:
                return
            try:
                await asyncio.wait_for(
                    self._send_raw(line), self.server.config.send_timeout
                )
            except (asyncio.TimeoutError, OSError, websockets.ConnectionClosed):
                await self.close()
                return

    async def handle_line(self, raw: str | bytes) -> None:
        try:
            message = json.loads(raw)
            if not isinstance(message, dict):
                raise ValueError("not an object")
        except (json.JSONDecodeError, UnicodeDecodeError, ValueError) as e:
            await self._protocol_error("bad_message", f"unparseable message: {e}")
            return
        mtype = message.get("type")
        if mtype == "join":
            await self.server.handle_join(self, message)
        elif mtype in ("vote", "move"):
            if self.host is None:
                await self._protocol_error("not_joined", "join a session first")
                return
            self.host.enqueue(("vote", self, message))
        else:
            await self._protocol_error("bad_type", f"unknown message type {mtype!r}")

    async def _protocol_error(self, code: str, detail: str) -> None:
        self.errors += 1
        self.send({"type": "error", "code": code, "detail": detail})
        if self.errors >= MAX_PROTOCOL_ERRORS:
            await self.close()

    async def close(self) -> None:
        if self.closed:
            return
        self.closed = True
        if self.host is not None:
            self.host.connection_lost(self)
        await self._close_raw()

    # transport hooks
    async def _send_raw(self, line: str) -> None:
        raise NotImplementedError

    async def _close_raw(self) -> None:
        raise NotImplementedError


class TcpConn(ClientConn):
    def __init__(self, server: "GameServer", writer: asyncio.StreamWriter):
        super().__init__(server)
        self.writer = writer

    async def _send_raw(self, line: str) -> None:
        self.writer.write(line.encode() + b"\n")
        await self.writer.drain()

    async def _close_raw(self) -> None:
        try:
            self.writer.close()
        except OSError:
            pass


class WsConn(ClientConn):
    def __init__(self, server: "GameServer", ws) -> None:
        super().__init__(server)
        self.ws = ws

    async def _send_raw(self, line: str) -> None:
        await self.ws.send(line)

    async def _close_raw(self) -> None:
        await self.ws.close()


class SessionHost:
    """Owner of one engine session: command queue, log writer, broadcast."""

    def __init__(
        self,
        server: "GameServer",
        session_id: str,
        config: SessionConfig,
        first_player: str,
    ):
        self.server = server
        self.session_id = session_id
        self.config = config
        self.connections: dict[str, ClientConn] = {}  # player id -> conn
        self.pending_leave: dict[str, asyncio.TimerHandle] = {}
        self.queue: asyncio.Queue[tuple] = asyncio.Queue()
        self._player_seq = 1  # p1 is the creator
        self._tick_handle: asyncio.TimerHandle | None = None
        self.writer: EventLogWriter | None = None
        if server.config.log_dir is not None:
            path = Path(server.config.log_dir) / f"{session_id}.jsonl"
            self.writer = EventLogWriter(path, session_id, config.mode, config)
        self.session = Session(
            config, [first_player], now_ms(), server.table, session_id
        )
        self.task = server.loop.create_task(self._run())

    def next_player_id(self) -> str:
        self._player_seq += 1
        return f"p{self._player_seq}"

    def enqueue(self, command: tuple) -> None:
        self.queue.put_nowait(command)

    def connection_lost(self, conn: ClientConn) -> None:
        grace = self.server.config.grace_seconds
        player = conn.player_id
        if player is None or self.connections.get(player) is not conn:
            return
        del self.connections[player]
        if grace > 0:
            self.pending_leave[player] = self.server.loop.call_later(
                grace, lambda: self.enqueue(("leave", player))
            )
        else:
            self.enqueue(("leave", player))

    def try_rejoin(self, conn: ClientConn, player: str) -> bool:
        handle = self.pending_leave.pop(player, None)
        if handle is None or player not in self.session.participants:
            return False
        handle.cancel()
        self._attach(conn, player)
        return True

    def _attach(self, conn: ClientConn, player: str) -> None:
        conn.player_id = player
        conn.host = self
        self.connections[player] = conn
        conn.send(
            {
                "type": "joined",
                "player": player,
                "session": self.session_id,
                "config": self.config.to_dict(),
            }
        )
        conn.send(self._state_message())

    def _state_message(self) -> dict:
        run = self.session.run
        if run is None or run.round is None:
            return {"type": "state", "puzzle": None, "board": None}
        return {
            "type": "state",
            "puzzle": run.puzzle_id,
            "board": list(run.current_board),
            "difficulty": run.difficulty,
            "move_count": run.move_count,
            "round": run.round.round_id,
            "deadline_ms": run.round.deadline_ms,
        }

    async def _run(self) -> None:
        while True:
            command = await self.queue.get()
            kind = command[0]
            events: list[Event] = []
            try:
                if kind == "tick":
                    events = self.session.tick(now_ms())
                elif kind == "join":
                    _, conn, name = command
                    player = self.next_player_id()
                    events = self.session.add_player(player, now_ms())
                    conn.name = name
                    self._attach(conn, player)
                elif kind == "leave":
                    events = self.session.remove_player(command[1], now_ms())
                elif kind == "vote":
                    _, conn, message = command
                    events = self._handle_vote(conn, message)
            except EngineError as e:
                if kind == "join":
                    command[1].send(
                        {"type": "error", "code": _error_code(e), "detail": str(e)}
                    )
                events = self.session.tick(now_ms())  # drain advance events
            self._dispatch(events)
            if self.session.ended:
                self._shutdown()
                return
            self._arm_precise_tick()

    def _handle_vote(self, conn: ClientConn, message: dict) -> list[Event]:
        if conn.player_id is None:
            conn.send({"type": "error", "code": "not_joined", "detail": ""})
            return []
        tile = message.get("tile")
        round_id = message.get("round")
        if not isinstance(tile, int) or not 1 <= tile <= 8:
            conn.send(
                {"type": "error", "code": "bad_message", "detail": "tile must be 1-8"}
            )
            return []
        try:
            return self.session.submit_vote(conn.player_id, tile, now_ms(), round_id)
        except (IllegalMove, EngineError) as e:
            conn.send({"type": "error", "code": _error_code(e), "detail": str(e)})
            return self.session.tick(now_ms())

    def _dispatch(self, events: list[Event]) -> None:
        for ev in events:
            if self.writer is not None:
                self.writer.append_event(ev)
            message = self._wire_message(ev)
            if message is not None:
                self.broadcast(message)

    def _wire_message(self, ev: Event) -> dict | None:
        if isinstance(ev, RoundOpened):
            return self._state_message()
        if isinstance(ev, VoteTally):
            return {"type": "votes", "round": ev.round, "counts": ev.counts}
        if isinstance(ev, MoveExecuted):
            return {
                "type": "moved",
                "round": ev.round,
                "tile": ev.tile,
                "board": list(ev.board),
                "move_count": ev.move_count,
            }
        if isinstance(ev, RoundPassed):
            board = self.session.run.current_board if self.session.run else None
            return {
                "type": "moved",
                "round": ev.round,
                "tile": None,
                "board": list(board) if board else None,
                "move_count": ev.move_count,
            }
        if isinstance(ev, PuzzleSolved):
            return {
                "type": "solved",
                "puzzle": ev.puzzle,
                "moves": ev.moves,
                "optimal": ev.optimal,
                "elapsed_s": ev.elapsed_s,
            }
        if isinstance(ev, SessionEnded):
            return {"type": "session_end", "summary": ev.summary}
        return None  # joins/leaves/vote_cast are log-only

    def broadcast(self, message: dict) -> None:
        for conn in list(self.connections.values()):
            conn.send(message)

    def _arm_precise_tick(self) -> None:
        if self._tick_handle is not None:
            self._tick_handle.cancel()
        nt = self.session.next_transition_ms()
        if nt is None:
            return
        delay = max(0.0, (nt - now_ms()) / 1000)
        self._tick_handle = self.server.loop.call_later(
            delay, lambda: self.enqueue(("tick",))
        )

    def _shutdown(self) -> None:
        if self._tick_handle is not None:
            self._tick_handle.cancel()
        for handle in self.pending_leave.values():
            handle.cancel()
        if self.writer is not None:
            self.writer.close()
        for conn in list(self.connections.values()):
            conn.host = None
            conn.player_id = None
        self.connections.clear()
        self.server.session_closed(self.session_id)


def _error_code(e: Exception) -> str:
    return {
        IllegalMove: "illegal_move",
        RoundClosed: "round_closed",
        NotParticipant: "not_participant",
        BadConfig: "bad_config",
        SessionOver: "session_over",
    }.get(type(e), "error")


class GameServer:
    """Accepts TCP and WebSocket clients and routes them to session hosts."""

    def __init__(self, table: DistanceTable, config: ServerConfig):
        self.table = table
        self.config = config
        self.hosts: dict[str, SessionHost] = {}
        self._session_seq = 0
        self.loop: asyncio.AbstractEventLoop = None  # set in start()
        self._tcp_server: asyncio.AbstractServer | None = None
        self._ws_server = None
        self._ticker_task: asyncio.Task | None = None
        self.tcp_port: int | None = None
        self.ws_port: int | None = None

    async def start(self) -> None:
        self.loop = asyncio.get_running_loop()
        self._tcp_server = await asyncio.start_server(
            self._handle_tcp, self.config.host, self.config.port
        )
        self.tcp_port = self._tcp_server.sockets[0].getsockname()[1]
        ws_port = self.config.resolved_ws_port() if self.config.port else 0
        self._ws_server = await websockets.serve(
            self._handle_ws, self.config.host, ws_port
        )
        self.ws_port = next(iter(self._ws_server.sockets)).getsockname()[1]
        self._ticker_task = self.loop.create_task(self._ticker())
        log.info(
            "listening on tcp %s:%s and ws://%s:%s/ws",
            self.config.host,
            self.tcp_port,
            self.config.host,
            self.ws_port,
        )

    async def stop(self) -> None:
        if self._ticker_task:
            self._ticker_task.cancel()
        if self._tcp_server:
            self._tcp_server.close()
            await self._tcp_server.wait_closed()
        if self._ws_server:
            self._ws_server.close()
            await self._ws_server.wait_closed()
        for host in list(self.hosts.values()):
            host.enqueue(("leave", "*shutdown*"))

    async def serve_forever(self) -> None:
        await self._tcp_server.serve_forever()

    async def _ticker(self) -> None:
        # safety net behind the precise per-session timers
        while True:
            await asyncio.sleep(self.config.tick_ms / 1000)
            for host in list(self.hosts.values()):
                host.enqueue(("tick",))

    # -- connection handlers ----------------------------------------------

    async def _handle_tcp(
        self, reader: asyncio.StreamReader, writer: asyncio.StreamWriter
    ) -> None:
        conn = TcpConn(self, writer)
        writer_task = self.loop.create_task(conn._writer_loop())
        try:
            while not conn.closed:
                line = await reader.readline()
                if not line:
                    break
                if line.strip():
                    await conn.handle_line(line)
        except (ConnectionError, OSError):
            pass
        finally:
            await conn.close()
            writer_task.cancel()

    async def _handle_ws(self, ws) -> None:
        path = ws.request.path.split("?")[0]
        if path not in ("/ws", "/ws/"):
            await ws.close(code=4404, reason="connect to /ws")
            return
        conn = WsConn(self, ws)
        writer_task = self.loop.create_task(conn._writer_loop())
        try:
            async for raw in ws:
                if conn.closed:
                    break
                await conn.handle_line(raw)
        except websockets.ConnectionClosed:
            pass
        finally:
            await conn.close()
            writer_task.cancel()

    # -- session management -------------------------------------------------

    async def handle_join(self, conn: ClientConn, message: dict) -> None:
        if conn.host is not None:
            conn.send(
                {
                    "type": "error",
                    "code": "already_joined",
                    "detail": "connection is already in a session",
                }
            )
            return
        mode_name = message.get("mode") or self.config.defaults.mode.value
        try:
            mode = Mode(mode_name)
        except ValueError:
            conn.send(
                {"type": "error", "code": "bad_message", "detail": f"bad mode {mode_name!r}"}
            )
            return
        name = str(message.get("name", ""))[:64]
        wanted = message.get("session", "new")
        if mode is Mode.GROUP and wanted != "new":
            host = self.hosts.get(wanted)
            if host is None:
                conn.send(
                    {"type": "error", "code": "no_such_session", "detail": str(wanted)}
                )
                return
            rejoin_as = message.get("player")
            if isinstance(rejoin_as, str) and host.try_rejoin(conn, rejoin_as):
                return
            conn.name = name
            host.enqueue(("join", conn, name))
            return
        self._create_session(conn, mode, name)

    def _create_session(self, conn: ClientConn, mode: Mode, name: str) -> None:
        self._session_seq += 1
        prefix = "s" if mode is Mode.SOLO else "g"
        session_id = f"{prefix}{self._session_seq:04d}"
        config = replace(self.config.defaults, mode=mode)
        host = SessionHost(self, session_id, config, first_player="p1")
        self.hosts[session_id] = host
        conn.name = name
        host._attach(conn, "p1")
        host.enqueue(("tick",))  # flush the session-start events to log/clients

    def session_closed(self, session_id: str) -> None:
        self.hosts.pop(session_id, None)


async def serve(table: DistanceTable, config: ServerConfig) -> None:
    """Run the server until cancelled (the CLI entry point)."""
    server = GameServer(table, config)
    await server.start()
    try:
        await server.serve_forever()
    except asyncio.CancelledError:
        pass
    finally:
        await server.stop()
