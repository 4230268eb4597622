"""Network edge: line-delimited socket, web-socket mirror, static console.

Any number of connection handlers feed a single asyncio queue; exactly
one consumer task applies events to the session and fans outputs back
out. Handlers share nothing with each other, so one misbehaving client
never touches the rest.

Broadcast is buffered per subscriber and never waits on a socket: a
subscriber that stops reading is dropped once 1 MiB of encoded output
is queued for it.
"""

from __future__ import annotations

import asyncio
import mimetypes
import socket
from http import HTTPStatus
from pathlib import Path

import numpy as np
from websockets.asyncio.server import serve as ws_serve
from websockets.datastructures import Headers
from websockets.exceptions import ConnectionClosed
from websockets.http11 import Response

from . import wire
from .audio import CueLibrary
from .config import EngineConfig
from .errors import BindError, ConfigError, FrameTooLarge, MalformedLine, RangeError
from .library import ProgressStore, clip_provider, load_catalog
from .replay import ReplayConfig, replay_frames
from .session import Session, resolve_sound

SUBSCRIBER_BUDGET_BYTES = 1 << 20
TICK_INTERVAL_S = 0.25

_PLACEHOLDER_PAGE = b"""<!doctype html>
<title>dancedrill</title>
<p>Engine running. Connect a console to the /session web socket,
or point a build of the web console at this server.</p>
"""


def split_addr(addr: str):
    host, sep, port = addr.rpartition(":")
    if not sep or not port.isdigit():
        raise BindError(f"listen address {addr!r} is not host:port")
    return host, int(port)


class _Subscriber:
    """One outbound stream with a byte budget.

    publish() only ever appends to the queue; the per-connection sender
    task drains it. Exceeding the budget marks the subscriber dead and
    wakes the sender with a sentinel so it can close the transport.
    """

    def __init__(self, send, close):
        self._send = send
        self._close = close
        self.queue: asyncio.Queue = asyncio.Queue()
        self.pending = 0
        self.dead = False

    def offer(self, data: bytes):
        if self.dead:
            return
        if self.pending + len(data) > SUBSCRIBER_BUDGET_BYTES:
            self.kill()
            return
        self.pending += len(data)
        self.queue.put_nowait(data)

    def kill(self):
        if not self.dead:
            self.dead = True
            self.queue.put_nowait(None)

    async def run(self):
        while True:
            item = await self.queue.get()
            if item is None:
                break
            try:
                await self._send(item)
            except (ConnectionError, ConnectionClosed):
                self.dead = True
                break
            self.pending -= len(item)
        try:
            await self._close()
        except (ConnectionError, ConnectionClosed):
            pass


class EngineServer:
    """Serves one live session over TCP and web socket simultaneously."""

    def __init__(
        self,
        cfg: EngineConfig,
        seed: int = 0,
        ticker: bool = True,
        static_dir=None,
    ):
        self.cfg = cfg
        self.rng = np.random.default_rng(seed)
        self.ticker = ticker
        self.static_dir = Path(static_dir) if static_dir else None

        catalog = load_catalog(cfg.catalog_path)
        if cfg.progress_dir:
            progress_path = Path(cfg.progress_dir)
            progress_path.mkdir(parents=True, exist_ok=True)
            store = ProgressStore.load(progress_path / "progress.ndjson")
        else:
            store = ProgressStore()
        self.cue_library = CueLibrary.load(cfg.cues_path) if cfg.cues_path else None
        self.listener = cfg.stage.listener
        self.emitter_by_id = {e.emitter_id: e for e in cfg.stage.emitters}
        self.catalog = catalog
        self._clip_for = clip_provider(catalog)
        self.session = Session(
            catalog,
            store,
            self._clip_for,
            scoring_cfg=cfg.scoring,
            session_cfg=cfg.session,
            emitters=cfg.stage.emitters,
        )

        self.queue: asyncio.Queue = asyncio.Queue()
        self.subscribers: set[_Subscriber] = set()
        self._tasks: list[asyncio.Task] = []
        self._replay_task: asyncio.Task | None = None
        self._tcp_server = None
        self._ws_server = None

    # -- lifecycle -----------------------------------------------------

    async def start(self):
        host, port = split_addr(self.cfg.listen)
        ws_host, ws_port = split_addr(self.cfg.http_listen)
        try:
            self._tcp_server = await asyncio.start_server(
                self._handle_tcp, host, port, limit=wire.MAX_LINE_BYTES + 1024
            )
            self._ws_server = await ws_serve(
                self._handle_ws,
                ws_host,
                ws_port,
                process_request=self._process_request,
                max_size=wire.MAX_LINE_BYTES,
            )
        except OSError as exc:
            await self.stop()
            raise BindError(str(exc)) from None
        self._tasks.append(asyncio.create_task(self._consume()))
        if self.ticker:
            self._tasks.append(asyncio.create_task(self._run_ticker()))

    async def stop(self):
        await self._cancel_replay()
        for task in self._tasks:
            task.cancel()
        for task in self._tasks:
            try:
                await task
            except asyncio.CancelledError:
                pass
        self._tasks.clear()
        for sub in list(self.subscribers):
            sub.kill()
        if self._tcp_server is not None:
            self._tcp_server.close()
            await self._tcp_server.wait_closed()
            self._tcp_server = None
        if self._ws_server is not None:
            self._ws_server.close()
            await self._ws_server.wait_closed()
            self._ws_server = None

    @property
    def tcp_port(self) -> int:
        return self._tcp_server.sockets[0].getsockname()[1]

    @property
    def http_port(self) -> int:
        return self._ws_server.sockets[0].getsockname()[1]

    # -- session loop --------------------------------------------------

    async def _consume(self):
        while True:
            event = await self.queue.get()
            outputs = self.session.apply(event)
            for out in outputs:
                self._broadcast(out)
                if out["o"] == "SoundRequested" and self.cue_library is not None:
                    resolved = resolve_sound(
                        out, self.cue_library, self.listener, self.emitter_by_id, self.rng
                    )
                    if resolved is not None:
                        self._broadcast(resolved)
            pose = self._pose_view(event, outputs)
            if pose is not None:
                self._broadcast(pose)

    def _pose_view(self, event, outputs):
        """Live overlay feed: the scored frame paired with its matched
        reference pose. Gateway-only; session traces never contain it."""
        if event.get("e") != "FrameIn":
            return None
        if not any(out["o"] == "ScoreUpdate" for out in outputs):
            return None
        frame = event["frame"]
        view = {
            "o": "PoseFrame",
            "t_ms": frame.t_ms,
            "actual": np.round(frame.positions, 4).tolist(),
            "conf": np.round(frame.confidence, 3).tolist(),
            "ref": None,
            "ref_index": None,
        }
        matcher = self.session.matcher
        if matcher is not None and matcher.cursor >= 0:
            view["ref_index"] = int(matcher.cursor)
            view["ref"] = np.round(matcher.ref.frames[matcher.cursor].positions, 4).tolist()
        return view

    async def _run_ticker(self):
        loop = asyncio.get_running_loop()
        start = loop.time()
        while True:
            await asyncio.sleep(TICK_INTERVAL_S)
            now_ms = int((loop.time() - start) * 1000)
            self.queue.put_nowait({"e": "Tick", "now_ms": now_ms})

    def _broadcast(self, out: dict):
        data = wire.encode(wire.WireMessage("output", out))
        for sub in list(self.subscribers):
            sub.offer(data)
            if sub.dead:
                self.subscribers.discard(sub)

    async def _ingest(self, msg: wire.WireMessage, reply):
        if msg.kind == "frame":
            try:
                frame = wire.frame_from_payload(msg.payload)
            except MalformedLine as exc:
                await reply(wire.encode(wire.error("malformed-frame", str(exc))))
                return
            self.queue.put_nowait({"e": "FrameIn", "frame": frame})
        elif msg.kind == "command":
            event = msg.payload
            if not isinstance(event, dict) or "e" not in event:
                await reply(wire.encode(wire.error("malformed-command", 'needs an "e" field')))
                return
            if event["e"] == "FrameIn":
                await reply(
                    wire.encode(wire.error("malformed-command", "frames travel as frame messages"))
                )
                return
            if event["e"] == "Replay":
                # simulator control is handled here at the edge; the
                # session only ever sees the resulting frames
                await self._handle_replay(event, reply)
                return
            self.queue.put_nowait(event)
        elif msg.kind == "error":
            payload = msg.payload if isinstance(msg.payload, dict) else {}
            if payload.get("code") == "unknown-kind":
                # decode turned an unrecognized tag into this value; echo
                # it so the sender learns, and keep the connection
                await reply(wire.encode(msg))
            # anything else is a peer problem report; drop it
        else:
            await reply(wire.encode(wire.error("unexpected-kind", f"{msg.kind} not accepted here")))

    # -- simulator control ---------------------------------------------

    async def _handle_replay(self, event: dict, reply):
        action = event.get("action", "start")
        was_running = await self._cancel_replay()
        if action == "stop":
            if was_running:
                self._broadcast({"o": "ReplayStopped", "reason": "stopped"})
            return
        if action != "start":
            await reply(
                wire.encode(wire.error("malformed-command", f"replay action {action!r}"))
            )
            return

        clip_id = event.get("clip_id")
        if not clip_id:
            challenge_id = self.session.challenge_id
            spec = self.catalog.by_id.get(challenge_id) if challenge_id else None
            if spec is None:
                await reply(
                    wire.encode(wire.error("replay-no-clip", "no clip_id and no challenge selected"))
                )
                return
            clip_id = spec.clip_id
        try:
            clip = self._clip_for(clip_id)
            rcfg = ReplayConfig(
                clip_id=str(clip_id),
                noise_deg=float(event.get("noise_deg", 0.0)),
                dropout_p=float(event.get("dropout_p", 0.0)),
                time_scale=float(event.get("time_scale", 1.0)),
                offset_ms=int(event.get("offset_ms", 0)),
                seed=int(event.get("seed", 0)),
            )
        except (TypeError, ValueError, ConfigError, RangeError) as exc:
            await reply(wire.encode(wire.error("bad-replay-config", str(exc))))
            return

        self._replay_task = asyncio.create_task(self._run_replay(clip, rcfg))
        self._broadcast(
            {
                "o": "ReplayStarted",
                "clip_id": rcfg.clip_id,
                "noise_deg": rcfg.noise_deg,
                "dropout_p": rcfg.dropout_p,
                "time_scale": rcfg.time_scale,
                "offset_ms": rcfg.offset_ms,
                "seed": rcfg.seed,
            }
        )

    async def _run_replay(self, clip, rcfg: ReplayConfig):
        loop = asyncio.get_running_loop()
        start = loop.time()
        first_t = None
        for frame in replay_frames(clip, rcfg):
            if first_t is None:
                first_t = frame.t_ms
            delay = start + (frame.t_ms - first_t) / 1000.0 - loop.time()
            if delay > 0:
                await asyncio.sleep(delay)
            self.queue.put_nowait({"e": "FrameIn", "frame": frame})
        self._broadcast({"o": "ReplayStopped", "reason": "finished"})

    async def _cancel_replay(self) -> bool:
        task, self._replay_task = self._replay_task, None
        if task is None or task.done():
            return False
        task.cancel()
        try:
            await task
        except asyncio.CancelledError:
            pass
        return True

    # -- raw socket edge -----------------------------------------------

    async def _handle_tcp(self, reader: asyncio.StreamReader, writer: asyncio.StreamWriter):
        sub = None
        sender = None

        # keep kernel-side buffering small so backlog for a slow reader
        # lands in the budgeted queue instead of hiding in the socket
        sock = writer.get_extra_info("socket")
        if sock is not None:
            sock.setsockopt(socket.SOL_SOCKET, socket.SO_SNDBUF, 64 * 1024)

        async def reply(data: bytes):
            writer.write(data)
            await writer.drain()

        try:
            if not await self._handshake_tcp(reader, writer):
                return
            sub = _Subscriber(send=reply, close=self._closer(writer))
            self.subscribers.add(sub)
            sender = asyncio.create_task(sub.run())
            while True:
                try:
                    line = await reader.readline()
                except (asyncio.LimitOverrunError, ValueError):
                    await reply(wire.encode(wire.error("line-too-long", "64 KiB limit")))
                    break
                if not line:
                    break
                if not line.strip():
                    continue
                try:
                    msg = wire.decode(line)
                except (MalformedLine, FrameTooLarge) as exc:
                    await reply(wire.encode(wire.error("malformed-line", str(exc))))
                    continue
                await self._ingest(msg, reply)
        except (ConnectionError, asyncio.IncompleteReadError):
            pass
        finally:
            if sub is not None:
                self.subscribers.discard(sub)
                sub.kill()
            if sender is not None:
                await sender
            else:
                await self._closer(writer)()

    async def _handshake_tcp(self, reader, writer) -> bool:
        try:
            line = await reader.readline()
        except (asyncio.LimitOverrunError, ValueError):
            return False
        if not line:
            return False
        try:
            msg = wire.decode(line)
        except (MalformedLine, FrameTooLarge) as exc:
            writer.write(wire.encode(wire.error("expected-hello", str(exc))))
            await writer.drain()
            return False
        ok, err, wants_snapshot = self._check_hello(msg)
        if not ok:
            writer.write(wire.encode(err))
            await writer.drain()
            return False
        writer.write(wire.encode(wire.hello()))
        if wants_snapshot:
            writer.write(wire.encode(wire.WireMessage("output", self.session.snapshot())))
        await writer.drain()
        return True

    def _check_hello(self, msg: wire.WireMessage):
        if msg.kind != "hello":
            return False, wire.error("expected-hello", f"first message was {msg.kind!r}"), False
        payload = msg.payload if isinstance(msg.payload, dict) else {}
        if payload.get("format_version") != wire.FORMAT_VERSION:
            err = wire.error(
                "version-mismatch",
                f"need format_version {wire.FORMAT_VERSION}, got {payload.get('format_version')!r}",
            )
            return False, err, False
        return True, None, bool(payload.get("snapshot"))

    @staticmethod
    def _closer(writer: asyncio.StreamWriter):
        async def close():
            try:
                writer.close()
                await writer.wait_closed()
            except (ConnectionError, OSError):
                pass

        return close

    # -- web-socket edge -----------------------------------------------

    async def _handle_ws(self, connection):
        async def reply(data: bytes):
            await connection.send(data.decode("utf-8"))

        try:
            raw = await connection.recv()
        except ConnectionClosed:
            return
        try:
            msg = wire.decode(raw if isinstance(raw, bytes) else raw.encode("utf-8"))
        except (MalformedLine, FrameTooLarge) as exc:
            await reply(wire.encode(wire.error("expected-hello", str(exc))))
            return
        ok, err, wants_snapshot = self._check_hello(msg)
        if not ok:
            await reply(wire.encode(err))
            return
        await reply(wire.encode(wire.hello()))
        if wants_snapshot:
            await reply(wire.encode(wire.WireMessage("output", self.session.snapshot())))

        sub = _Subscriber(send=reply, close=connection.close)
        self.subscribers.add(sub)
        sender = asyncio.create_task(sub.run())
        try:
            async for raw in connection:
                data = raw if isinstance(raw, bytes) else raw.encode("utf-8")
                try:
                    msg = wire.decode(data)
                except (MalformedLine, FrameTooLarge) as exc:
                    await reply(wire.encode(wire.error("malformed-line", str(exc))))
                    continue
                await self._ingest(msg, reply)
        except ConnectionClosed:
            pass
        finally:
            self.subscribers.discard(sub)
            sub.kill()
            await sender

    # -- static files --------------------------------------------------

    def _process_request(self, connection, request):
        path = request.path.split("?", 1)[0]
        if path == "/session":
            return None  # proceed with the web-socket handshake
        return self._static_response(path)

    def _static_response(self, path: str) -> Response:
        if self.static_dir is None:
            if path == "/":
                return _response(HTTPStatus.OK, "text/html", _PLACEHOLDER_PAGE)
            return _response(HTTPStatus.NOT_FOUND, "text/plain", b"not found\n")
        name = path.lstrip("/") or "index.html"
        root = self.static_dir.resolve()
        target = (root / name).resolve()
        if root not in target.parents and target != root:
            return _response(HTTPStatus.NOT_FOUND, "text/plain", b"not found\n")
        if not target.is_file():
            return _response(HTTPStatus.NOT_FOUND, "text/plain", b"not found\n")
        mime = mimetypes.guess_type(target.name)[0] or "application/octet-stream"
        return _response(HTTPStatus.OK, mime, target.read_bytes())


def _response(status: HTTPStatus, mime: str, body: bytes) -> Response:
    headers = Headers(
        [("Content-Type", mime), ("Content-Length", str(len(body)))]
    )
    return Response(status.value, status.phrase, headers, body)


async def serve_forever(server: EngineServer):
    """Run until cancelled; used by the command-line entry point."""
    await server.start()
    try:
        await asyncio.Event().wait()
    finally:
        await server.stop()
