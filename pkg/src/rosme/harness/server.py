"""Live session endpoint speaking the teleop wire protocol.

One session per server. Clients connect over a websocket, receive `hello`
once, then `frame` messages at the sim's 10 Hz sample rate, and `done`
when the session ends. They may send `cmd_vel`, `set_goal`, `reset` and
`start`; unknown message types are logged and ignored. The session loop is
the single writer of sim state; connection handlers only submit commands
and drain per-connection outbound queues, so a misbehaving connection can
be dropped without touching the session.

Pacing: with a positive real-time factor the loop sleeps FRAME_PERIOD /
rt_factor of wall time per frame. With rt_factor 0 it instead waits for
client `step` messages, one frame per ticket, which gives scripted clients
a deterministic lockstep session.
"""

from __future__ import annotations

import asyncio
import json
import logging
from pathlib import Path

import numpy as np
from fastapi import FastAPI, WebSocket, WebSocketDisconnect

from ..explore import ExternalPolicy
from ..simkernel import RobotConfig, VelocityCommand
from .benchmark import SessionReport, aggregate, versions, write_csv
from .session import EventLog, Session, SessionConfig

log = logging.getLogger("rosme.serve")

FRAME_PERIOD = 0.1  # sim seconds between frames (10 Hz)
UNKNOWN_BYTE = 255  # sentinel distinct from any known-cell value


def rle_encode(changed_idx: np.ndarray, values: np.ndarray) -> list[list[int]]:
    """[start, length, value] runs over row-major cell indices."""
    runs: list[list[int]] = []
    for i, v in zip(changed_idx.tolist(), values.tolist()):
        if runs and runs[-1][0] + runs[-1][1] == i and runs[-1][2] == v:
            runs[-1][1] += 1
        else:
            runs.append([i, 1, int(v)])
    return runs


class LiveSession:
    """Owns the Session, paces it, and fans frames out to clients.

    Every client raster is kept in lockstep with `_sent`, the server's
    record of what has been broadcast. A new connection is seeded with the
    full `_sent` raster and registered in the same synchronous step, so the
    per-connection queue sees a gapless, ordered delta stream no matter how
    sends interleave with the session loop.
    """

    def __init__(self, cfg: SessionConfig, rt_factor: float = 1.0):
        self.cfg = cfg
        self.rt_factor = rt_factor
        self.clients: dict[WebSocket, asyncio.Queue] = {}
        self.started = asyncio.Event()
        self.done_payload: dict | None = None
        self.epoch = 0
        self._task: asyncio.Task | None = None
        self._log_fh = None
        # rt_factor 0 switches pacing from wall clock to client `step`
        # tickets: one frame advances per ticket, so a scripted client is
        # in lockstep with the loop and sees fully deterministic sessions.
        self._steps = asyncio.Semaphore(0)
        self._reset()

    def _reset(self) -> None:
        out_dir = Path(self.cfg.out_dir) if self.cfg.out_dir else None
        if self._log_fh:
            self._log_fh.close()
            self._log_fh = None
        event_log = EventLog(None)
        if out_dir is not None:
            out_dir.mkdir(parents=True, exist_ok=True)
            self._log_fh = open(
                out_dir / "run_0.events.jsonl", "w", encoding="utf-8"
            )
            event_log = EventLog(self._log_fh)
        self.session = Session(self.cfg, run_id=0, seed=self.cfg.seed, log=event_log)
        self._sent = np.full(self.session.known.grid.shape, UNKNOWN_BYTE, np.uint8)
        self.done_payload = None
        self.epoch += 1

    # -- protocol messages ---------------------------------------------------

    def hello(self) -> dict:
        world = self.session.world
        robot = RobotConfig()
        return {
            "type": "hello",
            "world": world.name,
            "width": world.width,
            "height": world.height,
            "resolution": world.resolution,
            "taxonomy": {
                "root": world.taxonomy.root,
                "parent": dict(world.taxonomy.parent),
            },
            "metrics": list(self.cfg.metrics),
            "dt": self.cfg.dt,
            "policy": self.cfg.policy,
            "v_max": robot.v_max,
            "omega_max": robot.omega_max,
            "epoch": self.epoch,
        }

    def frame(self) -> dict:
        """Advance `_sent` to the live grid and describe the step."""
        s = self.session
        flat_new = s.known.grid.ravel()
        flat_sent = self._sent.ravel()
        changed = np.flatnonzero(flat_new != flat_sent)
        deltas = rle_encode(changed, flat_new[changed])
        flat_sent[changed] = flat_new[changed]
        return self._frame_payload(deltas)

    def sync_frame(self) -> dict:
        """Full raster as already broadcast; seeds a fresh connection."""
        flat_sent = self._sent.ravel()
        known = np.flatnonzero(flat_sent != UNKNOWN_BYTE)
        return self._frame_payload(rle_encode(known, flat_sent[known]))

    def _frame_payload(self, deltas: list[list[int]]) -> dict:
        s = self.session
        scan = s.last_scan
        return {
            "type": "frame",
            "t": s.t,
            "epoch": self.epoch,
            "pose": [s.state.x, s.state.y, s.state.theta],
            "deltas": deltas,
            "lidar": [round(float(r), 4) for r in scan.ranges] if scan else [],
            "detections": [m.to_json() for m in s.last_messages],
            "metrics": [
                {"t": m.t, "name": m.name, "value": m.value}
                for m in s.last_samples
            ],
        }

    # -- inbound -------------------------------------------------------------

    def handle(self, msg: dict) -> None:
        kind = msg.get("type")
        if kind == "cmd_vel":
            if isinstance(self.session.policy, ExternalPolicy):
                self.session.policy.submit_velocity(
                    VelocityCommand(
                        float(msg.get("v", 0.0)), float(msg.get("omega", 0.0))
                    ),
                    self.session.t,
                )
        elif kind == "set_goal":
            if isinstance(self.session.policy, ExternalPolicy):
                self.session.policy.submit_goal(
                    float(msg["x"]), float(msg["y"]), self.session.t
                )
        elif kind == "reset":
            self.started.clear()
            self._reset()
            self.ensure_running()
        elif kind == "start":
            self.started.set()
        elif kind == "step":
            for _ in range(int(msg.get("n", 1))):
                self._steps.release()
        else:
            log.warning("ignoring unknown message type %r", kind)

    # -- the loop ------------------------------------------------------------

    async def run(self) -> None:
        ticks_per_frame = max(1, round(FRAME_PERIOD / self.cfg.dt))
        while True:
            if not self.started.is_set():
                await asyncio.sleep(0.01)
                continue
            if self.rt_factor > 0:
                await asyncio.sleep(FRAME_PERIOD / self.rt_factor)
            else:
                await self._steps.acquire()
            if not self.started.is_set():  # reset raced the pacing wait
                continue
            alive = False
            for _ in range(ticks_per_frame):
                alive = self.session.tick()
                if not alive:
                    break
            self.broadcast(self.frame())
            if not alive:
                break
        self.done_payload = self._persist()
        self.broadcast(self.done_payload)

    def _persist(self) -> dict:
        s = self.session
        report_path = None
        if self.cfg.out_dir:
            out_dir = Path(self.cfg.out_dir)
            write_csv(s.series, out_dir / "run_0.csv")
            if self._log_fh:
                self._log_fh.close()
                self._log_fh = None
            grid, mean, std, finals = aggregate([s.series], self.cfg.metrics)
            report = SessionReport(
                config=self.cfg.echo(),
                series=[s.series],
                grid=grid,
                mean=mean,
                std=std,
                finals=finals,
                versions=versions(),
                run_meta=[
                    {
                        "run": 0,
                        "seed": self.cfg.seed,
                        "t_end": s.t,
                        "exhausted": s.exhausted,
                        "collisions": s.collisions,
                        "csv": "run_0.csv",
                        "events": "run_0.events.jsonl",
                    }
                ],
            )
            report_path = str(out_dir / "report.json")
            with open(report_path, "w", encoding="utf-8") as fh:
                json.dump(report.to_json(), fh, indent=2)
                fh.write("\n")
        finals = {
            name: samples[-1].value
            for name, samples in s.series.samples.items()
            if samples
        }
        return {"type": "done", "t": s.t, "report": report_path, "finals": finals}

    def broadcast(self, payload: dict) -> None:
        for queue in self.clients.values():
            queue.put_nowait(payload)

    def attach(self, ws: WebSocket) -> asyncio.Queue:
        """Seed and register a connection; must not be interleaved with
        a broadcast, so everything here is synchronous."""
        queue: asyncio.Queue = asyncio.Queue()
        queue.put_nowait(self.hello())
        queue.put_nowait(self.sync_frame())
        if self.done_payload is not None:
            queue.put_nowait(self.done_payload)
        self.clients[ws] = queue
        return queue

    def detach(self, ws: WebSocket) -> None:
        self.clients.pop(ws, None)

    def ensure_running(self) -> None:
        if (self._task is None or self._task.done()) and self.done_payload is None:
            self._task = asyncio.create_task(self.run())


async def _drain(ws: WebSocket, queue: asyncio.Queue) -> None:
    while True:
        await ws.send_json(await queue.get())


def build_app(cfg: SessionConfig, rt_factor: float = 1.0) -> FastAPI:
    """The wire-protocol ASGI app; bind it with uvicorn or a test client."""
    app = FastAPI(title="rosme live session")
    live = LiveSession(cfg, rt_factor)
    app.state.live = live

    @app.websocket("/ws")
    async def ws_endpoint(websocket: WebSocket) -> None:
        await websocket.accept()
        live.ensure_running()
        queue = live.attach(websocket)
        sender = asyncio.create_task(_drain(websocket, queue))
        try:
            while True:
                raw = await websocket.receive_text()
                try:
                    msg = json.loads(raw)
                    if not isinstance(msg, dict):
                        raise ValueError("message is not an object")
                except ValueError as exc:
                    log.warning("closing client after bad payload: %s", exc)
                    live.detach(websocket)
                    sender.cancel()
                    await websocket.close(code=1003)
                    break
                live.handle(msg)
        except WebSocketDisconnect:
            pass
        finally:
            live.detach(websocket)
            sender.cancel()

    @app.get("/health")
    async def health() -> dict:
        return {
            "world": cfg.world,
            "policy": cfg.policy,
            "t": live.session.t,
            "clients": len(live.clients),
            "done": live.done_payload is not None,
        }

    return app


def serve(cfg: SessionConfig, bind: str, rt_factor: float = 1.0) -> None:
    """Blocking entry point: run the live session server on host:port."""
    import uvicorn

    host, _, port = bind.rpartition(":")
    app = build_app(cfg, rt_factor)
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port), log_level="info")
