"""One benchmark session: a seeded policy driving the simulated robot.

The session owns the tick loop and the event log. Three independent rng
streams (policy, lidar, detector) are spawned from the base seed so that
swapping the policy cannot perturb the sensor noise of an otherwise
identical run.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, asdict
from pathlib import Path
from typing import IO, Any

import numpy as np

from ..errors import Exhausted, ValidationError
from ..explore import make_policy
from ..metrics import DEFAULT_METRICS, MetricSample, SessionSeries, sample_all
from ..semknow import KnownMap, ObjectMessage, SemanticStore
from ..simkernel import (
    DetectionEvent,
    DetectorConfig,
    RobotConfig,
    RobotState,
    SensorConfig,
    camera_observe,
    detect,
    lidar_scan,
    step,
)
from ..worldmodel import WorldSpec, load_world

LOG_VERSION = 1

# policies that may declare themselves done before the clock runs out
SELF_ENDING = ("frontier", "tour")


@dataclass
class SessionConfig:
    """Everything a benchmark run needs; mirrors the CLI flags."""

    world: str = "small_office"
    policy: str = "frontier"
    policy_params: dict[str, Any] = field(default_factory=dict)
    seed: int = 0
    runs: int = 5
    duration: float = 300.0  # seconds sim time
    dt: float = 0.1
    sample_period: float = 1.0
    sensor: SensorConfig = field(default_factory=SensorConfig)
    detector: DetectorConfig = field(default_factory=DetectorConfig)
    threshold: float = 0.25
    predicate_mode: str = "accumulate"
    metrics: tuple[str, ...] = DEFAULT_METRICS
    out_dir: str | None = None

    def validate(self) -> None:
        if self.duration < 0:
            raise ValidationError("duration must be >= 0 seconds")
        if self.runs < 1:
            raise ValidationError("runs must be >= 1")
        if self.dt <= 0:
            raise ValidationError("dt must be positive")
        if self.sample_period <= 0:
            raise ValidationError("sample_period must be positive")
        load_world(self.world)  # existence check; raises if unknown

    def echo(self) -> dict[str, Any]:
        """JSON-ready copy of the config for reports and log headers.

        Deliberately omits out_dir: identical sessions must produce
        byte-identical logs no matter where the artifacts land.
        """
        return {
            "world": self.world,
            "policy": self.policy,
            "policy_params": dict(self.policy_params),
            "seed": self.seed,
            "runs": self.runs,
            "duration": self.duration,
            "dt": self.dt,
            "sample_period": self.sample_period,
            "sensor": asdict(self.sensor),
            "detector": asdict(self.detector),
            "threshold": self.threshold,
            "predicate_mode": self.predicate_mode,
            "metrics": list(self.metrics),
        }


@dataclass
class SessionResult:
    series: SessionSeries
    store: SemanticStore
    known: KnownMap
    state: RobotState
    t_end: float
    exhausted: bool
    collisions: int


def start_pose(world: WorldSpec) -> RobotState:
    """The free cell nearest the world center, facing +x."""
    iy, ix = np.nonzero(world.free_mask)
    ex, ey = world.extent
    x = (ix + 0.5) * world.resolution
    y = (iy + 0.5) * world.resolution
    j = int(np.argmin((x - ex / 2.0) ** 2 + (y - ey / 2.0) ** 2))
    return RobotState(float(x[j]), float(y[j]), 0.0)


def spawn_rngs(seed: int) -> tuple[np.random.Generator, ...]:
    """(policy, lidar, detector) streams for one session."""
    ss = np.random.SeedSequence(seed)
    return tuple(np.random.default_rng(s) for s in ss.spawn(3))


class EventLog:
    """Append-only jsonl writer; every record carries a monotone t."""

    def __init__(self, fh: IO[str] | None):
        self.fh = fh
        self.lines = 0

    def write(self, record: dict[str, Any]) -> None:
        if self.fh is None:
            return
        self.fh.write(json.dumps(record, separators=(",", ":")) + "\n")
        self.lines += 1

    def header(self, cfg: SessionConfig, run_id: int, seed: int) -> None:
        # echo first: run and seed must reflect THIS run, not the config base
        self.write(
            {
                "kind": "header",
                "version": LOG_VERSION,
                **cfg.echo(),
                "run": run_id,
                "seed": seed,
            }
        )

    def pose(self, t: float, state: RobotState) -> None:
        self.write(
            {"kind": "pose", "t": t, "x": state.x, "y": state.y, "theta": state.theta}
        )

    def scan_summary(self, t: float, hits: int, nearest: float) -> None:
        self.write({"kind": "scan", "t": t, "hits": hits, "nearest": nearest})

    def detection(self, t: float, ev: DetectionEvent) -> None:
        self.write(
            {
                "kind": "detection",
                "t": t,
                "object_id": ev.object_id,
                "label": ev.label,
                "confidence": ev.confidence,
                "point_ids": list(ev.point_ids),
                "distance": ev.distance,
                "true_class": ev.true_class,
                "bearing_min": ev.bearing_min,
                "bearing_max": ev.bearing_max,
            }
        )

    def object_message(self, t: float, msg: ObjectMessage) -> None:
        self.write({"kind": "object", "t": t, **msg.to_json()})

    def metric(self, sample: MetricSample) -> None:
        self.write(
            {"kind": "metric", "t": sample.t, "name": sample.name,
             "value": sample.value}
        )

    def end(self, t: float, exhausted: bool) -> None:
        # lines counts the whole file, end marker included
        self.write(
            {"kind": "end", "t": t, "exhausted": exhausted,
             "lines": self.lines + 1}
        )


class Session:
    """Tick-by-tick session state; step() advances one dt.

    Splitting the loop into explicit ticks lets the live server pace the
    same engine against the wall clock that run_benchmark free-runs.
    """

    def __init__(
        self,
        cfg: SessionConfig,
        run_id: int = 0,
        seed: int | None = None,
        log: EventLog | None = None,
    ):
        self.cfg = cfg
        self.run_id = run_id
        self.seed = cfg.seed if seed is None else seed
        self.log = log or EventLog(None)
        self.world = load_world(cfg.world)
        rng_policy, self.rng_lidar, self.rng_detect = spawn_rngs(self.seed)
        self.policy = make_policy(
            cfg.policy, self.world, rng_policy, **cfg.policy_params
        )
        self.state = start_pose(self.world)
        self.known = KnownMap.for_world(self.world)
        self.store = SemanticStore(
            self.world, threshold=cfg.threshold, predicate_mode=cfg.predicate_mode
        )
        self.series = SessionSeries(run_id=run_id, seed=self.seed, policy=cfg.policy)
        self.t = 0.0
        self._tick = 0
        self._next_sample = 0.0
        self.finished = False
        self.exhausted = False
        self.collisions = 0
        self.last_scan = None
        self.last_events: list[DetectionEvent] = []
        self.last_messages: list[ObjectMessage] = []
        self.last_samples: list[MetricSample] = []
        self.log.header(cfg, run_id, self.seed)
        # the t=0 sample precedes the first sensor frame: metrics start at 0
        self._sample_if_due()
        self._sense()
        if cfg.duration <= 0:
            self._finish()

    def _sense(self) -> None:
        """Scan, integrate, observe, detect, store; logs everything."""
        scan = lidar_scan(self.world, self.state, self.cfg.sensor, self.rng_lidar)
        self.known.integrate_scan(self.state, scan)
        self.last_scan = scan
        observations = camera_observe(self.world, self.state, self.cfg.sensor)
        events = detect(
            self.world,
            self.state,
            self.cfg.sensor,
            self.cfg.detector,
            self.rng_detect,
            observations=observations,
        )
        self.log.pose(self.t, self.state)
        nearest = float(scan.ranges.min()) if scan.ranges.size else math.inf
        self.log.scan_summary(self.t, int(scan.hits.sum()), nearest)
        messages = []
        for ev in events:
            self.log.detection(self.t, ev)
            msg = self.store.integrate_detection(ev, self.t)
            if msg is not None:
                messages.append(msg)
                self.log.object_message(self.t, msg)
        self.last_events = events
        self.last_messages = messages

    def _sample_if_due(self, force: bool = False) -> None:
        due = self.t + 1e-9 >= self._next_sample
        if not (due or force):
            self.last_samples = []
            return
        last = self.series.samples.get(self.cfg.metrics[0], [])
        if last and last[-1].t >= self.t:
            self.last_samples = []
            return
        samples = sample_all(self.store, self.t, self.cfg.metrics)
        for s in samples:
            self.series.append(s)
            self.log.metric(s)
        self.last_samples = samples
        while self._next_sample <= self.t + 1e-9:
            self._next_sample += self.cfg.sample_period

    def _finish(self) -> None:
        if self.finished:
            return
        self._sample_if_due(force=True)
        self.log.end(self.t, self.exhausted)
        self.finished = True

    def tick(self) -> bool:
        """Advance one dt; returns False once the session is over."""
        if self.finished:
            return False
        if self.t + 1e-9 >= self.cfg.duration:
            self._finish()
            return False
        try:
            cmd = self.policy.decide(
                self.t, self.cfg.dt, self.state, self.known, self.last_events
            )
        except Exhausted:
            if self.cfg.policy in SELF_ENDING:
                self.exhausted = True
                self._finish()
                return False
            raise
        self.state, hit = step(self.world, self.state, cmd, dt=self.cfg.dt)
        self.collisions += hit
        self._tick += 1
        self.t = self._tick * self.cfg.dt
        self._sense()
        self._sample_if_due()
        return True

    def run(self) -> SessionResult:
        while self.tick():
            pass
        return SessionResult(
            series=self.series,
            store=self.store,
            known=self.known,
            state=self.state,
            t_end=self.t,
            exhausted=self.exhausted,
            collisions=self.collisions,
        )


def run_session(
    cfg: SessionConfig,
    run_id: int = 0,
    seed: int | None = None,
    log_path: str | Path | None = None,
) -> SessionResult:
    """Convenience wrapper: run one session start to finish."""
    if log_path is None:
        return Session(cfg, run_id, seed).run()
    with open(log_path, "w", encoding="utf-8") as fh:
        return Session(cfg, run_id, seed, log=EventLog(fh)).run()
