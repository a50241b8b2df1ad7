"""Robot kinematics and the two sensors: lidar and the object detector.

Everything here is a pure function of (world, state, config, rng); the
simulation step owns no hidden state, which is what makes runs replayable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _raycast
from .worldmodel import OCC_OBJECT_BASE, ObjectInstance, WorldSpec


def wrap_angle(a: float) -> float:
    """Normalize to (-pi, pi]."""
    return a - 2.0 * math.pi * math.ceil((a - math.pi) / (2.0 * math.pi))


@dataclass(frozen=True)
class RobotState:
    x: float
    y: float
    theta: float


@dataclass(frozen=True)
class VelocityCommand:
    v: float = 0.0
    omega: float = 0.0


STOP = VelocityCommand(0.0, 0.0)


@dataclass(frozen=True)
class RobotConfig:
    v_max: float = 0.5  # m/s
    omega_max: float = 1.0  # rad/s


@dataclass(frozen=True)
class SensorConfig:
    lidar_beams: int = 180
    lidar_fov: float = 2.0 * math.pi
    lidar_range: float = 5.0  # m
    lidar_sigma: float = 0.01  # m, range noise on hit beams
    cam_fov: float = math.pi / 3.0
    cam_range: float = 3.5  # m
    cam_sat: float = 2.0  # m, full-confidence distance


@dataclass(frozen=True)
class DetectorConfig:
    c_base: float = 0.9
    noise_sigma: float = 0.05
    p_mislabel: float = 0.05
    emission_floor: float = 0.25

    @classmethod
    def perfect(cls) -> DetectorConfig:
        """Noise-free detector reaching confidence 1 on full views."""
        return cls(c_base=1.0, noise_sigma=0.0, p_mislabel=0.0, emission_floor=0.0)


@dataclass(frozen=True)
class LidarScan:
    """One revolution of range data; angles are absolute (world frame)."""

    angles: np.ndarray
    ranges: np.ndarray
    hits: np.ndarray
    max_range: float


@dataclass(frozen=True)
class DetectionEvent:
    """One camera sighting of one object.

    bearing_min/max span the visible points in the robot frame; together
    with distance they are the sighting's angular bounding box.
    """

    object_id: int
    label: str
    confidence: float
    point_ids: tuple[int, ...]
    distance: float = 0.0
    true_class: str = ""
    bearing_min: float = 0.0
    bearing_max: float = 0.0


def step(
    spec: WorldSpec,
    state: RobotState,
    cmd: VelocityCommand,
    cfg: RobotConfig = RobotConfig(),
    dt: float = 0.1,
) -> tuple[RobotState, bool]:
    """Unicycle step. On collision the pose holds but heading still turns."""
    v = min(max(cmd.v, -cfg.v_max), cfg.v_max)
    omega = min(max(cmd.omega, -cfg.omega_max), cfg.omega_max)
    nx = state.x + v * math.cos(state.theta) * dt
    ny = state.y + v * math.sin(state.theta) * dt
    ntheta = wrap_angle(state.theta + omega * dt)
    if spec.is_free(nx, ny):
        return RobotState(nx, ny, ntheta), False
    return RobotState(state.x, state.y, ntheta), True


def lidar_scan(
    spec: WorldSpec,
    state: RobotState,
    cfg: SensorConfig = SensorConfig(),
    rng: np.random.Generator | None = None,
) -> LidarScan:
    """Evenly spaced beams; hit beams carry Gaussian range noise.

    Beams that reach max range report it exactly and are flagged as misses.
    """
    n = cfg.lidar_beams
    ranges = np.empty(n, dtype=np.float64)
    _raycast.scan_ranges(
        spec.occ_id,
        spec.resolution,
        state.x,
        state.y,
        state.theta,
        cfg.lidar_fov,
        cfg.lidar_range,
        ranges,
    )
    if n == 1:
        angles = np.array([state.theta])
    else:
        fan = cfg.lidar_fov * np.arange(n) / (n - 1)
        angles = state.theta - cfg.lidar_fov / 2.0 + fan
    hits = ranges < cfg.lidar_range
    if rng is not None and cfg.lidar_sigma > 0.0:
        noise = rng.normal(0.0, cfg.lidar_sigma, size=n)
        ranges = np.where(hits, ranges + noise, ranges)
        ranges = np.clip(ranges, 0.0, cfg.lidar_range)
    for a in (angles, ranges, hits):
        a.setflags(write=False)
    return LidarScan(angles=angles, ranges=ranges, hits=hits, max_range=cfg.lidar_range)


def _mask_for(
    spec: WorldSpec,
    state: RobotState,
    obj: ObjectInstance,
    cam_fov: float,
    cam_range: float,
    self_only: bool,
) -> np.ndarray:
    own_code = spec.object_slots[obj.id] + OCC_OBJECT_BASE
    out = np.zeros(obj.num_surface_points, dtype=np.uint8)
    _raycast.visibility_mask(
        spec.occ_id,
        spec.resolution,
        state.x,
        state.y,
        state.theta,
        obj.surface_points,
        own_code,
        cam_fov,
        cam_range,
        self_only,
        out,
    )
    return out


def visible_point_ids(
    spec: WorldSpec,
    state: RobotState,
    obj: ObjectInstance,
    cfg: SensorConfig = SensorConfig(),
) -> np.ndarray:
    """Indices of the object's surface points the camera can see now.

    A point is visible when it is within range, within the field of view,
    and the sight line crosses no wall or foreign object cell; cells of the
    object itself block everywhere except at the point's own cell.
    """
    mask = _mask_for(spec, state, obj, cfg.cam_fov, cfg.cam_range, False)
    return np.flatnonzero(mask)


def expected_point_ids(
    spec: WorldSpec, state: RobotState, obj: ObjectInstance
) -> np.ndarray:
    """Indices visible if only the object's own body occluded (no range/fov)."""
    mask = _mask_for(spec, state, obj, 0.0, 0.0, True)
    return np.flatnonzero(mask)


def distance_factor(d: float, cfg: SensorConfig) -> float:
    """1 inside cam_sat, linear falloff to 0 at cam_range."""
    if d <= cfg.cam_sat:
        return 1.0
    if d >= cfg.cam_range:
        return 0.0
    return (cfg.cam_range - d) / (cfg.cam_range - cfg.cam_sat)


def camera_observe(
    spec: WorldSpec,
    state: RobotState,
    cfg: SensorConfig = SensorConfig(),
) -> list[tuple[int, np.ndarray]]:
    """Which surface points of which objects the camera sees right now.

    Returns (object_id, visible point indices) pairs in object-id order;
    objects with no visible point are omitted.
    """
    out: list[tuple[int, np.ndarray]] = []
    for obj in sorted(spec.objects, key=lambda o: o.id):
        visible = visible_point_ids(spec, state, obj, cfg)
        if visible.size:
            out.append((obj.id, visible))
    return out


def detect(
    spec: WorldSpec,
    state: RobotState,
    sensor: SensorConfig = SensorConfig(),
    det: DetectorConfig = DetectorConfig(),
    rng: np.random.Generator | None = None,
    observations: list[tuple[int, np.ndarray]] | None = None,
) -> list[DetectionEvent]:
    """Turn this tick's camera observations into detection events.

    At most one event per observed object. Confidence is c_base times the
    fraction of self-occlusion-expected points actually seen, times the
    distance falloff, plus Gaussian noise. Events below the emission floor
    are suppressed. Observations come in object-id order so the rng stream
    is reproducible.
    """
    if observations is None:
        observations = camera_observe(spec, state, sensor)
    events: list[DetectionEvent] = []
    leaves = spec.taxonomy.leaf_classes()
    for oid, visible in observations:
        obj = spec.object_by_id(oid)
        expected = expected_point_ids(spec, state, obj)
        denom = max(1, expected.size)
        d = math.hypot(obj.x - state.x, obj.y - state.y)
        conf = det.c_base * (visible.size / denom) * distance_factor(d, sensor)
        label = obj.class_label
        if rng is not None:
            conf += rng.normal(0.0, det.noise_sigma) if det.noise_sigma > 0 else 0.0
            if rng.random() < det.p_mislabel:
                wrong = [c for c in leaves if c != obj.class_label]
                if wrong:
                    label = wrong[int(rng.integers(len(wrong)))]
        conf = min(1.0, max(0.0, conf))
        if conf < det.emission_floor:
            continue
        pts = obj.surface_points[visible]
        rel = np.arctan2(pts[:, 1] - state.y, pts[:, 0] - state.x) - state.theta
        rel = rel - 2.0 * np.pi * np.ceil((rel - np.pi) / (2.0 * np.pi))
        events.append(
            DetectionEvent(
                object_id=obj.id,
                label=label,
                confidence=conf,
                point_ids=tuple(int(i) for i in visible),
                distance=d,
                true_class=obj.class_label,
                bearing_min=float(rel.min()),
                bearing_max=float(rel.max()),
            )
        )
    return events
