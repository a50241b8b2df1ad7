"""Exploration policies: frontier chasing, random roaming, teleop, and a
scripted all-objects tour.

All policies share one driving interface: decide(t, dt, state, known,
events) -> VelocityCommand, raising Exhausted when they consider the
session finished. The frontier and random policies act only on the
robot's own KnownMap; the tour policy is the scripted stand-in for an
instructed operator and plans on the true grid.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from . import _raycast
from .errors import Exhausted, NoFreeSpace, Unreachable, ValidationError
from .semknow import FREE, OCCUPIED, KnownMap
from .simkernel import (
    STOP,
    RobotConfig,
    RobotState,
    VelocityCommand,
    wrap_angle,
)
from .worldmodel import ObjectInstance, WorldSpec, world_to_cell

Cell = tuple[int, int]

POLICY_KINDS = ("frontier", "random", "external", "tour")

HEADING_GATE = 0.2  # rad: rotate in place above this error
SLOW_RADIUS = 0.3  # m: linear speed ramps down inside this
LOOKAHEAD = 1.2  # m: cells skipped ahead along clear sight lines
REPLAN_PERIOD = 10.0  # s: reconsider the target at least this often
STALL_AFTER = 2.0  # s without progress while driving forces a replan
DEADMAN = 0.5  # s: teleop velocity expires after this silence

_FOUR = ndimage.generate_binary_structure(2, 1)
_EIGHT = ndimage.generate_binary_structure(2, 2)

# neighbour expansion order: N, E, S, W in world axes (+y, +x, -y, -x)
_STEPS = ((0, 1), (1, 0), (0, -1), (-1, 0))


@dataclass(frozen=True)
class Path:
    """4-connected free-cell path, start and goal inclusive."""

    cells: tuple[Cell, ...]
    resolution: float

    @property
    def length_m(self) -> float:
        return (len(self.cells) - 1) * self.resolution


def _cell_center(cell: Cell, res: float) -> tuple[float, float]:
    return ((cell[0] + 0.5) * res, (cell[1] + 0.5) * res)


def plan_path(known: KnownMap, start: Cell, goal: Cell) -> Path:
    """Shortest 4-connected path through free cells (A*, unit step cost).

    Ties resolve deterministically: lower f, then lower heuristic, then
    lower row-major index; neighbours expand in N, E, S, W order.
    """
    grid = known.grid
    h, w = grid.shape
    sx, sy = start
    gx, gy = goal
    if not (0 <= sx < w and 0 <= sy < h) or grid[sy, sx] != FREE:
        raise ValidationError(f"path start {start} is not a known free cell")
    if not (0 <= gx < w and 0 <= gy < h) or grid[gy, gx] != FREE:
        raise Unreachable(f"goal {goal} is not a known free cell")
    if start == goal:
        return Path((start,), known.resolution)

    free = grid == FREE
    g_cost = {start: 0}
    parent: dict[Cell, Cell] = {}
    start_h = abs(sx - gx) + abs(sy - gy)
    heap = [(start_h, start_h, sy * w + sx, start)]
    closed = set()
    while heap:
        _, _, _, cell = heapq.heappop(heap)
        if cell in closed:
            continue
        if cell == goal:
            out = [cell]
            while cell != start:
                cell = parent[cell]
                out.append(cell)
            out.reverse()
            return Path(tuple(out), known.resolution)
        closed.add(cell)
        cx, cy = cell
        base = g_cost[cell] + 1
        for dx, dy in _STEPS:
            nx, ny = cx + dx, cy + dy
            if not (0 <= nx < w and 0 <= ny < h) or not free[ny, nx]:
                continue
            nb = (nx, ny)
            if base < g_cost.get(nb, 1 << 30):
                g_cost[nb] = base
                parent[nb] = cell
                hn = abs(nx - gx) + abs(ny - gy)
                heapq.heappush(heap, (base + hn, hn, ny * w + nx, nb))
    raise Unreachable(f"no free path from {start} to {goal}")


def corner_waypoints(path: Path) -> list[tuple[float, float]]:
    """Decimate a cell path to the centers of its turns plus the goal."""
    cells = path.cells
    if len(cells) < 2:
        return [_cell_center(cells[0], path.resolution)] if cells else []
    out = []
    for k in range(1, len(cells) - 1):
        before = (cells[k][0] - cells[k - 1][0], cells[k][1] - cells[k - 1][1])
        after = (cells[k + 1][0] - cells[k][0], cells[k + 1][1] - cells[k][1])
        if before != after:
            out.append(_cell_center(cells[k], path.resolution))
    out.append(_cell_center(cells[-1], path.resolution))
    return out


def path_waypoints(path: Path) -> list[tuple[float, float]]:
    """Every cell center along the path except the start cell's."""
    return [_cell_center(c, path.resolution) for c in path.cells[1:]]


def advance_waypoints(
    known: KnownMap, state: RobotState, waypoints: list[tuple[float, float]]
) -> None:
    """Drop leading waypoints that a straight free sight line already skips.

    Keeps the farthest waypoint within LOOKAHEAD that the robot can see
    through known free space, pulling the path taut across staircase
    diagonals and corners; the final waypoint is never dropped.
    """
    best = 0
    for j in range(1, len(waypoints)):
        wx, wy = waypoints[j]
        if math.hypot(wx - state.x, wy - state.y) > LOOKAHEAD:
            break
        if _raycast.known_clear(
            known.grid, known.resolution, state.x, state.y, wx, wy
        ):
            best = j
    del waypoints[:best]


def reachable_mask(known: KnownMap, robot_cell: Cell) -> np.ndarray:
    """Free cells 4-connected to the robot's cell."""
    free = known.grid == FREE
    cx, cy = robot_cell
    h, w = free.shape
    if not (0 <= cx < w and 0 <= cy < h) or not free[cy, cx]:
        return np.zeros_like(free)
    labels, _ = ndimage.label(free, structure=_FOUR)
    return labels == labels[cy, cx]


def frontier_clusters(known: KnownMap) -> list[np.ndarray]:
    """Frontier cells grouped by 8-connectivity.

    Ordered by (size desc, lowest row-major member index asc); each entry
    is an (n, 2) array of (cx, cy) cells.
    """
    mask = known.frontier_mask()
    labels, count = ndimage.label(mask, structure=_EIGHT)
    if count == 0:
        return []
    order = []
    for lab in range(1, count + 1):
        ys, xs = np.nonzero(labels == lab)
        first = int(ys[0]) * known.grid.shape[1] + int(xs[0])
        order.append((-len(xs), first, np.column_stack([xs, ys])))
    order.sort(key=lambda e: (e[0], e[1]))
    return [cells for _, _, cells in order]


def next_target_frontier(
    known: KnownMap, robot_cell: Cell, blacklist: frozenset[Cell] = frozenset()
) -> Cell:
    """Biggest reachable frontier cluster; target nearest its centroid.

    Clusters rank by size (tie: lowest row-major member); within the
    chosen cluster the reachable non-blacklisted cell closest to the
    centroid wins (tie: lower row-major index). Exhausted when nothing
    reachable remains.
    """
    clusters = frontier_clusters(known)
    if clusters:
        reach = reachable_mask(known, robot_cell)
        w = known.grid.shape[1]
        for cells in clusters:
            ok = reach[cells[:, 1], cells[:, 0]]
            if blacklist:
                ok &= np.array(
                    [(x, y) not in blacklist for x, y in cells], dtype=bool
                )
            if not ok.any():
                continue
            cand = cells[ok]
            centroid = cells.mean(axis=0)
            d2 = ((cand - centroid) ** 2).sum(axis=1)
            idx = cand[:, 1] * w + cand[:, 0]
            best = np.lexsort((idx, d2))[0]
            return (int(cand[best, 0]), int(cand[best, 1]))
    raise Exhausted("no reachable frontier remains")


def next_target_random(
    known: KnownMap, robot_cell: Cell, rng: np.random.Generator
) -> Cell:
    """Uniform draw over known free cells, retried until reachable."""
    free_idx = np.flatnonzero(known.grid.ravel() == FREE)
    if free_idx.size == 0:
        raise NoFreeSpace("no known free cell to sample")
    reach = reachable_mask(known, robot_cell).ravel()
    w = known.grid.shape[1]
    for _ in range(100):
        pick = int(free_idx[rng.integers(free_idx.size)])
        if reach[pick]:
            return (pick % w, pick // w)
    return robot_cell  # pathological map: stay put rather than fail


def follow_path(
    state: RobotState,
    waypoints: list[tuple[float, float]],
    dt: float,
    robot: RobotConfig,
    pop_radius: float,
    loose_radius: float | None = None,
) -> VelocityCommand:
    """Rotate-then-translate waypoint follower; pops reached waypoints.

    With loose_radius set, intermediate waypoints pop within that radius at
    full speed; only the final waypoint demands pop_radius precision and
    gets the slow-down ramp.
    """
    while waypoints:
        wx, wy = waypoints[0]
        dist = math.hypot(wx - state.x, wy - state.y)
        final = len(waypoints) == 1 or loose_radius is None
        if dist < (pop_radius if final else loose_radius):
            waypoints.pop(0)
            continue
        break
    if not waypoints:
        return STOP
    err = wrap_angle(math.atan2(wy - state.y, wx - state.x) - state.theta)
    if abs(err) > HEADING_GATE:
        return VelocityCommand(0.0, math.copysign(robot.omega_max, err))
    v = robot.v_max if not final else robot.v_max * min(1.0, dist / SLOW_RADIUS)
    omega = max(-robot.omega_max, min(robot.omega_max, 2.0 * err))
    return VelocityCommand(v, omega)


def _turn_toward(err: float, dt: float, robot: RobotConfig) -> VelocityCommand:
    # err/dt turns exactly onto the bearing once within one tick's sweep
    omega = max(-robot.omega_max, min(robot.omega_max, err / dt))
    return VelocityCommand(0.0, omega)


class _PathPolicy:
    """Target-pick / plan / follow skeleton shared by the roaming policies."""

    kind = ""

    def __init__(self, robot: RobotConfig | None = None):
        self.robot = robot or RobotConfig()
        self.waypoints: list[tuple[float, float]] = []
        self.target: Cell | None = None
        self._planned_at = -math.inf
        self._ckpt: tuple[float, float, float, float] | None = None
        self.blacklist: set[Cell] = set()

    def _pick_target(self, known, robot_cell) -> Cell:
        raise NotImplementedError

    def _progressed(self, t: float, state: RobotState) -> bool:
        if self._ckpt is None:
            self._ckpt = (t, state.x, state.y, state.theta)
            return True
        t0, x0, y0, th0 = self._ckpt
        moved = math.hypot(state.x - x0, state.y - y0)
        moved += 0.3 * abs(wrap_angle(state.theta - th0))
        if moved > 0.02:
            self._ckpt = (t, state.x, state.y, state.theta)
            return True
        return t - t0 <= STALL_AFTER

    def _replan(self, t: float, state: RobotState, known: KnownMap) -> None:
        cell = (
            world_to_cell(state.x, known.resolution),
            world_to_cell(state.y, known.resolution),
        )
        for _ in range(50):
            target = self._pick_target(known, cell)
            try:
                path = plan_path(known, cell, target)
            except Unreachable:
                self.blacklist.add(target)
                continue
            self.target = target
            self.waypoints = path_waypoints(path)
            self._planned_at = t
            self._ckpt = (t, state.x, state.y, state.theta)
            return
        raise Exhausted("target selection kept yielding unplannable cells")

    def decide(
        self,
        t: float,
        dt: float,
        state: RobotState,
        known: KnownMap,
        events=(),
    ) -> VelocityCommand:
        stale = t - self._planned_at >= REPLAN_PERIOD
        if self.waypoints and not self._progressed(t, state):
            if self.target is not None:
                self.blacklist.add(self.target)
            self.waypoints = []
            stale = True
        if stale or not self.waypoints:
            cx = world_to_cell(state.x, known.resolution)
            cy = world_to_cell(state.y, known.resolution)
            if known.grid[cy, cx] != FREE:
                # a noisy scan endpoint painted our own cell occupied; the
                # next sweep re-carves it, so wait instead of planning from
                # inside a wall
                return STOP
            self._replan(t, state, known)
        advance_waypoints(known, state, self.waypoints)
        return follow_path(
            state, self.waypoints, dt, self.robot, 0.5 * known.resolution
        )


class FrontierPolicy(_PathPolicy):
    """Always drive at the biggest reachable frontier cluster."""

    kind = "frontier"

    def _pick_target(self, known, robot_cell) -> Cell:
        return next_target_frontier(known, robot_cell, frozenset(self.blacklist))


class RandomPolicy(_PathPolicy):
    """Roam: pick uniformly random known-free reachable cells forever."""

    kind = "random"

    def __init__(self, rng: np.random.Generator, robot: RobotConfig | None = None):
        super().__init__(robot)
        self.rng = rng

    def _pick_target(self, known, robot_cell) -> Cell:
        return next_target_random(known, robot_cell, self.rng)


class ExternalPolicy:
    """Teleop: latest velocity or goal command wins; silence stops.

    Velocity commands expire after DEADMAN seconds. A goal pose hands
    control to the same planner the autonomous policies use until the
    goal is reached or superseded.
    """

    kind = "external"

    def __init__(self, robot: RobotConfig | None = None):
        self.robot = robot or RobotConfig()
        self._velocity: VelocityCommand | None = None
        self._velocity_t = -math.inf
        self._goal: tuple[float, float] | None = None
        self._goal_dirty = False
        self.waypoints: list[tuple[float, float]] = []
        self.unreachable_goals = 0

    def submit_velocity(self, cmd: VelocityCommand, t: float) -> None:
        self._velocity = cmd
        self._velocity_t = t
        self._goal = None
        self.waypoints = []

    def submit_goal(self, x: float, y: float, t: float) -> None:
        self._goal = (x, y)
        self._goal_dirty = True
        self._velocity = None

    def decide(
        self,
        t: float,
        dt: float,
        state: RobotState,
        known: KnownMap,
        events=(),
    ) -> VelocityCommand:
        if self._goal is not None:
            if self._goal_dirty:
                self._goal_dirty = False
                start = (
                    world_to_cell(state.x, known.resolution),
                    world_to_cell(state.y, known.resolution),
                )
                goal = (
                    world_to_cell(self._goal[0], known.resolution),
                    world_to_cell(self._goal[1], known.resolution),
                )
                try:
                    self.waypoints = path_waypoints(plan_path(known, start, goal))
                except (Unreachable, ValidationError):
                    self.unreachable_goals += 1
                    self._goal = None
                    self.waypoints = []
                    return STOP
            advance_waypoints(known, state, self.waypoints)
            return follow_path(
                state, self.waypoints, dt, self.robot, 0.5 * known.resolution
            )
        if self._velocity is None or t - self._velocity_t > DEADMAN:
            return STOP
        return self._velocity


@dataclass
class _Face:
    center: tuple[float, float]  # on the object surface
    normal: tuple[float, float]  # outward
    length: float


def object_faces(obj: ObjectInstance) -> list[_Face]:
    """The four outward faces of an object's footprint, N/E/S/W order."""
    ct, st = math.cos(obj.theta), math.sin(obj.theta)
    faces = []
    for ox, oy, length in (
        (0.0, obj.h / 2.0, obj.w),  # N
        (obj.w / 2.0, 0.0, obj.h),  # E
        (0.0, -obj.h / 2.0, obj.w),  # S
        (-obj.w / 2.0, 0.0, obj.h),  # W
    ):
        cx = obj.x + ct * ox - st * oy
        cy = obj.y + st * ox + ct * oy
        norm = math.hypot(ox, oy)
        nx, ny = ox / norm, oy / norm
        faces.append(_Face((cx, cy), (ct * nx - st * ny, st * nx + ct * ny), length))
    return faces


def viewpoint_distance(face_length: float) -> float:
    """Stand-off that fits the face in the camera cone, clamped sane."""
    return min(2.0, max(0.6, 0.866 * face_length + 0.1))


def face_point_ids(obj: ObjectInstance, face: _Face) -> frozenset[int]:
    """Indices of the surface points lying on one face of the object.

    Corner points sit on two faces and belong to both.
    """
    pts = obj.surface_points
    nx, ny = face.normal
    cx, cy = face.center
    along_n = (pts[:, 0] - cx) * nx + (pts[:, 1] - cy) * ny
    along_t = (pts[:, 0] - cx) * -ny + (pts[:, 1] - cy) * nx
    on = (np.abs(along_n) < 1e-9) & (np.abs(along_t) <= face.length / 2.0 + 1e-9)
    return frozenset(int(i) for i in np.flatnonzero(on))


RUN_IN = 0.4  # m: straight head-on leg planned onto every viewpoint


class TourPolicy:
    """Scripted operator: walk object to object and look at their faces.

    Plans on the true grid (it stands in for a human who knows the room).
    The default visits one clear face per object, which labels everything
    quickly; all_faces=True keeps visiting faces until every surface point
    reported by the detector has been captured, which with a perfect
    detector rebuilds the complete groundtruth map.
    """

    kind = "tour"

    def __init__(
        self,
        world: WorldSpec,
        all_faces: bool = False,
        min_confidence: float = 0.25,
        min_sightings: int = 3,
        dwell_timeout: float = 2.0,
        face_timeout: float = 60.0,
        coverage_rounds: int = 3,
        robot: RobotConfig | None = None,
    ):
        self.world = world
        self.robot = robot or RobotConfig()
        self.all_faces = all_faces
        self.min_confidence = min_confidence
        self.min_sightings = min_sightings
        self.dwell_timeout = dwell_timeout
        self.face_timeout = face_timeout
        self.coverage_rounds = coverage_rounds
        self.known = KnownMap.revealed(world)
        # plan with one cell of margin so loose corner cuts stay clear; the
        # raw grid remains the fallback for goals inside the margin ring
        core = ndimage.binary_erosion(self.known.grid == FREE, structure=_EIGHT)
        self._nav = KnownMap(
            resolution=world.resolution,
            grid=np.where(core, FREE, OCCUPIED).astype(np.uint8),
        )
        self._labels, _ = ndimage.label(self.known.grid == FREE, structure=_FOUR)
        self._home_label: int | None = None
        self.seen: dict[int, set[int]] = {o.id: set() for o in world.objects}
        self.pending: list[int] = sorted(spec.id for spec in world.objects)
        self.missed: list[int] = []
        self.current: ObjectInstance | None = None
        self._faces: list[tuple[_Face, frozenset[int]]] = []
        self._probes: list[float] = []
        self._aim: tuple[float, float] | None = None
        self._phase = "pick"
        self.waypoints: list[tuple[float, float]] = []
        self._dwell_start = 0.0
        self._face_start = 0.0
        self._captured_faces = 0
        self._sightings = 0
        self._rounds = 0
        self._ckpt: tuple[float, float, float, float] | None = None

    def _cell(self, x: float, y: float) -> Cell:
        res = self.world.resolution
        return (world_to_cell(x, res), world_to_cell(y, res))

    def _reachable(self, cell: Cell) -> bool:
        cx, cy = cell
        h, w = self._labels.shape
        if not (0 <= cx < w and 0 <= cy < h):
            return False
        return self._labels[cy, cx] == self._home_label

    def _probe_cell(self, face: _Face, dist: float) -> Cell | None:
        px = face.center[0] + face.normal[0] * dist
        py = face.center[1] + face.normal[1] * dist
        cell = self._cell(px, py)
        return cell if self._reachable(cell) else None

    def _exposed(self, face: _Face) -> bool:
        """A face flush against a wall or neighbor can never be seen."""
        res = self.world.resolution
        cx, cy = self._cell(
            face.center[0] + face.normal[0] * 1.5 * res,
            face.center[1] + face.normal[1] * 1.5 * res,
        )
        h, w = self._labels.shape
        return 0 <= cx < w and 0 <= cy < h and self.known.grid[cy, cx] == FREE

    def _face_probes(self, face: _Face) -> list[float]:
        d = viewpoint_distance(face.length)
        return [d] + [p for p in (1.2, 0.9, 0.7, 0.55) if p < d]

    def _missing(self) -> set[int]:
        ids = set(range(self.current.num_surface_points))
        return ids - self.seen[self.current.id]

    def _build_faces(self, state: RobotState) -> None:
        """Queue the object's workable faces, nearest viewpoint first."""
        pairs = [
            (f, face_point_ids(self.current, f))
            for f in object_faces(self.current)
        ]
        if self.all_faces:
            seen = self.seen[self.current.id]
            todo = [
                (f, ids)
                for f, ids in pairs
                if not ids <= seen and self._exposed(f)
            ]
        else:
            todo = [
                (f, ids)
                for f, ids in pairs
                if self._exposed(f)
                and any(self._probe_cell(f, p) for p in self._face_probes(f))
            ]
        if len(todo) > 1:

            def vp_dist(pair: tuple[_Face, frozenset[int]]) -> float:
                f = pair[0]
                d = viewpoint_distance(f.length)
                vx = f.center[0] + f.normal[0] * d
                vy = f.center[1] + f.normal[1] * d
                return math.hypot(vx - state.x, vy - state.y)

            k = min(range(len(todo)), key=lambda i: vp_dist(todo[i]))
            todo = todo[k:] + todo[:k]
        self._faces = todo
        self._probes = self._face_probes(todo[0][0]) if todo else []

    def _next_object(self, state: RobotState) -> None:
        if not self.pending:
            raise Exhausted(
                f"tour complete: {len(self.missed)} of "
                f"{len(self.world.objects)} objects missed"
            )
        dists = [
            (
                math.hypot(o.x - state.x, o.y - state.y),
                oid,
            )
            for oid in self.pending
            for o in (self.world.object_by_id(oid),)
        ]
        _, oid = min(dists)
        self.pending.remove(oid)
        self.current = self.world.object_by_id(oid)
        self._captured_faces = 0
        self._rounds = 0
        self._build_faces(state)
        if self._faces:
            self._phase = "start"
        else:
            self._settle_object(state)

    def _settle_object(self, state: RobotState) -> None:
        """Face queue empty: retry unseen points a few times, then move on."""
        if self.all_faces and self._missing():
            while self._rounds < self.coverage_rounds:
                self._rounds += 1
                self._build_faces(state)
                if self._faces:
                    self._phase = "start"
                    return
            self.missed.append(self.current.id)
        elif not self.all_faces and self._captured_faces == 0:
            self.missed.append(self.current.id)
        self.current = None

    def _plan(self, start: Cell, goal: Cell) -> Path:
        try:
            return plan_path(self._nav, start, goal)
        except (Unreachable, ValidationError):
            return plan_path(self.known, start, goal)

    def _plan_with_run_in(
        self, here: Cell, face: _Face, dist: float, cell: Cell
    ) -> list[tuple[float, float]] | None:
        """Path ending with a straight head-on leg onto the viewpoint.

        Arriving along the face normal leaves the robot already looking at
        the face, skipping most of the aim rotation.
        """
        probe_xy = _cell_center(cell, self.world.resolution)
        entry = self._probe_cell(face, dist + RUN_IN)
        if entry is not None and entry != cell:
            try:
                wps = path_waypoints(self._plan(here, entry))
                wps.append(probe_xy)
                return wps
            except Unreachable:
                pass
        try:
            return path_waypoints(self._plan(here, cell))
        except Unreachable:
            return None

    def _pop_face(self) -> None:
        self._faces.pop(0)
        if self._faces:
            self._probes = self._face_probes(self._faces[0][0])

    def _start_face(self, t: float, state: RobotState) -> bool:
        """Plan to the next workable probe of the current face queue."""
        here = self._cell(state.x, state.y)
        while self._faces:
            face, ids = self._faces[0]
            if self.all_faces and ids <= self.seen[self.current.id]:
                self._pop_face()  # drive-bys already covered this face
                continue
            while self._probes:
                dist = self._probes.pop(0)
                cell = self._probe_cell(face, dist)
                if cell is None:
                    continue
                plan = self._plan_with_run_in(here, face, dist, cell)
                if plan is None:
                    continue
                self.waypoints = plan
                self._aim = face.center
                self._phase = "go"
                self._face_start = t
                self._ckpt = (t, state.x, state.y, state.theta)
                return True
            self._pop_face()
        return False

    def _progressed(self, t: float, state: RobotState) -> bool:
        if self._ckpt is None:
            self._ckpt = (t, state.x, state.y, state.theta)
            return True
        t0, x0, y0, th0 = self._ckpt
        moved = math.hypot(state.x - x0, state.y - y0)
        moved += 0.3 * abs(wrap_angle(state.theta - th0))
        if moved > 0.02:
            self._ckpt = (t, state.x, state.y, state.theta)
            return True
        return t - t0 <= STALL_AFTER

    def _face_done(self) -> bool:
        if self._sightings < self.min_sightings:
            return False
        if not self.all_faces:
            return True
        _, ids = self._faces[0]
        return ids <= self.seen[self.current.id]

    def decide(
        self,
        t: float,
        dt: float,
        state: RobotState,
        known: KnownMap,
        events=(),
    ) -> VelocityCommand:
        if self._home_label is None:
            cx, cy = self._cell(state.x, state.y)
            self._home_label = int(self._labels[cy, cx])
        for ev in events:
            if ev.object_id in self.seen:
                self.seen[ev.object_id].update(ev.point_ids)
        if (
            self.current is not None
            and self._phase in ("go", "aim", "dwell")
            and t - self._face_start > self.face_timeout
        ):
            self._pop_face()  # face took too long: move on
            self._phase = "start"
        while self.current is None:
            self._next_object(state)  # raises Exhausted when done
        if self._phase == "start":
            if not self._start_face(t, state):
                self._settle_object(state)
                return STOP
        if self._phase == "go":
            if not self._progressed(t, state):
                self._phase = "start"  # stalled: fall back to a closer probe
                return STOP
            if len(self.waypoints) > 2:
                advance_waypoints(self.known, state, self.waypoints)
            cmd = follow_path(
                state, self.waypoints, dt, self.robot,
                0.5 * self.world.resolution,
                loose_radius=2.0 * self.world.resolution,
            )
            if self.waypoints:
                return cmd
            self._phase = "aim"
        if self._phase == "aim":
            ax, ay = self._aim
            err = wrap_angle(math.atan2(ay - state.y, ax - state.x) - state.theta)
            if abs(err) > 0.05:
                return _turn_toward(err, dt, self.robot)
            self._phase = "dwell"
            self._dwell_start = t
            self._sightings = 0
        # dwell: stand still until the detector has seen the face enough
        for event in events:
            if (
                event.object_id == self.current.id
                and event.confidence >= self.min_confidence
            ):
                self._sightings += 1
        if self._face_done():
            self._captured_faces += 1
            if self.all_faces:
                self._pop_face()
                self._phase = "start"
            else:
                self.current = None  # one good face settles the object
        elif t - self._dwell_start > self.dwell_timeout:
            self._phase = "start"  # try the next probe or face
        return STOP


def make_policy(
    kind: str,
    world: WorldSpec,
    rng: np.random.Generator,
    robot: RobotConfig | None = None,
    **params,
):
    """Policy factory; only the scripted tour receives the true world."""
    if kind == "frontier":
        return FrontierPolicy(robot=robot, **params)
    if kind == "random":
        return RandomPolicy(rng, robot=robot, **params)
    if kind == "external":
        return ExternalPolicy(robot=robot, **params)
    if kind == "tour":
        return TourPolicy(world, robot=robot, **params)
    raise ValidationError(f"unknown policy kind {kind!r}")
