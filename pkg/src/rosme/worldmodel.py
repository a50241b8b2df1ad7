"""Worlds, objects, taxonomy, and the groundtruth semantic map provider.

A world is a 2D occupancy grid (walls) populated with axis-aligned
rectangular objects. Each object exposes a deterministic set of surface
points on its footprint perimeter; those points are the geometric elements
of the semantic map, and the taxonomy supplies the predicate chains.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np

from .errors import ParseError, UnknownClass, ValidationError

FrameId = str

DEFAULT_FRAME: FrameId = "world"
DEFAULT_POINT_DENSITY = 50.0  # surface points per meter of perimeter
ROOT_CLASS = "object"

# Cell codes in the combined obstacle-id grid.
OCC_FREE = 0
OCC_WALL = 1
OCC_OBJECT_BASE = 2  # object in slot k occupies code k + OCC_OBJECT_BASE

# Tolerance (in cells) when snapping a world coordinate to a cell index, so
# points lying exactly on a cell boundary land deterministically in the
# upper cell regardless of float rounding.
_CELL_SNAP = 1e-9

_QUARTER = math.pi / 2.0


def world_to_cell(v: float, resolution: float) -> int:
    """Cell index along one axis for a world coordinate (boundary snaps up)."""
    return int(math.floor(v / resolution + _CELL_SNAP))


def _quarter_turns(theta: float) -> int:
    k = theta / _QUARTER
    k_round = round(k)
    if abs(k - k_round) > 1e-9:
        raise ValidationError(
            f"theta {theta} is not a multiple of pi/2 (axis-aligned footprints only)"
        )
    return k_round % 4


def _rotate_quarter(px: float, py: float, k: int) -> tuple[float, float]:
    # Exact for axis-aligned rotations: only sign flips and swaps.
    if k == 0:
        return px, py
    if k == 1:
        return -py, px
    if k == 2:
        return -px, -py
    return py, -px


@dataclass(frozen=True)
class Predicate:
    """A symbolic fact: instance-of(object-id, class) or is-a(class, superclass)."""

    kind: str  # "instance-of" | "is-a"
    subject: str
    object: str

    def __post_init__(self):
        if self.kind not in ("instance-of", "is-a"):
            raise ValidationError(f"unknown predicate kind {self.kind!r}")

    def __str__(self) -> str:
        return f"{self.kind}({self.subject}, {self.object})"


@dataclass(frozen=True)
class Taxonomy:
    """Class hierarchy: every class chains through `parent` up to `root`."""

    parent: dict[str, str] = field(default_factory=dict)
    root: str = ROOT_CLASS

    def validate(self) -> None:
        for cls in self.parent:
            self.chain(cls)  # raises on cycles / dangling parents

    def __contains__(self, cls: str) -> bool:
        return cls == self.root or cls in self.parent

    def chain(self, cls: str) -> list[str]:
        """Classes from `cls` up to and including the root."""
        if cls == self.root:
            return [self.root]
        if cls not in self.parent:
            raise UnknownClass(f"class {cls!r} is not in the taxonomy")
        out = [cls]
        seen = {cls}
        cur = cls
        while cur != self.root:
            cur = self.parent.get(cur, None)
            if cur is None:
                raise ValidationError(
                    f"class {out[-1]!r} has parent outside the taxonomy"
                )
            if cur in seen:
                raise ValidationError(f"taxonomy cycle through {cur!r}")
            seen.add(cur)
            out.append(cur)
        return out

    def classes(self) -> set[str]:
        out = {self.root}
        out.update(self.parent.keys())
        out.update(self.parent.values())
        return out

    def leaf_classes(self) -> list[str]:
        """Classes with no children (candidate detector labels), sorted."""
        parents = set(self.parent.values()) | {self.root}
        return sorted(c for c in self.classes() if c not in parents)


@dataclass(frozen=True)
class ObjectInstance:
    """An axis-aligned rectangular object placed in the world.

    `theta` must be a multiple of pi/2; `w`/`h` are the footprint extents in
    the object frame (meters). Surface points are laid out at uniform arc
    length along the perimeter starting from the (-w/2, -h/2) corner, walking
    +x, +y, -x, -y in the object frame, then rotated and translated. Their
    indices are the stable per-object point ids.
    """

    id: int
    class_label: str
    x: float
    y: float
    theta: float = 0.0
    w: float = 0.5
    h: float = 0.5
    point_density: float = DEFAULT_POINT_DENSITY

    def __post_init__(self):
        if self.w <= 0 or self.h <= 0:
            raise ValidationError(f"object {self.id}: non-positive footprint")
        if self.point_density <= 0:
            raise ValidationError(f"object {self.id}: non-positive point density")
        _quarter_turns(self.theta)  # validates theta

    @property
    def perimeter(self) -> float:
        return 2.0 * (self.w + self.h)

    @property
    def num_surface_points(self) -> int:
        # Floor of 4 guarantees at least one point per face for degenerate
        # footprints; equals ceil(perimeter * density) at realistic sizes.
        return max(4, math.ceil(self.perimeter * self.point_density))

    @cached_property
    def surface_points(self) -> np.ndarray:
        """(n, 2) world coordinates of the perimeter points, index order."""
        n = self.num_surface_points
        w, h = self.w, self.h
        spacing = self.perimeter / n
        k = _quarter_turns(self.theta)
        pts = np.empty((n, 2), dtype=np.float64)
        for i in range(n):
            s = i * spacing
            if s < w:
                px, py = -w / 2 + s, -h / 2
            elif s < w + h:
                px, py = w / 2, -h / 2 + (s - w)
            elif s < 2 * w + h:
                px, py = w / 2 - (s - w - h), h / 2
            else:
                px, py = -w / 2, h / 2 - (s - 2 * w - h)
            rx, ry = _rotate_quarter(px, py, k)
            pts[i, 0] = self.x + rx
            pts[i, 1] = self.y + ry
        pts.setflags(write=False)
        return pts

    def extent(self) -> tuple[float, float]:
        """Axis-aligned (width, height) of the footprint in the world frame."""
        if _quarter_turns(self.theta) % 2 == 1:
            return self.h, self.w
        return self.w, self.h

    def bounds(self) -> tuple[float, float, float, float]:
        """(x_lo, y_lo, x_hi, y_hi) of the world-frame footprint rectangle."""
        ew, eh = self.extent()
        return self.x - ew / 2, self.y - eh / 2, self.x + ew / 2, self.y + eh / 2

    def cell_span(self, resolution: float) -> tuple[int, int, int, int]:
        """(cx_lo, cy_lo, cx_hi, cy_hi) inclusive cell range of the footprint.

        A cell belongs to the footprint iff its center lies inside the
        rectangle (half-open on the high edges).
        """
        x_lo, y_lo, x_hi, y_hi = self.bounds()
        r = resolution
        cx_lo = math.ceil(x_lo / r - 0.5 - _CELL_SNAP)
        cy_lo = math.ceil(y_lo / r - 0.5 - _CELL_SNAP)
        cx_hi = math.ceil(x_hi / r - 0.5 - _CELL_SNAP) - 1
        cy_hi = math.ceil(y_hi / r - 0.5 - _CELL_SNAP) - 1
        return cx_lo, cy_lo, cx_hi, cy_hi


@dataclass(frozen=True)
class SemanticMap:
    """The semantic map tuple: a frame, per-object point-index sets, predicates."""

    frame: FrameId
    geometry: dict[int, frozenset[int]]
    predicates: frozenset[Predicate]

    def __eq__(self, other) -> bool:
        if not isinstance(other, SemanticMap):
            return NotImplemented
        return (
            self.frame == other.frame
            and self.geometry == other.geometry
            and self.predicates == other.predicates
        )


@dataclass(frozen=True, eq=False)
class WorldSpec:
    """A validated world: grid, walls, objects, and taxonomy."""

    name: str
    resolution: float
    width: int
    height: int
    walls: np.ndarray  # bool, shape (height, width), True = blocked
    objects: tuple[ObjectInstance, ...]
    taxonomy: Taxonomy
    frame: FrameId = DEFAULT_FRAME

    def __eq__(self, other) -> bool:
        if not isinstance(other, WorldSpec):
            return NotImplemented
        return (
            self.name == other.name
            and self.resolution == other.resolution
            and (self.width, self.height) == (other.width, other.height)
            and bool(np.array_equal(self.walls, other.walls))
            and self.objects == other.objects
            and self.taxonomy == other.taxonomy
            and self.frame == other.frame
        )

    @property
    def extent(self) -> tuple[float, float]:
        return self.width * self.resolution, self.height * self.resolution

    @cached_property
    def object_slots(self) -> dict[int, int]:
        """object id -> dense slot index (order of appearance)."""
        return {obj.id: k for k, obj in enumerate(self.objects)}

    @cached_property
    def occ_id(self) -> np.ndarray:
        """int32 (height, width): OCC_FREE, OCC_WALL, or slot + OCC_OBJECT_BASE."""
        grid = np.where(self.walls, OCC_WALL, OCC_FREE).astype(np.int32)
        for slot, obj in enumerate(self.objects):
            cx_lo, cy_lo, cx_hi, cy_hi = obj.cell_span(self.resolution)
            grid[cy_lo : cy_hi + 1, cx_lo : cx_hi + 1] = slot + OCC_OBJECT_BASE
        grid.setflags(write=False)
        return grid

    @cached_property
    def free_mask(self) -> np.ndarray:
        m = self.occ_id == OCC_FREE
        m.setflags(write=False)
        return m

    def cell_index(self, cx: int, cy: int) -> int:
        return cy * self.width + cx

    def in_bounds(self, cx: int, cy: int) -> bool:
        return 0 <= cx < self.width and 0 <= cy < self.height

    def cell_of(self, x: float, y: float) -> tuple[int, int]:
        return world_to_cell(x, self.resolution), world_to_cell(y, self.resolution)

    def is_free(self, x: float, y: float) -> bool:
        cx, cy = self.cell_of(x, y)
        return self.in_bounds(cx, cy) and self.occ_id[cy, cx] == OCC_FREE

    def object_by_id(self, object_id: int) -> ObjectInstance:
        slot = self.object_slots.get(object_id)
        if slot is None:
            raise ValidationError(f"world has no object with id {object_id}")
        return self.objects[slot]

    def validate(self) -> None:
        if self.resolution <= 0:
            raise ValidationError("resolution must be positive")
        if self.width < 1 or self.height < 1:
            raise ValidationError("grid must be at least 1x1")
        if self.walls.shape != (self.height, self.width):
            raise ValidationError(
                f"walls bitmap is {self.walls.shape}, expected "
                f"({self.height}, {self.width})"
            )
        self.taxonomy.validate()

        seen_ids: set[int] = set()
        owner = np.where(self.walls, -1, -2)  # -1 wall, -2 free, else object id
        for obj in self.objects:
            if obj.id in seen_ids:
                raise ValidationError(f"duplicate object id {obj.id}")
            seen_ids.add(obj.id)
            if obj.class_label not in self.taxonomy:
                raise UnknownClass(
                    f"object {obj.id}: class {obj.class_label!r} "
                    "is not in the taxonomy"
                )
            self.taxonomy.chain(obj.class_label)
            cx_lo, cy_lo, cx_hi, cy_hi = obj.cell_span(self.resolution)
            if cx_lo < 0 or cy_lo < 0 or cx_hi >= self.width or cy_hi >= self.height:
                raise ValidationError(f"object {obj.id} extends outside the grid")
            patch = owner[cy_lo : cy_hi + 1, cx_lo : cx_hi + 1]
            if (patch == -1).any():
                raise ValidationError(f"object {obj.id} overlaps a wall cell")
            clash = patch[patch >= 0]
            if clash.size:
                raise ValidationError(
                    f"object {obj.id} overlaps object {int(clash.flat[0])}"
                )
            patch[...] = obj.id


def predicates_for(
    object_id: int, class_label: str, taxonomy: Taxonomy
) -> set[Predicate]:
    """The instance-of fact plus the full is-a chain for one object.

    Count is 1 + chain length, the per-object groundtruth predicate count.
    """
    chain = taxonomy.chain(class_label)
    preds = {Predicate("instance-of", str(object_id), class_label)}
    for child, parent in zip(chain, chain[1:]):
        preds.add(Predicate("is-a", child, parent))
    return preds


def groundtruth_map(spec: WorldSpec) -> SemanticMap:
    """Complete reference semantic map: all points and predicates per object."""
    geometry = {
        obj.id: frozenset(range(obj.num_surface_points)) for obj in spec.objects
    }
    preds: set[Predicate] = set()
    for obj in spec.objects:
        preds |= predicates_for(obj.id, obj.class_label, spec.taxonomy)
    return SemanticMap(frame=spec.frame, geometry=geometry, predicates=frozenset(preds))


# ---------------------------------------------------------------------------
# World file format: versioned text, see README for the grammar.
# ---------------------------------------------------------------------------

_HEADER = "rosme-world v1"
_GRID_KEYS = {"width", "height", "resolution"}
_OBJECT_KEYS = {"id", "class", "x", "y", "theta", "w", "h"}
_RLE_TOKEN = re.compile(r"(\d*)([#.])")


def _encode_rle(row: np.ndarray) -> str:
    out = []
    n = len(row)
    i = 0
    while i < n:
        j = i
        while j < n and row[j] == row[i]:
            j += 1
        count = j - i
        ch = "#" if row[i] else "."
        out.append(ch if count == 1 else f"{count}{ch}")
        i = j
    return "".join(out)


def _decode_rle(line: str, width: int, lineno: int) -> np.ndarray:
    row = np.zeros(width, dtype=bool)
    pos = 0
    idx = 0
    for m in _RLE_TOKEN.finditer(line):
        if m.start() != idx:
            raise ParseError(f"line {lineno}: bad walls row near {line[idx:]!r}")
        idx = m.end()
        count = int(m.group(1)) if m.group(1) else 1
        if pos + count > width:
            raise ParseError(f"line {lineno}: walls row longer than width {width}")
        row[pos : pos + count] = m.group(2) == "#"
        pos += count
    if idx != len(line):
        raise ParseError(f"line {lineno}: bad walls row near {line[idx:]!r}")
    if pos != width:
        raise ParseError(f"line {lineno}: walls row has {pos} cells, expected {width}")
    return row


def parse_world(text: str, name: str = "unnamed") -> WorldSpec:
    """Parse the text world format and return a validated WorldSpec."""
    lines = text.splitlines()
    it = iter(enumerate(lines, start=1))

    header = None
    for lineno, raw in it:
        if raw.strip():
            header = raw.strip()
            break
    if header != _HEADER:
        raise ParseError(f"missing or unsupported header, expected {_HEADER!r}")

    grid: dict[str, str] = {}
    wall_rows: list[str] = []
    taxonomy_pairs: list[tuple[str, str]] = []
    objects_raw: list[tuple[dict[str, str], int]] = []
    section = None

    for lineno, raw in it:
        line = raw.strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip()
            if section not in ("grid", "walls", "taxonomy", "object"):
                raise ValidationError(f"line {lineno}: unknown section [{section}]")
            if section == "object":
                objects_raw.append(({}, lineno))
            continue
        if section is None:
            raise ParseError(f"line {lineno}: content before any section")
        if section == "walls":
            wall_rows.append(line)
            continue
        if section == "taxonomy":
            if "<" not in line:
                raise ParseError(f"line {lineno}: expected 'child < parent'")
            child, _, parent = line.partition("<")
            child, parent = child.strip(), parent.strip()
            if not child or not parent:
                raise ParseError(f"line {lineno}: expected 'child < parent'")
            taxonomy_pairs.append((child, parent))
            continue
        # key = value sections
        if "=" not in line:
            raise ParseError(f"line {lineno}: expected 'key = value'")
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if section == "grid":
            if key not in _GRID_KEYS:
                raise ValidationError(f"line {lineno}: unknown [grid] key {key!r}")
            grid[key] = value
        else:  # object
            if key not in _OBJECT_KEYS:
                raise ValidationError(f"line {lineno}: unknown [object] key {key!r}")
            objects_raw[-1][0][key] = value

    missing = _GRID_KEYS - grid.keys()
    if missing:
        raise ParseError(f"[grid] missing keys: {sorted(missing)}")
    try:
        width = int(grid["width"])
        height = int(grid["height"])
        resolution = float(grid["resolution"])
    except ValueError as e:
        raise ParseError(f"bad [grid] value: {e}") from e

    if len(wall_rows) != height:
        raise ParseError(f"[walls] has {len(wall_rows)} rows, expected {height}")
    walls = np.stack(
        [_decode_rle(row, width, i) for i, row in enumerate(wall_rows)]
    )

    parent_map: dict[str, str] = {}
    for child, parent in taxonomy_pairs:
        if child in parent_map and parent_map[child] != parent:
            raise ValidationError(f"class {child!r} declared with two parents")
        parent_map[child] = parent
    taxonomy = Taxonomy(parent=parent_map)

    objects = []
    for kv, lineno in objects_raw:
        missing = _OBJECT_KEYS - kv.keys()
        if missing:
            raise ParseError(
                f"[object] at line {lineno} missing keys: {sorted(missing)}"
            )
        try:
            objects.append(
                ObjectInstance(
                    id=int(kv["id"]),
                    class_label=kv["class"],
                    x=float(kv["x"]),
                    y=float(kv["y"]),
                    theta=float(kv["theta"]),
                    w=float(kv["w"]),
                    h=float(kv["h"]),
                )
            )
        except ValueError as e:
            raise ParseError(f"bad [object] value at line {lineno}: {e}") from e

    spec = WorldSpec(
        name=name,
        resolution=resolution,
        width=width,
        height=height,
        walls=walls,
        objects=tuple(objects),
        taxonomy=taxonomy,
    )
    spec.walls.setflags(write=False)
    spec.validate()
    return spec


def serialize_world(spec: WorldSpec) -> str:
    """Canonical text form; parses back to an equal WorldSpec (same name)."""
    out = [_HEADER, "", "[grid]"]
    out.append(f"width = {spec.width}")
    out.append(f"height = {spec.height}")
    out.append(f"resolution = {spec.resolution!r}")
    out.append("")
    out.append("[walls]")
    for row in spec.walls:
        out.append(_encode_rle(row))
    out.append("")
    out.append("[taxonomy]")
    for child in sorted(spec.taxonomy.parent):
        out.append(f"{child} < {spec.taxonomy.parent[child]}")
    for obj in spec.objects:
        out.append("")
        out.append("[object]")
        out.append(f"id = {obj.id}")
        out.append(f"class = {obj.class_label}")
        out.append(f"x = {obj.x!r}")
        out.append(f"y = {obj.y!r}")
        out.append(f"theta = {obj.theta!r}")
        out.append(f"w = {obj.w!r}")
        out.append(f"h = {obj.h!r}")
    return "\n".join(out) + "\n"


def bundled_world_dir() -> Path:
    return Path(__file__).parent / "worlds"


def list_worlds() -> list[str]:
    """Names of the worlds shipped with the package."""
    return sorted(p.stem for p in bundled_world_dir().glob("*.world"))


def resolve_world_path(world: str | Path) -> Path:
    """Accept either a bundled world name or a filesystem path."""
    p = Path(world)
    if p.suffix == ".world" and p.exists():
        return p
    bundled = bundled_world_dir() / f"{world}.world"
    if bundled.exists():
        return bundled
    if p.exists():
        return p
    raise ParseError(f"world {world!r}: no such file or bundled world")


def load_world(path: str | Path) -> WorldSpec:
    """Load and validate a world file (bundled name or path)."""
    p = resolve_world_path(path)
    return parse_world(p.read_text(encoding="utf-8"), name=p.stem)
