"""Generate the bundled .world files.

Layouts are authored in code so the geometric invariants the benchmark
relies on can be checked mechanically before the files are written:

- every coordinate and footprint edge lands exactly on the 0.05 m grid
- the free space is one 4-connected component
- every object has at least one face with a free approach band, so any
  policy can eventually observe it
- in small_office every face of every object has a free approach band,
  which is what makes a complete map attainable there

Run from the repository root:  python3 dev/make_worlds.py
"""

from __future__ import annotations

import math
import sys
from pathlib import Path

import numpy as np
from scipy import ndimage

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from rosme.worldmodel import (  # noqa: E402
    ObjectInstance,
    Taxonomy,
    WorldSpec,
    serialize_world,
)

RES = 0.05
PI = math.pi
HALF = math.pi / 2

FOUR = ndimage.generate_binary_structure(2, 1)


def m2c(v: float) -> int:
    c = v / RES
    r = round(c)
    assert abs(c - r) < 1e-9, f"{v} is not on the {RES} m grid"
    return r


def border(walls: np.ndarray) -> None:
    walls[0, :] = walls[-1, :] = True
    walls[:, 0] = walls[:, -1] = True


def vwall(walls: np.ndarray, x: float, y0: float, y1: float, gaps=()) -> None:
    col = m2c(x)
    keep = np.zeros(walls.shape[0], dtype=bool)
    keep[m2c(y0) : m2c(y1)] = True
    for lo, hi in gaps:
        keep[m2c(lo) : m2c(hi)] = False
    walls[keep, col] = True


def hwall(walls: np.ndarray, y: float, x0: float, x1: float, gaps=()) -> None:
    row = m2c(y)
    keep = np.zeros(walls.shape[1], dtype=bool)
    keep[m2c(x0) : m2c(x1)] = True
    for lo, hi in gaps:
        keep[m2c(lo) : m2c(hi)] = False
    walls[row, keep] = True


class Placer:
    def __init__(self):
        self.objects: list[ObjectInstance] = []
        self._next = 1

    def add(self, cls: str, x: float, y: float, w: float, h: float, theta=0.0):
        for v in (x, y, x - w / 2, x + w / 2, y - h / 2, y + h / 2):
            m2c(v)  # asserts grid alignment of centers and edges
        self.objects.append(
            ObjectInstance(self._next, cls, x, y, theta, w, h)
        )
        self._next += 1


def viewpoint_distance(face_len: float) -> float:
    # Far enough back that a pi/3 camera cone spans the whole face.
    return min(2.0, max(0.6, 0.866 * face_len + 0.1))


def face_bands(
    obj: ObjectInstance, tight: bool
) -> list[tuple[float, float, float, float]]:
    """Free-space rectangles outside each face (x_lo, y_lo, x_hi, y_hi).

    Full bands (tight=False... sic, tight=True narrows them) guarantee a
    whole-face viewpoint; tight pockets only guarantee somewhere to stand
    with line of sight to the face center.
    """
    x_lo, y_lo, x_hi, y_hi = obj.bounds()
    ew, eh = obj.extent()
    if tight:
        pw_x = min(eh, 0.4) / 2  # pocket half-width on x-normal faces
        pw_y = min(ew, 0.4) / 2
        d_x = d_y = 0.75
        return [
            (obj.x - pw_y, y_lo - d_y, obj.x + pw_y, y_lo),  # south
            (obj.x - pw_y, y_hi, obj.x + pw_y, y_hi + d_y),  # north
            (x_lo - d_x, obj.y - pw_x, x_lo, obj.y + pw_x),  # west
            (x_hi, obj.y - pw_x, x_hi + d_x, obj.y + pw_x),  # east
        ]
    margin = 0.25
    d_x = viewpoint_distance(eh) + margin  # approaching an x-normal face
    d_y = viewpoint_distance(ew) + margin
    return [
        (x_lo, y_lo - d_y, x_hi, y_lo),  # south
        (x_lo, y_hi, x_hi, y_hi + d_y),  # north
        (x_lo - d_x, y_lo, x_lo, y_hi),  # west
        (x_hi, y_lo, x_hi + d_x, y_hi),  # east
    ]


def band_is_free(spec: WorldSpec, band) -> bool:
    x_lo, y_lo, x_hi, y_hi = band
    cx_lo = max(0, math.floor(x_lo / RES + 1e-9))
    cy_lo = max(0, math.floor(y_lo / RES + 1e-9))
    cx_hi = min(spec.width, math.ceil(x_hi / RES - 1e-9))
    cy_hi = min(spec.height, math.ceil(y_hi / RES - 1e-9))
    if cx_lo >= cx_hi or cy_lo >= cy_hi:
        return False
    if (x_lo < 0 or y_lo < 0 or x_hi > spec.extent[0] or y_hi > spec.extent[1]):
        return False
    return bool(spec.free_mask[cy_lo:cy_hi, cx_lo:cx_hi].all())


def check_world(spec: WorldSpec, require_all_faces: bool) -> None:
    spec.validate()
    labels, count = ndimage.label(spec.free_mask, structure=FOUR)
    sizes = np.bincount(labels.ravel())[1:]
    main = 1 + int(np.argmax(sizes))
    stray = int(sizes.sum() - sizes[main - 1])
    assert stray == 0, f"{spec.name}: {stray} free cells unreachable"
    # No free cell may sit outside a 0.3 m square of free space: slivers
    # narrower than that starve the lidar and stall frontier exhaustion.
    free = spec.free_mask
    opened = ndimage.binary_opening(free, structure=np.ones((6, 6), bool))
    bad = free & ~opened
    assert not bad.any(), (
        f"{spec.name}: {int(bad.sum())} sliver cells, first at "
        f"{tuple(np.argwhere(bad)[0][::-1])}"
    )
    for obj in spec.objects:
        free_bands = [
            band_is_free(spec, b)
            for b in face_bands(obj, tight=not require_all_faces)
        ]
        need = all(free_bands) if require_all_faces else any(free_bands)
        assert need, (
            f"{spec.name}: object {obj.id} ({obj.class_label}) lacks "
            f"clear faces: {free_bands}"
        )


def build_small_office() -> WorldSpec:
    walls = np.zeros((120, 160), dtype=bool)
    border(walls)
    p = Placer()
    p.add("desk", 1.4, 4.6, 0.6, 0.4)
    p.add("chair", 3.1, 4.6, 0.4, 0.4)
    p.add("shelf", 4.8, 4.6, 0.6, 0.3)
    p.add("plant", 6.5, 4.6, 0.3, 0.3)
    p.add("table", 1.4, 3.0, 0.6, 0.6)
    p.add("office-chair", 3.1, 3.0, 0.4, 0.4)
    p.add("cabinet", 4.8, 3.0, 0.5, 0.4)
    p.add("sofa", 1.4, 1.4, 0.6, 0.4)
    p.add("printer", 3.1, 1.4, 0.4, 0.4)
    p.add("desk", 4.8, 1.4, 0.6, 0.4, theta=HALF)
    p.add("plant", 6.5, 1.4, 0.3, 0.3)
    tax = Taxonomy(
        parent={
            "desk": "furniture",
            "chair": "furniture",
            "office-chair": "chair",
            "shelf": "furniture",
            "table": "furniture",
            "cabinet": "furniture",
            "sofa": "furniture",
            "furniture": "object",
            "printer": "accessories",
            "accessories": "object",
            "plant": "object",
        }
    )
    return WorldSpec("small_office", RES, 160, 120, walls, tuple(p.objects), tax)


def build_kitchen() -> WorldSpec:
    walls = np.zeros((160, 200), dtype=bool)
    border(walls)
    vwall(walls, 6.5, 0.0, 8.0, gaps=[(3.2, 4.4)])
    # walk-in cold store: entry duct along the south wall, then a stub
    # running north along the east wall, capped just past the freezer
    hwall(walls, 0.65, 7.2, 9.05)
    vwall(walls, 9.0, 0.65, 5.85)
    hwall(walls, 5.8, 9.0, 10.0)
    p = Placer()
    # appliance run flush against the north wall
    p.add("fridge", 0.45, 7.65, 0.8, 0.6)
    p.add("counter", 1.45, 7.65, 1.2, 0.6)
    p.add("stove", 2.35, 7.65, 0.6, 0.6)
    p.add("counter", 2.95, 7.65, 0.6, 0.6)
    p.add("sink", 3.55, 7.65, 0.6, 0.6)
    p.add("dishwasher", 4.15, 7.65, 0.6, 0.6)
    p.add("counter", 4.75, 7.65, 0.6, 0.6)
    # west wall run
    p.add("oven", 0.4, 6.25, 0.7, 0.7)
    p.add("cabinet", 0.4, 5.15, 0.7, 0.8)
    p.add("microwave", 0.4, 4.1, 0.7, 0.6)
    # island with bar stools tucked against its south edge
    p.add("counter", 3.0, 5.0, 1.6, 0.8)
    p.add("bar-stool", 2.3, 4.45, 0.3, 0.3)
    p.add("bar-stool", 3.0, 4.45, 0.3, 0.3)
    p.add("bar-stool", 3.7, 4.45, 0.3, 0.3)
    # dining table, chairs tucked in
    p.add("table", 2.6, 1.9, 1.4, 0.8)
    p.add("chair", 2.2, 1.3, 0.4, 0.4)
    p.add("chair", 3.0, 1.3, 0.4, 0.4)
    p.add("chair", 2.2, 2.5, 0.4, 0.4)
    p.add("chair", 3.0, 2.5, 0.4, 0.4)
    # breakfast corner
    p.add("table", 5.3, 2.2, 0.8, 0.8)
    p.add("chair", 4.7, 2.2, 0.4, 0.4)
    p.add("chair", 5.3, 1.6, 0.4, 0.4)
    # loose items
    p.add("bin", 5.9, 7.0, 0.4, 0.4)
    p.add("plant", 0.25, 0.25, 0.4, 0.4)
    p.add("plant", 4.6, 5.3, 0.4, 0.4)
    p.add("cart", 4.5, 3.5, 0.6, 0.4)
    # pantry behind the partition
    p.add("shelf", 6.75, 7.35, 0.4, 1.2)
    p.add("shelf", 6.75, 5.4, 0.4, 1.2)
    p.add("shelf", 9.75, 7.35, 0.4, 1.2)
    p.add("shelf", 9.75, 6.3, 0.4, 0.9)
    p.add("crate", 7.25, 7.65, 0.6, 0.6)
    p.add("crate", 8.25, 7.65, 0.6, 0.6)
    p.add("cart", 8.3, 6.3, 0.6, 0.4)
    p.add("bin", 6.75, 2.0, 0.4, 0.4)
    # the cold store itself, filling the stub end wall to wall
    p.add("freezer", 9.5, 5.5, 0.9, 0.6)
    tax = Taxonomy(
        parent={
            "fridge": "appliance",
            "freezer": "appliance",
            "stove": "appliance",
            "oven": "appliance",
            "dishwasher": "appliance",
            "microwave": "appliance",
            "sink": "appliance",
            "appliance": "object",
            "counter": "furniture",
            "cabinet": "furniture",
            "table": "furniture",
            "chair": "furniture",
            "stool": "furniture",
            "bar-stool": "stool",
            "shelf": "furniture",
            "cart": "furniture",
            "furniture": "object",
            "bin": "container",
            "crate": "container",
            "container": "object",
            "plant": "object",
        }
    )
    return WorldSpec("kitchen", RES, 200, 160, walls, tuple(p.objects), tax)


def build_laboratory() -> WorldSpec:
    walls = np.zeros((140, 180), dtype=bool)
    border(walls)
    # sample-archive stub along the east wall, entered via a duct at the
    # south wall; the archived analyzer fills the stub end
    hwall(walls, 0.65, 6.2, 8.05)
    vwall(walls, 8.0, 0.65, 5.45)
    hwall(walls, 5.4, 8.0, 9.0)
    p = Placer()
    # bench row flush against the north wall
    p.add("bench", 1.6, 6.6, 2.4, 0.7)
    p.add("bench", 4.6, 6.6, 2.4, 0.7)
    p.add("bench", 7.85, 6.6, 2.2, 0.7)
    # west wall: fume hoods and storage
    p.add("fume-hood", 0.45, 5.0, 0.8, 1.2)
    p.add("fume-hood", 0.45, 3.2, 0.8, 1.2)
    p.add("cabinet", 0.5, 1.4, 0.9, 0.8)
    # free-standing work area
    p.add("bench", 3.2, 4.1, 2.4, 0.7)
    p.add("centrifuge", 5.3, 4.1, 0.5, 0.5)
    p.add("incubator", 6.3, 4.1, 0.6, 0.6)
    p.add("analyzer", 7.6, 5.2, 0.8, 0.6)
    p.add("sink", 8.65, 5.85, 0.6, 0.8)
    # writing corner along the south wall
    p.add("freezer", 2.0, 0.4, 0.9, 0.7)
    p.add("desk", 3.8, 0.4, 1.2, 0.7)
    p.add("chair", 3.45, 0.95, 0.4, 0.4)
    p.add("chair", 4.15, 0.95, 0.4, 0.4)
    p.add("incubator", 4.7, 0.4, 0.6, 0.7)
    # loose items
    p.add("cart", 5.9, 2.4, 0.6, 0.4)
    p.add("bin", 6.9, 3.2, 0.4, 0.4)
    p.add("crate", 7.7, 1.6, 0.6, 0.6)
    p.add("plant", 2.4, 2.6, 0.4, 0.4)
    # the archived analyzer at the stub end, flush wall to wall
    p.add("analyzer", 8.5, 5.1, 0.9, 0.6)
    tax = Taxonomy(
        parent={
            "centrifuge": "instrument",
            "incubator": "instrument",
            "analyzer": "instrument",
            "fume-hood": "instrument",
            "instrument": "object",
            "bench": "furniture",
            "cabinet": "furniture",
            "desk": "furniture",
            "chair": "furniture",
            "cart": "furniture",
            "furniture": "object",
            "freezer": "appliance",
            "sink": "appliance",
            "appliance": "object",
            "bin": "container",
            "crate": "container",
            "container": "object",
            "plant": "object",
        }
    )
    return WorldSpec("laboratory", RES, 180, 140, walls, tuple(p.objects), tax)


def build_large_office() -> WorldSpec:
    walls = np.zeros((160, 240), dtype=bool)
    border(walls)
    vwall(walls, 4.0, 0.0, 8.0, gaps=[(1.5, 3.1)])
    vwall(walls, 8.0, 0.0, 8.0, gaps=[(4.9, 6.5)])
    p = Placer()
    # west room: desks flush to walls, chairs tucked in
    p.add("desk", 0.65, 7.65, 1.2, 0.6)
    p.add("chair", 0.65, 7.15, 0.4, 0.4)
    p.add("desk", 2.6, 7.65, 1.2, 0.6)
    p.add("chair", 2.6, 7.15, 0.4, 0.4)
    p.add("desk", 0.35, 5.5, 0.6, 1.2)
    p.add("chair", 0.85, 5.5, 0.4, 0.4)
    p.add("desk", 0.35, 3.4, 0.6, 1.2)
    p.add("chair", 0.85, 3.4, 0.4, 0.4)
    p.add("sofa", 0.75, 0.35, 1.4, 0.6)
    p.add("table", 2.6, 1.6, 0.8, 0.8)
    p.add("plant", 3.5, 0.25, 0.4, 0.4)
    p.add("cabinet", 0.3, 1.4, 0.5, 0.8)
    # middle room
    p.add("desk", 4.65, 7.65, 1.2, 0.6)
    p.add("chair", 4.65, 7.15, 0.4, 0.4)
    p.add("desk", 6.6, 7.65, 1.2, 0.6)
    p.add("chair", 6.6, 7.15, 0.4, 0.4)
    p.add("desk", 4.65, 0.4, 1.2, 0.7)
    p.add("chair", 4.65, 0.95, 0.4, 0.4)
    p.add("desk", 6.6, 0.4, 1.2, 0.7)
    p.add("chair", 6.6, 0.95, 0.4, 0.4)
    p.add("table", 5.5, 4.0, 0.8, 0.8)
    p.add("shelf", 7.8, 3.0, 0.4, 1.0)
    p.add("printer", 7.8, 0.8, 0.4, 0.4)
    p.add("plant", 4.25, 4.0, 0.4, 0.4)
    p.add("bin", 7.0, 2.6, 0.4, 0.4)
    # east room
    p.add("desk", 8.65, 7.65, 1.2, 0.6)
    p.add("chair", 8.65, 7.15, 0.4, 0.4)
    p.add("desk", 10.65, 7.65, 1.2, 0.6)
    p.add("chair", 10.65, 7.15, 0.4, 0.4)
    p.add("desk", 11.65, 5.6, 0.6, 1.2)
    p.add("chair", 11.15, 5.6, 0.4, 0.4)
    p.add("desk", 11.65, 3.4, 0.6, 1.2)
    p.add("chair", 11.15, 3.4, 0.4, 0.4)
    p.add("sofa", 8.75, 0.35, 1.4, 0.6)
    p.add("table", 10.6, 1.5, 0.8, 0.8)
    p.add("table", 9.3, 4.2, 0.8, 0.8)
    p.add("cabinet", 11.7, 0.45, 0.5, 0.8)
    p.add("cabinet", 11.6, 7.5, 0.7, 0.9)
    p.add("shelf", 8.2, 4.4, 0.3, 1.0)
    p.add("printer", 8.25, 2.5, 0.4, 0.4)
    p.add("plant", 9.0, 6.0, 0.4, 0.4)
    tax = Taxonomy(
        parent={
            "desk": "furniture",
            "chair": "furniture",
            "sofa": "furniture",
            "table": "furniture",
            "cabinet": "furniture",
            "shelf": "furniture",
            "furniture": "object",
            "printer": "accessories",
            "accessories": "object",
            "plant": "object",
            "bin": "container",
            "container": "object",
        }
    )
    return WorldSpec("large_office", RES, 240, 160, walls, tuple(p.objects), tax)


def main() -> None:
    out_dir = Path(__file__).resolve().parents[1] / "src" / "rosme" / "worlds"
    out_dir.mkdir(parents=True, exist_ok=True)
    builders = {
        "small_office": (build_small_office, True, 11),
        "kitchen": (build_kitchen, False, 35),
        "laboratory": (build_laboratory, False, 21),
        "large_office": (build_large_office, False, 41),
    }
    for name, (build, all_faces, count) in builders.items():
        spec = build()
        assert len(spec.objects) == count, (
            f"{name}: {len(spec.objects)} objects, expected {count}"
        )
        check_world(spec, require_all_faces=all_faces)
        path = out_dir / f"{name}.world"
        path.write_text(serialize_world(spec), encoding="utf-8")
        free = int(spec.free_mask.sum())
        print(
            f"{name}: {len(spec.objects)} objects, "
            f"{spec.width}x{spec.height} cells, {free} free"
        )


if __name__ == "__main__":
    main()
