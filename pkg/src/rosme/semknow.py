"""The robot's spatial knowledge: known grid, object records, exported map.

Everything downstream scores (metrics) or displays (UI) comes from this
state, never from the groundtruth world directly.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _raycast
from .errors import ValidationError
from .simkernel import DetectionEvent, LidarScan, RobotState
from .worldmodel import (
    Predicate,
    SemanticMap,
    Taxonomy,
    WorldSpec,
    predicates_for,
    world_to_cell,
)

UNKNOWN = _raycast.K_UNKNOWN
FREE = _raycast.K_FREE
OCCUPIED = _raycast.K_OCCUPIED

PREDICATE_MODES = ("accumulate", "replace")


@dataclass
class KnownMap:
    """Ternary occupancy grid built from lidar; never forgets a cell."""

    resolution: float
    grid: np.ndarray  # uint8 (height, width)

    @classmethod
    def for_world(cls, spec: WorldSpec) -> KnownMap:
        return cls(
            resolution=spec.resolution,
            grid=np.zeros((spec.height, spec.width), dtype=np.uint8),
        )

    @classmethod
    def revealed(cls, spec: WorldSpec) -> KnownMap:
        """Fully known map of the true occupancy (for scripted policies)."""
        grid = np.where(spec.free_mask, FREE, OCCUPIED).astype(np.uint8)
        return cls(resolution=spec.resolution, grid=grid)

    def integrate_scan(self, state: RobotState, scan: LidarScan) -> None:
        """Carve free space along beams; mark hit endpoints occupied.

        Occupied beats free within one scan, and an occupied cell never
        downgrades afterwards. The cell under the robot is always free.
        """
        _raycast.carve_scan(
            self.grid,
            self.resolution,
            state.x,
            state.y,
            scan.angles,
            scan.ranges,
            scan.hits,
        )
        cx = world_to_cell(state.x, self.resolution)
        cy = world_to_cell(state.y, self.resolution)
        if 0 <= cy < self.grid.shape[0] and 0 <= cx < self.grid.shape[1]:
            self.grid[cy, cx] = FREE

    def frontier_mask(self) -> np.ndarray:
        """Free cells with at least one unknown 4-neighbor."""
        g = self.grid
        unknown = g == UNKNOWN
        near_unknown = np.zeros_like(unknown)
        near_unknown[1:, :] |= unknown[:-1, :]
        near_unknown[:-1, :] |= unknown[1:, :]
        near_unknown[:, 1:] |= unknown[:, :-1]
        near_unknown[:, :-1] |= unknown[:, 1:]
        return (g == FREE) & near_unknown

    @property
    def unknown_count(self) -> int:
        return int((self.grid == UNKNOWN).sum())

    @property
    def free_count(self) -> int:
        return int((self.grid == FREE).sum())

    def copy(self) -> KnownMap:
        return KnownMap(self.resolution, self.grid.copy())


@dataclass
class ObjectRecord:
    """Accumulated evidence about one object."""

    object_id: int
    reported_label: str = ""
    best_confidence: float = 0.0
    observed_points: set[int] = field(default_factory=set)
    predicates: set[Predicate] = field(default_factory=set)
    first_seen: float = 0.0
    last_seen: float = 0.0
    detections: int = 0


@dataclass(frozen=True)
class ObjectMessage:
    """Snapshot emitted whenever a record gains information."""

    object_id: int
    label: str
    category_chain: tuple[str, ...]  # label first, taxonomy root last
    centroid: tuple[float, float]  # estimated from observed points
    bbox: tuple[float, float]
    confidence: float
    num_points: int
    timestamp: float

    def to_json(self) -> dict:
        return {
            "object_id": self.object_id,
            "label": self.label,
            "category_chain": list(self.category_chain),
            "centroid": [self.centroid[0], self.centroid[1]],
            "bbox": [self.bbox[0], self.bbox[1]],
            "confidence": self.confidence,
            "num_points": self.num_points,
            "timestamp": self.timestamp,
        }


class SemanticStore:
    """Incremental semantic map: object records keyed by groundtruth id.

    Predicates are asserted once a detection clears the knowledge
    threshold. In the default "accumulate" mode each accepted detection
    contributes its label's chain and facts are never retracted, which
    keeps the matched-predicate count nondecreasing; "replace" mode
    instead recomputes the set from the current reported label, so a
    high-confidence mislabel swaps the whole chain out.
    """

    def __init__(
        self,
        world: WorldSpec,
        threshold: float = 0.25,
        predicate_mode: str = "accumulate",
    ):
        if predicate_mode not in PREDICATE_MODES:
            raise ValidationError(f"unknown predicate mode {predicate_mode!r}")
        self.world = world
        self.taxonomy: Taxonomy = world.taxonomy
        self.threshold = threshold
        self.predicate_mode = predicate_mode
        self.records: dict[int, ObjectRecord] = {}

    def integrate_detection(
        self, event: DetectionEvent, t: float
    ) -> ObjectMessage | None:
        """Fold one detection into the store; message emitted on change."""
        obj = self.world.object_by_id(event.object_id)
        n_true = obj.num_surface_points
        for i in event.point_ids:
            if not 0 <= i < n_true:
                raise ValidationError(
                    f"detection of object {event.object_id} carries "
                    f"point index {i} outside its groundtruth set"
                )
        rec = self.records.get(event.object_id)
        if rec is None:
            rec = ObjectRecord(object_id=event.object_id, first_seen=t)
            self.records[event.object_id] = rec
        before = (
            len(rec.observed_points),
            rec.best_confidence,
            rec.reported_label,
            len(rec.predicates),
        )
        rec.observed_points.update(event.point_ids)
        if event.confidence > rec.best_confidence:
            rec.best_confidence = event.confidence
            rec.reported_label = event.label
        if self.predicate_mode == "accumulate":
            if event.confidence >= self.threshold:
                rec.predicates |= predicates_for(
                    event.object_id, event.label, self.taxonomy
                )
        else:  # replace
            if rec.best_confidence >= self.threshold:
                rec.predicates = predicates_for(
                    event.object_id, rec.reported_label, self.taxonomy
                )
        rec.last_seen = t
        rec.detections += 1
        after = (
            len(rec.observed_points),
            rec.best_confidence,
            rec.reported_label,
            len(rec.predicates),
        )
        if after == before:
            return None
        return self._message(rec, t)

    def _message(self, rec: ObjectRecord, t: float) -> ObjectMessage:
        pts = self.world.object_by_id(rec.object_id).surface_points
        seen = pts[sorted(rec.observed_points)]
        lo = seen.min(axis=0)
        hi = seen.max(axis=0)
        centroid = seen.mean(axis=0)
        chain = (
            tuple(self.taxonomy.chain(rec.reported_label))
            if rec.reported_label
            else ()
        )
        return ObjectMessage(
            object_id=rec.object_id,
            label=rec.reported_label,
            category_chain=chain,
            centroid=(float(centroid[0]), float(centroid[1])),
            bbox=(float(hi[0] - lo[0]), float(hi[1] - lo[1])),
            confidence=rec.best_confidence,
            num_points=len(rec.observed_points),
            timestamp=t,
        )

    def export_semantic_map(self) -> SemanticMap:
        """The robot's semantic map tuple, scored against the groundtruth."""
        geometry = {
            rec.object_id: frozenset(rec.observed_points)
            for rec in self.records.values()
        }
        preds: set[Predicate] = set()
        for rec in self.records.values():
            preds |= rec.predicates
        return SemanticMap(
            frame=self.world.frame, geometry=geometry, predicates=frozenset(preds)
        )
