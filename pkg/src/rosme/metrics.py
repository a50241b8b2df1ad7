"""Evaluation metrics over the robot's semantic map vs the groundtruth.

The three shipped indices (ori, cori, opi) share one shape:

    1 - min(1, mean over objects of a normalized per-object shortfall)

ori uses observed surface points, cori discounts them by detection
confidence, opi uses predicate counts. All are pure functions of the store
snapshot, range over [0, 1], and under the store's accumulate semantics are
nondecreasing within a session.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

from .errors import EmptyWorld, FrameMismatch, ValidationError
from .semknow import SemanticStore
from .worldmodel import Predicate, SemanticMap, WorldSpec, predicates_for

OPI_COUNTS = ("matched", "declared")


@dataclass(frozen=True)
class MetricSample:
    t: float
    name: str
    value: float


@dataclass(frozen=True)
class MetricDef:
    """A named, pure evaluator over a metric context."""

    name: str
    evaluator: Callable[["MetricContext"], float]


@dataclass
class SessionSeries:
    """Ordered metric samples for one run."""

    run_id: int
    seed: int
    policy: str
    samples: dict[str, list[MetricSample]] = field(default_factory=dict)

    def append(self, sample: MetricSample) -> None:
        series = self.samples.setdefault(sample.name, [])
        if series and sample.t <= series[-1].t:
            raise ValidationError(
                f"sample for {sample.name!r} at t={sample.t} does not advance "
                f"past t={series[-1].t}"
            )
        series.append(sample)


class MetricContext:
    """Per-object accessors the evaluators read; nothing else is visible."""

    def __init__(self, store: SemanticStore):
        self.store = store
        self.world: WorldSpec = store.world
        if not self.world.objects:
            raise EmptyWorld(f"world {self.world.name!r} has no objects")
        self._gt_preds: dict[int, frozenset[Predicate]] = {
            obj.id: frozenset(
                predicates_for(obj.id, obj.class_label, self.world.taxonomy)
            )
            for obj in self.world.objects
        }

    @property
    def object_ids(self) -> list[int]:
        return [obj.id for obj in self.world.objects]

    @property
    def n_objects(self) -> int:
        return len(self.world.objects)

    def ps_g(self, object_id: int) -> int:
        return self.world.object_by_id(object_id).num_surface_points

    def p_g(self, object_id: int) -> int:
        return len(self._gt_preds[object_id])

    def ps(self, object_id: int) -> int:
        rec = self.store.records.get(object_id)
        return len(rec.observed_points) if rec else 0

    def c(self, object_id: int) -> float:
        rec = self.store.records.get(object_id)
        return rec.best_confidence if rec else 0.0

    def p_declared(self, object_id: int) -> int:
        rec = self.store.records.get(object_id)
        return len(rec.predicates) if rec else 0

    def p_matched(self, object_id: int) -> int:
        rec = self.store.records.get(object_id)
        if rec is None:
            return 0
        return len(rec.predicates & self._gt_preds[object_id])


def _index(terms: list[float], n: int) -> float:
    return 1.0 - min(1.0, sum(terms) / n)


def ori_value(ctx: MetricContext) -> float:
    terms = [
        abs(ctx.ps_g(n) - ctx.ps(n)) / ctx.ps_g(n) for n in ctx.object_ids
    ]
    return _index(terms, ctx.n_objects)


def cori_value(ctx: MetricContext) -> float:
    terms = [
        abs(ctx.ps_g(n) - ctx.c(n) * ctx.ps(n)) / ctx.ps_g(n)
        for n in ctx.object_ids
    ]
    return _index(terms, ctx.n_objects)


def opi_value(ctx: MetricContext, count: str = "matched") -> float:
    if count not in OPI_COUNTS:
        raise ValidationError(f"unknown opi count mode {count!r}")
    p = ctx.p_matched if count == "matched" else ctx.p_declared
    terms = [abs(ctx.p_g(n) - p(n)) / ctx.p_g(n) for n in ctx.object_ids]
    return _index(terms, ctx.n_objects)


def ori(store: SemanticStore) -> float:
    return ori_value(MetricContext(store))


def cori(store: SemanticStore) -> float:
    return cori_value(MetricContext(store))


def opi(store: SemanticStore, count: str = "matched") -> float:
    return opi_value(MetricContext(store), count=count)


# ---------------------------------------------------------------------------
# The two-term combinator form: delta(SM1, SM2) = f(geometric, predicate).
# SM2 plays the groundtruth role and defines the object set and norms.
# ---------------------------------------------------------------------------


def _per_object_predicates(sm: SemanticMap) -> dict[int, set[Predicate]]:
    """Attribute a map's flat predicate set to its objects.

    Each object owns its instance-of fact plus the is-a chain reachable
    from the asserted class along the map's own is-a predicates.
    """
    isa = {p.subject: p for p in sm.predicates if p.kind == "is-a"}
    out: dict[int, set[Predicate]] = {n: set() for n in sm.geometry}
    for p in sm.predicates:
        if p.kind != "instance-of":
            continue
        try:
            n = int(p.subject)
        except ValueError:
            continue
        if n not in out:
            continue
        out[n].add(p)
        cls = p.object
        seen = set()
        while cls in isa and cls not in seen:
            seen.add(cls)
            out[n].add(isa[cls])
            cls = isa[cls].object
    return out


def geometric_term(sm1: SemanticMap, sm2: SemanticMap) -> float:
    """Mean normalized per-object symmetric difference of point sets."""
    if not sm2.geometry:
        raise EmptyWorld("reference map has no objects")
    total = 0.0
    for n, ref in sm2.geometry.items():
        got = sm1.geometry.get(n, frozenset())
        total += len(got ^ ref) / len(ref)
    return total / len(sm2.geometry)


def predicate_term(sm1: SemanticMap, sm2: SemanticMap) -> float:
    """Mean normalized per-object predicate shortfall (matched counting)."""
    if not sm2.geometry:
        raise EmptyWorld("reference map has no objects")
    ref_preds = _per_object_predicates(sm2)
    total = 0.0
    for n in sm2.geometry:
        ref = ref_preds[n]
        matched = len(sm1.predicates & ref)
        total += abs(len(ref) - matched) / len(ref)
    return total / len(sm2.geometry)


COMBINERS: dict[str, Callable[[float, float], float]] = {
    "geometric": lambda g, p: 1.0 - min(1.0, g),
    "predicate": lambda g, p: 1.0 - min(1.0, p),
    "mean": lambda g, p: 1.0 - min(1.0, (g + p) / 2.0),
}


def delta(
    sm1: SemanticMap,
    sm2: SemanticMap,
    combiner: str | Callable[[float, float], float] = "mean",
) -> float:
    """Score two semantic maps: f(geometric term, predicate term)."""
    if sm1.frame != sm2.frame:
        raise FrameMismatch(
            f"cannot compare maps in frames {sm1.frame!r} and {sm2.frame!r}"
        )
    f = COMBINERS[combiner] if isinstance(combiner, str) else combiner
    return f(geometric_term(sm1, sm2), predicate_term(sm1, sm2))


# ---------------------------------------------------------------------------
# Registry: run-time metric sets are assembled from these stable names.
# ---------------------------------------------------------------------------

_REGISTRY: dict[str, MetricDef] = {}


def register(defn: MetricDef) -> None:
    if defn.name in _REGISTRY:
        raise ValidationError(f"metric {defn.name!r} already registered")
    _REGISTRY[defn.name] = defn


def registered() -> dict[str, MetricDef]:
    return dict(_REGISTRY)


def get(name: str) -> MetricDef:
    if name not in _REGISTRY:
        raise ValidationError(f"unknown metric {name!r}")
    return _REGISTRY[name]


register(MetricDef("ori", ori_value))
register(MetricDef("cori", cori_value))
register(MetricDef("opi", opi_value))

DEFAULT_METRICS = ("ori", "cori", "opi")


def sample_all(
    store: SemanticStore, t: float, names: tuple[str, ...] = DEFAULT_METRICS
) -> list[MetricSample]:
    """Evaluate the named metrics on one consistent snapshot."""
    ctx = MetricContext(store)
    return [MetricSample(t=t, name=n, value=get(n).evaluator(ctx)) for n in names]
