"""Rebuild a session's metric series from its persisted event log.

The replay is the batch oracle for the incremental pipeline: it folds the
logged detections into a fresh store and re-evaluates the metrics at every
logged sample time. On an intact log the result equals the recorded series
bit for bit.
"""

from __future__ import annotations

import json
from pathlib import Path

from ..errors import CorruptLog
from ..metrics import MetricContext, MetricSample, SessionSeries, get
from ..semknow import SemanticStore
from ..simkernel import DetectionEvent
from ..worldmodel import load_world
from .session import LOG_VERSION


def _event_from(record: dict, line: int) -> DetectionEvent:
    try:
        return DetectionEvent(
            object_id=int(record["object_id"]),
            label=record["label"],
            confidence=float(record["confidence"]),
            point_ids=tuple(int(i) for i in record["point_ids"]),
            distance=float(record.get("distance", 0.0)),
            true_class=record.get("true_class", ""),
            bearing_min=float(record.get("bearing_min", 0.0)),
            bearing_max=float(record.get("bearing_max", 0.0)),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise CorruptLog(f"malformed detection record: {exc}", line) from exc


def replay(log_path: str | Path) -> SessionSeries:
    """Recompute the metric series recorded in an events.jsonl file."""
    path = Path(log_path)
    header = None
    store = None
    series = None
    prev_t = float("-inf")
    ended = False
    line = 0
    with open(path, "r", encoding="utf-8") as fh:
        for line, raw in enumerate(fh, start=1):
            raw = raw.strip()
            if not raw:
                raise CorruptLog("blank line inside event log", line)
            if ended:
                raise CorruptLog("records after the session end marker", line)
            try:
                rec = json.loads(raw)
            except json.JSONDecodeError as exc:
                raise CorruptLog(f"not valid JSON: {exc.msg}", line) from exc
            if not isinstance(rec, dict) or "kind" not in rec:
                raise CorruptLog("record lacks a 'kind' field", line)
            kind = rec["kind"]
            if line == 1:
                if kind != "header":
                    raise CorruptLog("log does not start with a header", line)
                if rec.get("version") != LOG_VERSION:
                    raise CorruptLog(
                        f"unsupported log version {rec.get('version')!r}", line
                    )
                header = rec
                world = load_world(header["world"])
                store = SemanticStore(
                    world,
                    threshold=header["threshold"],
                    predicate_mode=header["predicate_mode"],
                )
                series = SessionSeries(
                    run_id=header.get("run", 0),
                    seed=header.get("seed", 0),
                    policy=header.get("policy", ""),
                )
                continue
            if header is None:
                raise CorruptLog("log does not start with a header", line)
            if "t" not in rec:
                raise CorruptLog(f"{kind!r} record lacks a timestamp", line)
            t = float(rec["t"])
            if t < prev_t - 1e-12:
                raise CorruptLog(
                    f"time went backwards: {t} after {prev_t}", line
                )
            prev_t = t
            if kind == "detection":
                store.integrate_detection(_event_from(rec, line), t)
            elif kind == "metric":
                name = rec.get("name")
                try:
                    evaluator = get(name).evaluator
                except Exception as exc:
                    raise CorruptLog(f"unknown metric {name!r}", line) from exc
                value = evaluator(MetricContext(store))
                series.append(MetricSample(t=t, name=name, value=value))
            elif kind == "end":
                if "lines" in rec and rec["lines"] != line:
                    raise CorruptLog(
                        f"end marker counts {rec['lines']} lines, file has "
                        f"{line}",
                        line,
                    )
                ended = True
            elif kind in ("pose", "scan", "object"):
                pass
            else:
                raise CorruptLog(f"unknown record kind {kind!r}", line)
    if header is None:
        raise CorruptLog("empty log: no header", 1)
    if not ended:
        raise CorruptLog("log ends without a session end marker", line + 1)
    return series


def recorded_series(log_path: str | Path) -> SessionSeries:
    """The metric samples exactly as logged (no recomputation)."""
    path = Path(log_path)
    series = SessionSeries(run_id=0, seed=0, policy="")
    with open(path, "r", encoding="utf-8") as fh:
        for line, raw in enumerate(fh, start=1):
            raw = raw.strip()
            if not raw:
                continue
            try:
                rec = json.loads(raw)
            except json.JSONDecodeError as exc:
                raise CorruptLog(f"not valid JSON: {exc.msg}", line) from exc
            if rec.get("kind") == "header":
                series = SessionSeries(
                    run_id=rec.get("run", 0),
                    seed=rec.get("seed", 0),
                    policy=rec.get("policy", ""),
                )
            elif rec.get("kind") == "metric":
                series.append(
                    MetricSample(
                        t=float(rec["t"]), name=rec["name"],
                        value=float(rec["value"]),
                    )
                )
    return series
