"""Seeded multi-run benchmarks: run, persist, aggregate.

Run k uses seed base+k. Artifacts per run: a metric CSV and an event log;
the aggregate report carries cross-run mean/std per metric on a shared
time grid (a run that ended early holds its last value).
"""

from __future__ import annotations

import json
import platform
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .. import __version__
from ..errors import RosmeError
from ..metrics import SessionSeries
from .session import SessionConfig, SessionResult, run_session

CSV_HEADER = "t,metric,value"


@dataclass
class SessionReport:
    config: dict
    series: list[SessionSeries]
    grid: list[float]
    mean: dict[str, list[float]]
    std: dict[str, list[float]]
    finals: dict[str, list[float]]
    versions: dict[str, str]
    run_meta: list[dict]

    def to_json(self) -> dict:
        return {
            "config": self.config,
            "versions": self.versions,
            "metrics": {
                name: {
                    "t": self.grid,
                    "mean": self.mean[name],
                    "std": self.std[name],
                }
                for name in self.mean
            },
            "finals": self.finals,
            "runs": self.run_meta,
        }


class BenchmarkError(RosmeError):
    """A run inside a benchmark failed; names the run and the cause."""


def write_csv(series: SessionSeries, path: Path) -> None:
    """Rows ordered by (t, metric name), fixed 6-decimal values."""
    rows = []
    for name, samples in series.samples.items():
        for s in samples:
            rows.append((s.t, name, s.value))
    rows.sort(key=lambda r: (r[0], r[1]))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(CSV_HEADER + "\n")
        for t, name, value in rows:
            fh.write(f"{t:.6f},{name},{value:.6f}\n")


def _quant(x: float) -> float:
    """Snap to the CSV's 6-decimal fixed point."""
    return float(f"{x:.6f}")


def _held_value(samples, t: float) -> float:
    """Value of a step series at time t (hold-last; 0 before the first)."""
    out = 0.0
    for qt, qv in samples:
        if qt <= t + 1e-12:
            out = qv
        else:
            break
    return out


def aggregate(
    series: list[SessionSeries], metrics: tuple[str, ...]
) -> tuple[list[float], dict, dict, dict]:
    """Shared grid = union of sample times; per-metric mean/std (ddof=0).

    Times and values pass through the CSV's 6-decimal quantization first,
    so recomputing the aggregate from the persisted CSVs reproduces the
    report exactly rather than to within rounding slop.
    """
    quantized = [
        {
            name: [(_quant(s.t), _quant(s.value)) for s in samples]
            for name, samples in ser.samples.items()
        }
        for ser in series
    ]
    times = sorted({t for ser in quantized for ss in ser.values() for t, _ in ss})
    mean: dict[str, list[float]] = {}
    std: dict[str, list[float]] = {}
    finals: dict[str, list[float]] = {}
    for name in metrics:
        rows = np.array(
            [
                [_held_value(ser.get(name, []), t) for t in times]
                for ser in quantized
            ]
        )
        mean[name] = [float(v) for v in rows.mean(axis=0)]
        std[name] = [float(v) for v in rows.std(axis=0, ddof=0)]
        finals[name] = [
            ser[name][-1][1] if ser.get(name) else 0.0 for ser in quantized
        ]
    return times, mean, std, finals


def versions() -> dict[str, str]:
    return {
        "rosme": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
    }


def run_benchmark(cfg: SessionConfig) -> SessionReport:
    """Execute cfg.runs sessions at seeds seed, seed+1, ... and aggregate."""
    cfg.validate()
    out_dir = Path(cfg.out_dir) if cfg.out_dir else None
    if out_dir is not None:
        out_dir.mkdir(parents=True, exist_ok=True)
    all_series: list[SessionSeries] = []
    run_meta: list[dict] = []
    for k in range(cfg.runs):
        seed = cfg.seed + k
        csv_path = out_dir / f"run_{k}.csv" if out_dir else None
        log_path = out_dir / f"run_{k}.events.jsonl" if out_dir else None
        try:
            result: SessionResult = run_session(
                cfg, run_id=k, seed=seed, log_path=log_path
            )
        except Exception as exc:
            raise BenchmarkError(f"run {k} (seed {seed}) failed: {exc}") from exc
        if csv_path is not None:
            write_csv(result.series, csv_path)
        all_series.append(result.series)
        run_meta.append(
            {
                "run": k,
                "seed": seed,
                "t_end": result.t_end,
                "exhausted": result.exhausted,
                "collisions": result.collisions,
                "csv": csv_path.name if csv_path else None,
                "events": log_path.name if log_path else None,
            }
        )
    grid, mean, std, finals = aggregate(all_series, cfg.metrics)
    report = SessionReport(
        config=cfg.echo(),
        series=all_series,
        grid=grid,
        mean=mean,
        std=std,
        finals=finals,
        versions=versions(),
        run_meta=run_meta,
    )
    if out_dir is not None:
        with open(out_dir / "report.json", "w", encoding="utf-8") as fh:
            json.dump(report.to_json(), fh, indent=2)
            fh.write("\n")
    return report
