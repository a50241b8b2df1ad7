"""Session orchestration: seeded benchmarks, event-log replay, live serving."""

from .benchmark import (
    BenchmarkError,
    SessionReport,
    aggregate,
    run_benchmark,
    write_csv,
)
from .replay import recorded_series, replay
from .session import Session, SessionConfig, SessionResult, run_session, start_pose

__all__ = [
    "BenchmarkError",
    "Session",
    "SessionConfig",
    "SessionReport",
    "SessionResult",
    "aggregate",
    "recorded_series",
    "replay",
    "run_benchmark",
    "run_session",
    "start_pose",
    "write_csv",
]
