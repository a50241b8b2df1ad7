"""rosme: a deterministic 2D benchmark for semantic mapping."""

from .errors import (
    CorruptLog,
    EmptyWorld,
    Exhausted,
    FrameMismatch,
    NoFreeSpace,
    ParseError,
    RosmeError,
    UnknownClass,
    Unreachable,
    ValidationError,
)
from .explore import make_policy
from .metrics import (
    MetricContext,
    MetricSample,
    SessionSeries,
    cori_value,
    opi_value,
    ori_value,
    sample_all,
)
from .semknow import KnownMap, ObjectMessage, SemanticStore
from .simkernel import (
    DetectionEvent,
    DetectorConfig,
    LidarScan,
    RobotConfig,
    RobotState,
    SensorConfig,
    VelocityCommand,
    camera_observe,
    detect,
    lidar_scan,
    step,
)
from .worldmodel import (
    ObjectInstance,
    Predicate,
    SemanticMap,
    Taxonomy,
    WorldSpec,
    groundtruth_map,
    list_worlds,
    load_world,
    predicates_for,
)

__version__ = "0.1.0"

__all__ = [
    "CorruptLog",
    "DetectionEvent",
    "DetectorConfig",
    "EmptyWorld",
    "Exhausted",
    "FrameMismatch",
    "KnownMap",
    "LidarScan",
    "MetricContext",
    "MetricSample",
    "NoFreeSpace",
    "ObjectInstance",
    "ObjectMessage",
    "ParseError",
    "Predicate",
    "RobotConfig",
    "RobotState",
    "RosmeError",
    "SemanticMap",
    "SemanticStore",
    "SensorConfig",
    "SessionSeries",
    "Taxonomy",
    "UnknownClass",
    "Unreachable",
    "ValidationError",
    "VelocityCommand",
    "WorldSpec",
    "camera_observe",
    "cori_value",
    "detect",
    "groundtruth_map",
    "lidar_scan",
    "list_worlds",
    "load_world",
    "make_policy",
    "opi_value",
    "ori_value",
    "predicates_for",
    "sample_all",
    "step",
    "__version__",
]
