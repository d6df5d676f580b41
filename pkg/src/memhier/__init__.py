"""memhier: pattern-driven accelerator memory-hierarchy simulation toolkit."""

from .config import (
    ConfigError,
    HierarchyConfig,
    LevelConfig,
    OsrConfig,
    Ports,
    RuntimeInputs,
    uniform_runtime,
    validate_config,
    validate_runtime,
)
from .patterns import (
    UNCLASSIFIED,
    AddressTrace,
    PatternKind,
    PatternSpec,
    TraceStats,
    classify_trace,
    gen_trace,
    trace_stats,
)
from .refmodel import ExpectedStream, expected_outputs
from .sim import (
    DeadlockError,
    SimInitError,
    SimReport,
    SimState,
    init_sim,
    preload,
    reset_with,
    run,
    step,
)

__all__ = [
    "AddressTrace",
    "ConfigError",
    "DeadlockError",
    "ExpectedStream",
    "HierarchyConfig",
    "LevelConfig",
    "OsrConfig",
    "PatternKind",
    "PatternSpec",
    "Ports",
    "RuntimeInputs",
    "SimInitError",
    "SimReport",
    "SimState",
    "TraceStats",
    "UNCLASSIFIED",
    "classify_trace",
    "expected_outputs",
    "gen_trace",
    "init_sim",
    "preload",
    "reset_with",
    "run",
    "step",
    "trace_stats",
    "uniform_runtime",
    "validate_config",
    "validate_runtime",
]

__version__ = "0.1.0"
