"""Deterministic simulator of window flow control over a drop-tail bottleneck,
comparing optimistic/pessimistic retransmission with caching/non-caching sinks."""

from .engine import Event, EventHandle, RngStream, SimulationError, Simulator, ms, to_ms
from .harness import (
    SCHEMES,
    ConfigError,
    RunResult,
    ScenarioConfig,
    audit_run,
    build_config,
    compare_schemes,
    load_config_file,
    run_scenario,
)
from .metrics import Metrics, Trace
from .packet import ACK, DATA, Packet
from .path import LinkConfig, LossPlan, NetworkPath
from .sink import CACHING, NON_CACHING, Sink, deliverable_run
from .source import OPTIMISTIC, PESSIMISTIC, RttEstimator, Source, TimerParams

__version__ = "0.1.0"

__all__ = [
    "ACK",
    "CACHING",
    "ConfigError",
    "DATA",
    "Event",
    "EventHandle",
    "LinkConfig",
    "LossPlan",
    "Metrics",
    "NON_CACHING",
    "NetworkPath",
    "OPTIMISTIC",
    "PESSIMISTIC",
    "Packet",
    "RngStream",
    "RttEstimator",
    "RunResult",
    "SCHEMES",
    "ScenarioConfig",
    "SimulationError",
    "Simulator",
    "Sink",
    "Source",
    "TimerParams",
    "Trace",
    "audit_run",
    "build_config",
    "compare_schemes",
    "deliverable_run",
    "load_config_file",
    "ms",
    "run_scenario",
    "to_ms",
]
