"""Experiment harness and CLI."""

from .scenario import (
    AUTHORIZED,
    UNAUTHORIZED,
    LatencySample,
    ScenarioConfig,
    ScenarioResult,
    SummaryRow,
    contiguous_assignment,
    emit_report,
    http_driver,
    in_process_driver,
    run_scenario,
    run_sweep,
    summarize,
)

__all__ = [
    "AUTHORIZED",
    "UNAUTHORIZED",
    "LatencySample",
    "ScenarioConfig",
    "ScenarioResult",
    "SummaryRow",
    "contiguous_assignment",
    "emit_report",
    "http_driver",
    "in_process_driver",
    "run_scenario",
    "run_sweep",
    "summarize",
]
