"""Python bindings for the tsync simulator."""

import json as _json

from ._core import (
    ConfigError,
    DomainError,
    Error,
    RateError,
    builtin_speed_example,
    builtin_table1,
    format_duration,
    iou_1d,
    local_from_true,
    offset_and_delay,
    parse_duration,
    speed_estimate,
    tolerable_sync_error_ms,
    true_from_local,
)
from ._core import run_scenario as _run_scenario
from ._core import run_sweep as _run_sweep
from ._core import validate_config as _validate_config


def validate_config(source):
    """Effective configuration of a config path or JSON document, as a dict."""
    return _json.loads(_validate_config(str(source)))


def run_scenario(source, seed=None, raw=False):
    """Runs a scenario; returns the report dict (or its exact JSON text if raw)."""
    text = _run_scenario(str(source), seed)
    return text if raw else _json.loads(text)


def run_sweep(source, seeds, threads=1):
    return [_json.loads(t) for t in _run_sweep(str(source), list(seeds), threads)]


__all__ = [
    "ConfigError",
    "DomainError",
    "Error",
    "RateError",
    "builtin_speed_example",
    "builtin_table1",
    "format_duration",
    "iou_1d",
    "local_from_true",
    "offset_and_delay",
    "parse_duration",
    "run_scenario",
    "run_sweep",
    "speed_estimate",
    "tolerable_sync_error_ms",
    "true_from_local",
    "validate_config",
]
