"""Adaptive tube MPC: polytopes, closed-loop runs and invariant checks."""

import json

from ._atmpc import (
    Config,
    ConfigError,
    GeometryError,
    Polytope,
    Trace,
    check,
    contains_set,
    intersect,
    lqr,
    minkowski_sum,
    pontryagin_diff,
    run,
    solve_qp,
    write_run,
)

__all__ = [
    "Config",
    "ConfigError",
    "GeometryError",
    "Polytope",
    "Trace",
    "check",
    "contains_set",
    "intersect",
    "lqr",
    "minkowski_sum",
    "pontryagin_diff",
    "records",
    "run",
    "solve_qp",
    "write_run",
]


def records(trace):
    """Per-step records of a trace as dicts, as written to trace.jsonl."""
    return [json.loads(line) for line in trace.records()]
