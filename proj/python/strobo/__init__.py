"""Stroboscopic averaging for highly oscillatory transport equations."""

import json as _json

from ._core import (
    ConfigError,
    CostGuardError,
    DomainError,
    NumericError,
    StroboError,
    UsageError,
    __version__,
    averaged_fields,
    beta,
    default_parameters,
    diagonal_eval,
    problem_names,
    reconstruct,
    reference,
    resolve,
    sample_points,
)
from ._core import run as _run


def _text(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (list, tuple)):
        return ",".join(_text(x) for x in v)
    return str(v)


def _settings(settings, kwargs):
    merged = dict(settings or {})
    merged.update(kwargs)
    return {k: _text(v) for k, v in merged.items()}


def run(command, settings=None, **kwargs):
    """Run a CLI command and return its rendered text."""
    return _run(command, _settings(settings, kwargs))


def run_json(command, settings=None, **kwargs):
    """Run a table or dump command with json output and parse it."""
    s = _settings(settings, kwargs)
    if command != "beta" or "format" not in s:
        s["format"] = "json"
    return _json.loads(_run(command, s))


__all__ = [
    "ConfigError",
    "CostGuardError",
    "DomainError",
    "NumericError",
    "StroboError",
    "UsageError",
    "__version__",
    "averaged_fields",
    "beta",
    "default_parameters",
    "diagonal_eval",
    "problem_names",
    "reconstruct",
    "reference",
    "resolve",
    "run",
    "run_json",
    "sample_points",
]
