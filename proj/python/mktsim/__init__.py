"""Python access to the mktsim simulator."""

import json

from ._mktsim import (
    ConfigError,
    OrderBook,
    event_study,
    format_time,
    parse_duration,
    sha256_hex,
    verify_run,
)
from ._mktsim import run as _run


def run(config, *, seed=None, start=None, stop=None, log_dir=None, set=()):
    """Run one experiment. The manifest comes back decoded under "manifest"."""
    out = _run(str(config), seed, start, stop, None if log_dir is None else str(log_dir), list(set))
    out["manifest"] = json.loads(out.pop("manifest_json"))
    return out


__all__ = [
    "ConfigError",
    "OrderBook",
    "event_study",
    "format_time",
    "parse_duration",
    "run",
    "sha256_hex",
    "verify_run",
]
