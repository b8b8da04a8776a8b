"""Python front end to the zdtl library."""
import json

from ._core import (
    ConfigError,
    Error,
    RotationAction,
    boundary_ratio,
    check_rank_domination,
    commands,
    find_N0,
    marker_constants,
    ocap_estimate,
    run,
    steiner_outer_volume_box,
)


def run_json(command, **settings):
    """Run a command with keyword settings and parse its JSON report."""
    code, text = run(command, {k: _flat(v) for k, v in settings.items()})
    return code, json.loads(text)


def _flat(v):
    if isinstance(v, (list, tuple)):
        return ",".join(str(x) for x in v)
    return str(v)


__all__ = [
    "ConfigError", "Error", "RotationAction", "boundary_ratio", "check_rank_domination",
    "commands", "find_N0", "marker_constants", "ocap_estimate", "run", "run_json",
    "steiner_outer_volume_box",
]
