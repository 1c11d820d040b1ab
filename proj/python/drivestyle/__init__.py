"""Python bindings for the drivestyle library.

Trajectories are (n, 9) float arrays with columns ``TRAJECTORY_COLUMNS``.
"""

from ._core import (
    FEATURE_NAMES,
    TRAJECTORY_COLUMNS,
    FormatError,
    IoError,
    Scenario,
    ScenarioError,
    compare,
    features,
    learn,
    normal_quantile,
    read_trajectory,
    reproduce,
    run_demo,
    step,
    write_trajectory,
)

__all__ = [
    "FEATURE_NAMES",
    "TRAJECTORY_COLUMNS",
    "FormatError",
    "IoError",
    "Scenario",
    "ScenarioError",
    "compare",
    "features",
    "learn",
    "normal_quantile",
    "read_trajectory",
    "reproduce",
    "run_demo",
    "step",
    "write_trajectory",
]
