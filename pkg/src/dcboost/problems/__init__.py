"""Bundled DC problem instances."""

from dcboost.problems.example2d import Example2dProblem
from dcboost.problems.mssc import (
    ClusterData,
    MsscProblem,
    generate_blobs,
    load_points_csv,
)

__all__ = [
    "Example2dProblem",
    "ClusterData",
    "MsscProblem",
    "generate_blobs",
    "load_points_csv",
]
