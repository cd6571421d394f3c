"""Render solver CSV artifacts into the two standard figures."""

from .figures import (
    ArtifactError,
    FigureSpec,
    SnapshotData,
    plot_comparison,
    plot_evolution,
    read_snapshot,
)

__version__ = "0.1.0"

__all__ = [
    "ArtifactError",
    "FigureSpec",
    "SnapshotData",
    "plot_comparison",
    "plot_evolution",
    "read_snapshot",
]
