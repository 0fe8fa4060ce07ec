from .frames import FrameParseError, TableFrame, TrajectoryFrame, read_table, read_trajectories
from .render import format_cell, plot_trajectories, render_table, render_table_frame

__all__ = [
    "FrameParseError",
    "TableFrame",
    "TrajectoryFrame",
    "read_table",
    "read_trajectories",
    "format_cell",
    "plot_trajectories",
    "render_table",
    "render_table_frame",
]
