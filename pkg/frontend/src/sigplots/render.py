"""Static figures and formatted tables in the style of the source plots:
reference trajectory in black, truncated representations in colors."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .frames import TableFrame, TrajectoryFrame, read_table, read_trajectories


def build_figure(frame: TrajectoryFrame):
    """One panel per path: 'ref' in black, each sig_M* series colored, legend."""
    path_ids = frame.path_ids
    fig, axes = plt.subplots(
        len(path_ids), 1, figsize=(8, 3.2 * len(path_ids)), squeeze=False, sharex=True
    )
    colors = plt.cm.viridis_r
    overlays = [name for name in frame.series_names() if name != "ref"]
    for ax, pid in zip(axes[:, 0], path_ids):
        panel = frame.panels[pid]
        times, values = panel["ref"]
        ax.plot(times, values, color="black", linewidth=1.4, label="ref")
        for rank, name in enumerate(overlays):
            if name not in panel:
                continue
            times, values = panel[name]
            shade = colors(0.15 + 0.7 * rank / max(1, len(overlays) - 1))
            ax.plot(times, values, color=shade, linewidth=1.0, label=name)
        ax.set_ylabel(f"path {pid}")
        ax.legend(loc="best", fontsize=8)
    axes[-1, 0].set_xlabel("t")
    fig.tight_layout()
    return fig


def plot_trajectories(csv_path: str, out_path: str) -> None:
    """Render the trajectory CSV to a static image file."""
    fig = build_figure(read_trajectories(csv_path))
    fig.savefig(out_path, dpi=150)
    plt.close(fig)


def format_cell(value: float) -> str:
    """Scientific notation with four significant digits, e.g. 1.819e-04."""
    return f"{value:.3e}"


def render_table(csv_path: str) -> str:
    """Markdown table: one row per truncation level, one column per scenario."""
    frame = read_table(csv_path)
    return render_table_frame(frame)


def render_table_frame(frame: TableFrame) -> str:
    header = [""] + list(frame.scenarios)
    rows = [
        [f"M={level}"] + [format_cell(v) for v in cells]
        for level, cells in zip(frame.levels, frame.cells)
    ]
    widths = [max(len(line[i]) for line in [header] + rows) for i in range(len(header))]
    def fmt(line):
        return "| " + " | ".join(cell.rjust(w) for cell, w in zip(line, widths)) + " |"
    rule = "|" + "|".join("-" * (w + 2) for w in widths) + "|"
    return "\n".join([fmt(header), rule] + [fmt(row) for row in rows])
