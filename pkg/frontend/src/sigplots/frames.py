"""Parsing of the simulator's CSV outputs.

Trajectory files are long format with columns (t, path_id, series, value);
exactly one ``ref`` series must be present.  Table files carry an ``M``
column followed by one column per scenario.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass


class FrameParseError(ValueError):
    """CSV does not conform to the expected schema."""


TRAJECTORY_COLUMNS = ("t", "path_id", "series", "value")


@dataclass
class TrajectoryFrame:
    """Long-format trajectory records grouped by path and series."""

    # {path_id: {series: (times, values)}}
    panels: dict[int, dict[str, tuple[list[float], list[float]]]]

    @property
    def path_ids(self) -> list[int]:
        return sorted(self.panels)

    def series_names(self) -> list[str]:
        names = {name for panel in self.panels.values() for name in panel}
        names.discard("ref")

        def key(name: str):
            # order sig_M2 < sig_M4 < ... < sig_M16 by the numeric suffix
            digits = "".join(ch for ch in name if ch.isdigit())
            return (name.rstrip("0123456789"), int(digits) if digits else -1)

        return ["ref"] + sorted(names, key=key)


def read_trajectories(path: str) -> TrajectoryFrame:
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise FrameParseError(f"{path}: empty file, expected header {TRAJECTORY_COLUMNS}")
        missing = [col for col in TRAJECTORY_COLUMNS if col not in header]
        if missing:
            raise FrameParseError(f"{path}: missing column(s) {', '.join(missing)}")
        idx = {col: header.index(col) for col in TRAJECTORY_COLUMNS}
        panels: dict[int, dict[str, tuple[list[float], list[float]]]] = {}
        for row_no, row in enumerate(reader, start=2):
            try:
                t = float(row[idx["t"]])
                pid = int(row[idx["path_id"]])
                series = row[idx["series"]]
                value = float(row[idx["value"]])
            except (ValueError, IndexError) as exc:
                raise FrameParseError(f"{path}:{row_no}: bad record {row!r}") from exc
            slot = panels.setdefault(pid, {}).setdefault(series, ([], []))
            slot[0].append(t)
            slot[1].append(value)
    if not panels:
        raise FrameParseError(f"{path}: no trajectory records")
    for pid, panel in panels.items():
        if "ref" not in panel:
            raise FrameParseError(f"{path}: path {pid} has no 'ref' series")
    return TrajectoryFrame(panels)


@dataclass
class TableFrame:
    """MSE table: one row per truncation level, one column per scenario."""

    scenarios: list[str]
    levels: list[str]
    cells: list[list[float]]


def read_table(path: str) -> TableFrame:
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise FrameParseError(f"{path}: empty file, expected an M column header")
        if not header or header[0] != "M":
            raise FrameParseError(f"{path}: first column must be 'M', got {header[:1]}")
        scenarios = header[1:]
        if not scenarios:
            raise FrameParseError(f"{path}: no scenario columns")
        levels, cells = [], []
        for row_no, row in enumerate(reader, start=2):
            if len(row) != len(header):
                raise FrameParseError(f"{path}:{row_no}: expected {len(header)} fields")
            levels.append(row[0])
            try:
                cells.append([float(v) for v in row[1:]])
            except ValueError as exc:
                raise FrameParseError(f"{path}:{row_no}: non-numeric cell") from exc
    if not levels:
        raise FrameParseError(f"{path}: no table rows")
    return TableFrame(scenarios, levels, cells)
