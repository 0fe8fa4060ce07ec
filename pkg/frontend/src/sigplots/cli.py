"""Console entry points: plot-trajectories <csv> <out.png>, render-table <csv>."""

from __future__ import annotations

import argparse
import sys

from .frames import FrameParseError
from .render import plot_trajectories, render_table


def plot_trajectories_main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="plot-trajectories")
    parser.add_argument("csv", help="trajectory CSV (t,path_id,series,value)")
    parser.add_argument("out", help="output image file (png/svg)")
    args = parser.parse_args(argv)
    try:
        plot_trajectories(args.csv, args.out)
    except FrameParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


def render_table_main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="render-table")
    parser.add_argument("csv", help="MSE table CSV (M column plus scenarios)")
    args = parser.parse_args(argv)
    try:
        print(render_table(args.csv))
    except FrameParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0
