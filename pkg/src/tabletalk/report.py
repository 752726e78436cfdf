"""Scenario-run reporting: delimited summary plus one top-down figure per run."""

from __future__ import annotations

import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
from matplotlib.patches import FancyArrow, Rectangle

from .perception import camera_xy
from .scenarios import ScenarioResult
from .scene import Scene

# Label/edge colors that stay readable on a white table.
_EDGE = "#333333"


def scene_figure(scene: Scene, result: ScenarioResult | None = None):
    """Top-down footprint drawing of a scene, with outcome highlights."""
    fig, ax = plt.subplots(figsize=(5.0, 5.0))
    lo, hi = scene.table_bounds.lo, scene.table_bounds.hi
    ax.add_patch(
        Rectangle(lo, hi[0] - lo[0], hi[1] - lo[1], facecolor="#f4e9d8", edgecolor=_EDGE, zorder=0)
    )

    session = result.session if result is not None else None
    target = None
    candidates: tuple[str, ...] = ()
    if session is not None:
        candidates = session.candidate_ids
        if session.state.value == "resolved" and candidates:
            target = candidates[0]

    for obj in scene.objects:
        x0, y0, x1, y1 = obj.footprint
        edge, width = _EDGE, 1.0
        if obj.id in candidates:
            edge, width = "#e6a817", 2.0
        if obj.id == target:
            edge, width = "#1a9641", 2.5
        ax.add_patch(
            Rectangle(
                (x0, y0),
                x1 - x0,
                y1 - y0,
                facecolor=obj.color.value,
                edgecolor=edge,
                linewidth=width,
                alpha=0.85,
                zorder=2,
            )
        )
        ax.annotate(
            f"{obj.id}\n{obj.category}",
            (obj.position[0], obj.position[1]),
            ha="center",
            va="center",
            fontsize=7,
            zorder=3,
        )

    if session is not None:
        cam = camera_xy(session.viewpoint, scene.table_bounds)
        cx, cy = scene.table_bounds.center
        ax.add_patch(
            FancyArrow(
                cam[0],
                cam[1],
                (cx - cam[0]) * 0.25,
                (cy - cam[1]) * 0.25,
                width=0.01,
                color="#2166ac",
                zorder=4,
            )
        )
        ax.annotate(
            f"camera {session.viewpoint.azimuth_deg:.0f}°",
            cam,
            textcoords="offset points",
            xytext=(0, -12),
            ha="center",
            fontsize=7,
            color="#2166ac",
        )

    title = scene.id
    if result is not None:
        title = f"{result.scenario.name}: {result.actual or result.error}"
    ax.set_title(title, fontsize=9)
    ax.set_aspect("equal")
    margin = 1.2
    ax.set_xlim(lo[0] - margin, hi[0] + margin)
    ax.set_ylim(lo[1] - margin, hi[1] + margin)
    ax.set_xlabel("x [m]")
    ax.set_ylabel("y [m]")
    fig.tight_layout()
    return fig


def write_report(results: list[ScenarioResult], scenes: dict[str, Scene], out_dir: str | Path) -> Path:
    """Write report.csv plus one PNG per scenario; returns the CSV path."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    csv_path = out / "report.csv"
    with csv_path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["name", "scene", "expected", "actual", "status", "detail"])
        for r in results:
            detail = r.error or ("transcript diff" if r.golden_diff else "")
            writer.writerow(
                [
                    r.scenario.name,
                    r.scenario.scene_id,
                    r.scenario.expected_outcome,
                    r.actual,
                    "pass" if r.passed else "fail",
                    detail,
                ]
            )

    for r in results:
        scene = scenes.get(r.scenario.scene_id)
        if scene is None:
            continue
        fig = scene_figure(scene, r)
        fig.savefig(out / f"{r.scenario.name}.png", dpi=110)
        plt.close(fig)
    return csv_path
