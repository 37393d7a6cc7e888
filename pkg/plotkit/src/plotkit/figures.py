"""Figure rendering for the simulator's CSV logs.

Four figure kinds, one per experiment: the braking triptych (distance,
velocity, brake command in aligned panels), the outer-gain sweep overlay,
the lateral step response, and the detection-range scatter. Rendering is
headless (Agg) and read-only with respect to its inputs.
"""

from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)
import numpy as np  # noqa: E402

from .csvio import SchemaError, read_columns  # noqa: E402

KINDS = ("braking-triptych", "kp-sweep", "lateral", "detection")

_REQUIRED = {
    "braking-triptych": ("t", "ped_true", "ped_meas", "v", "brake_cmd"),
    "kp-sweep": ("t", "x"),
    "lateral": ("t", "y", "delta_f"),
    "detection": ("t", "true_range", "meas"),
}


@dataclass
class FigureSpec:
    kind: str  # one of KINDS
    inputs: Sequence[Path]  # one CSV, or several for kp-sweep overlays
    output: Path  # image file; format from the suffix
    title: Optional[str] = None
    xlabel: Optional[str] = None  # overrides the kind's default label
    ylabel: Optional[str] = None
    xlim: Optional[tuple[float, float]] = None
    ylim: Optional[tuple[float, float]] = None
    dpi: int = 120

    def __post_init__(self):
        if self.kind not in KINDS:
            raise SchemaError(f"unknown figure kind {self.kind!r}, expected one of {KINDS}")
        if not self.inputs:
            raise SchemaError("at least one input CSV is required")
        self.inputs = [Path(p) for p in self.inputs]
        self.output = Path(self.output)


@dataclass
class RenderResult:
    """What was drawn, for callers that want to cross-check the figure."""

    output: Path
    width_px: int
    height_px: int
    series_count: int
    # last plotted value per named series (empty series map to nan)
    final_values: dict = field(default_factory=dict)


def render(spec: FigureSpec) -> RenderResult:
    renderer = {
        "braking-triptych": _render_triptych,
        "kp-sweep": _render_kp_sweep,
        "lateral": _render_lateral,
        "detection": _render_detection,
    }[spec.kind]
    fig, series_count, finals = renderer(spec)
    if spec.title:
        fig.suptitle(spec.title)
    fig.savefig(spec.output, dpi=spec.dpi)
    width, height = fig.canvas.get_width_height()
    plt.close(fig)
    return RenderResult(
        output=spec.output,
        width_px=int(width * spec.dpi / fig.get_dpi()),
        height_px=int(height * spec.dpi / fig.get_dpi()),
        series_count=series_count,
        final_values=finals,
    )


def _last(values: np.ndarray) -> float:
    return float(values[-1]) if len(values) else float("nan")


def _apply_limits(ax, spec):
    if spec.xlim is not None:
        ax.set_xlim(*spec.xlim)
    if spec.ylim is not None:
        ax.set_ylim(*spec.ylim)
    if spec.xlabel is not None:
        ax.set_xlabel(spec.xlabel)
    if spec.ylabel is not None:
        ax.set_ylabel(spec.ylabel)


def _render_triptych(spec):
    if len(spec.inputs) != 1:
        raise SchemaError("braking-triptych takes exactly one trajectory CSV")
    cols = read_columns(spec.inputs[0], _REQUIRED["braking-triptych"])
    t = cols["t"]

    fig, axes = plt.subplots(3, 1, sharex=True, figsize=(7, 8))
    ax_d, ax_v, ax_b = axes
    ax_d.plot(t, cols["ped_true"], label="true distance")
    measured = cols["ped_meas"]
    if np.isfinite(measured).any():
        ax_d.plot(t, measured, ".", markersize=2, alpha=0.6, label="measured")
    ax_d.set_ylabel("pedestrian distance (m)")
    ax_d.legend(loc="upper right")
    ax_d.grid(True, alpha=0.3)

    ax_v.plot(t, cols["v"])
    ax_v.set_ylabel("speed (m/s)")
    ax_v.grid(True, alpha=0.3)

    ax_b.plot(t, cols["brake_cmd"])
    ax_b.set_ylabel("brake command")
    ax_b.set_xlabel("time (s)")
    ax_b.set_ylim(-0.05, 1.05)
    ax_b.grid(True, alpha=0.3)

    _apply_limits(ax_d, spec)
    finals = {
        "distance": _last(cols["ped_true"]),
        "speed": _last(cols["v"]),
        "brake_cmd": _last(cols["brake_cmd"]),
    }
    return fig, 3 + int(np.isfinite(measured).any()), finals


def _render_kp_sweep(spec):
    fig, ax = plt.subplots(figsize=(7, 5))
    finals = {}
    for path in spec.inputs:
        cols = read_columns(path, _REQUIRED["kp-sweep"])
        label = path.stem
        ax.plot(cols["t"], cols["x"], label=label)
        finals[label] = _last(cols["x"])
    ax.set_xlabel("time (s)")
    ax.set_ylabel("position (m)")
    ax.legend()
    ax.grid(True, alpha=0.3)
    _apply_limits(ax, spec)
    return fig, len(spec.inputs), finals


def _render_lateral(spec):
    if len(spec.inputs) != 1:
        raise SchemaError("lateral takes exactly one trajectory CSV")
    cols = read_columns(spec.inputs[0], _REQUIRED["lateral"])
    fig, (ax_y, ax_d) = plt.subplots(2, 1, sharex=True, figsize=(7, 6),
                                     height_ratios=[2, 1])
    ax_y.plot(cols["t"], cols["y"], label="lateral position")
    ax_y.set_ylabel("y (m)")
    ax_y.grid(True, alpha=0.3)
    ax_d.plot(cols["t"], cols["delta_f"])
    ax_d.set_ylabel("steering (rad)")
    ax_d.set_xlabel("time (s)")
    ax_d.grid(True, alpha=0.3)
    _apply_limits(ax_y, spec)
    return fig, 2, {"y": _last(cols["y"]), "delta_f": _last(cols["delta_f"])}


def _render_detection(spec):
    if len(spec.inputs) != 1:
        raise SchemaError("detection takes exactly one characterization CSV")
    cols = read_columns(spec.inputs[0], _REQUIRED["detection"])
    fig, ax = plt.subplots(figsize=(7, 5))
    ax.plot(cols["t"], cols["true_range"], drawstyle="steps-post", label="true range")
    meas = cols["meas"]
    if np.isfinite(meas).any():
        ax.plot(cols["t"], meas, ".", markersize=2, alpha=0.6, label="detection")
    ax.set_xlabel("time (s)")
    ax.set_ylabel("range (m)")
    ax.legend(loc="upper left")
    ax.grid(True, alpha=0.3)
    _apply_limits(ax, spec)
    finals = {"true_range": _last(cols["true_range"]), "meas": _last(meas)}
    return fig, 1 + int(np.isfinite(meas).any()), finals
