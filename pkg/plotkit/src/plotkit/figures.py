"""Figure rendering from winding-wavemap run directories.

Five figure kinds, all driven purely by the documented CSV/JSON formats:

    winding   lifted coordinate vs time, plus the wrapped coordinate as
              points on the unit interval, annotated with the covering
              fraction from winding_report.json
    energy    total / cone / annulus energies and the boundary flux
    lambda    concentration scale over time, with the 4*dr resolution floor
    profile   sphere-angle snapshot against the reference bubble profile
    spiral    planar trajectory of a goat-tracks run

Rendering never mutates the run directory, and embedded timestamps are
suppressed so re-rendering is byte-identical.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

FIGURE_KINDS = ("winding", "energy", "lambda", "profile", "spiral")

SERIES_COLUMNS = ("t", "energy", "lambda", "Y_at_lambda", "z_wrap", "degree",
                  "cone_energy_A", "annulus_energy", "flux_A", "kinetic_cone_avg")
SNAPSHOT_COLUMNS = ("r", "Y", "Y_t", "alpha", "alpha_t")
TRAJECTORY_COLUMNS = ("t", "r", "theta_lifted", "energy")


class MissingColumnError(ValueError):
    def __init__(self, filename: str, column: str):
        self.column = column
        super().__init__(f"{filename}: missing required column '{column}'")


@dataclass(frozen=True)
class FigureSpec:
    run_dir: Path
    kind: str
    out_path: Path
    log_y: bool = False
    snapshot_time: float | None = None   # profile: which snapshot (default latest)
    dpi: int = 120
    options: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in FIGURE_KINDS:
            raise ValueError(f"unknown figure kind '{self.kind}', expected one of {FIGURE_KINDS}")


@dataclass(frozen=True)
class RenderResult:
    out_path: Path
    annotations: dict


def _read_csv(path: Path, required: tuple[str, ...]) -> dict[str, np.ndarray]:
    if not path.exists():
        raise FileNotFoundError(path)
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise MissingColumnError(path.name, required[0])
        for col in required:
            if col not in header:
                raise MissingColumnError(path.name, col)
        rows = [[float(v) for v in row] for row in reader if row]
    data = np.asarray(rows, dtype=float)
    if data.size == 0:
        data = data.reshape(0, len(header))
    return {name: data[:, i] for i, name in enumerate(header)}


def _save(fig, spec: FigureSpec) -> None:
    suffix = spec.out_path.suffix.lower()
    metadata = None
    if suffix == ".svg":
        metadata = {"Date": None}
    elif suffix == ".pdf":
        metadata = {"CreationDate": None}
    spec.out_path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(spec.out_path, dpi=spec.dpi, metadata=metadata)
    plt.close(fig)


def _load_series(spec: FigureSpec) -> dict[str, np.ndarray]:
    return _read_csv(spec.run_dir / "series.csv", SERIES_COLUMNS)


def _grid_dr(spec: FigureSpec) -> float | None:
    meta_path = spec.run_dir / "run_meta.json"
    if not meta_path.exists():
        return None
    meta = json.loads(meta_path.read_text())
    try:
        grid = meta["config"]["grid"]
        return float(grid["R"]) / int(grid["J"])
    except (KeyError, TypeError, ZeroDivisionError):
        return None


def _cover_fraction(spec: FigureSpec, z: np.ndarray) -> float:
    """Covering fraction: from winding_report.json when present (the value the
    annotation must reproduce), otherwise the same binned computation."""
    report = spec.run_dir / "winding_report.json"
    if report.exists():
        return float(json.loads(report.read_text())["z_cover_fraction"])
    bins = 100
    meta_path = spec.run_dir / "run_meta.json"
    if meta_path.exists():
        meta = json.loads(meta_path.read_text())
        bins = int(meta.get("config", {}).get("diagnostics", {}).get("winding_bins", 100))
    zf = z[np.isfinite(z)]
    occupied = np.zeros(bins, dtype=bool)
    occupied[np.floor(zf * bins).astype(int) % bins] = True
    return float(occupied.sum()) / bins


def _render_winding(spec: FigureSpec) -> RenderResult:
    s = _load_series(spec)
    cover = _cover_fraction(spec, s["z_wrap"])
    fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(7, 6), sharex=True,
                                   height_ratios=[2, 1])
    ax1.plot(s["t"], s["Y_at_lambda"], color="tab:blue", lw=1.5)
    ax1.set_ylabel("lifted coordinate at the concentration scale")
    ax1.grid(alpha=0.3)
    ax2.plot(s["t"], s["z_wrap"], ".", ms=3, color="tab:red")
    ax2.set_ylim(-0.02, 1.02)
    ax2.set_ylabel("wrapped coordinate")
    ax2.set_xlabel("t")
    ax2.grid(alpha=0.3)
    annotation = f"covering fraction of [0,1): {cover:.9f}"
    ax2.annotate(annotation, xy=(0.02, 0.9), xycoords="axes fraction", fontsize=9)
    fig.suptitle("winding trace: universal-cover lift and torus wrap")
    _save(fig, spec)
    return RenderResult(spec.out_path, {"z_cover_fraction": cover, "text": annotation})


def _render_energy(spec: FigureSpec) -> RenderResult:
    s = _load_series(spec)
    fig, ax = plt.subplots(figsize=(7, 4.5))
    ax.plot(s["t"], s["energy"], label="total energy", lw=1.8)
    ax.plot(s["t"], s["cone_energy_A"], label="cone energy (r < t-A)", lw=1.2)
    ax.plot(s["t"], s["annulus_energy"], label="annulus energy", lw=1.2)
    ax.set_xlabel("t")
    ax.set_ylabel("energy")
    if spec.log_y:
        ax.set_yscale("log")
    ax2 = ax.twinx()
    ax2.plot(s["t"], s["flux_A"], color="tab:gray", ls="--", lw=1.0, label="boundary flux")
    ax2.set_ylabel("flux")
    lines, labels = ax.get_legend_handles_labels()
    l2, lab2 = ax2.get_legend_handles_labels()
    ax.legend(lines + l2, labels + lab2, fontsize=8, loc="center right")
    ax.grid(alpha=0.3)
    fig.suptitle("energy partition")
    fig.tight_layout()
    _save(fig, spec)
    e = s["energy"]
    return RenderResult(spec.out_path,
                        {"energy_rel_spread": float((e.max() - e.min()) / max(e.max(), 1e-300))})


def _render_lambda(spec: FigureSpec) -> RenderResult:
    s = _load_series(spec)
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.plot(s["t"], s["lambda"], lw=1.6, color="tab:purple")
    dr = _grid_dr(spec)
    if dr is not None:
        ax.axhline(4.0 * dr, color="tab:gray", ls=":", lw=1.0)
        ax.annotate("4 dr resolution floor", xy=(0.02, 4.0 * dr),
                    xycoords=("axes fraction", "data"), fontsize=8, va="bottom")
    ax.set_xlabel("t")
    ax.set_ylabel("concentration scale")
    if spec.log_y:
        ax.set_yscale("log")
    ax.grid(alpha=0.3)
    fig.suptitle("concentration scale over time")
    fig.tight_layout()
    _save(fig, spec)
    lam = s["lambda"][np.isfinite(s["lambda"])]
    shrink = float(lam[0] / lam.min()) if lam.size else math.nan
    return RenderResult(spec.out_path, {"lambda_shrink": shrink})


def _snapshots(spec: FigureSpec) -> list[tuple[float, Path]]:
    out = []
    for p in sorted(spec.run_dir.glob("snap_*.csv")):
        try:
            out.append((float(p.stem[len("snap_"):]), p))
        except ValueError:
            continue
    return sorted(out)


def _render_profile(spec: FigureSpec) -> RenderResult:
    snaps = _snapshots(spec)
    if not snaps:
        raise FileNotFoundError(f"no snap_*.csv files in {spec.run_dir}")
    if spec.snapshot_time is None:
        t_snap, path = snaps[-1]
    else:
        t_snap, path = min(snaps, key=lambda item: abs(item[0] - spec.snapshot_time))
    d = _read_csv(path, SNAPSHOT_COLUMNS)
    r, alpha = d["r"], d["alpha"]
    # scale estimate from the data alone: radius where alpha crosses pi/2
    above = np.nonzero(alpha >= math.pi / 2.0)[0]
    lam_hat = float(np.interp(math.pi / 2.0, alpha[:above[0] + 1], r[:above[0] + 1])) \
        if above.size else math.nan
    fig, ax = plt.subplots(figsize=(7, 4.5))
    ax.plot(r, alpha, lw=1.6, label=f"snapshot t = {t_snap:g}")
    if math.isfinite(lam_hat):
        ax.plot(r, 2.0 * np.arctan(r / lam_hat), ls="--", lw=1.2,
                label=f"reference profile, scale {lam_hat:.4g}")
    ax.set_xscale("log")
    ax.set_xlabel("r")
    ax.set_ylabel("sphere angle")
    ax.grid(alpha=0.3, which="both")
    ax.legend(fontsize=9)
    fig.suptitle("bubble profile overlay")
    fig.tight_layout()
    _save(fig, spec)
    misfit = math.nan
    if math.isfinite(lam_hat):
        misfit = float(np.max(np.abs(alpha - 2.0 * np.arctan(r / lam_hat))))
    return RenderResult(spec.out_path, {"snapshot_t": t_snap, "lambda_hat": lam_hat,
                                        "profile_max_misfit": misfit})


def _render_spiral(spec: FigureSpec) -> RenderResult:
    d = _read_csv(spec.run_dir / "trajectory.csv", TRAJECTORY_COLUMNS)
    r, th = d["r"], d["theta_lifted"]
    x, y = r * np.cos(th), r * np.sin(th)
    fig, ax = plt.subplots(figsize=(5.5, 5.5))
    circle = np.linspace(0, 2 * math.pi, 256)
    ax.plot(np.cos(circle), np.sin(circle), color="tab:gray", ls=":", lw=1.0)
    ax.plot(x, y, lw=1.2, color="tab:green")
    ax.plot(x[:1], y[:1], "o", color="tab:green", ms=5)
    ax.plot(x[-1:], y[-1:], "s", color="tab:red", ms=5)
    ax.set_aspect("equal")
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    ax.grid(alpha=0.3)
    fig.suptitle("planar trajectory against the minimum circle")
    fig.tight_layout()
    _save(fig, spec)
    return RenderResult(spec.out_path, {"r_final": float(r[-1]),
                                        "theta_span": float(th.max() - th.min())})


_RENDERERS = {
    "winding": _render_winding,
    "energy": _render_energy,
    "lambda": _render_lambda,
    "profile": _render_profile,
    "spiral": _render_spiral,
}


def render(spec: FigureSpec) -> RenderResult:
    """Render one figure kind from a run directory; returns the output path
    and the figure's machine-readable annotations."""
    return _RENDERERS[spec.kind](spec)
