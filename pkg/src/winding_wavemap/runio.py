"""Run-directory layout and serialization.

A run directory holds:
    run_meta.json       resolved configuration, manifest, energy-condition report
    series.csv          per-output-time diagnostics (documented column order)
    snap_<t>.csv        field snapshots r, Y, Y_t, alpha, alpha_t
    winding_report.json written by `analyze`

Floats are serialized with shortest round-trip repr, so identical
configurations produce byte-identical CSV output on one platform.
"""

from __future__ import annotations

import csv
import hashlib
import json
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__, diagnostics
from .diagnostics import CSV_COLUMNS, DiagnosticsRecord
from .solver import FieldState, RadialGrid, RunConfig, RunResult


def _fmt(x) -> str:
    return repr(float(x))


def config_hash(cfg_dict: dict) -> str:
    blob = json.dumps(cfg_dict, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def snapshot_filename(t: float) -> str:
    return f"snap_{t:.6f}.csv"


def write_snapshot(path: Path, state: FieldState) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["r", "Y", "Y_t", "alpha", "alpha_t"])
        for j in range(state.grid.J):
            w.writerow([_fmt(state.grid.nodes[j]), _fmt(state.Y[j]), _fmt(state.Y_t[j]),
                        _fmt(state.alpha[j]), _fmt(state.alpha_t[j])])


def read_snapshot(path: Path, grid: RadialGrid, t: float) -> FieldState:
    data = np.genfromtxt(path, delimiter=",", names=True)
    state = FieldState(
        t=t,
        Y=np.ascontiguousarray(data["Y"]),
        Y_t=np.ascontiguousarray(data["Y_t"]),
        alpha=np.ascontiguousarray(data["alpha"]),
        alpha_t=np.ascontiguousarray(data["alpha_t"]),
        grid=grid,
    )
    if len(state.Y) != grid.J:
        raise ValueError(f"snapshot {path} has {len(state.Y)} rows, grid expects {grid.J}")
    return state


def write_series(path: Path, records: list[DiagnosticsRecord]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(CSV_COLUMNS)
        for rec in records:
            row = rec.to_row()
            w.writerow([_fmt(v) if i != 5 else str(int(v)) for i, v in enumerate(row)])


def read_series(path: Path) -> list[dict]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != list(CSV_COLUMNS):
            raise ValueError(f"unexpected series header: {reader.fieldnames}")
        return [{k: float(v) for k, v in row.items()} for row in reader]


@dataclass
class RunPaths:
    root: Path

    @property
    def meta(self) -> Path:
        return self.root / "run_meta.json"

    @property
    def series(self) -> Path:
        return self.root / "series.csv"

    @property
    def winding_report(self) -> Path:
        return self.root / "winding_report.json"


def save_run(out_dir: str | Path, result: RunResult,
             energy_report: dict | None = None,
             wall_time_start: float | None = None) -> dict:
    """Write a completed run to disk and return the manifest."""
    paths = RunPaths(Path(out_dir))
    paths.root.mkdir(parents=True, exist_ok=True)
    started = wall_time_start if wall_time_start is not None else time.time()

    write_series(paths.series, result.records)
    snap_files = []
    for snap in result.snapshots:
        name = snapshot_filename(snap.t)
        write_snapshot(paths.root / name, snap)
        snap_files.append(name)

    cfg_dict = result.config.to_dict()
    meta = {
        "artifact_version": __version__,
        "subcommand": "simulate",
        "config": cfg_dict,
        "config_hash": config_hash(cfg_dict),
        "status": result.status,
        "blowup_time": result.blowup_time,
        "energy_condition": energy_report or {},
        "columns": {
            "series.csv": list(CSV_COLUMNS),
            "snapshots": ["r", "Y", "Y_t", "alpha", "alpha_t"],
            "notes": {
                "energy": "2 pi int (Y_r^2/2 + Y_t^2/2 + f(0,Y) e(alpha)) r dr; "
                          "gradient terms quadratured on staggered faces",
                "lambda": "concentration scale from the spherical energy band, NaN if none",
                "Y_at_lambda": "lifted torus coordinate at r = lambda (not reduced mod 1)",
                "z_wrap": "Y_at_lambda mod 1",
                "cone_energy_A": "energy inside r < t - A",
                "annulus_energy": "energy in lambda_frac*t < r < t - A",
                "flux_A": "2 pi (t-A) (e+m) at r = t-A; d/dt of cone_energy_A",
                "kinetic_cone_avg": "(1/t) int_A^t int_0^{s-A} |u_t|^2 r dr ds",
            },
        },
        "output_files": ["series.csv"] + snap_files,
        "wall_time_start": started,
        "wall_time_end": time.time(),
    }
    with open(paths.meta, "w") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
    return meta


def load_run(run_dir: str | Path):
    """Load config, series rows, and snapshots of a saved run."""
    paths = RunPaths(Path(run_dir))
    with open(paths.meta) as fh:
        meta = json.load(fh)
    cfg = RunConfig.from_dict(meta["config"])
    rows = read_series(paths.series)
    snapshots = []
    for name in meta["output_files"]:
        if name.startswith("snap_"):
            t = float(name[len("snap_"):-len(".csv")])
            snapshots.append(read_snapshot(paths.root / name, cfg.grid, t))
    snapshots.sort(key=lambda s: s.t)
    return meta, cfg, rows, snapshots


def recompute_and_check(run_dir: str | Path, tol: float = 1e-9) -> dict:
    """Recompute all diagnostics from snapshots and cross-check series.csv.

    Returns {"consistent": bool, "max_rel_mismatch": float, "rows_checked": n,
    "winding_report": {...}} and writes winding_report.json.
    """
    meta, cfg, rows, snapshots = load_run(run_dir)
    by_t = {round(row["t"], 9): row for row in rows}
    # the kinetic average is a quadrature over the sample history, so it can
    # be cross-checked only when every output time has a snapshot
    full_history = len(snapshots) == len(rows)
    kin_ts: list[float] = []
    kin_vals: list[float] = []
    worst = 0.0
    checked = 0
    for snap in snapshots:
        kin_ts.append(snap.t)
        kin_vals.append(diagnostics.kinetic_inner_integral(snap, cfg.diagnostics.A, cfg.manifold))
        rec = diagnostics.make_record(snap, cfg.manifold, cfg.diagnostics, kin_ts, kin_vals)
        row = by_t.get(round(snap.t, 9))
        if row is None:
            continue
        checked += 1
        for col, val in zip(CSV_COLUMNS, rec.to_row()):
            if col == "kinetic_cone_avg" and not full_history:
                continue
            ref = row[col]
            if np.isnan(ref) and np.isnan(val):
                continue
            rel = abs(val - ref) / max(1.0, abs(ref))
            worst = max(worst, rel)
    # winding over the full stored series (not only snapshot times)
    full_records = [_record_from_row(row) for row in rows]
    report = diagnostics.winding_series(full_records, bins=cfg.diagnostics.winding_bins)
    out = {
        "consistent": worst <= tol and checked > 0,
        "max_rel_mismatch": worst,
        "rows_checked": checked,
        "winding_report": report.to_dict(),
    }
    with open(RunPaths(Path(run_dir)).winding_report, "w") as fh:
        json.dump(report.to_dict(), fh, indent=2, sort_keys=True)
    return out


def _record_from_row(row: dict) -> DiagnosticsRecord:
    return DiagnosticsRecord(
        t=row["t"], energy=row["energy"], lam=row["lambda"],
        Y_at_lambda=row["Y_at_lambda"], z_wrap=row["z_wrap"],
        degree=int(row["degree"]), cone_energy_A=row["cone_energy_A"],
        annulus_energy=row["annulus_energy"], flux_A=row["flux_A"],
        kinetic_cone_avg=row["kinetic_cone_avg"], alpha_exterior_osc=float("nan"),
    )
