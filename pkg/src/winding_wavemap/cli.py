"""Command-line entry point.

Subcommands:
    simulate        integrate one run configuration, write a run directory
    analyze         recompute diagnostics from a run directory, cross-check
    geometry-check  run the manifold invariant suites
    hm-check        harmonic-map reference quantities and defect samples
    goat-tracks     planar gradient/Hamiltonian sandbox
    sweep           fan out a parameter grid of runs, aggregate winding reports

Exit codes: 0 all checks pass, 1 check failure (JSON report on stdout),
2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import csv
import itertools
import json
import os
import sys
from pathlib import Path

from .errors import ConfigError

THREADS_ENV = "WINDING_WAVEMAP_THREADS"


def _load_json(path: str | None) -> dict:
    if path is None:
        return {}
    with open(path) as fh:
        return json.load(fh)


def cmd_simulate(args) -> int:
    import time
    import warnings

    from . import solver, runio

    cfg = solver.RunConfig.from_dict(_load_json(args.config))
    t_start = time.time()
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", solver.EnergyConditionWarning)
        state0 = solver.init_data(cfg)
        ok, e0, thr = solver.energy_condition(state0, cfg.manifold)
        result = solver.run(cfg)
    for msg in dict.fromkeys(str(w.message) for w in caught):
        print(f"warning: {msg}", file=sys.stderr)
    meta = runio.save_run(args.out, result, {
        "holds": bool(ok), "energy": e0, "threshold": thr,
    }, wall_time_start=t_start)
    print(json.dumps({"status": result.status, "out": str(args.out),
                      "records": len(result.records),
                      "config_hash": meta["config_hash"]}, indent=2))
    return 0


def cmd_analyze(args) -> int:
    from . import runio

    out = runio.recompute_and_check(args.run, tol=args.tol)
    print(json.dumps(out, indent=2, sort_keys=True))
    return 0 if out["consistent"] else 1


def cmd_geometry_check(args) -> int:
    from . import geometry

    cfg = geometry.ManifoldConfig.from_dict(_load_json(args.config).get("manifold",
                                                                        _load_json(args.config)))
    results = geometry.run_geometry_checks(cfg, fast=args.fast)
    report = [r.to_dict() for r in results]
    print(json.dumps(report, indent=2))
    return 0 if all(r.passed for r in results) else 1


def cmd_hm_check(args) -> int:
    from . import bubble, geometry

    cfg = geometry.ManifoldConfig.from_dict(_load_json(args.config).get("manifold",
                                                                        _load_json(args.config)))
    report = bubble.hm_check_report(cfg)
    print(json.dumps(report, indent=2, sort_keys=True))
    ok = (abs(report["ground_state_energy"] - report["ground_state_closed_form"]) < 1e-6
          and report["profile_residual_max"] < 1e-12)
    return 0 if ok else 1


def cmd_goat_tracks(args) -> int:
    from . import sandbox

    if args.mode == "gradient":
        tr = sandbox.gradient_flow(args.x0, args.t_end)
    else:
        tr = sandbox.hamiltonian_flow(args.x0, args.v0, args.t_end, dt=args.dt)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    with open(out_dir / "trajectory.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "r", "theta_lifted", "energy"])
        for row in zip(tr.t, tr.r, tr.theta_lifted, tr.energy):
            w.writerow([repr(float(v)) for v in row])
    summary = dict(tr.summary)
    summary["mode"] = tr.mode
    with open(out_dir / "summary.json", "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
    print(json.dumps(summary, indent=2, sort_keys=True))
    return 0


def _expand_grid(sweep_cfg: dict):
    base = sweep_cfg.get("base", {})
    grid = sweep_cfg.get("grid", {})
    keys = sorted(grid.keys())
    for combo in itertools.product(*(grid[k] for k in keys)):
        cfg = json.loads(json.dumps(base))
        label = []
        for key, val in zip(keys, combo):
            node = cfg
            parts = key.split(".")
            for part in parts[:-1]:
                node = node.setdefault(part, {})
            node[parts[-1]] = val
            label.append(f"{parts[-1]}={val:g}" if isinstance(val, float) else f"{parts[-1]}={val}")
        yield "_".join(label).replace("/", "-"), cfg


def _run_one_sweep(item) -> dict:
    name, cfg_dict, out_root = item
    from . import runio, solver

    cfg = solver.RunConfig.from_dict(cfg_dict)
    result = solver.run(cfg)
    run_dir = Path(out_root) / name
    runio.save_run(run_dir, result)
    check = runio.recompute_and_check(run_dir)
    return {"name": name, "status": result.status,
            "winding": check["winding_report"]}


def cmd_sweep(args) -> int:
    sweep_cfg = _load_json(args.config)
    items = [(name, cfg, args.out) for name, cfg in _expand_grid(sweep_cfg)]
    if not items:
        print("empty sweep grid", file=sys.stderr)
        return 2
    max_workers = int(os.environ.get(THREADS_ENV, "0")) or min(len(items), os.cpu_count() or 1)
    results = []
    with concurrent.futures.ProcessPoolExecutor(max_workers=max_workers) as pool:
        for res in pool.map(_run_one_sweep, items):
            results.append(res)
    results.sort(key=lambda d: d["name"])
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "sweep_summary.json", "w") as fh:
        json.dump(results, fh, indent=2, sort_keys=True)
    print(json.dumps(results, indent=2, sort_keys=True))
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="winding-wavemap",
                                description="numerical laboratory for winding "
                                            "energy concentration of reduced wave maps")
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("simulate", help="integrate one run configuration")
    sp.add_argument("--config", help="RunConfig JSON file (defaults applied per field)")
    sp.add_argument("--out", required=True, help="output run directory")
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("analyze", help="recompute diagnostics from a run directory")
    sp.add_argument("--run", required=True)
    sp.add_argument("--tol", type=float, default=1e-9)
    sp.set_defaults(func=cmd_analyze)

    sp = sub.add_parser("geometry-check", help="run the manifold invariant suites")
    sp.add_argument("--config", help="ManifoldConfig JSON file")
    sp.add_argument("--fast", action="store_true", help="smaller quasi-random samples")
    sp.set_defaults(func=cmd_geometry_check)

    sp = sub.add_parser("hm-check", help="harmonic-map reference quantities")
    sp.add_argument("--config", help="ManifoldConfig JSON file")
    sp.set_defaults(func=cmd_hm_check)

    sp = sub.add_parser("goat-tracks", help="planar flow sandbox")
    sp.add_argument("--mode", choices=["gradient", "hamiltonian"], required=True)
    sp.add_argument("--x0", type=float, nargs=2, default=[1.2, 0.0])
    sp.add_argument("--v0", type=float, nargs=2, default=[0.0, 0.05])
    sp.add_argument("--t-end", type=float, default=1e4)
    sp.add_argument("--dt", type=float, default=1e-3, help="hamiltonian step size")
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_goat_tracks)

    sp = sub.add_parser("sweep", help="fan out a parameter grid of simulations")
    sp.add_argument("--config", required=True, help="sweep JSON: {base: RunConfig, grid: {dotted.key: [values]}}")
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_sweep)
    return p


def dispatch(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2
    try:
        return args.func(args)
    except ConfigError as exc:
        print(json.dumps({"error": "config", "message": str(exc)}), file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(json.dumps({"error": "missing-file", "message": str(exc)}), file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(dispatch())


if __name__ == "__main__":
    main()
