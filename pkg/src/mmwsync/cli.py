"""Command line: run misdetection experiments, manage threshold calibration,
reproduce the canonical figure bundles, and run the fast invariant suite.

Exit codes: 0 success, 2 configuration error, 3 calibration failure,
4 runtime failure.  The calibration cache directory honors SIM_CALIB_DIR.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .calibration import CalibrationError, fa_budget
from .config import (CONFIG_DEFAULTS, calibration_settings, load_config, scenarios_from,
                     scenario_from)
from .harness import (manifest_entry, rate_target_snr, run_curve, scenario_threshold,
                      write_curve_csv, write_manifest)
from .pss import ConfigError

#: per-series SNR grids (dB) bracketing each curve's fall-off at defaults
FIGURE_BUNDLES: dict[int, list[tuple[dict, list[int]]]] = {
    3: [
        ({"tx_mode": "omni", "frontend": "analog"}, list(range(-18, -3, 2))),
        ({"tx_mode": "omni", "frontend": "digital"}, list(range(-30, -17, 2))),
        ({"tx_mode": "omni", "frontend": "digital_q", "bits": 3}, list(range(-30, -17, 2))),
        ({"tx_mode": "random", "frontend": "analog"}, list(range(-8, 11, 2))),
        ({"tx_mode": "random", "frontend": "digital"}, list(range(-24, -7, 2))),
    ],
    4: [
        ({"frontend": "analog", "n_slot": 25}, list(range(-12, 1, 2))),
        ({"frontend": "analog", "n_slot": 50}, list(range(-16, -3, 2))),
        ({"frontend": "analog", "n_slot": 100}, list(range(-20, -7, 2))),
        ({"frontend": "analog", "n_slot": 200}, list(range(-24, -11, 2))),
    ],
    5: [
        ({"frontend": "analog", "channel": "single"}, list(range(-18, -3, 2))),
        ({"frontend": "analog", "channel": "multipath"}, list(range(-20, -5, 2))),
        ({"frontend": "digital", "channel": "single"}, list(range(-30, -17, 2))),
        ({"frontend": "digital", "channel": "multipath"}, list(range(-30, -15, 2))),
    ],
    6: [
        ({"frontend": "analog", "channel": "multipath"}, list(range(-20, -5, 2))),
        ({"frontend": "hybrid", "n_streams": 4, "channel": "multipath"}, list(range(-24, -9, 2))),
        ({"frontend": "digital", "channel": "multipath"}, list(range(-30, -15, 2))),
    ],
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="mmwsync",
                                description="directional cell-search simulation")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", type=Path, default=None, help="JSON config file")
        sp.add_argument("--out", type=Path, default=Path("out"), help="output directory")
        sp.add_argument("--seed", type=int, default=None, help="experiment seed")
        sp.add_argument("--trials", type=int, default=None, help="trials per SNR point")
        sp.add_argument("--threads", type=int, default=None, help="worker processes")
        sp.add_argument("--override", action="append", default=[], metavar="K=V",
                        help="config override, repeatable (e.g. frontend.bits=2)")

    common(sub.add_parser("run", help="misdetection curves for the configured scenarios"))
    common(sub.add_parser("calibrate", help="compute and cache detection thresholds"))
    fig = sub.add_parser("figures", help="run a canonical scenario bundle")
    common(fig)
    fig.add_argument("--which", type=int, choices=sorted(FIGURE_BUNDLES), required=True)
    val = sub.add_parser("validate", help="fast invariant suite")
    common(val)
    val.add_argument("--inject-fault", action="store_true", help=argparse.SUPPRESS)
    return p


def _params(args) -> dict:
    params = load_config(args.config, args.override)
    if args.seed is not None:
        params["seed"] = args.seed
    if args.trials is not None:
        params["trials"] = args.trials
    if args.threads is not None:
        params["threads"] = args.threads
    return params


def _config_echo(params: dict) -> dict:
    return {k: v for k, v in params.items() if not k.startswith("_")}


def cmd_run(args) -> int:
    params = _params(args)
    calib = calibration_settings(params)
    out = Path(args.out)
    entries, files = [], []
    for scen in scenarios_from(params):
        model = scenario_threshold(scen, fa_budget(scen.cfg), calib)
        points = run_curve(scen, params["snr_db"], params["trials"], params["seed"],
                           calib=calib, workers=params["threads"])
        csv_path = out / f"{scen.scenario_id}.csv"
        write_curve_csv(csv_path, scen.scenario_id, points)
        files.append(str(csv_path))
        entries.append(manifest_entry(scen, model, params["trials"], params["seed"],
                                      params["snr_db"], csv_path.name))
        print(f"wrote {csv_path}")
    write_manifest(out / "manifest.json", {
        "command": "run", "config": _config_echo(params),
        "overrides": params.get("_overrides", []),
        "seed": params["seed"], "trials": params["trials"],
        "threads": params["threads"], "curves": entries,
    })
    print(f"wrote {out / 'manifest.json'}")
    return 0


def cmd_calibrate(args) -> int:
    params = _params(args)
    calib = calibration_settings(params)
    for scen in scenarios_from(params):
        model = scenario_threshold(scen, fa_budget(scen.cfg), calib)
        print(f"{scen.scenario_id}: t_star={model.t_star:.6g} "
              f"(p_fa={model.p_fa:.4g}, n_trials={model.n_trials})")
    return 0


def cmd_figures(args) -> int:
    params = _params(args)
    calib = calibration_settings(params)
    out = Path(args.out)
    fig = args.which
    explicit_grid = params["snr_db"] if "snr_db" in params.get("_explicit", ()) else None
    marker_db = 10 * np.log10(rate_target_snr(params["rate_target_bps"], params["w_tot_hz"],
                                              params["beta_overhead"]))
    series, entries = [], []
    for overrides, default_grid in FIGURE_BUNDLES[fig]:
        merged = {**params, **overrides}
        scen = scenario_from(merged)
        grid = explicit_grid or default_grid
        model = scenario_threshold(scen, fa_budget(scen.cfg), calib)
        points = run_curve(scen, grid, params["trials"], params["seed"],
                           calib=calib, workers=params["threads"])
        series.append((scen.scenario_id, {p.snr_data_db: p for p in points}))
        entries.append(manifest_entry(scen, model, params["trials"], params["seed"],
                                      grid, f"fig{fig}.csv"))
        print(f"fig{fig}: {scen.scenario_id} done ({len(points)} points)")

    csv_path = out / f"fig{fig}.csv"
    rows = []
    for sid, pts in series:
        rows.extend((sid, p) for p in pts.values())
    write_curve_csv_marks(csv_path, rows)

    dat_path = out / f"fig{fig}_plot.dat"
    all_snrs = sorted({s for _, pts in series for s in pts})
    with open(dat_path, "w") as f:
        f.write("# snr_data_db " + " ".join(sid for sid, _ in series)
                + " rate_target_db\n")
        for s in all_snrs:
            cells = [f"{s:g}"]
            for _, pts in series:
                cells.append(f"{pts[s].p_md:.6g}" if s in pts else "nan")
            cells.append(f"{marker_db:.4f}")
            f.write(" ".join(cells) + "\n")
    write_manifest(out / f"fig{fig}_manifest.json", {
        "command": f"figures --which {fig}", "config": _config_echo(params),
        "overrides": params.get("_overrides", []),
        "seed": params["seed"], "trials": params["trials"],
        "rate_target_data_snr_db": marker_db, "curves": entries,
    })
    print(f"wrote {csv_path}, {dat_path}")
    return 0


def write_curve_csv_marks(path: Path, rows) -> None:
    import csv as _csv
    from .harness import CSV_HEADER
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as f:
        w = _csv.writer(f)
        w.writerow(CSV_HEADER)
        for sid, p in rows:
            lo, hi = p.ci95
            w.writerow([sid, f"{p.snr_data_db:.6g}", f"{p.snr_pss_db:.10g}",
                        p.n_trials, p.n_missed, f"{p.p_md:.10g}",
                        f"{lo:.10g}", f"{hi:.10g}"])


def cmd_validate(args) -> int:
    from .selfcheck import run_selfchecks
    params = _params(args)
    n = params["trials"] if args.trials is not None else 200
    checks = run_selfchecks(n_trials=n, inject_fault=args.inject_fault)
    width = max(len(c.name) for c in checks)
    failed = 0
    for c in checks:
        status = "pass" if c.passed else "FAIL"
        failed += not c.passed
        print(f"{c.name:<{width}}  {status}  {c.detail}")
    print(f"{len(checks) - failed}/{len(checks)} checks passed")
    return 0 if failed == 0 else 1


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handler = {"run": cmd_run, "calibrate": cmd_calibrate,
               "figures": cmd_figures, "validate": cmd_validate}[args.command]
    try:
        return handler(args)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    except CalibrationError as e:
        print(f"calibration error: {e}", file=sys.stderr)
        return 3
    except Exception as e:  # noqa: BLE001 - CLI boundary
        print(f"error: {e}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
