"""A small misdetection-versus-SNR experiment.

Compares the analog and digital front-ends under omnidirectional
transmission at reduced trial counts (about a minute of compute), and marks
the data SNR needed for a 10 Mbps edge rate.  The full figure bundles live
behind `mmwsync figures --which 3|4|5|6`.
"""

from pathlib import Path

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from mmwsync import build_config, rate_target_snr
from mmwsync.arrays import ArrayGeometry
from mmwsync.frontend import FrontendSpec
from mmwsync.harness import CalibrationSettings, Scenario, run_curve

cfg = build_config()
bs, ue = ArrayGeometry(8, 8), ArrayGeometry(4, 4)
calib = CalibrationSettings(n_trials=20000, seed=1234,
                            directory=Path(__file__).with_name(".calib"))

curves = {}
for kind, grid in (("analog", range(-18, -5, 2)), ("digital", range(-30, -19, 2))):
    scen = Scenario(cfg=cfg, bs=bs, ue=ue, frontend=FrontendSpec(kind))
    pts = run_curve(scen, grid, n_trials=500, seed=11, calib=calib)
    curves[kind] = pts
    print(f"{kind}: " + "  ".join(f"{p.snr_data_db:+.0f}dB:{p.p_md:.3f}" for p in pts))

marker = 10 * np.log10(rate_target_snr(1e7, cfg.w_tot, 0.4))
fig, ax = plt.subplots(figsize=(6.5, 4))
for kind, pts in curves.items():
    x = [p.snr_data_db for p in pts]
    y = [max(p.p_md, 2e-4) for p in pts]
    lo = [max(p.ci95[0], 2e-4) for p in pts]
    hi = [max(p.ci95[1], 2e-4) for p in pts]
    ax.semilogy(x, y, "o-", label=kind)
    ax.fill_between(x, lo, hi, alpha=0.2)
ax.axvline(marker, color="tab:red", ls="--", label="10 Mbps rate target")
ax.set_xlabel("data SNR [dB]")
ax.set_ylabel("misdetection probability")
ax.set_ylim(2e-4, 1.2)
ax.grid(True, which="both", alpha=0.3)
ax.legend()
ax.set_title("omni transmission, single-path channel")
fig.tight_layout()
out = Path(__file__).with_name("misdetection_curves.png")
fig.savefig(out, dpi=120)
print(f"rate-target marker at {marker:.2f} dB")
print(f"wrote {out}")
