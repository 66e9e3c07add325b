"""Seeded misdetection experiments over scenario x SNR grids.

SNR bookkeeping: the sweep variable is the data SNR (full-band, optimally
beamformed link); each trial is synthesized at the per-sub-signal sync SNR
obtained through the conversion factor t_sig * w_tot / (n_sig * G_tx * G_rx).
The noise density is fixed at 1 and the received amplitude carries the SNR,
which is exact because the detectors are scale invariant.

Trials draw a fresh channel, per-slot beams and noise, evaluate the detector
on the true hypothesis (fast mode) and tally misses.  Each trial's generator
is keyed by (seed, scenario id, snr index, trial index), so outputs are
byte-identical regardless of worker count or execution order.
"""

from __future__ import annotations

import csv
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import __version__
from .arrays import ArrayGeometry, max_bf_gain, random_directions, steering_many
from .calibration import CalKey, FalseAlarmBudget, ThresholdModel, ensure_threshold, fa_budget
from .channel import ChannelRealization, MultipathParams, draw_multipath, draw_single_path
from .detector import statistic_analog, statistic_digital
from .frontend import FrontendSpec, relative_quant_error
from .pss import PssConfig
from .streams import complex_normal, substream


def snr_convert(snr_data: float, cfg: PssConfig, bs: ArrayGeometry,
                ue: ArrayGeometry) -> float:
    """Per-sub-signal sync SNR implied by a data SNR (linear in, linear out)."""
    factor = cfg.t_sig * cfg.w_tot / (cfg.n_sig * max_bf_gain(bs) * max_bf_gain(ue))
    return snr_data * factor


def snr_convert_inverse(snr_pss: float, cfg: PssConfig, bs: ArrayGeometry,
                        ue: ArrayGeometry) -> float:
    factor = cfg.t_sig * cfg.w_tot / (cfg.n_sig * max_bf_gain(bs) * max_bf_gain(ue))
    return snr_pss / factor


def rate_target_snr(r_tgt: float, w_tot: float, beta: float = 0.4) -> float:
    """Data SNR needed to hit rate r_tgt at bandwidth w_tot with overhead
    fraction beta: invert r = beta * w * log2(1 + snr)."""
    if r_tgt < 0 or w_tot <= 0 or not 0 < beta <= 1:
        raise ValueError("invalid rate-target parameters")
    return 2.0 ** (r_tgt / (beta * w_tot)) - 1.0


@dataclass(frozen=True)
class Scenario:
    """One curve: transmit policy, receiver architecture and channel family."""

    cfg: PssConfig
    bs: ArrayGeometry
    ue: ArrayGeometry
    frontend: FrontendSpec
    tx_mode: str = "omni"                # omni | random
    channel_mode: str = "single"         # single | multipath
    multipath: MultipathParams = field(default_factory=MultipathParams)
    # a single path has no delay dispersion, so its gain is frequency flat:
    # one draw per slot, shared by the slot's sub-signals
    gain_model: str = "block"
    label: str | None = None

    def __post_init__(self):
        if self.tx_mode not in ("omni", "random"):
            raise ValueError(f"unknown tx mode {self.tx_mode!r}")
        if self.channel_mode not in ("single", "multipath"):
            raise ValueError(f"unknown channel mode {self.channel_mode!r}")

    @property
    def scenario_id(self) -> str:
        if self.label:
            return self.label
        parts = [self.tx_mode, self.frontend.kind]
        if self.frontend.kind == "digital_q":
            parts[-1] += f"{self.frontend.bits}b"
        if self.frontend.kind == "hybrid":
            parts[-1] += f"{self.frontend.n_streams}"
        parts.append(self.channel_mode)
        if self.cfg.n_slot != 50:
            parts.append(f"nslot{self.cfg.n_slot}")
        return "-".join(parts)

    @property
    def cal_key(self) -> CalKey:
        n_rx = self.ue.n_elements
        return CalKey(kind=self.frontend.kind, n_rx=n_rx, n_dim=self.cfg.n_dim,
                      n_slot=self.cfg.n_slot, n_sub=self.cfg.n_sub,
                      n_streams=self.frontend.streams(n_rx))


@dataclass(frozen=True)
class SnrPoint:
    """One sweep point: data SNR with its derived sync-signal SNR; the noise
    density is normalized to 1 so amp^2 = snr_pss is the received scale."""

    snr_data_db: float
    snr_pss_db: float
    nu: float = 1.0

    @property
    def amp(self) -> float:
        return math.sqrt(10.0 ** (self.snr_pss_db / 10.0) * self.nu)


def snr_point(scenario: Scenario, snr_data_db: float) -> SnrPoint:
    pss = snr_convert(10.0 ** (snr_data_db / 10.0), scenario.cfg, scenario.bs, scenario.ue)
    return SnrPoint(snr_data_db=snr_data_db, snr_pss_db=10.0 * math.log10(pss))


@dataclass(frozen=True)
class CurvePoint:
    snr_data_db: float
    snr_pss_db: float
    n_trials: int
    n_missed: int

    @property
    def p_md(self) -> float:
        return self.n_missed / self.n_trials if self.n_trials else 0.0

    @property
    def ci95(self) -> tuple[float, float]:
        return wilson_interval(self.n_missed, self.n_trials)


def wilson_interval(k: int, n: int, z: float = 1.959963984540054) -> tuple[float, float]:
    """95% Wilson score interval for a binomial proportion."""
    if n == 0:
        return (0.0, 1.0)
    p = k / n
    denom = 1.0 + z * z / n
    center = (p + z * z / (2 * n)) / denom
    half = z * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / denom
    lo = 0.0 if k == 0 else max(0.0, center - half)
    hi = 1.0 if k == n else min(1.0, center + half)
    return (lo, hi)


# --- per-trial synthesis -------------------------------------------------------

def _draw_channel(scenario: Scenario, rng: np.random.Generator) -> ChannelRealization:
    if scenario.channel_mode == "single":
        return draw_single_path(scenario.bs, scenario.ue, scenario.cfg.n_sub, rng,
                                n_sig=scenario.cfg.n_sig, gain_model=scenario.gain_model)
    return draw_multipath(scenario.multipath, scenario.bs, scenario.ue,
                          scenario.cfg.n_sub, rng, n_sig=scenario.cfg.n_sig,
                          gain_model=scenario.gain_model)


def _tx_weights_per_slot(scenario: Scenario, rng: np.random.Generator) -> np.ndarray:
    n_slot, n_tx = scenario.cfg.n_slot, scenario.bs.n_elements
    if scenario.tx_mode == "omni":
        w = np.zeros((n_slot, n_tx), dtype=complex)
        w[:, 0] = 1.0
        return w
    az, el = random_directions(rng, n_slot)
    return steering_many(scenario.bs, az, el)


def run_trial(scenario: Scenario, point: SnrPoint, rng: np.random.Generator,
              threshold: float) -> bool:
    """One misdetection trial; returns True when the signal is missed.

    The detector evaluates the true hypothesis, so only the matched-filter
    projections and the total energy are needed; the energy outside the
    sub-signal subspace is an exact Gamma variate, which keeps the statistic's
    distribution identical to a full per-slot synthesis at a fraction of the
    cost.
    """
    cfg = scenario.cfg
    kind = scenario.frontend.kind
    chan = _draw_channel(scenario, rng)
    w_tx = _tx_weights_per_slot(scenario, rng)
    nu = point.nu
    # point.amp is the per-antenna scale; the gain helpers use the normalized
    # convention (aligned unit-norm link = unit gain), hence the array factor
    amp = point.amp * math.sqrt(scenario.ue.n_elements * scenario.bs.n_elements)

    if kind in ("digital", "digital_q"):
        n_rx = scenario.ue.n_elements
        h = amp * chan.rx_vectors(w_tx, cfg.n_sig)                 # (n_rx, L)
        V = h + complex_normal(rng, h.shape, nu)
        comp_dims = cfg.n_slot * n_rx * (cfg.n_dim - cfg.n_sig)
        E = float(np.sum(np.abs(V) ** 2)) + float(rng.gamma(comp_dims, nu))
        if kind == "digital_q":
            alpha = relative_quant_error(scenario.frontend.bits)
            m2 = nu + float(np.sum(np.abs(h) ** 2)) / (cfg.n_slot * n_rx * cfg.n_dim)
            qvar = alpha * (1.0 - alpha) * m2
            V = (1.0 - alpha) * V + complex_normal(rng, V.shape, qvar)
            nu_q = (1.0 - alpha) ** 2 * nu + qvar
            E = float(np.sum(np.abs(V) ** 2)) + float(rng.gamma(comp_dims, nu_q))
        stat = statistic_digital(V, E)
        return stat.T < threshold

    n_streams = scenario.frontend.streams(scenario.ue.n_elements)
    n_slot = cfg.n_slot
    az, el = random_directions(rng, n_streams * n_slot)
    w_rx = steering_many(scenario.ue, az, el).reshape(n_streams, n_slot, -1)
    beta = amp * chan.combined_gains(w_tx, w_rx, cfg.n_sig)        # (n_streams, L)
    v = beta + complex_normal(rng, beta.shape, nu)
    comp_dims = n_streams * n_slot * (cfg.n_dim - cfg.n_sig)
    E = float(np.sum(np.abs(v) ** 2)) + float(rng.gamma(comp_dims, nu))
    stat = statistic_analog(v.reshape(-1), E)
    return stat.T < threshold


def _count_misses(scenario: Scenario, point: SnrPoint, threshold: float,
                  seed: int, snr_index: int, trial_range: tuple[int, int]) -> int:
    misses = 0
    for trial in range(*trial_range):
        rng = substream(seed, scenario.scenario_id, snr_index, trial)
        misses += run_trial(scenario, point, rng, threshold)
    return misses


def run_point(scenario: Scenario, point: SnrPoint, n_trials: int, threshold: float,
              seed: int, snr_index: int = 0, workers: int = 1) -> CurvePoint:
    """Monte Carlo misdetection estimate at one SNR point."""
    if n_trials < 1:
        raise ValueError("need at least one trial")
    if workers <= 1:
        misses = _count_misses(scenario, point, threshold, seed, snr_index, (0, n_trials))
    else:
        block = max(1, math.ceil(n_trials / workers))
        ranges = [(lo, min(lo + block, n_trials)) for lo in range(0, n_trials, block)]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = pool.map(_count_misses, *zip(*[(scenario, point, threshold, seed,
                                                    snr_index, r) for r in ranges]))
        misses = sum(parts)
    return CurvePoint(snr_data_db=point.snr_data_db, snr_pss_db=point.snr_pss_db,
                      n_trials=n_trials, n_missed=misses)


@dataclass
class CalibrationSettings:
    n_trials: int = 30000
    seed: int = 1234
    directory: str | None = None


def scenario_threshold(scenario: Scenario, budget: FalseAlarmBudget | None = None,
                       calib: CalibrationSettings | None = None) -> ThresholdModel:
    calib = calib or CalibrationSettings()
    budget = budget or fa_budget(scenario.cfg)
    return ensure_threshold(scenario.cal_key, budget.p_fa, n_trials=calib.n_trials,
                            seed=calib.seed, directory=calib.directory)


def run_curve(scenario: Scenario, snr_grid_db, n_trials: int, seed: int,
              calib: CalibrationSettings | None = None, workers: int = 1,
              budget: FalseAlarmBudget | None = None) -> list[CurvePoint]:
    """Calibrate (or load) the scenario threshold, then sweep the SNR grid."""
    snr_grid_db = list(snr_grid_db)
    if not snr_grid_db:
        return []
    model = scenario_threshold(scenario, budget, calib)
    points = []
    for i, snr_db in enumerate(snr_grid_db):
        pt = snr_point(scenario, float(snr_db))
        points.append(run_point(scenario, pt, n_trials, model.t_star, seed,
                                snr_index=i, workers=workers))
    return points


# --- persistence ---------------------------------------------------------------

CSV_HEADER = ["scenario_id", "snr_data_db", "snr_pss_db", "n_trials", "n_missed",
              "p_md", "ci_lo", "ci_hi"]


def write_curve_csv(path: str | Path, scenario_id: str,
                    points: list[CurvePoint]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(CSV_HEADER)
        for p in points:
            lo, hi = p.ci95
            w.writerow([scenario_id, f"{p.snr_data_db:.6g}", f"{p.snr_pss_db:.10g}",
                        p.n_trials, p.n_missed, f"{p.p_md:.10g}",
                        f"{lo:.10g}", f"{hi:.10g}"])
    return path


def write_manifest(path: str | Path, payload: dict) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    payload = dict(payload)
    payload.setdefault("code_version", __version__)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    return path


def manifest_entry(scenario: Scenario, model: ThresholdModel, n_trials: int,
                   seed: int, snr_grid_db, csv_file: str) -> dict:
    """Everything needed to reproduce one curve CSV."""
    return {
        "scenario_id": scenario.scenario_id,
        "csv": csv_file,
        "tx_mode": scenario.tx_mode,
        "frontend": scenario.frontend.kind,
        "bits": scenario.frontend.bits,
        "n_streams": scenario.frontend.streams(scenario.ue.n_elements),
        "channel": scenario.channel_mode,
        "gain_model": scenario.gain_model,
        "n_slot": scenario.cfg.n_slot,
        "snr_grid_db": list(map(float, snr_grid_db)),
        "n_trials": n_trials,
        "seed": seed,
        "threshold": {
            "t_star": model.t_star,
            "p_fa": model.p_fa,
            "fit": list(model.fit),
            "fit_region": list(model.fit_region),
            "n_trials": model.n_trials,
            "seed": model.seed,
            "key": model.key.as_dict(),
        },
    }
