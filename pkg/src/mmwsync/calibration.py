"""False-alarm budgeting and detection-threshold calibration.

The per-hypothesis false-alarm target P_FA = R_FA / N_hyp is far below what
direct Monte Carlo can reach, so the threshold comes from simulating the
noise-only statistic, fitting a quadratic to the log survival function over
the upper tail, and solving the fit for the target level.  Thresholds are
cached per structural key (front-end kind and observation dimensions) so
misdetection sweeps reuse them.
"""

from __future__ import annotations

import json
import os
import time
from dataclasses import dataclass, asdict
from pathlib import Path

import numpy as np

from .detector import sigma_sq_max
from .pss import PssConfig, freq_grid_params
from .streams import complex_normal, substream


class CalibrationError(RuntimeError):
    """Tail fit or root solve failed; usually wants more trials."""


@dataclass(frozen=True)
class FalseAlarmBudget:
    """R_FA false alarms per search period split across the hypothesis grid."""

    r_fa: float
    n_dly: int
    n_pss: int
    n_fo: int

    def __post_init__(self):
        if not 0.0 < self.r_fa < 1.0:
            raise ValueError("r_fa must lie in (0, 1)")

    @property
    def n_hyp(self) -> int:
        return self.n_dly * self.n_pss * self.n_fo

    @property
    def p_fa(self) -> float:
        return self.r_fa / self.n_hyp


def fa_budget(cfg: PssConfig, r_fa: float | None = None) -> FalseAlarmBudget:
    """Budget arithmetic from the signal config (delay grid at twice the
    sub-signal bandwidth, frequency grid covering oscillator error and Doppler)."""
    _, _, n_fo = freq_grid_params(cfg)
    return FalseAlarmBudget(r_fa=cfg.r_fa if r_fa is None else r_fa,
                            n_dly=cfg.n_dly, n_pss=cfg.n_pss, n_fo=n_fo)


@dataclass(frozen=True)
class CalKey:
    """Structural key the null distribution depends on."""

    kind: str
    n_rx: int
    n_dim: int
    n_slot: int
    n_sub: int      # L = n_sig * n_slot
    n_streams: int

    def as_dict(self) -> dict:
        return asdict(self)


@dataclass
class ThresholdModel:
    key: CalKey
    p_fa: float
    n_trials: int
    seed: int
    fit: tuple[float, float, float]     # a, b, c of log S(t) ~ a t^2 + b t + c
    fit_region: tuple[float, float]     # t range the fit was computed on
    t_star: float
    empirical_samples: np.ndarray | None = None   # sorted H0 statistics (in memory only)


def null_statistics(key: CalKey, n_trials: int, rng: np.random.Generator,
                    chunk: int = 2048) -> np.ndarray:
    """Simulate noise-only statistics for the given structure.

    Only the matched-filter projections and the complementary energy matter
    under H0, so each trial draws the projection block white and the rest of
    the per-slot energy as an exact Gamma variate.
    """
    n_sig, rem = divmod(key.n_sub, key.n_slot)
    if rem or n_sig < 1 or key.n_dim < n_sig:
        raise ValueError("inconsistent calibration dimensions")
    out = np.empty(n_trials)
    comp_dims = key.n_slot * (key.n_dim - n_sig)
    for start in range(0, n_trials, chunk):
        b = min(chunk, n_trials - start)
        if key.kind in ("digital", "digital_q"):
            V = complex_normal(rng, (b, key.n_rx, key.n_sub))
            E = np.sum(np.abs(V) ** 2, axis=(1, 2)) + rng.gamma(comp_dims * key.n_rx, 1.0, b)
            s2, _ = sigma_sq_max(V)
            out[start:start + b] = s2 / E
        else:
            v = complex_normal(rng, (b, key.n_streams * key.n_sub))
            E = np.sum(np.abs(v) ** 2, axis=1) + rng.gamma(comp_dims * key.n_streams, 1.0, b)
            out[start:start + b] = np.sum(np.abs(v) ** 2, axis=1) / E
    return out


def fit_log_survival(samples: np.ndarray, tail_fraction: float = 0.1,
                     min_points: int = 500):
    """Quadratic least-squares fit of log S(t) over the upper tail.

    Returns ((a, b, c), (t_lo, t_hi)).  Rejects fits whose leading coefficient
    is not negative (the tail must be log-concave for the extrapolation).
    """
    t = np.sort(np.asarray(samples, dtype=float))
    n = len(t)
    m = max(int(round(tail_fraction * n)), min_points)
    m = min(m, n - 1)
    if m < 10:
        raise CalibrationError("too few samples for a tail fit")
    top = t[n - m:]
    # Hazen plotting position keeps the largest sample off log(0)
    ranks = np.arange(n - m, n)
    log_s = np.log((n - ranks - 0.5) / n)
    a, b, c = np.polyfit(top, log_s, 2)
    if not a < 0:
        raise CalibrationError(
            "tail of the null statistic is not log-concave; increase n_trials")
    return (float(a), float(b), float(c)), (float(top[0]), float(top[-1]))


def solve_threshold(fit, fit_region, p_fa: float) -> float:
    """Root of a t^2 + b t + c = log(p_fa) on the decreasing branch."""
    a, b, c = fit
    disc = b * b - 4.0 * a * (c - np.log(p_fa))
    if disc < 0:
        raise CalibrationError("tail fit never reaches the target false-alarm rate")
    # a < 0: the decreasing branch is the smaller-t root of the two, i.e. the
    # one right of the vertex -b/(2a)
    t1 = (-b + np.sqrt(disc)) / (2.0 * a)
    t2 = (-b - np.sqrt(disc)) / (2.0 * a)
    vertex = -b / (2.0 * a)
    roots = [r for r in (t1, t2) if r >= vertex - 1e-15]
    if not roots:
        raise CalibrationError("no root on the decreasing branch of the tail fit")
    t_star = min(roots)
    if not 0.0 < t_star < 1.0:
        raise CalibrationError(f"threshold {t_star:.4g} outside (0, 1)")
    return float(t_star)


def calibrate(key: CalKey, p_fa: float, n_trials: int = 20000,
              seed: int = 1234, keep_samples: bool = False) -> ThresholdModel:
    """Monte Carlo H0 calibration for one structural key."""
    if n_trials < 1000:
        raise ValueError("calibration needs at least 1000 trials")
    rng = substream(seed, "calibration", key.kind, key.n_rx, key.n_dim,
                    key.n_slot, key.n_sub, key.n_streams)
    samples = null_statistics(key, n_trials, rng)
    fit, region = fit_log_survival(samples)
    t_star = solve_threshold(fit, region, p_fa)
    return ThresholdModel(key=key, p_fa=p_fa, n_trials=n_trials, seed=seed,
                          fit=fit, fit_region=region, t_star=t_star,
                          empirical_samples=np.sort(samples) if keep_samples else None)


# --- cache -------------------------------------------------------------------

CACHE_ENV = "SIM_CALIB_DIR"
_CACHE_FILE = "thresholds.json"


def cache_dir(explicit: str | os.PathLike | None = None) -> Path:
    if explicit is not None:
        return Path(explicit)
    return Path(os.environ.get(CACHE_ENV, ".mmwsync_calib"))


def _record(model: ThresholdModel) -> dict:
    return {
        "key": model.key.as_dict(),
        "p_fa": model.p_fa,
        "n_trials": model.n_trials,
        "seed": model.seed,
        "fit": list(model.fit),
        "fit_region": list(model.fit_region),
        "t_star": model.t_star,
        "created": time.strftime("%Y-%m-%dT%H:%M:%S"),
    }


def _load_records(path: Path) -> list[dict]:
    f = path / _CACHE_FILE
    if not f.exists():
        return []
    return json.loads(f.read_text())


def _matches(rec: dict, key: CalKey, p_fa: float, n_trials: int, seed: int) -> bool:
    return (rec["key"] == key.as_dict() and rec["n_trials"] == n_trials
            and rec["seed"] == seed and np.isclose(rec["p_fa"], p_fa, rtol=1e-12))


def lookup(key: CalKey, p_fa: float, n_trials: int, seed: int,
           directory: str | os.PathLike | None = None) -> ThresholdModel | None:
    for rec in _load_records(cache_dir(directory)):
        if _matches(rec, key, p_fa, n_trials, seed):
            return ThresholdModel(key=key, p_fa=rec["p_fa"], n_trials=rec["n_trials"],
                                  seed=rec["seed"], fit=tuple(rec["fit"]),
                                  fit_region=tuple(rec["fit_region"]),
                                  t_star=rec["t_star"])
    return None


def store(model: ThresholdModel, directory: str | os.PathLike | None = None) -> Path:
    d = cache_dir(directory)
    d.mkdir(parents=True, exist_ok=True)
    records = [r for r in _load_records(d)
               if not _matches(r, model.key, model.p_fa, model.n_trials, model.seed)]
    records.append(_record(model))
    f = d / _CACHE_FILE
    tmp = f.with_suffix(".tmp")
    tmp.write_text(json.dumps(records, indent=2, sort_keys=True))
    tmp.replace(f)
    return f


def ensure_threshold(key: CalKey, p_fa: float, n_trials: int = 20000, seed: int = 1234,
                     directory: str | os.PathLike | None = None) -> ThresholdModel:
    """Cached calibration: reuse a stored record or run and persist a new one."""
    model = lookup(key, p_fa, n_trials, seed, directory)
    if model is not None:
        return model
    model = calibrate(key, p_fa, n_trials=n_trials, seed=seed)
    store(model, directory)
    return model
