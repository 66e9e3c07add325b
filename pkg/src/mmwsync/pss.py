"""Synchronization-signal structure: slot timing, sub-signal waveforms and
transmit-side beam weighting.

The sync signal occupies a slot of length t_sig once every t_per seconds and
is split into n_sig narrowband sub-signals of bandwidth w_sig spread across
the system bandwidth for frequency diversity.  A search processes n_slot
consecutive slots, so there are L = n_sig * n_slot sub-signals per search.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .arrays import ArrayGeometry, random_direction, steering_vector

SPEED_OF_LIGHT = 299_792_458.0

#: default sync-channel parameters (1 GHz system, 2% overhead, 250 ms search)
DEFAULTS = {
    "w_tot": 1e9,
    "w_sig": 1e6,
    "t_sig": 1e-4,
    "t_per": 5e-3,
    "n_sig": 4,
    "n_slot": 50,
    "n_pss": 3,
    "carrier_hz": 28e9,
    "n_dim": 1024,
    "r_fa": 0.01,
    "lo_ppm": 1.0,
    "speed_kmh": 30.0,
}


class ConfigError(ValueError):
    """Invalid or inconsistent sync-channel configuration."""


@dataclass(frozen=True)
class PssConfig:
    w_tot: float        # total system bandwidth, Hz
    w_sig: float        # sub-signal bandwidth, Hz
    t_sig: float        # slot duration, s
    t_per: float        # slot period, s
    n_sig: int          # sub-signals per slot
    n_slot: int         # slots per search
    n_pss: int          # waveform hypotheses
    carrier_hz: float
    n_dim: int          # simulated signal-space dimension per slot
    r_fa: float = 0.01      # false alarms allowed per search period
    lo_ppm: float = 1.0     # initial oscillator error, parts per million
    speed_kmh: float = 30.0  # mobile speed for the Doppler budget

    @property
    def overhead(self) -> float:
        return self.t_sig / self.t_per

    @property
    def n_sub(self) -> int:
        """Total sub-signal count L per search."""
        return self.n_sig * self.n_slot

    @property
    def n_dly(self) -> int:
        """Delay hypotheses per period, sampling at twice the sub-signal bandwidth."""
        return int(round(2.0 * self.w_sig * self.t_per))

    @property
    def chip_len(self) -> int:
        """Sub-signal sequence length floor(w_sig * t_sig)."""
        return int(math.floor(self.w_sig * self.t_sig))

    def with_slots(self, n_slot: int) -> "PssConfig":
        return replace(self, n_slot=n_slot)


def build_config(raw: dict | None = None, **overrides) -> PssConfig:
    """Merge raw parameters over the defaults and validate.

    Raises ConfigError for non-positive values, t_sig >= t_per, sub-signals
    that do not pack into the total bandwidth, or n_dim < n_sig.
    """
    params = dict(DEFAULTS)
    params.update(raw or {})
    params.update(overrides)
    unknown = set(params) - set(DEFAULTS)
    if unknown:
        raise ConfigError(f"unknown signal parameters: {sorted(unknown)}")
    for key in ("w_tot", "w_sig", "t_sig", "t_per", "n_sig", "n_slot", "n_pss",
                "carrier_hz", "n_dim", "r_fa"):
        if params[key] <= 0:
            raise ConfigError(f"{key} must be strictly positive")
    cfg = PssConfig(**{k: (int(v) if k in ("n_sig", "n_slot", "n_pss", "n_dim") else float(v))
                       for k, v in params.items()})
    if cfg.t_sig >= cfg.t_per:
        raise ConfigError("slot duration t_sig must be shorter than the period t_per")
    if cfg.n_sig * cfg.w_sig > cfg.w_tot * (1 + 1e-12):
        raise ConfigError("n_sig sub-signals of width w_sig do not fit in w_tot")
    if cfg.n_dim < cfg.n_sig:
        raise ConfigError("per-slot dimension n_dim must be at least n_sig")
    if cfg.chip_len < 1:
        raise ConfigError("w_sig * t_sig must allow at least one sample per sub-signal")
    return cfg


def slot_of(ell: int, cfg: PssConfig) -> int:
    """Slot index k (1-based) carrying sub-signal ell in {1..L}."""
    if not 1 <= ell <= cfg.n_sub:
        raise ValueError("sub-signal index out of range")
    return (ell - 1) // cfg.n_sig + 1


def indices_in(k: int, cfg: PssConfig) -> range:
    """Sub-signal indices J_k = {(k-1)*n_sig+1, ..., k*n_sig} of slot k."""
    if not 1 <= k <= cfg.n_slot:
        raise ValueError("slot index out of range")
    return range((k - 1) * cfg.n_sig + 1, k * cfg.n_sig + 1)


def interval(k: int, cfg: PssConfig) -> tuple[float, float]:
    """Time interval [start, start + t_sig) of slot k (1-based)."""
    start = (k - 1) * cfg.t_per
    return (start, start + cfg.t_sig)


def doppler_hz(speed_kmh: float, carrier_hz: float) -> float:
    """Maximum Doppler shift for the given speed and carrier."""
    return speed_kmh / 3.6 * carrier_hz / SPEED_OF_LIGHT


def freq_grid_params(cfg: PssConfig) -> tuple[float, float, int]:
    """(step, max offset, hypothesis count) of the frequency search grid.

    The step 1/(4*t_sig) keeps the residual rotation within a slot under a
    quarter turn; the grid spans oscillator error plus Doppler on both sides.
    """
    df = 1.0 / (4.0 * cfg.t_sig)
    df_max = cfg.carrier_hz * cfg.lo_ppm * 1e-6 + doppler_hz(cfg.speed_kmh, cfg.carrier_hz)
    n_fo = int(round(2.0 * df_max / df))
    return df, df_max, max(n_fo, 1)


# --- waveforms -------------------------------------------------------------

#: roots used for the waveform hypotheses, all coprime with the sequence length
ZC_ROOTS = (1, 3, 7, 9, 11, 13, 17, 19, 21, 23)


def zadoff_chu(root: int, length: int) -> np.ndarray:
    """Constant-modulus Zadoff-Chu sequence."""
    n = np.arange(length)
    if length % 2 == 0:
        return np.exp(-1j * np.pi * root * n * n / length)
    return np.exp(-1j * np.pi * root * n * (n + 1) / length)


@dataclass(frozen=True)
class PssWaveform:
    """One waveform hypothesis: a unit-norm coefficient vector per sub-signal.

    Sub-signals occupy disjoint blocks of the per-slot signal space (they sit
    in separate frequency bands), so the in-slot Gram matrix is the identity
    by construction.  `chips` holds the underlying sequences for time-domain
    (waveform mode) use.
    """

    waveform_id: int                 # 1..n_pss
    coeffs: np.ndarray               # (n_sig, n_dim), rows unit norm
    chips: np.ndarray                # (n_sig, chip_len), unit modulus

    @property
    def time_samples(self) -> np.ndarray:
        """Sampled slot waveform per band at rate 2*w_sig, unit energy per row."""
        up = np.repeat(self.chips, 2, axis=1)
        return up / np.linalg.norm(up[0])


def generate_waveforms(cfg: PssConfig, seed: int | None = None) -> list[PssWaveform]:
    """Build the n_pss waveform hypotheses.

    The family is deterministic (Zadoff-Chu roots, one sequence per sub-band);
    `seed` is accepted for interface stability but not consumed.
    """
    del seed
    chip_len = cfg.chip_len
    block = cfg.n_dim // cfg.n_sig
    if chip_len > block:
        raise ConfigError(
            f"n_dim={cfg.n_dim} too small for {cfg.n_sig} sub-signals of {chip_len} samples")
    roots = [r for r in ZC_ROOTS if math.gcd(r, chip_len) == 1]
    if len(roots) < cfg.n_pss:
        raise ConfigError("not enough waveform roots for n_pss hypotheses")
    out = []
    for i in range(cfg.n_pss):
        seq = zadoff_chu(roots[i], chip_len)
        coeffs = np.zeros((cfg.n_sig, cfg.n_dim), dtype=complex)
        for b in range(cfg.n_sig):
            coeffs[b, b * block: b * block + chip_len] = seq / np.sqrt(chip_len)
        chips = np.tile(seq, (cfg.n_sig, 1))
        out.append(PssWaveform(waveform_id=i + 1, coeffs=coeffs, chips=chips))
    return out


# --- transmit-side beam policy ---------------------------------------------

@dataclass(frozen=True)
class TxBeamPolicy:
    """How the base station weights the sync transmission.

    'omni' puts all energy on a single element with unit weight; 'random'
    steers the whole array toward a fresh direction every slot using
    phase-only weights (total radiated power matches the omni case).
    """

    mode: str = "omni"
    direction_draw: str = "sphere"

    def __post_init__(self):
        if self.mode not in ("omni", "random"):
            raise ValueError(f"unknown tx mode {self.mode!r}")


def tx_weights(policy: TxBeamPolicy, slot_k: int, array: ArrayGeometry,
               rng: np.random.Generator | None = None) -> np.ndarray:
    """Transmit weight vector for one slot; constant across the slot."""
    del slot_k
    if policy.mode == "omni":
        w = np.zeros(array.n_elements, dtype=complex)
        w[0] = 1.0
        return w
    if rng is None:
        raise ValueError("random beam policy needs an rng")
    d = random_direction(rng, policy.direction_draw)
    # steering vector: per-element modulus 1/sqrt(N), so ||w||^2 = 1 like omni
    return steering_vector(array, d)
