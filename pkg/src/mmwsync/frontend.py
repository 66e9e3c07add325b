"""Receiver front-ends: full digital, quantized digital, analog single-beam
and hybrid multi-beam conversion of the received field into detector
observations, plus the converter power model.

Observations live in per-slot signal-space coefficients: a digital front-end
keeps the full (n_rx, n_dim) coefficient matrix R_k, an analog or hybrid one
keeps one length-n_dim vector per RF chain after phase-shifter combining.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.optimize import minimize_scalar

from .arrays import random_directions, steering_many
from .channel import ChannelRealization
from .pss import PssWaveform
from .streams import complex_normal

FRONTEND_KINDS = ("digital", "digital_q", "analog", "hybrid")

#: relative quantization error (linear) for an optimally scaled uniform scalar
#: quantizer with Gaussian input, indexed by bit width
CODING_GAIN_DB = {1: 4.4, 2: 9.3, 3: 14.5}


@dataclass(frozen=True)
class FrontendSpec:
    """Receiver architecture: kind, ADC resolution and RF-chain count."""

    kind: str
    bits: int = 3              # quantized-digital resolution
    n_streams: int = 1         # RF chains (hybrid); analog is forced to 1
    p_fm_fj: float = 59.4      # converter figure of merit, fJ per step
    agc_backoff_db: float = 0.0

    def __post_init__(self):
        if self.kind not in FRONTEND_KINDS:
            raise ValueError(f"unknown frontend kind {self.kind!r}")
        if self.bits < 1:
            raise ValueError("ADC resolution must be at least one bit")
        if self.n_streams < 1:
            raise ValueError("need at least one RF chain")

    def streams(self, n_rx: int) -> int:
        """Observation streams delivered per slot for an n_rx-element array."""
        if self.kind in ("digital", "digital_q"):
            return n_rx
        if self.kind == "analog":
            return 1
        if self.n_streams > n_rx:
            raise ValueError("hybrid cannot use more RF chains than antennas")
        return self.n_streams


@dataclass
class SlotObservation:
    """Received data for one slot.

    data: (n_rx, n_dim) coefficient matrix for digital kinds, or
    (n_streams, n_dim) with one combined vector per RF chain otherwise.
    rx_weights: (n_streams, n_rx) phase-shifter weights, None for digital.
    """

    kind: str
    slot: int
    data: np.ndarray
    rx_weights: np.ndarray | None = None


def observe_slot(spec: FrontendSpec, waveform: PssWaveform, slot_k: int,
                 chan: ChannelRealization | None, w_tx: np.ndarray | None,
                 amp: float, noise_psd: float, rng: np.random.Generator,
                 rx_weights: np.ndarray | None = None) -> SlotObservation:
    """Synthesize the slot-k observation.

    Digital: R_k = sum_b amp * (H_ell w_tx) p_b^H + D_k with white noise of
    per-component variance noise_psd.  Analog/hybrid: each stream applies its
    own unit-modulus combining weight, fixed for the whole slot, and records
    r_k = sum_b beta_b p_b + d_k.  Pass chan=None (or amp=0) for a noise-only
    slot.  slot_k is 1-based; rx_weights overrides the per-slot random draw.
    """
    if noise_psd < 0:
        raise ValueError("noise PSD must be non-negative")
    n_sig, n_dim = waveform.coeffs.shape
    p_conj = waveform.coeffs.conj()

    if chan is not None:
        n_rx = chan.n_rx
        if w_tx is None or w_tx.shape != (chan.n_tx,):
            raise ValueError("w_tx dimension does not match the transmit array")
        ell0 = (slot_k - 1) * n_sig
        # normalized gain convention: a perfectly aligned unit-norm link has
        # unit gain (matrix() carries the physical sqrt(n_rx n_tx) instead)
        scale = amp / np.sqrt(chan.n_rx * chan.n_tx)
        h = np.stack([chan.matrix(ell0 + b) @ w_tx for b in range(n_sig)], axis=1)
        h = scale * h                                 # (n_rx, n_sig)
    else:
        if rx_weights is None and spec.kind in ("analog", "hybrid"):
            raise ValueError("noise-only analog slot needs explicit rx_weights "
                             "or a channel to size the array")
        n_rx = rx_weights.shape[1] if rx_weights is not None else spec.n_streams
        h = None

    if spec.kind in ("digital", "digital_q"):
        data = complex_normal(rng, (n_rx, n_dim), noise_psd)
        if h is not None:
            data += h @ p_conj
        return SlotObservation(kind=spec.kind, slot=slot_k, data=data)

    n_streams = spec.streams(n_rx)
    if rx_weights is None:
        az, el = random_directions(rng, n_streams)
        rx_weights = steering_many(chan.ue, az, el)   # (n_streams, n_rx), unit modulus/el
    data = complex_normal(rng, (n_streams, n_dim), noise_psd)
    if h is not None:
        beta = rx_weights.conj() @ h                  # (n_streams, n_sig)
        data += beta @ p_conj
    return SlotObservation(kind=spec.kind, slot=slot_k, data=data,
                           rx_weights=rx_weights)


# --- quantization ------------------------------------------------------------

def relative_quant_error(bits: int) -> float:
    """Relative mean-square error alpha of the scalar uniform quantizer.

    Table values for 1..3 bits; wider converters fall back to the numerically
    optimized step size for a unit-variance Gaussian input.
    """
    if bits in CODING_GAIN_DB:
        return 10.0 ** (-CODING_GAIN_DB[bits] / 10.0)
    _, alpha = optimal_uniform_step(bits)
    return alpha


def _uniform_quantize(x: np.ndarray, bits: int, step: float) -> np.ndarray:
    """Mid-rise uniform quantizer with 2^bits levels and saturation."""
    half_levels = 2 ** (bits - 1)
    idx = np.clip(np.floor(x / step), -half_levels, half_levels - 1)
    return (idx + 0.5) * step


@lru_cache(maxsize=None)
def optimal_uniform_step(bits: int) -> tuple[float, float]:
    """(step, relative error) minimizing the MSE for unit-variance Gaussian input."""
    x = np.linspace(-8.0, 8.0, 32001)
    pdf = np.exp(-x * x / 2.0) / np.sqrt(2.0 * np.pi)

    def mse(step):
        err = (_uniform_quantize(x, bits, step) - x) ** 2
        return np.trapezoid(err * pdf, x)

    res = minimize_scalar(mse, bounds=(1e-3, 8.0 / 2 ** (bits - 1)), method="bounded")
    return float(res.x), float(res.fun)


def quantize(obs: SlotObservation, bits: int, agc_scale: float = 1.0,
             mode: str = "surrogate",
             rng: np.random.Generator | None = None) -> SlotObservation:
    """Apply the ADC model to an observation.

    surrogate: the linear white-noise model Q(r) = (1-alpha) r + v with v
    uncorrelated and per-component variance alpha*(1-alpha)*E|r|^2 (ideal AGC
    measures E|r|^2 from the data).  physical: per-component uniform
    quantization of real and imaginary parts with the optimized step size.
    """
    if agc_scale <= 0:
        raise ValueError("agc_scale must be positive")
    if mode == "surrogate":
        if rng is None:
            raise ValueError("surrogate quantization draws noise and needs an rng")
        alpha = relative_quant_error(bits)
        m2 = float(np.mean(np.abs(obs.data) ** 2)) * agc_scale
        v = complex_normal(rng, obs.data.shape, alpha * (1.0 - alpha) * m2)
        data = (1.0 - alpha) * obs.data + v
    elif mode == "physical":
        step, _ = optimal_uniform_step(bits)
        sigma = np.sqrt(float(np.mean(np.abs(obs.data) ** 2)) / 2.0) * agc_scale
        if sigma == 0:
            data = obs.data.copy()
        else:
            data = sigma * (_uniform_quantize(obs.data.real / sigma, bits, step)
                            + 1j * _uniform_quantize(obs.data.imag / sigma, bits, step))
    else:
        raise ValueError(f"unknown quantization mode {mode!r}")
    return SlotObservation(kind=obs.kind, slot=obs.slot, data=data,
                           rx_weights=obs.rx_weights)


def effective_snr_after_quantization(gamma0: float, alpha: float) -> float:
    """Post-quantization SNR (1-alpha)*gamma0 / (1 + alpha*gamma0)."""
    if gamma0 <= 0:
        raise ValueError("gamma0 must be positive")
    if not 0.0 <= alpha < 1.0:
        raise ValueError("alpha must lie in [0, 1)")
    return (1.0 - alpha) * gamma0 / (1.0 + alpha * gamma0)


def adc_power(n_streams: int, p_fm: float, w_tot: float, bits: int) -> float:
    """Converter power N_r * P_fm * 2 W_tot * 2^b in watts (p_fm in joules)."""
    if n_streams < 1 or p_fm <= 0 or w_tot <= 0 or bits < 0:
        raise ValueError("all converter parameters must be positive")
    return n_streams * p_fm * 2.0 * w_tot * 2.0 ** bits
