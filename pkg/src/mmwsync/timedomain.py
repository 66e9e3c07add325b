"""Waveform-mode synthesis and search: sampled per-band streams at twice the
sub-signal bandwidth, for validating delay/frequency hypothesis scanning and
false-alarm behavior at reduced scale.

The coefficient-space harness assumes slot alignment; this module keeps an
actual time axis, so a capture can carry a fractional delay and a carrier
frequency offset, and the search can sweep the full delay grid.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .detector import SearchResult, sigma_sq_max, statistic_analog, statistic_digital
from .pss import PssConfig, PssWaveform
from .streams import complex_normal


@dataclass(frozen=True)
class TimeCapture:
    """Received sample streams, shape (n_streams, n_bands, n_total), at rate
    2 * w_sig per band.  Digital captures carry one stream per antenna."""

    kind: str                   # digital | analog | hybrid
    data: np.ndarray
    fs: float
    period_samples: int
    window_samples: int
    n_slot: int

    @property
    def n_streams(self) -> int:
        return self.data.shape[0]

    @property
    def n_bands(self) -> int:
        return self.data.shape[1]


def band_templates(waveform: PssWaveform) -> np.ndarray:
    """Unit-energy sampled sub-signal templates, shape (n_bands, 2*chip_len)."""
    return waveform.time_samples


def capture_dims(cfg: PssConfig) -> tuple[int, int]:
    """(period, window) in samples at fs = 2*w_sig."""
    fs = 2.0 * cfg.w_sig
    period = int(round(cfg.t_per * fs))
    window = 2 * cfg.chip_len
    return period, window


def synthesize_capture(cfg: PssConfig, waveform: PssWaveform, kind: str,
                       stream_gains: np.ndarray, delay_samples: float,
                       cfo_hz: float, noise_psd: float,
                       rng: np.random.Generator) -> TimeCapture:
    """Build a capture with the signal at a (possibly fractional) delay.

    stream_gains: (n_streams, L) complex amplitude of each sub-signal on each
    stream (zeros give a noise-only capture).  Chips use rectangular pulses,
    so a fractional delay splits each chip across neighboring samples exactly
    as a sample-and-hold front end would see it.
    """
    if delay_samples < 0:
        raise ValueError("delay must be non-negative")
    fs = 2.0 * cfg.w_sig
    period, window = capture_dims(cfg)
    n_bands = cfg.n_sig
    n_streams, n_sub = stream_gains.shape
    if n_sub != cfg.n_sub:
        raise ValueError("stream_gains must cover all sub-signals")
    n_total = cfg.n_slot * period + window + 2
    data = complex_normal(rng, (n_streams, n_bands, n_total), noise_psd)

    chip_len = cfg.chip_len
    norm = np.sqrt(2.0 * chip_len)
    d_int = int(np.floor(delay_samples))
    frac = delay_samples - d_int
    # sample j of the delayed rect-chip train: chip index floor((j - frac)/2)
    j = np.arange(window + 2)
    chip_idx = np.floor((j - frac) / 2.0).astype(int)
    valid = (chip_idx >= 0) & (chip_idx < chip_len)
    for k in range(cfg.n_slot):
        start = k * period + d_int
        for b in range(n_bands):
            tpl = np.zeros(window + 2, dtype=complex)
            tpl[valid] = waveform.chips[b][chip_idx[valid]] / norm
            for s in range(n_streams):
                gain = stream_gains[s, k * cfg.n_sig + b]
                if gain != 0:
                    data[s, b, start:start + window + 2] += gain * tpl
    if cfo_hz != 0.0:
        rot = np.exp(2j * np.pi * cfo_hz * np.arange(n_total) / fs)
        data = data * rot
    return TimeCapture(kind=kind, data=data, fs=fs, period_samples=period,
                       window_samples=window, n_slot=cfg.n_slot)


def _derotated(capture: TimeCapture, cfo_hz: float) -> np.ndarray:
    if cfo_hz == 0.0:
        return capture.data
    rot = np.exp(-2j * np.pi * cfo_hz * np.arange(capture.data.shape[-1]) / capture.fs)
    return capture.data * rot


def correlate_capture(capture: TimeCapture, waveform: PssWaveform, delay_idx: int,
                      cfo_hz: float = 0.0) -> tuple[np.ndarray, float]:
    """Matched-filter outputs (n_streams, L) and slot-window energy at one
    delay hypothesis (in samples) with optional frequency derotation."""
    y = _derotated(capture, cfo_hz)
    tpls = band_templates(waveform)
    P, W = capture.period_samples, capture.window_samples
    v = np.empty((capture.n_streams, capture.n_slot, capture.n_bands), dtype=complex)
    E = 0.0
    for k in range(capture.n_slot):
        seg = y[:, :, k * P + delay_idx: k * P + delay_idx + W]
        E += float(np.sum(np.abs(seg) ** 2))
        v[:, k, :] = np.einsum("sbn,bn->sb", seg, tpls.conj())
    return v.reshape(capture.n_streams, -1), E


def statistic_at(capture: TimeCapture, waveform: PssWaveform, delay_idx: int,
                 cfo_hz: float = 0.0):
    v, E = correlate_capture(capture, waveform, delay_idx, cfo_hz)
    hyp = (waveform.waveform_id, delay_idx, cfo_hz)
    if capture.kind == "digital":
        return statistic_digital(v, E, hypothesis=hyp)
    return statistic_analog(v.reshape(-1), E, hypothesis=hyp)


def scan_statistics(capture: TimeCapture, waveform: PssWaveform,
                    cfo_hz: float = 0.0) -> np.ndarray:
    """T for every delay hypothesis 0..period-1 (one waveform, one offset).

    Sliding correlations and window energies come from full cross-correlation
    and cumulative sums, so the whole delay grid costs about one FFT pass.
    """
    y = _derotated(capture, cfo_hz)
    tpls = band_templates(waveform)
    P, W = capture.period_samples, capture.window_samples
    n_s, n_b, n_tot = y.shape
    n_lags = n_tot - W + 1
    corr = np.empty((n_s, n_b, n_lags), dtype=complex)
    for s in range(n_s):
        for b in range(n_b):
            corr[s, b] = np.correlate(y[s, b], tpls[b], mode="valid")
    cs = np.concatenate([np.zeros((n_s, n_b, 1)), np.cumsum(np.abs(y) ** 2, axis=-1)],
                        axis=-1)
    ewin = cs[:, :, W:] - cs[:, :, :-W]          # energy of [n, n+W)

    delays = np.arange(P)
    slot_starts = np.arange(capture.n_slot) * P
    idx = slot_starts[None, :] + delays[:, None]             # (P, n_slot)
    E = ewin[:, :, idx].sum(axis=(0, 1, 3))                  # (P,)
    v = corr[:, :, idx]                                      # (n_s, n_b, P, n_slot)
    if capture.kind == "digital":
        V = v.transpose(2, 0, 3, 1).reshape(P, n_s, -1)      # (P, n_rx, L)
        s2, _ = sigma_sq_max(V)
        T = s2 / E
    else:
        T = np.sum(np.abs(v) ** 2, axis=(0, 1, 3)) / E
    return T


def search_capture(capture: TimeCapture, waveforms: list[PssWaveform],
                   threshold: float, cfo_grid_hz=(0.0,),
                   mode: str = "full", true_hypothesis: tuple | None = None) -> SearchResult:
    """Scan the delay x waveform x frequency grid (or just the true hypothesis)
    and report the best hypothesis against the threshold."""
    if mode == "fast":
        if true_hypothesis is None:
            raise ValueError("fast mode needs the true hypothesis")
        wf_id, delay_idx, cfo = true_hypothesis
        wf = next(w for w in waveforms if w.waveform_id == wf_id)
        stat = statistic_at(capture, wf, delay_idx, cfo)
        det = stat.T >= threshold
        return SearchResult(det, true_hypothesis if det else None, stat.T)
    if mode != "full":
        raise ValueError(f"unknown search mode {mode!r}")
    best_T, best_hyp = -1.0, None
    for wf in waveforms:
        for cfo in cfo_grid_hz:
            T = scan_statistics(capture, wf, cfo)
            d = int(np.argmax(T))
            if T[d] > best_T:
                best_T, best_hyp = float(T[d]), (wf.waveform_id, d, cfo)
    return SearchResult(best_T >= threshold, best_hyp if best_T >= threshold else None,
                        best_T)
