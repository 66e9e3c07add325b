"""Detection statistics for the sync-signal search.

For a digital front-end the test statistic is T = sigma_max^2(V) / E where V
stacks the per-sub-signal matched-filter vectors across antennas and E is the
total received energy in the processed slots; the maximizing left singular
vector doubles as the spatial-signature estimate.  For analog or hybrid
front-ends the statistic is T = ||v||^2 / E, non-coherently adding matched
filter energy across sub-signals and streams.  Both are scale invariant and
confined to [0, 1].

`glrt_lambda_oracle` re-derives the log likelihood ratio through the explicit
per-hypothesis maximizations (noise level, spatial signature, per-sub-signal
gains) without the T shortcut; it exists to cross-check the statistic path:
Lambda = -n_slot * M * log(1 - T) with M the per-slot observation dimension.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .frontend import SlotObservation
from .pss import PssConfig, PssWaveform, freq_grid_params


@dataclass(frozen=True)
class HypothesisGrid:
    """Delay x frequency x waveform search grid."""

    delays_s: np.ndarray       # n_dly offsets in [0, t_per), spacing 1/(2 w_sig)
    freq_offsets_hz: np.ndarray  # n_fo values spanning +-df_max at spacing df
    waveform_ids: tuple[int, ...]

    @property
    def n_dly(self) -> int:
        return len(self.delays_s)

    @property
    def n_fo(self) -> int:
        return len(self.freq_offsets_hz)

    @property
    def n_hyp(self) -> int:
        return self.n_dly * len(self.waveform_ids) * self.n_fo


def build_grid(cfg: PssConfig) -> HypothesisGrid:
    delays = np.arange(cfg.n_dly) / (2.0 * cfg.w_sig)
    df, _, n_fo = freq_grid_params(cfg)
    offsets = (np.arange(n_fo) - (n_fo - 1) / 2.0) * df
    return HypothesisGrid(delays_s=delays, freq_offsets_hz=offsets,
                          waveform_ids=tuple(range(1, cfg.n_pss + 1)))


@dataclass
class DetectionStatistic:
    """Statistic value with the pieces retained for testing."""

    T: float
    E: float
    components: np.ndarray                 # V matrix (digital) or v vector
    hypothesis: tuple | None = None        # (waveform_id, delay_idx, fo_idx)
    u_hat: np.ndarray | None = None        # spatial-signature estimate (digital)


def _check_kinds(observations, allowed):
    kinds = {o.kind for o in observations}
    if len(kinds) != 1:
        raise ValueError(f"mixed frontend kinds in one search: {sorted(kinds)}")
    kind = kinds.pop()
    if kind not in allowed:
        raise ValueError(f"observation kind {kind!r} not valid here")
    return kind


def total_energy(observations) -> float:
    """E = sum of squared magnitudes over all processed slots (and streams)."""
    return float(sum(np.sum(np.abs(o.data) ** 2) for o in observations))


def correlate_digital(observations: list[SlotObservation], waveform: PssWaveform,
                      freq_offset_hz: float = 0.0,
                      cfg: PssConfig | None = None) -> np.ndarray:
    """Matched-filter matrix V, column ell = R_{slot(ell)} p_ell (antennas down).

    A non-zero frequency hypothesis applies the per-sub-signal derotation and
    intra-slot decoherence factor; the default search leaves it at zero.
    """
    _check_kinds(observations, ("digital", "digital_q"))
    cols = []
    for k, obs in enumerate(observations, start=1):
        block = obs.data @ waveform.coeffs.T          # (n_rx, n_sig)
        if freq_offset_hz != 0.0:
            block = block * _derotation(freq_offset_hz, k, waveform.coeffs.shape[0], cfg)
        cols.append(block)
    return np.concatenate(cols, axis=1)


def correlate_analog(observations: list[SlotObservation], waveform: PssWaveform,
                     freq_offset_hz: float = 0.0,
                     cfg: PssConfig | None = None) -> np.ndarray:
    """Matched-filter vector over sub-signals; hybrid streams are concatenated."""
    _check_kinds(observations, ("analog", "hybrid"))
    parts = []
    for k, obs in enumerate(observations, start=1):
        block = obs.data @ waveform.coeffs.T          # (n_streams, n_sig)
        if freq_offset_hz != 0.0:
            block = block * _derotation(freq_offset_hz, k, waveform.coeffs.shape[0], cfg)
        parts.append(block)
    v = np.stack(parts, axis=1)                        # (n_streams, n_slot, n_sig)
    return v.reshape(-1)


def _derotation(freq_offset_hz, slot_k, n_sig, cfg):
    if cfg is None:
        raise ValueError("frequency hypotheses need the signal config for timing")
    phase = -2.0 * np.pi * freq_offset_hz * (slot_k - 1) * cfg.t_per
    decoherence = np.sinc(freq_offset_hz * cfg.t_sig)
    return decoherence * np.exp(1j * phase) * np.ones(n_sig)


def sigma_sq_max(V: np.ndarray, tol: float = 1e-10, max_iter: int = 4000,
                 _sub_batch: int = 1024):
    """Largest squared singular value of V (and the left singular vector) by
    power iteration on the small Gram matrix B = V V^H with a deterministic
    start vector.

    Batched input (..., n_rx, L) is supported.  The iteration runs on B^8
    (the usual squaring acceleration; B is positive semidefinite so powering
    is safe) while convergence is judged on B itself: the loop stops once the
    eigen-residual ||B x - lam x|| falls below tol * lam, which for Hermitian
    B bounds the eigenvalue error by tol directly.  Rare non-converged
    stragglers (nearly degenerate top eigenvalues) finish with an exact
    eigendecomposition.
    """
    single = V.ndim == 2
    Vb = V[None] if single else V
    lam = np.empty(Vb.shape[0])
    vec = np.empty((Vb.shape[0], Vb.shape[1]), dtype=complex)
    for lo in range(0, Vb.shape[0], _sub_batch):
        hi = min(lo + _sub_batch, Vb.shape[0])
        lam[lo:hi], vec[lo:hi] = _power_iterate(Vb[lo:hi], tol, max_iter)
    if single:
        return float(lam[0]), vec[0]
    return lam, vec


def _power_iterate(Vb: np.ndarray, tol: float, max_iter: int):
    B = Vb @ Vb.conj().swapaxes(-1, -2)
    P = B @ B
    P = P @ P
    P = P @ P                                    # B^8
    batch, n = B.shape[0], B.shape[-1]
    floor = np.finfo(float).tiny
    lam_out = np.zeros(batch)
    vec_out = np.empty((batch, n), dtype=complex)
    trace = np.einsum("bii->b", B).real

    idx = np.arange(batch)                       # still-active absolute indices
    x = np.full((batch, n, 1), 1.0 / np.sqrt(n), dtype=complex)
    Bw, Pw, tr = B, P, trace
    for _ in range(max_iter):
        bx = Bw @ x
        lam = (x.conj().swapaxes(-1, -2) @ bx).real.reshape(-1)
        resid = np.linalg.norm(bx - lam[:, None, None] * x, axis=(1, 2))
        # a zero Rayleigh quotient on a non-zero matrix means the start vector
        # sits in the null space; leave those for the exact fallback
        conv = (resid <= tol * np.maximum(lam, floor)) & ~((lam <= 0.0) & (tr > 0.0))
        if conv.any():
            lam_out[idx[conv]] = lam[conv]
            vec_out[idx[conv]] = x[conv, :, 0]
            keep = ~conv
            if not keep.any():
                idx = idx[:0]
                break
            idx, x, Bw, Pw, tr = idx[keep], x[keep], Bw[keep], Pw[keep], tr[keep]
        y = Pw @ x
        norms = np.linalg.norm(y, axis=(1, 2))
        x = y / np.maximum(norms, floor)[:, None, None]
    if len(idx):
        # stragglers with nearly degenerate top eigenvalues: finish exactly
        w, Q = np.linalg.eigh(Bw)
        lam_out[idx] = w[:, -1]
        vec_out[idx] = Q[:, :, -1]
    return np.maximum(lam_out, 0.0), vec_out


def statistic_digital(V: np.ndarray, E: float,
                      hypothesis: tuple | None = None) -> DetectionStatistic:
    """T = sigma_max^2(V) / E; keeps the maximizing direction as u_hat."""
    if E <= 0:
        raise ValueError("degenerate observation: total energy is zero")
    s2, u_hat = sigma_sq_max(V)
    T = s2 / E
    assert -1e-9 <= T <= 1.0 + 1e-9
    return DetectionStatistic(T=float(min(max(T, 0.0), 1.0)), E=float(E),
                              components=V, hypothesis=hypothesis, u_hat=u_hat)


def statistic_analog(v: np.ndarray, E: float,
                     hypothesis: tuple | None = None) -> DetectionStatistic:
    """T = ||v||^2 / E over all sub-signals and streams."""
    if E <= 0:
        raise ValueError("degenerate observation: total energy is zero")
    T = float(np.sum(np.abs(v) ** 2)) / E
    assert -1e-9 <= T <= 1.0 + 1e-9
    return DetectionStatistic(T=float(min(max(T, 0.0), 1.0)), E=float(E),
                              components=v, hypothesis=hypothesis)


def evaluate(observations: list[SlotObservation], waveform: PssWaveform,
             freq_offset_hz: float = 0.0,
             cfg: PssConfig | None = None) -> DetectionStatistic:
    """Statistic of the given waveform hypothesis on coefficient observations."""
    kind = _check_kinds(observations, ("digital", "digital_q", "analog", "hybrid"))
    E = total_energy(observations)
    if kind in ("digital", "digital_q"):
        V = correlate_digital(observations, waveform, freq_offset_hz, cfg)
        return statistic_digital(V, E, hypothesis=(waveform.waveform_id, None, freq_offset_hz))
    v = correlate_analog(observations, waveform, freq_offset_hz, cfg)
    return statistic_analog(v, E, hypothesis=(waveform.waveform_id, None, freq_offset_hz))


# --- direct-maximization likelihood oracle ------------------------------------

def glrt_lambda_oracle(observations: list[SlotObservation],
                       waveform: PssWaveform) -> float:
    """Log likelihood ratio by the explicit nested maximizations.

    Both hypotheses plug in the closed-form noise level (energy over
    dimension); the signal hypothesis estimates the spatial signature from an
    exact SVD and the per-sub-signal gains by projection, then measures the
    residual energy literally by reconstructing and subtracting the fitted
    signal.  No use of the T = sigma^2/E shortcut anywhere.
    """
    kind = _check_kinds(observations, ("digital", "digital_q", "analog", "hybrid"))
    n_slot = len(observations)
    if kind in ("digital", "digital_q"):
        n_rx, n_dim = observations[0].data.shape
        M = n_rx * n_dim
        V = correlate_digital(observations, waveform)
        u_hat = np.linalg.svd(V, compute_uv=True)[0][:, 0]
        alpha_hat = u_hat.conj() @ V                          # per-sub-signal gains
        n_sig = waveform.coeffs.shape[0]
        resid = 0.0
        for k, obs in enumerate(observations):
            a_k = alpha_hat[k * n_sig:(k + 1) * n_sig]
            fitted = np.outer(u_hat, a_k) @ waveform.coeffs.conj()
            resid += float(np.sum(np.abs(obs.data - fitted) ** 2))
    else:
        n_streams, n_dim = observations[0].data.shape
        M = n_streams * n_dim
        resid = 0.0
        for obs in observations:
            beta_hat = obs.data @ waveform.coeffs.T           # (n_streams, n_sig)
            fitted = beta_hat @ waveform.coeffs.conj()
            resid += float(np.sum(np.abs(obs.data - fitted) ** 2))

    energy = total_energy(observations)
    nu0 = energy / (n_slot * M)
    nu1 = resid / (n_slot * M)
    lam0 = sum(float(np.sum(np.abs(o.data) ** 2)) / nu0 + M * np.log(2 * np.pi * nu0)
               for o in observations)
    lam1 = n_slot * M * np.log(2 * np.pi * nu1) + resid / nu1
    return lam0 - lam1


def lambda_from_T(T: float, n_slot: int, per_slot_dim: int) -> float:
    """Monotone map Lambda = -n_slot * M * log(1 - T)."""
    return -n_slot * per_slot_dim * np.log1p(-T)


# --- threshold search ---------------------------------------------------------

@dataclass(frozen=True)
class SearchResult:
    detected: bool
    hypothesis: tuple | None    # (waveform_id, delay_idx, fo_idx)
    statistic: float


def search(observations: list[SlotObservation], waveforms: list[PssWaveform],
           threshold: float, mode: str = "fast",
           true_waveform_id: int | None = None,
           cfg: PssConfig | None = None) -> SearchResult:
    """Decide signal presence on coefficient-space observations.

    fast mode evaluates only the true hypothesis (misdetection measurement);
    full mode scans all waveform hypotheses and reports the maximizer.  Delay
    and frequency offsets are an alignment property of the coefficient
    representation, so scanning them lives in the time-domain search
    (`timedomain.search_capture`).
    """
    if threshold is None:
        raise ValueError("no calibrated threshold for this observation kind")
    if mode == "fast":
        if true_waveform_id is None:
            raise ValueError("fast mode needs the true waveform id")
        wf = next(w for w in waveforms if w.waveform_id == true_waveform_id)
        stat = evaluate(observations, wf, cfg=cfg)
        hyp = (wf.waveform_id, 0, 0)
        return SearchResult(stat.T >= threshold, hyp if stat.T >= threshold else None, stat.T)
    if mode != "full":
        raise ValueError(f"unknown search mode {mode!r}")
    best_T, best_hyp = -1.0, None
    for wf in waveforms:
        stat = evaluate(observations, wf, cfg=cfg)
        if stat.T > best_T:
            best_T, best_hyp = stat.T, (wf.waveform_id, 0, 0)
    return SearchResult(best_T >= threshold, best_hyp if best_T >= threshold else None, best_T)
