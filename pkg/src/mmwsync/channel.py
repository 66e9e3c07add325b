"""Channel realizations: rank-one single-path and statistical multipath
cluster channels, with per-sub-signal small-scale gains.

Channel matrices follow the physical normalization E||H_ell||_F^2 =
n_rx * n_tx (unit average per element pair).  The rank-one spatial
signatures u, v exposed for the detector are unit norm, so the normalized
gain alpha_ell = g_ell * v^H w_tx relates to the physical receive vector by
a factor sqrt(n_rx * n_tx); `effective_gain_*` return the normalized
convention, `rx_vectors`/`combined_gains` the physical one.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .arrays import ArrayGeometry, random_directions, steering_many
from .streams import complex_normal

GAIN_MODELS = ("iid", "constant", "block")


@dataclass(frozen=True)
class MultipathParams:
    """Cluster-model knobs; values follow measurement-based urban models and
    are deliberately config-exposed since they dominate the multipath claims."""

    cluster_mean: float = 1.8       # clusters ~ 1 + Poisson(cluster_mean)
    power_decay: float = 1.0        # e-folding of the cluster power profile
    spread_deg: float = 10.0        # rms angular spread per cluster, az and el
    subpaths: int = 20

    def __post_init__(self):
        if self.spread_deg < 0:
            raise ValueError("angular spread must be non-negative")
        if self.subpaths < 1:
            raise ValueError("need at least one subpath per cluster")
        if self.cluster_mean < 0:
            raise ValueError("cluster mean must be non-negative")


@dataclass(frozen=True)
class ChannelRealization:
    """Frozen draw of the propagation channel for one search period.

    a_rx, a_tx: unit-norm array responses per subpath, constant over the
    search ("the spatial signatures do not change over the detection period").
    gains: (n_subpaths, L) small-scale gains with sum_s E|gains[s, l]|^2 = 1.
    """

    bs: ArrayGeometry
    ue: ArrayGeometry
    a_rx: np.ndarray            # (n_rx, S)
    a_tx: np.ndarray            # (n_tx, S)
    subpath_power: np.ndarray   # (S,), sums to 1
    gains: np.ndarray           # (S, L)
    single_path: bool

    @property
    def n_rx(self) -> int:
        return self.ue.n_elements

    @property
    def n_tx(self) -> int:
        return self.bs.n_elements

    @property
    def u(self) -> np.ndarray:
        """Unit-norm receive signature (single-path only)."""
        self._require_single()
        return self.a_rx[:, 0]

    @property
    def v(self) -> np.ndarray:
        """Unit-norm transmit signature (single-path only)."""
        self._require_single()
        return self.a_tx[:, 0]

    @property
    def g(self) -> np.ndarray:
        """Per-sub-signal gains g_ell (single-path only)."""
        self._require_single()
        return self.gains[0]

    def _require_single(self):
        if not self.single_path:
            raise ValueError("rank-one accessors are only valid for single-path draws")

    def matrix(self, ell: int) -> np.ndarray:
        """Physical channel matrix H_ell (0-based ell), E||H||_F^2 = n_rx*n_tx."""
        scale = np.sqrt(self.n_rx * self.n_tx)
        return scale * (self.a_rx * self.gains[:, ell]) @ self.a_tx.conj().T

    def rx_vectors(self, w_tx_per_slot: np.ndarray, n_sig: int) -> np.ndarray:
        """Normalized receive vectors (H_ell @ w_tx) / sqrt(n_rx n_tx) for
        every sub-signal (single path: alpha_ell * u).

        w_tx_per_slot: (n_slot, n_tx) with one weight per slot, shared by the
        n_sig sub-signals of that slot.  Returns (n_rx, L).
        """
        b = self.a_tx.conj().T @ w_tx_per_slot.T          # (S, n_slot)
        b_ell = np.repeat(b, n_sig, axis=1)               # (S, L)
        return self.a_rx @ (self.gains * b_ell)

    def combined_gains(self, w_tx_per_slot: np.ndarray, w_rx_per_slot: np.ndarray,
                       n_sig: int) -> np.ndarray:
        """Normalized combined gains beta_ell per stream (the single-path
        g_ell (w_rx^H u)(v^H w_tx) convention, matching effective_gain_analog).

        w_rx_per_slot: (n_streams, n_slot, n_rx).  Returns (n_streams, L).
        """
        b = self.a_tx.conj().T @ w_tx_per_slot.T                      # (S, n_slot)
        c = np.einsum("ski,ip->skp", w_rx_per_slot.conj(), self.a_rx)  # (streams, n_slot, S)
        n_slot = w_tx_per_slot.shape[0]
        gains = self.gains.reshape(-1, n_slot, n_sig)                 # (S, n_slot, n_sig)
        beta = np.einsum("skp,pkl,pk->skl", c, gains, b)
        return beta.reshape(c.shape[0], -1)


def _draw_gains(rng: np.random.Generator, power: np.ndarray, n_sub: int, n_sig: int,
                model: str) -> np.ndarray:
    """Small-scale gains per subpath and sub-signal according to the fading model."""
    n_paths = len(power)
    if model == "iid":
        g = complex_normal(rng, (n_paths, n_sub))
    elif model == "constant":
        g = np.repeat(complex_normal(rng, (n_paths, 1)), n_sub, axis=1)
    elif model == "block":
        n_slot = n_sub // n_sig
        g = np.repeat(complex_normal(rng, (n_paths, n_slot)), n_sig, axis=1)
    else:
        raise ValueError(f"unknown gain model {model!r}")
    return g * np.sqrt(power)[:, None]


def draw_single_path(bs: ArrayGeometry, ue: ArrayGeometry, n_sub: int,
                     rng: np.random.Generator, n_sig: int = 1,
                     gain_model: str = "iid") -> ChannelRealization:
    """Rank-one channel: one path with no angular dispersion, directions uniform
    on the sphere, gains unit-variance circular Gaussian."""
    az_t, el_t = random_directions(rng, 1)
    az_r, el_r = random_directions(rng, 1)
    a_tx = steering_many(bs, az_t, el_t).T     # (n_tx, 1)
    a_rx = steering_many(ue, az_r, el_r).T
    power = np.ones(1)
    gains = _draw_gains(rng, power, n_sub, n_sig, gain_model)
    return ChannelRealization(bs=bs, ue=ue, a_rx=a_rx, a_tx=a_tx,
                              subpath_power=power, gains=gains, single_path=True)


def draw_multipath(params: MultipathParams, bs: ArrayGeometry, ue: ArrayGeometry,
                   n_sub: int, rng: np.random.Generator, n_sig: int = 1,
                   gain_model: str = "iid") -> ChannelRealization:
    """Cluster channel: random cluster count, Laplacian subpath offsets around
    uniform central directions, exponential-profile cluster powers, total
    average power matching the single-path normalization."""
    n_clusters = 1 + rng.poisson(params.cluster_mean)
    raw = rng.exponential(size=n_clusters) * np.exp(-np.arange(n_clusters) / params.power_decay)
    cluster_power = raw / raw.sum()

    spread = np.deg2rad(params.spread_deg)
    lap_scale = spread / np.sqrt(2.0)  # Laplace rms = scale * sqrt(2)
    n_sp = params.subpaths

    az_ct, el_ct = random_directions(rng, n_clusters)
    az_cr, el_cr = random_directions(rng, n_clusters)

    def offsets(center_az, center_el):
        az = np.repeat(center_az, n_sp) + rng.laplace(0.0, lap_scale, n_clusters * n_sp) \
            if lap_scale > 0 else np.repeat(center_az, n_sp)
        el = np.repeat(center_el, n_sp) + (rng.laplace(0.0, lap_scale, n_clusters * n_sp)
                                           if lap_scale > 0 else 0.0)
        az = np.mod(az + np.pi, 2 * np.pi) - np.pi
        el = np.clip(el, -np.pi / 2, np.pi / 2)
        return az, el

    az_t, el_t = offsets(az_ct, el_ct)
    az_r, el_r = offsets(az_cr, el_cr)
    a_tx = steering_many(bs, az_t, el_t).T
    a_rx = steering_many(ue, az_r, el_r).T
    power = np.repeat(cluster_power / n_sp, n_sp)
    gains = _draw_gains(rng, power, n_sub, n_sig, gain_model)
    return ChannelRealization(bs=bs, ue=ue, a_rx=a_rx, a_tx=a_tx,
                              subpath_power=power, gains=gains, single_path=False)


def effective_gain_digital(chan: ChannelRealization, w_tx: np.ndarray, ell: int):
    """Receive-side signal seen by a digital front-end for sub-signal ell.

    Single path: (alpha_ell, u) with alpha_ell = g_ell * v^H w_tx.  Multipath:
    the receive vector H_ell @ w_tx in the same normalized convention (divided
    by sqrt(n_rx*n_tx)) so amplitudes are comparable across channel modes.
    """
    if w_tx.shape != (chan.n_tx,):
        raise ValueError("w_tx dimension does not match the transmit array")
    if chan.single_path:
        alpha = chan.g[ell] * np.vdot(chan.v, w_tx)
        return alpha, chan.u
    return chan.matrix(ell) @ w_tx / np.sqrt(chan.n_rx * chan.n_tx)


def effective_gain_analog(chan: ChannelRealization, w_tx: np.ndarray,
                          w_rx: np.ndarray, ell: int) -> complex:
    """Combined gain beta_ell = g_ell * (w_rx^H u)(v^H w_tx) after TX and RX
    beamforming (normalized convention, identical across channel modes)."""
    if w_tx.shape != (chan.n_tx,) or w_rx.shape != (chan.n_rx,):
        raise ValueError("beam weight dimensions do not match the arrays")
    if chan.single_path:
        return chan.g[ell] * np.vdot(w_rx, chan.u) * np.vdot(chan.v, w_tx)
    return complex(w_rx.conj() @ chan.matrix(ell) @ w_tx) / np.sqrt(chan.n_rx * chan.n_tx)
