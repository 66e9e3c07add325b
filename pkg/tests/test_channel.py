import numpy as np
import pytest
from scipy import stats

from mmwsync.arrays import ArrayGeometry, random_direction, steering_vector
from mmwsync.channel import (MultipathParams, draw_multipath, draw_single_path,
                             effective_gain_analog, effective_gain_digital)
from mmwsync.streams import complex_normal, substream

BS = ArrayGeometry(8, 8)
UE = ArrayGeometry(4, 4)


def test_single_path_rank_one():
    rng = substream(1)
    ch = draw_single_path(BS, UE, 8, rng)
    H = ch.matrix(3)
    assert np.linalg.matrix_rank(H, tol=1e-9) == 1
    # reconstruct from the rank-one pieces
    expect = np.sqrt(16 * 64) * ch.g[3] * np.outer(ch.u, ch.v.conj())
    assert np.allclose(H, expect, atol=1e-12)


def test_single_path_signatures_constant_across_subsignals():
    rng = substream(2)
    ch = draw_single_path(BS, UE, 12, rng)
    for ell in range(12):
        a, u = effective_gain_digital(ch, _omni(BS), ell)
        assert np.array_equal(u, ch.u)


def test_gain_second_moment():
    rng = substream(3)
    g = np.concatenate([draw_single_path(BS, UE, 100, rng).g for _ in range(1000)])
    assert np.mean(np.abs(g) ** 2) == pytest.approx(1.0, abs=0.01)


def test_gain_models():
    rng = substream(4)
    ch = draw_single_path(BS, UE, 12, rng, n_sig=4, gain_model="constant")
    assert np.all(ch.g == ch.g[0])
    ch = draw_single_path(BS, UE, 12, rng, n_sig=4, gain_model="block")
    assert np.all(ch.g[:4] == ch.g[0])
    assert not np.all(ch.g[4] == ch.g[0])
    with pytest.raises(ValueError):
        draw_single_path(BS, UE, 12, rng, n_sig=4, gain_model="banana")


def _omni(geom):
    w = np.zeros(geom.n_elements, dtype=complex)
    w[0] = 1.0
    return w


def test_effective_gain_digital_alignment():
    rng = substream(5)
    ch = draw_single_path(BS, UE, 4, rng)
    alpha, u = effective_gain_digital(ch, ch.v.copy(), 2)
    assert abs(abs(alpha) - abs(ch.g[2])) < 1e-12
    # weight orthogonal to v nulls the link
    w = np.zeros(64, dtype=complex)
    w[0], w[1] = ch.v[1].conj(), -ch.v[0].conj()
    alpha, _ = effective_gain_digital(ch, w, 2)
    assert abs(alpha) < 1e-12


def direction_avg_gain(geom, v):
    """Analytic mean of |a(d)^H v|^2 over sphere-uniform directions.

    E[a a^H]_{ij} = sinc(rho_ij) / N with rho the element offset in
    half-wavelength units, so the average is the quadratic form v^H C v.
    """
    m = np.repeat(np.arange(geom.rows), geom.cols)
    n = np.tile(np.arange(geom.cols), geom.rows)
    rho = np.hypot(m[:, None] - m[None, :], n[:, None] - n[None, :]) * 2 * geom.spacing_wl
    C = np.sinc(rho) / geom.n_elements
    return float(np.real(v.conj() @ C @ v))


def test_effective_gain_digital_isotropy():
    # random unit-power beams average 1/N_tx of the power for a linear array;
    # for the planar array the average is the sinc-covariance quadratic form
    from mmwsync.arrays import random_directions, steering_many
    rng = substream(6)
    ch = draw_single_path(BS, UE, 1, rng)
    az, el = random_directions(rng, 100_000)
    W = steering_many(BS, az, el)
    gains = np.abs(W.conj() @ ch.v) ** 2
    assert np.mean(gains) == pytest.approx(direction_avg_gain(BS, ch.v), rel=0.02)


def test_effective_gain_analog_alignment_and_null():
    rng = substream(7)
    ch = draw_single_path(BS, UE, 4, rng)
    beta = effective_gain_analog(ch, ch.v.copy(), ch.u.copy(), 1)
    assert abs(beta - ch.g[1]) < 1e-12
    w_rx = np.zeros(16, dtype=complex)
    w_rx[0], w_rx[1] = ch.u[1].conj(), -ch.u[0].conj()
    assert abs(effective_gain_analog(ch, ch.v.copy(), w_rx, 1)) < 1e-12


def test_effective_gain_analog_isotropy():
    from mmwsync.arrays import random_directions, steering_many
    rng = substream(8)
    ch = draw_single_path(BS, UE, 1, rng)
    # beta = g (w_rx^H u)(v^H w_tx), so |beta|^2 factorizes over the two ends
    acc, n = 0.0, 200_000
    for _ in range(10):
        az_t, el_t = random_directions(rng, n // 10)
        az_r, el_r = random_directions(rng, n // 10)
        gt = np.abs(steering_many(BS, az_t, el_t).conj() @ ch.v) ** 2
        gr = np.abs(steering_many(UE, az_r, el_r).conj() @ ch.u) ** 2
        acc += np.sum(gt * gr)
    expect = (abs(ch.g[0]) ** 2 * direction_avg_gain(BS, ch.v)
              * direction_avg_gain(UE, ch.u))
    assert abs(ch.g[0]) ** 2 * acc / n == pytest.approx(expect, rel=0.05)


def test_effective_gain_dimension_check():
    rng = substream(9)
    ch = draw_single_path(BS, UE, 4, rng)
    with pytest.raises(ValueError):
        effective_gain_digital(ch, np.ones(5, dtype=complex), 0)


def test_multipath_power_normalization():
    rng = substream(10, "norm")
    params = MultipathParams()
    total = 0.0
    n = 10000
    for _ in range(n):
        ch = draw_multipath(params, BS, UE, 1, rng)
        total += np.sum(np.abs(ch.matrix(0)) ** 2)
    assert total / n / (16 * 64) == pytest.approx(1.0, abs=0.02)


def test_multipath_effective_rank_pinned():
    # frozen from a 10^4-realization SVD enumeration: mean count of singular
    # values above 0.1 * sigma_max is 5.27 under the default cluster model
    rng = substream(42, "rank-oracle")
    ranks = []
    for _ in range(2000):
        ch = draw_multipath(MultipathParams(), BS, UE, 1, rng)
        s = np.linalg.svd(ch.matrix(0), compute_uv=False)
        ranks.append(np.sum(s >= 0.1 * s[0]))
    assert np.mean(ranks) == pytest.approx(5.27, abs=0.15)


def test_multipath_rejects_negative_spread():
    with pytest.raises(ValueError):
        MultipathParams(spread_deg=-1.0)


def test_multipath_zero_spread_single_cluster_degenerates():
    # one cluster, no spread, one subpath reduces to a single-path draw;
    # |beta| distributions must agree (Kolmogorov-Smirnov at 1%)
    rng = substream(11)
    params = MultipathParams(cluster_mean=0.0, spread_deg=0.0, subpaths=1)
    w_tx = _omni(BS)
    def betas(drawer, n):
        out = []
        for _ in range(n):
            ch = drawer()
            w_rx = steering_vector(UE, random_direction(rng))
            out.append(abs(effective_gain_analog(ch, w_tx, w_rx, 0)))
        return np.asarray(out)
    b_multi = betas(lambda: draw_multipath(params, BS, UE, 1, rng), 10000)
    b_single = betas(lambda: draw_single_path(BS, UE, 1, rng), 10000)
    assert stats.ks_2samp(b_multi, b_single).pvalue > 0.01


def test_multipath_gain_matrix_shapes():
    rng = substream(12)
    ch = draw_multipath(MultipathParams(), BS, UE, 8, rng, n_sig=2)
    vec = effective_gain_digital(ch, _omni(BS), 3)
    assert vec.shape == (16,)
    w = np.zeros((2, 4, 16), dtype=complex)
    w[:, :, 0] = 1.0
    beta = ch.combined_gains(np.tile(_omni(BS), (4, 1)), w, 2)
    assert beta.shape == (2, 8)


def test_combined_gains_matches_scalar_path():
    rng = substream(13)
    ch = draw_multipath(MultipathParams(), BS, UE, 6, rng, n_sig=2)
    w_tx = np.tile(_omni(BS), (3, 1))
    w_rx = complex_normal(rng, (1, 3, 16))
    w_rx /= np.linalg.norm(w_rx, axis=2, keepdims=True)
    beta = ch.combined_gains(w_tx, w_rx, 2)
    for ell in range(6):
        k = ell // 2
        direct = effective_gain_analog(ch, w_tx[k], w_rx[0, k], ell)
        assert abs(beta[0, ell] - direct) < 1e-10
