"""Fast invariant suite behind the `validate` command: statistic identities,
budget arithmetic and quantizer moments at small scale."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .arrays import ArrayGeometry, steering_vector, Direction
from .calibration import fa_budget
from .channel import draw_single_path
from .detector import evaluate, glrt_lambda_oracle, lambda_from_T
from .frontend import FrontendSpec, observe_slot, quantize, relative_quant_error
from .harness import rate_target_snr, snr_convert
from .pss import build_config, generate_waveforms
from .streams import complex_normal, substream


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str


def _small_setup(seed=101):
    rng = substream(seed, "selfcheck")
    cfg = build_config(n_dim=48, n_slot=3, n_sig=2, n_pss=2, w_sig=1e6, t_sig=2e-5)
    wfs = generate_waveforms(cfg)
    bs, ue = ArrayGeometry(4, 2), ArrayGeometry(2, 2)
    chan = draw_single_path(bs, ue, cfg.n_sub, rng, n_sig=cfg.n_sig)
    w_tx = np.zeros(bs.n_elements, dtype=complex)
    w_tx[0] = 1.0
    return rng, cfg, wfs, bs, ue, chan, w_tx


def run_selfchecks(n_trials: int = 200, inject_fault: bool = False) -> list[CheckResult]:
    checks: list[CheckResult] = []
    rng, cfg, wfs, bs, ue, chan, w_tx = _small_setup()

    # false-alarm budget arithmetic at full-scale defaults
    budget = fa_budget(build_config())
    p_fa_expected = 0.01 / (10000 * 3 * 23)
    if inject_fault:
        p_fa_expected *= 2.0   # test hook: force a failure
    ok = (budget.n_dly == 10000 and budget.n_fo == 23
          and abs(budget.p_fa - p_fa_expected) < 1e-15)
    checks.append(CheckResult("budget arithmetic",
                              ok, f"p_fa={budget.p_fa:.6g} n_fo={budget.n_fo}"))

    # likelihood-ratio equivalence on random data, both receiver families
    worst = 0.0
    for trial in range(max(n_trials // 4, 20)):
        r = substream(7, "lambda", trial)
        amp = 1.5 if trial % 2 else 0.0
        for spec, dim in ((FrontendSpec("digital"), ue.n_elements * cfg.n_dim),
                          (FrontendSpec("analog"), cfg.n_dim)):
            obs = [observe_slot(spec, wfs[0], k, chan, w_tx, amp, 1.0, r)
                   for k in range(1, cfg.n_slot + 1)]
            stat = evaluate(obs, wfs[0])
            lam_direct = glrt_lambda_oracle(obs, wfs[0])
            lam_short = lambda_from_T(stat.T, cfg.n_slot, dim)
            worst = max(worst, abs(lam_direct - lam_short) / max(abs(lam_short), 1e-30))
    checks.append(CheckResult("likelihood-ratio equivalence", worst < 1e-9,
                              f"worst rel err {worst:.2e}"))

    # scale invariance (exact for power-of-two scaling) and bounds
    spec = FrontendSpec("digital")
    obs = [observe_slot(spec, wfs[0], k, chan, w_tx, 1.0, 1.0, rng)
           for k in range(1, cfg.n_slot + 1)]
    t1 = evaluate(obs, wfs[0]).T
    for o in obs:
        o.data = o.data * 4.0
    t2 = evaluate(obs, wfs[0]).T
    ok = t2 == t1 and 0.0 <= t1 <= 1.0
    checks.append(CheckResult("scale invariance", ok, f"T={t1:.6g}"))

    # noiseless detection captures all energy
    obs = [observe_slot(spec, wfs[0], k, chan, w_tx, 1.0, 0.0, rng)
           for k in range(1, cfg.n_slot + 1)]
    t_noiseless = evaluate(obs, wfs[0]).T
    checks.append(CheckResult("noiseless statistic is 1",
                              abs(t_noiseless - 1.0) < 1e-9, f"T={t_noiseless!r}"))

    # quantizer surrogate second moment: E|Q(r)|^2 = (1-alpha) E|r|^2
    alpha = relative_quant_error(3)
    r = substream(11, "quant")
    x = complex_normal(r, (n_trials, 4096), 1.0)
    from .frontend import SlotObservation
    q = quantize(SlotObservation("digital", 1, x), bits=3, mode="surrogate", rng=r)
    ratio = float(np.mean(np.abs(q.data) ** 2)) / (1.0 - alpha)
    checks.append(CheckResult("quantizer surrogate moment", abs(ratio - 1.0) < 0.02,
                              f"moment ratio {ratio:.4f}"))

    # steering normalization and snr bookkeeping constants
    a = steering_vector(ArrayGeometry(4, 4), Direction(0.3, -0.2))
    conv = snr_convert(1.0, build_config(), ArrayGeometry(8, 8), ArrayGeometry(4, 4))
    tgt = rate_target_snr(1e7, 1e9, 0.4)
    ok = (abs(np.linalg.norm(a) - 1.0) < 1e-12
          and abs(conv - 1e5 / 4096) < 1e-12
          and abs(tgt - (2 ** 0.025 - 1)) < 1e-12)
    checks.append(CheckResult("snr bookkeeping", ok,
                              f"conv={conv:.6g} rate-target={tgt:.6g}"))
    return checks
