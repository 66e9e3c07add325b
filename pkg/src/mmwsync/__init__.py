"""Directional cell-search simulation for wideband millimeter-wave links.

Periodic sync-signal transmission (omnidirectional or randomly steered),
matched-filter detection statistics for analog, hybrid, digital and
quantized-digital receiver front-ends, false-alarm-budgeted threshold
calibration, and seeded misdetection-versus-SNR experiments.
"""

__version__ = "0.1.0"

from .arrays import ArrayGeometry, Direction, max_bf_gain, random_direction, steering_vector
from .pss import (ConfigError, PssConfig, PssWaveform, TxBeamPolicy, build_config,
                  generate_waveforms, indices_in, slot_of, tx_weights)
from .channel import (ChannelRealization, MultipathParams, draw_multipath,
                      draw_single_path, effective_gain_analog, effective_gain_digital)
from .frontend import (FrontendSpec, SlotObservation, adc_power,
                       effective_snr_after_quantization, observe_slot, quantize)
from .detector import (DetectionStatistic, HypothesisGrid, SearchResult, build_grid,
                       correlate_analog, correlate_digital, glrt_lambda_oracle,
                       lambda_from_T, search, statistic_analog, statistic_digital)
from .calibration import (CalibrationError, CalKey, FalseAlarmBudget, ThresholdModel,
                          calibrate, ensure_threshold, fa_budget)
from .harness import (CurvePoint, Scenario, SnrPoint, rate_target_snr, run_curve,
                      run_point, snr_convert, snr_point, wilson_interval)
