"""Reproducible random-number substreams for parallel Monte Carlo.

Every trial gets its own generator keyed by a tuple such as
(experiment seed, scenario id, snr index, trial index), so results do not
depend on execution order or worker count.
"""

from __future__ import annotations

import zlib

import numpy as np


def _as_int(part) -> int:
    if isinstance(part, (int, np.integer)):
        return int(part) & 0xFFFFFFFFFFFFFFFF
    # stable across processes (unlike hash())
    return zlib.crc32(str(part).encode())


def substream(*parts) -> np.random.Generator:
    """Independent generator keyed by a tuple of ints and/or strings."""
    return np.random.default_rng([_as_int(p) for p in parts])


def complex_normal(rng: np.random.Generator, shape, var: float = 1.0) -> np.ndarray:
    """Circularly symmetric complex Gaussian samples with E|x|^2 = var."""
    scale = np.sqrt(var / 2.0)
    return scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))
