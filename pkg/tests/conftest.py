"""Shared helpers for the test suite."""

import numpy as np

from steklovzeta.circle_fourier import WeightFunction


def seeded_weight(seed, M=4, scale=0.3):
    """Seeded analytic weight with a guaranteed positivity margin of 0.3."""
    rng = np.random.default_rng(seed)
    modes = {0: 1.0}
    for n in range(1, M + 1):
        modes[n] = scale * 2.0 ** (-n) * complex(*rng.standard_normal(2))
    a = WeightFunction.from_modes(modes, hermitian=True, meta=f"rand{seed}")
    low = a.min_value()
    if low < 0.3:
        shrink = 0.7 / (1.0 - low)
        modes = {n: (v * shrink if n else v) for n, v in modes.items()}
        a = WeightFunction.from_modes(modes, hermitian=True, meta=f"rand{seed}")
    return a
