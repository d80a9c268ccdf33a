"""Color conventions for correlation data.

Correlation maps use a diverging scale centered exactly at g2 = 1:
blue below (sub-Poissonian), white at 1 (uncorrelated), red above
(super-Poissonian).  Because g2 spans decades, the centering happens in
log10(g2).
"""

from __future__ import annotations

import numpy as np
from matplotlib import colors

CMAP = "bwr"

SAME_POL = "tab:blue"
CROSS_POL = "tab:red"
RESONANCE_COLORS = {"I": "tab:blue", "II": "tab:red", "III": "gold", "IV": "tab:green"}


def g2_norm(values: np.ndarray, floor: float = 1e-3) -> colors.TwoSlopeNorm:
    """Diverging norm on log10(g2) with the white point pinned at g2 = 1."""
    logs = np.log10(np.clip(values, floor, None))
    lo = min(float(logs.min()), -0.1)
    hi = max(float(logs.max()), 0.1)
    return colors.TwoSlopeNorm(vcenter=0.0, vmin=lo, vmax=hi)


def log_g2(values: np.ndarray, floor: float = 1e-3) -> np.ndarray:
    return np.log10(np.clip(values, floor, None))
