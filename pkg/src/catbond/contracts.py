from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class CatBondContract:
    """Zero-coupon CAT bond: pays ``principal`` at ``maturity`` unless the
    trigger fires first, in which case ``recovery * principal`` is paid at
    the trigger time."""

    principal: float = 1.0
    recovery: float = 0.0
    threshold: float = 1e4
    maturity: float = 3.0

    def __post_init__(self):
        if not 0 <= self.recovery < 1:
            raise ValueError(f"recovery must lie in [0, 1), got {self.recovery}")
        if not self.threshold > 0:
            raise ValueError(f"threshold must be positive, got {self.threshold}")
        if not (self.maturity > 0 and math.isfinite(self.maturity)):
            raise ValueError(f"maturity must be positive and finite, got {self.maturity}")
        if not self.principal > 0:
            raise ValueError(f"principal must be positive, got {self.principal}")
