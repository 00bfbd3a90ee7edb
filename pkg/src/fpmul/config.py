from __future__ import annotations

import math
from dataclasses import dataclass, replace


@dataclass(frozen=True)
class MulConfig:
    """Knobs for parameter search and recursive dispatch.

    The short and long transform targets are ``S = max(lam + 1, ceil(lam**short_exponent))``
    and ``L = max(S + 1, ceil(n / lam**long_exponent))``.
    """

    base_threshold: int = 1 << 14
    target_multiple: int = 2
    accidental_factors: bool = True
    lambda_max: int = 4096
    short_exponent: float = 1.0
    long_exponent: float = 1.0
    bluestein_recursion_floor: int = 32
    direct_dft_max: int = 8
    max_depth: int = 8
    seed: int = 0

    def with_(self, **changes) -> "MulConfig":
        return replace(self, **changes)

    def short_target(self, lam: int) -> int:
        return max(lam + 1, math.ceil(lam ** self.short_exponent))

    def long_target(self, lam: int, n: int) -> int:
        return max(self.short_target(lam) + 1, math.ceil(n / lam ** self.long_exponent))


DEFAULT_CONFIG = MulConfig()
