"""Control regions: an interior window of width 1/n or a single point."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import InvalidRegionError

__all__ = ["Internal", "Pointwise", "ControlRegion", "region_scale"]

# float slack for windows that touch the right endpoint exactly (xi + 1/n = 1)
_EDGE_TOL = 1e-12


@dataclass(frozen=True)
class Internal:
    """Control distributed on the window [xi, xi + 1/n] inside (0, 1)."""

    xi: float
    n: int

    def __post_init__(self):
        if not isinstance(self.n, (int, np.integer)) or isinstance(self.n, bool):
            raise InvalidRegionError(f"window denominator n must be an integer, got {self.n!r}")
        object.__setattr__(self, "xi", float(self.xi))
        object.__setattr__(self, "n", int(self.n))
        if self.n < 1:
            raise InvalidRegionError(f"window denominator n must be positive, got {self.n}")
        if not 0.0 < self.xi < 1.0:
            raise InvalidRegionError(f"window start xi must lie in (0,1), got {self.xi}")
        if self.xi + 1.0 / self.n > 1.0 + _EDGE_TOL:
            raise InvalidRegionError(
                f"window [xi, xi+1/n] = [{self.xi}, {self.xi + 1.0 / self.n}] leaves (0,1]"
            )

    @property
    def width(self) -> float:
        return 1.0 / self.n

    @property
    def midpoint(self) -> float:
        return self.xi + 0.5 / self.n


@dataclass(frozen=True)
class Pointwise:
    """Control concentrated at the single point xi; xi = 1 is the guided tip."""

    xi: float

    def __post_init__(self):
        object.__setattr__(self, "xi", float(self.xi))
        if not 0.0 < self.xi <= 1.0:
            raise InvalidRegionError(f"control point xi must lie in (0,1], got {self.xi}")


ControlRegion = Union[Internal, Pointwise]


def region_scale(region: ControlRegion) -> float:
    """Amplitude factor applied to the adjoint field: n on a window, 1 at a point."""
    return float(region.n) if isinstance(region, Internal) else 1.0
