"""Uniform 1D grids for the solvers.

All solvers work on collocated uniform node grids over [-L, L].  `cells`
counts nodes (the two endpoints included), so `spacing = 2 L / (cells - 1)`.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ConfigInvalid


@dataclass(frozen=True)
class Grid:
    half_length: float
    cells: int

    def __post_init__(self):
        if not np.isfinite(self.half_length) or self.half_length <= 0.0:
            raise ConfigInvalid(f"grid half_length must be positive, got {self.half_length}")
        if self.cells < 16:
            raise ConfigInvalid(f"grid needs at least 16 nodes, got {self.cells}")

    @property
    def spacing(self) -> float:
        return 2.0 * self.half_length / (self.cells - 1)

    @property
    def nodes(self) -> np.ndarray:
        return np.linspace(-self.half_length, self.half_length, self.cells)

    def scaled(self, factor: float) -> "Grid":
        """Grid with the same node count on [-L*factor, L*factor]."""
        return Grid(self.half_length * factor, self.cells)
