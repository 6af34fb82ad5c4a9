"""Uniform 1D cell grids and kinetic-velocity grids."""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np


class BoundaryKind(enum.Enum):
    DIRICHLET_ZERO = "dirichlet_zero"
    PERIODIC = "periodic"
    REFLECTIVE_WALL = "reflective_wall"


@dataclass(frozen=True)
class Grid1D:
    """Uniform partition of [x_min, x_max] into n_cells cells."""

    n_cells: int
    x_min: float
    x_max: float
    bc: BoundaryKind = BoundaryKind.PERIODIC

    def __post_init__(self):
        if self.n_cells < 2:
            raise ValueError(f"n_cells must be >= 2, got {self.n_cells}")
        if not self.x_max > self.x_min:
            raise ValueError("x_max must exceed x_min")

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / self.n_cells

    @property
    def length(self) -> float:
        return self.x_max - self.x_min

    @property
    def centers(self) -> np.ndarray:
        return self.x_min + (np.arange(self.n_cells) + 0.5) * self.dx

    def interval_mask(self, lo: float, hi: float) -> np.ndarray:
        """Boolean mask of cells whose center lies in [lo, hi]."""
        x = self.centers
        return (x >= lo) & (x <= hi)

    def refined(self, factor: int) -> "Grid1D":
        return Grid1D(self.n_cells * factor, self.x_min, self.x_max, self.bc)


@dataclass(frozen=True)
class XiGrid:
    """Midpoint discretisation of a kinetic-velocity interval."""

    xi_min: float
    xi_max: float
    n_xi: int

    def __post_init__(self):
        if not self.xi_max > self.xi_min:
            raise ValueError("xi_max must exceed xi_min")
        if self.n_xi < 1:
            raise ValueError("n_xi must be >= 1")

    @property
    def dxi(self) -> float:
        return (self.xi_max - self.xi_min) / self.n_xi

    @property
    def nodes(self) -> np.ndarray:
        return self.xi_min + (np.arange(self.n_xi) + 0.5) * self.dxi

    @property
    def weights(self) -> np.ndarray:
        return np.full(self.n_xi, self.dxi)

    @property
    def speed_sup(self) -> float:
        return max(abs(self.xi_min), abs(self.xi_max))

    @staticmethod
    def spanning(values_min: float, values_max: float, margin: float = 1.0,
                 n_xi: int = 64) -> "XiGrid":
        """Grid covering [min - margin, max + margin]; the margin keeps the
        indicator densities of transient states inside the grid.  The result
        straddles zero so both upwind directions are represented."""
        lo = min(values_min - margin, -margin)
        hi = max(values_max + margin, margin)
        return XiGrid(lo, hi, n_xi)
