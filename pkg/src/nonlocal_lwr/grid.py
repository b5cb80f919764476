from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class GridSpec:
    """Uniform grid on ``[x_min, x_max]``; cell ``j`` is ``[x_min + j h, x_min + (j+1) h)``.

    Outside the domain the solution is extended by the nearest boundary value.
    """

    x_min: float
    x_max: float
    h: float
    boundary: str = "constant_extension"

    def __post_init__(self):
        if not self.x_min < self.x_max:
            raise ValueError(f"need x_min < x_max, got [{self.x_min}, {self.x_max}]")
        if not self.h > 0.0:
            raise ValueError(f"need h > 0, got {self.h}")
        n = (self.x_max - self.x_min) / self.h
        if abs(n - round(n)) > 1e-9 * max(n, 1.0):
            raise ValueError(f"domain length {self.x_max - self.x_min} is not a multiple of h={self.h}")
        if self.boundary != "constant_extension":
            raise ValueError("only constant_extension boundaries are supported")

    @property
    def num_cells(self) -> int:
        return int(round((self.x_max - self.x_min) / self.h))

    @property
    def edges(self) -> np.ndarray:
        return self.x_min + np.arange(self.num_cells + 1) * self.h

    @property
    def centers(self) -> np.ndarray:
        return self.x_min + (np.arange(self.num_cells) + 0.5) * self.h

    def refined(self, factor: int) -> "GridSpec":
        return GridSpec(self.x_min, self.x_max, self.h / factor)

    def index_of(self, x: float) -> int:
        """Index of the cell containing ``x`` (clamped to the grid)."""
        j = math.floor((x - self.x_min) / self.h)
        return min(max(j, 0), self.num_cells - 1)

    def to_dict(self) -> dict:
        return {"x_min": self.x_min, "x_max": self.x_max, "h": self.h,
                "num_cells": self.num_cells, "boundary": self.boundary}
