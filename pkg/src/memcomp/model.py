"""Model parameter container and the canonical parameter presets."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .eigen import ResourceProfile
from .grid import Grid


@dataclass(frozen=True)
class ModelParams:
    """All constants of the two-species competition model.

    d1, d2         ratio of memory-based to random diffusion per species
    lambda1/2      growth-rate scalings
    a11, a22       intraspecific self-limitation (positive)
    a12, a21       interspecific competition (positive)
    omega          angle splitting the bifurcating amplitude between the
                   two species, in (0, pi/2)
    r1, r2         resource profiles
    """

    d1: float
    d2: float
    lambda1: float
    lambda2: float
    a11: float
    a12: float
    a21: float
    a22: float
    omega: float
    r1: ResourceProfile
    r2: ResourceProfile

    def __post_init__(self):
        for name in ("a11", "a12", "a21", "a22"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if not 0.0 < self.omega < math.pi / 2:
            raise ValueError("omega must lie in (0, pi/2)")
        if self.lambda1 <= 0 or self.lambda2 <= 0:
            raise ValueError("lambda1 and lambda2 must be positive")

    def with_point(self, d1: float, d2: float) -> "ModelParams":
        return replace(self, d1=d1, d2=d2)

    def on_grid(self, grid: Grid) -> "ModelParams":
        return replace(self, r1=self.r1.on_grid(grid), r2=self.r2.on_grid(grid))


def preset_q1(grid: Grid, d1: float = 1.0, d2: float = -1.0) -> ModelParams:
    """Strong-competition preset: a = (0.5, 0.5, 1, 1.5), lambda = (2, 2)."""
    return ModelParams(
        d1=d1,
        d2=d2,
        lambda1=2.0,
        lambda2=2.0,
        a11=0.5,
        a12=0.5,
        a21=1.0,
        a22=1.5,
        omega=math.pi / 4,
        r1=ResourceProfile.cos1(grid),
        r2=ResourceProfile.sin1(grid),
    )


def preset_q2(grid: Grid, d1: float = 2.0, d2: float = 1.4) -> ModelParams:
    """Weak-competition preset: a = (1, 0.5, 0.8, 1), lambda = (2, 2)."""
    return ModelParams(
        d1=d1,
        d2=d2,
        lambda1=2.0,
        lambda2=2.0,
        a11=1.0,
        a12=0.5,
        a21=0.8,
        a22=1.0,
        omega=math.pi / 4,
        r1=ResourceProfile.cos1(grid),
        r2=ResourceProfile.sin1(grid),
    )


PRESETS = {"Q1": preset_q1, "Q2": preset_q2}
