"""Balls, annuli, parabolic cylinders, and dyadic shell decompositions."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import BallTooLarge
from .gridspec import GridSpec

ORIGIN = (0.0, 0.0, 0.0)


@dataclass(frozen=True)
class Ball:
    center: tuple = ORIGIN
    radius: float = 1.0

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError("ball radius must be positive")
        object.__setattr__(self, "center", tuple(float(c) for c in self.center))

    def check_fits(self, box_length: float) -> None:
        if 2.0 * self.radius > box_length:
            raise BallTooLarge(
                f"ball of diameter {2 * self.radius:g} exceeds box length {box_length:g}")

    @property
    def volume(self) -> float:
        return 4.0 / 3.0 * np.pi * self.radius ** 3


@dataclass(frozen=True)
class Annulus:
    """Spherical shell inner <= |x - center| < outer."""

    inner: float
    outer: float
    center: tuple = ORIGIN

    def __post_init__(self):
        if not (0.0 <= self.inner < self.outer):
            raise ValueError("need 0 <= inner < outer")
        object.__setattr__(self, "center", tuple(float(c) for c in self.center))

    def check_fits(self, box_length: float) -> None:
        if 2.0 * self.outer > box_length:
            raise BallTooLarge(
                f"annulus of diameter {2 * self.outer:g} exceeds box length {box_length:g}")

    @property
    def volume(self) -> float:
        return 4.0 / 3.0 * np.pi * (self.outer ** 3 - self.inner ** 3)


@dataclass(frozen=True)
class ParabolicCylinder:
    """Space-time cylinder B_r(x0) x (t0 - r^2, t0)."""

    center_x: tuple = ORIGIN
    center_t: float = 0.0
    radius: float = 1.0

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError("cylinder radius must be positive")
        object.__setattr__(self, "center_x", tuple(float(c) for c in self.center_x))

    @property
    def t_start(self) -> float:
        return self.center_t - self.radius ** 2

    @property
    def t_end(self) -> float:
        return self.center_t

    @property
    def ball(self) -> Ball:
        return Ball(self.center_x, self.radius)

    def check_fits(self, box_length: float) -> None:
        self.ball.check_fits(box_length)

    @property
    def volume(self) -> float:
        return self.ball.volume * self.radius ** 2

    def rescaled(self, lam: float) -> "ParabolicCylinder":
        c = tuple(lam * x for x in self.center_x)
        return ParabolicCylinder(c, lam ** 2 * self.center_t, lam * self.radius)


@dataclass(frozen=True)
class AnnulusDecomposition:
    """Dyadic shells A_k = {2^(k-1) <= |x| < 2^k}, k_min <= k <= k_max."""

    k_min: int
    k_max: int
    center: tuple = ORIGIN

    def __post_init__(self):
        if self.k_min > self.k_max:
            raise ValueError("k_min must not exceed k_max")
        object.__setattr__(self, "center", tuple(float(c) for c in self.center))

    @property
    def shells(self) -> list[tuple[int, Annulus]]:
        return [
            (k, Annulus(2.0 ** (k - 1), 2.0 ** k, self.center))
            for k in range(self.k_min, self.k_max + 1)
        ]

    @classmethod
    def for_grid(cls, grid: GridSpec, center=ORIGIN) -> "AnnulusDecomposition":
        """Default shell range: inner radius at least two cells, outer within L/2."""
        k_min = int(np.ceil(np.log2(2.0 * grid.cell))) + 1
        k_max = int(np.floor(np.log2(grid.box_length / 2.0)))
        if k_min > k_max:
            raise ValueError("grid cannot resolve any dyadic shell")
        return cls(k_min, k_max, center)
