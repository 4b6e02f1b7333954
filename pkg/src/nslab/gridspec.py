"""Periodic grid description and cached spectral machinery.

The computational domain is the torus [0, L)^3 sampled at N points per
axis.  All wavenumber arrays, the dealias mask, and FFT helpers hang off
a frozen GridSpec so every module shares one consistent convention:
numpy ``fftn`` coefficient layout, wavenumbers ``2*pi/L * m`` with
``m in {0, 1, ..., N/2-1, -N/2, ..., -1}``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy import fft as sfft

_fft_workers = 1


def set_fft_workers(n: int) -> None:
    """Set the worker count used by all FFT calls (deterministic for fixed n)."""
    global _fft_workers
    _fft_workers = max(1, int(n))


def get_fft_workers() -> int:
    return _fft_workers


def fftn(a: np.ndarray, axes=(-3, -2, -1)) -> np.ndarray:
    return sfft.fftn(a, axes=axes, workers=_fft_workers)


def ifftn(a: np.ndarray, axes=(-3, -2, -1)) -> np.ndarray:
    return sfft.ifftn(a, axes=axes, workers=_fft_workers)


@dataclass(frozen=True)
class GridSpec:
    """Periodic box [0, L)^3 with N samples per axis.

    Parameters
    ----------
    box_length : float
        Side length L of the torus.
    resolution : int
        Samples per axis; must be a power of two, at least 8.
    dealias_fraction : float
        Fraction of the spectrum kept when dealiasing products (2/3 rule).
    """

    box_length: float = 16.0 * np.pi
    resolution: int = 64
    dealias_fraction: float = 2.0 / 3.0

    def __post_init__(self) -> None:
        n = self.resolution
        if n < 8 or (n & (n - 1)) != 0:
            raise ValueError(f"resolution must be a power of two >= 8, got {n}")
        if not self.box_length > 0:
            raise ValueError("box_length must be positive")
        if not (0.0 < self.dealias_fraction <= 1.0):
            raise ValueError("dealias_fraction must lie in (0, 1]")

    @property
    def cell(self) -> float:
        """Grid spacing h = L/N."""
        return self.box_length / self.resolution

    @cached_property
    def axis_coords(self) -> np.ndarray:
        return np.arange(self.resolution) * self.cell

    @cached_property
    def wavenumbers_1d(self) -> np.ndarray:
        return 2.0 * np.pi * sfft.fftfreq(self.resolution, d=self.cell)

    @cached_property
    def kvec(self) -> np.ndarray:
        """Wavevector components, shape (3, N, N, N)."""
        k1 = self.wavenumbers_1d
        kx, ky, kz = np.meshgrid(k1, k1, k1, indexing="ij")
        return np.stack([kx, ky, kz])

    @cached_property
    def k_squared(self) -> np.ndarray:
        return np.sum(self.kvec ** 2, axis=0)

    @cached_property
    def inv_k_squared(self) -> np.ndarray:
        """1/|k|^2 with the zero mode mapped to 0 (mean excluded from inversions)."""
        k2 = self.k_squared.copy()
        k2[0, 0, 0] = 1.0
        inv = 1.0 / k2
        inv[0, 0, 0] = 0.0
        return inv

    @cached_property
    def dealias_mask(self) -> np.ndarray:
        """Boolean mask keeping |m_i| <= dealias_fraction * N/2 on each axis."""
        m = np.abs(sfft.fftfreq(self.resolution) * self.resolution)
        keep1 = m <= self.dealias_fraction * (self.resolution // 2)
        return (
            keep1[:, None, None] & keep1[None, :, None] & keep1[None, None, :]
        )

    @cached_property
    def mesh(self) -> np.ndarray:
        """Physical sample coordinates, shape (3, N, N, N)."""
        x = self.axis_coords
        xx, yy, zz = np.meshgrid(x, x, x, indexing="ij")
        return np.stack([xx, yy, zz])

    def min_image(self, points: np.ndarray, center) -> np.ndarray:
        """Shortest periodic displacement of points (...,3) from center."""
        d = np.asarray(points, dtype=float) - np.asarray(center, dtype=float)
        L = self.box_length
        return d - L * np.round(d / L)

    def min_image_mesh(self, center) -> np.ndarray:
        """Minimum-image displacement of every grid node from center, (3,N,N,N)."""
        d = self.mesh - np.asarray(center, dtype=float).reshape(3, 1, 1, 1)
        L = self.box_length
        return d - L * np.round(d / L)

    @property
    def cell_volume(self) -> float:
        return self.cell ** 3

    def to_dict(self) -> dict:
        return {
            "box_length": self.box_length,
            "resolution": self.resolution,
            "dealias_fraction": self.dealias_fraction,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "GridSpec":
        return cls(
            box_length=float(d["box_length"]),
            resolution=int(d["resolution"]),
            dealias_fraction=float(d.get("dealias_fraction", 2.0 / 3.0)),
        )
