"""Vector and scalar fields on the periodic box, plus analytic fields.

Grid-resident fields store Fourier coefficients (numpy ``fftn`` layout)
and lazily cache physical samples.  Analytic fields wrap closed-form
callables so norms and quadratures can be evaluated without a grid.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from .errors import DomainExceeded, NegativeTime
from .gridspec import GridSpec, fftn, ifftn

HERMITIAN_TOL = 1e-10
DIVERGENCE_TOL = 1e-12


def _drop_nyquist(coeffs: np.ndarray, n: int) -> np.ndarray:
    """Zero the self-paired Nyquist planes; the representation truncates
    strictly below |k_i| = pi N / L, which keeps every spectral symbol
    Hermitian-symmetric."""
    nyq = n // 2
    coeffs[..., nyq, :, :] = 0.0
    coeffs[..., :, nyq, :] = 0.0
    coeffs[..., :, :, nyq] = 0.0
    return coeffs


def _conj_reverse(coeffs: np.ndarray) -> np.ndarray:
    """Coefficient array at -k, conjugated (identity for real fields)."""
    axes = tuple(range(coeffs.ndim - 3, coeffs.ndim))
    rev = coeffs[..., ::-1, ::-1, ::-1]
    return np.conj(np.roll(rev, 1, axis=axes))


def hermitian_defect(coeffs: np.ndarray) -> float:
    """Max |c(-k) - conj(c(k))| relative to the largest coefficient."""
    scale = np.max(np.abs(coeffs))
    if scale == 0.0:
        return 0.0
    return float(np.max(np.abs(coeffs - _conj_reverse(coeffs))) / scale)


@dataclass(frozen=True)
class ScalarField:
    """Scalar field on the box; gauge records how the additive constant is fixed."""

    grid: GridSpec
    coeffs: np.ndarray  # (N, N, N) complex
    time: float = 0.0
    gauge: str = "mean-zero"

    def __post_init__(self):
        self.coeffs.setflags(write=False)

    @classmethod
    def from_physical(cls, grid: GridSpec, samples: np.ndarray, time: float = 0.0,
                      gauge: str = "mean-zero") -> "ScalarField":
        samples = np.asarray(samples, dtype=float)
        coeffs = _drop_nyquist(fftn(samples.astype(complex)), grid.resolution)
        f = cls(grid, coeffs, time=time, gauge=gauge)
        object.__setattr__(f, "_physical", samples)
        return f

    @classmethod
    def zero(cls, grid: GridSpec, time: float = 0.0) -> "ScalarField":
        n = grid.resolution
        return cls(grid, np.zeros((n, n, n), dtype=complex), time=time)

    @property
    def physical(self) -> np.ndarray:
        cached = getattr(self, "_physical", None)
        if cached is None:
            cached = ifftn(self.coeffs).real
            cached.setflags(write=False)
            object.__setattr__(self, "_physical", cached)
        return cached

    def hermitian_defect(self) -> float:
        return hermitian_defect(self.coeffs)

    def mean(self) -> float:
        return float(self.coeffs[0, 0, 0].real) / self.grid.resolution ** 3

    def integral(self) -> float:
        """Box integral of the field."""
        return self.mean() * self.grid.box_length ** 3

    def eval_at(self, points: np.ndarray) -> np.ndarray:
        """Trigonometric interpolation at arbitrary points, shape (...,)."""
        return _eval_modes(self.grid, self.coeffs[None], points)[..., 0]


@dataclass(frozen=True)
class SpectralField:
    """Three-component velocity-type field on the box."""

    grid: GridSpec
    coeffs: np.ndarray  # (3, N, N, N) complex
    time: float = 0.0

    def __post_init__(self):
        self.coeffs.setflags(write=False)

    @classmethod
    def from_physical(cls, grid: GridSpec, samples: np.ndarray, time: float = 0.0) -> "SpectralField":
        samples = np.asarray(samples, dtype=float)
        if samples.shape != (3, grid.resolution, grid.resolution, grid.resolution):
            raise ValueError(f"expected (3, N, N, N) samples, got {samples.shape}")
        coeffs = _drop_nyquist(fftn(samples.astype(complex)), grid.resolution)
        f = cls(grid, coeffs, time=time)
        object.__setattr__(f, "_physical", samples)
        return f

    @classmethod
    def zero(cls, grid: GridSpec, time: float = 0.0) -> "SpectralField":
        n = grid.resolution
        return cls(grid, np.zeros((3, n, n, n), dtype=complex), time=time)

    @property
    def physical(self) -> np.ndarray:
        cached = getattr(self, "_physical", None)
        if cached is None:
            cached = ifftn(self.coeffs).real
            cached.setflags(write=False)
            object.__setattr__(self, "_physical", cached)
        return cached

    def with_time(self, time: float) -> "SpectralField":
        return replace(self, time=time)

    def hermitian_defect(self) -> float:
        return hermitian_defect(self.coeffs)

    def divergence_residual(self) -> float:
        """max_k |k . vhat(k)| / max_k |vhat(k)|."""
        k = self.grid.kvec
        div = np.abs(np.sum(k * self.coeffs, axis=0))
        scale = np.max(np.sqrt(np.sum(np.abs(self.coeffs) ** 2, axis=0)))
        if scale == 0.0:
            return 0.0
        return float(np.max(div) / scale)

    def energy(self) -> float:
        """(1/2) integral |v|^2 over the box."""
        p = self.physical
        return 0.5 * float(np.sum(p * p)) * self.grid.cell_volume

    def dissipation(self) -> float:
        """Integral |grad v|^2 over the box (Plancherel)."""
        n3 = self.grid.resolution ** 3
        w = np.sum(self.grid.k_squared[None] * np.abs(self.coeffs) ** 2)
        return float(w) * self.grid.box_length ** 3 / n3 ** 2

    def max_speed(self) -> float:
        p = self.physical
        return float(np.max(np.sqrt(np.sum(p * p, axis=0))))

    def eval_at(self, points: np.ndarray) -> np.ndarray:
        """Trigonometric interpolation at arbitrary points, shape (..., 3)."""
        return _eval_modes(self.grid, self.coeffs, points)


def _eval_modes(grid: GridSpec, coeffs: np.ndarray, points: np.ndarray,
                chunk: int = 64) -> np.ndarray:
    """Direct Fourier summation of (C, N, N, N) coefficients at scattered points.

    Exact for band-limited fields; cost O(P * N^3), intended for modest P.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    out_shape = pts.shape[:-1] + (coeffs.shape[0],)
    flat = pts.reshape(-1, 3)
    n3 = grid.resolution ** 3
    k1 = grid.wavenumbers_1d
    result = np.empty((flat.shape[0], coeffs.shape[0]), dtype=complex)
    for start in range(0, flat.shape[0], chunk):
        block = flat[start:start + chunk]
        ex = np.exp(1j * np.outer(block[:, 0], k1))
        ey = np.exp(1j * np.outer(block[:, 1], k1))
        ez = np.exp(1j * np.outer(block[:, 2], k1))
        # contract axes one at a time: (C,N,N,N) -> (P,C,N,N) -> (P,C,N) -> (P,C)
        t1 = np.tensordot(ex, coeffs, axes=([1], [1]))        # (P, C, N, N)
        t2 = np.einsum("pn,pcnm->pcm", ey, t1)
        result[start:start + chunk] = np.einsum("pm,pcm->pc", ez, t2)
    return (result.real / n3).reshape(out_shape)


def eval_on_tensor_grid(grid: GridSpec, coeffs: np.ndarray,
                        xs: np.ndarray, ys: np.ndarray, zs: np.ndarray) -> np.ndarray:
    """Fourier-sum evaluation of (C, N, N, N) coefficients on a tensor grid.

    Returns (C, len(xs), len(ys), len(zs)) real values; exact for
    band-limited fields, cost one axis contraction per dimension.
    """
    k1 = grid.wavenumbers_1d
    n3 = grid.resolution ** 3
    ex = np.exp(1j * np.outer(xs, k1))
    ey = np.exp(1j * np.outer(ys, k1))
    ez = np.exp(1j * np.outer(zs, k1))
    t = np.tensordot(ex, coeffs, axes=([1], [1]))      # (P1, C, N, N)
    t = np.tensordot(ey, t, axes=([1], [2]))           # (P2, P1, C, N)
    t = np.tensordot(ez, t, axes=([1], [3]))           # (P3, P2, P1, C)
    return np.ascontiguousarray(np.transpose(t, (3, 2, 1, 0))).real / n3


@dataclass(frozen=True)
class AnalyticField:
    """Closed-form field: fn(points (...,3), t) -> (...,) or (...,3).

    Used wherever quadrature should not be polluted by grid sampling
    (norm oracles, scaling laws, seed profiles).
    """

    fn: Callable
    components: int = 3
    time: float = 0.0
    label: str = "analytic"

    def eval_at(self, points: np.ndarray, time: float | None = None) -> np.ndarray:
        t = self.time if time is None else time
        return np.asarray(self.fn(np.asarray(points, dtype=float), t))

    def sample(self, grid: GridSpec, time: float | None = None):
        """Sample onto a grid as a SpectralField / ScalarField."""
        pts = np.moveaxis(grid.mesh, 0, -1)
        vals = self.eval_at(pts, time)
        t = self.time if time is None else time
        if self.components == 1:
            return ScalarField.from_physical(grid, vals, time=t)
        return SpectralField.from_physical(grid, np.moveaxis(vals, -1, 0), time=t)


def leray_project(v: SpectralField) -> SpectralField:
    """Project onto divergence-free fields: vhat -> vhat - k (k.vhat)/|k|^2.

    The zero mode is untouched, so the mean flow is preserved.
    """
    k = v.grid.kvec
    kdotv = np.sum(k * v.coeffs, axis=0)
    proj = v.coeffs - k * (kdotv * v.grid.inv_k_squared)[None]
    return SpectralField(v.grid, proj, time=v.time)


def gradient(f: ScalarField) -> SpectralField:
    k = f.grid.kvec
    return SpectralField(f.grid, 1j * k * f.coeffs[None], time=f.time)


def divergence(v: SpectralField) -> ScalarField:
    k = v.grid.kvec
    return ScalarField(v.grid, 1j * np.sum(k * v.coeffs, axis=0), time=v.time)


def curl(v: SpectralField) -> SpectralField:
    k = v.grid.kvec
    c = v.coeffs
    w = np.empty_like(c)
    w[0] = 1j * (k[1] * c[2] - k[2] * c[1])
    w[1] = 1j * (k[2] * c[0] - k[0] * c[2])
    w[2] = 1j * (k[0] * c[1] - k[1] * c[0])
    return SpectralField(v.grid, w, time=v.time)


def dealias(coeffs: np.ndarray, grid: GridSpec) -> np.ndarray:
    return coeffs * grid.dealias_mask


def inner_product(a, b) -> float:
    """Plancherel inner product, integral a.b over the box."""
    pa, pb = a.physical, b.physical
    return float(np.sum(pa * pb)) * a.grid.cell_volume


def scale_field(v, lam: float):
    """Velocity-type rescaling: (x, t) -> lam * v(lam x, lam^2 t).

    Analytic fields rescale exactly.  Grid fields rescale spectrally,
    which is exact when every occupied mode maps to a representable mode;
    otherwise the rescaled field leaves the represented domain.
    """
    if lam <= 0:
        raise ValueError("scaling factor must be positive")
    if isinstance(v, AnalyticField):
        inner = v.fn
        if v.components == 1:
            fn = lambda x, t: lam ** 2 * np.asarray(inner(lam * x, lam ** 2 * t))
        else:
            fn = lambda x, t: lam * np.asarray(inner(lam * x, lam ** 2 * t))
        return AnalyticField(fn, components=v.components,
                             time=v.time / lam ** 2, label=f"{v.label}*scale({lam:g})")
    if isinstance(v, (SpectralField, ScalarField)):
        return _scale_grid_field(v, lam)
    raise TypeError(f"cannot scale object of type {type(v)!r}")


def _scale_grid_field(v, lam: float):
    vec = isinstance(v, SpectralField)
    coeffs = v.coeffs if vec else v.coeffs[None]
    n = v.grid.resolution
    m = np.fft.fftfreq(n) * n  # integer mode numbers
    target = m * lam
    on_lattice = np.abs(target - np.round(target)) < 1e-9
    inside = on_lattice & (np.abs(np.round(target)) < n // 2)
    tol = 1e-13 * max(float(np.max(np.abs(coeffs))), 1e-300)
    # modes whose image is off-lattice or out of band must carry no energy
    bad = ~inside
    if np.any(bad):
        lost = max(
            float(np.max(np.abs(coeffs[:, bad]))),
            float(np.max(np.abs(coeffs[:, :, bad]))),
            float(np.max(np.abs(coeffs[:, :, :, bad]))),
        )
        if lost > tol:
            raise DomainExceeded(
                f"scaling by {lam} maps occupied modes off the resolved lattice")
    idx_src = np.nonzero(inside)[0]
    idx_dst = np.round(target[inside]).astype(int) % n
    out = np.zeros_like(coeffs)
    scale_amp = lam ** (2 if not vec else 1)
    src = coeffs[:, idx_src][:, :, idx_src][:, :, :, idx_src]
    out[np.ix_(range(coeffs.shape[0]), idx_dst, idx_dst, idx_dst)] = src * scale_amp
    new_time = v.time / lam ** 2
    if vec:
        return SpectralField(v.grid, out, time=new_time)
    return ScalarField(v.grid, out[0], time=new_time, gauge=v.gauge)
