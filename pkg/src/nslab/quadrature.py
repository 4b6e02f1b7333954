"""Quadrature over balls, annuli, and cylinders.

Two routes, chosen by what the integrand lives on:

* analytic fields -> product rules (Gauss-Legendre radial x Gauss-Legendre
  polar x trapezoid azimuth), spectrally accurate for smooth integrands and
  integrating constants exactly;
* grid fields -> tensor-product midpoint over grid cells restricted by a
  smoothed ball indicator (one-cell mollification), with the indicator's
  volume defect reported as the quadrature error estimate.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BallTooLarge
from .field import AnalyticField, ScalarField, SpectralField
from .geometry import Annulus, Ball
from .gridspec import GridSpec, fftn, ifftn


@dataclass(frozen=True)
class QuadratureSpec:
    """Resolution of the analytic product rule and grid mollification width."""

    n_radial: int = 48
    n_polar: int = 32
    n_azimuth: int = 64
    mollify_cells: float = 1.0


DEFAULT_QUAD = QuadratureSpec()


@dataclass(frozen=True)
class SampledIntegral:
    nodes: np.ndarray      # (P, 3)
    weights: np.ndarray    # (P,)
    values: np.ndarray     # (P,) or (P, 3)
    integral: float
    quadrature_error: float


def shell_rule(inner: float, outer: float, center, spec: QuadratureSpec = DEFAULT_QUAD):
    """Product-rule nodes and weights for inner <= |x - c| < outer.

    Weights sum to the shell volume to machine precision.
    """
    r_nodes, r_w = np.polynomial.legendre.leggauss(spec.n_radial)
    r = 0.5 * (outer + inner) + 0.5 * (outer - inner) * r_nodes
    r_w = 0.5 * (outer - inner) * r_w * r ** 2
    mu_nodes, mu_w = np.polynomial.legendre.leggauss(spec.n_polar)
    phi = 2.0 * np.pi * np.arange(spec.n_azimuth) / spec.n_azimuth
    phi_w = 2.0 * np.pi / spec.n_azimuth
    sin_t = np.sqrt(1.0 - mu_nodes ** 2)
    dirs = np.stack([
        np.outer(sin_t, np.cos(phi)).ravel(),
        np.outer(sin_t, np.sin(phi)).ravel(),
        np.repeat(mu_nodes, spec.n_azimuth),
    ], axis=-1)
    ang_w = np.repeat(mu_w, spec.n_azimuth) * phi_w
    nodes = (r[:, None, None] * dirs[None]).reshape(-1, 3) + np.asarray(center)
    weights = (r_w[:, None] * ang_w[None]).ravel()
    return nodes, weights


def ball_rule(ball: Ball, spec: QuadratureSpec = DEFAULT_QUAD):
    return shell_rule(0.0, ball.radius, ball.center, spec)


def _field_magnitude(values: np.ndarray) -> np.ndarray:
    if values.ndim >= 2 and values.shape[-1] == 3:
        return np.sqrt(np.sum(values ** 2, axis=-1))
    return np.abs(values)


def sample_on_ball(f, ball: Ball, grid: GridSpec | None = None,
                   spec: QuadratureSpec = DEFAULT_QUAD) -> SampledIntegral:
    """Nodes, weights, and samples of f over a ball; integral of f attached.

    Analytic fields use the product rule (constant 1 integrates to the exact
    ball volume).  Grid fields use the mollified-indicator midpoint rule.
    """
    if grid is not None:
        ball.check_fits(grid.box_length)
    if isinstance(f, AnalyticField):
        nodes, weights = ball_rule(ball, spec)
        values = f.eval_at(nodes)
        integral = float(np.sum(weights * values)) if values.ndim == 1 else float(
            np.sum(weights[:, None] * values))
        err = ball.volume * 1e-14
        return SampledIntegral(nodes, weights, values, integral, err)
    fgrid = f.grid
    ball.check_fits(fgrid.box_length)
    w, err_rel = grid_ball_weights(fgrid, ball, spec.mollify_cells)
    phys = f.physical
    if isinstance(f, SpectralField):
        values = np.moveaxis(phys, 0, -1).reshape(-1, 3)
        integral = float(np.sum(w.ravel()[:, None] * values))
    else:
        values = phys.ravel()
        integral = float(np.sum(w.ravel() * values))
    sel = w.ravel() > 0
    nodes = np.moveaxis(fgrid.mesh, 0, -1).reshape(-1, 3)[sel]
    mag = np.max(_field_magnitude(values[sel])) if np.any(sel) else 0.0
    err = err_rel * ball.volume * float(mag)
    return SampledIntegral(nodes, w.ravel()[sel], values[sel], integral, err)


def smooth_indicator(dist: np.ndarray, radius: float, width: float) -> np.ndarray:
    """C^1 radial cutoff: 1 inside radius - w/2, 0 outside radius + w/2."""
    if width <= 0:
        return (dist <= radius).astype(float)
    t = (radius + 0.5 * width - dist) / width
    t = np.clip(t, 0.0, 1.0)
    return t * t * (3.0 - 2.0 * t)


def grid_ball_weights(grid: GridSpec, ball: Ball, mollify_cells: float = 1.0):
    """Midpoint weights h^3 * chi(|x - c|) and the indicator's volume defect."""
    ball.check_fits(grid.box_length)
    d = grid.min_image_mesh(ball.center)
    dist = np.sqrt(np.sum(d * d, axis=0))
    chi = smooth_indicator(dist, ball.radius, mollify_cells * grid.cell)
    w = chi * grid.cell_volume
    vol = float(np.sum(w))
    err_rel = abs(vol - ball.volume) / ball.volume
    return w, err_rel


def grid_shell_weights(grid: GridSpec, ann: Annulus, mollify_cells: float = 1.0):
    ann.check_fits(grid.box_length)
    d = grid.min_image_mesh(ann.center)
    dist = np.sqrt(np.sum(d * d, axis=0))
    width = mollify_cells * grid.cell
    chi = smooth_indicator(dist, ann.outer, width)
    if ann.inner > 0:
        chi = chi - smooth_indicator(dist, ann.inner, width)
    chi = np.clip(chi, 0.0, 1.0)
    w = chi * grid.cell_volume
    vol = float(np.sum(w))
    err_rel = abs(vol - ann.volume) / max(ann.volume, 1e-300)
    return w, err_rel


def region_samples(f, region, grid: GridSpec | None = None,
                   spec: QuadratureSpec = DEFAULT_QUAD):
    """(weights, values, err_rel) for a Ball or Annulus, either field route."""
    if isinstance(f, AnalyticField):
        if isinstance(region, Ball):
            nodes, weights = ball_rule(region, spec)
        elif isinstance(region, Annulus):
            nodes, weights = shell_rule(region.inner, region.outer, region.center, spec)
        else:
            raise TypeError(f"unsupported region {type(region)!r}")
        return weights, f.eval_at(nodes), 1e-14
    fgrid = f.grid
    if isinstance(region, Ball):
        w, err_rel = grid_ball_weights(fgrid, region, spec.mollify_cells)
    elif isinstance(region, Annulus):
        w, err_rel = grid_shell_weights(fgrid, region, spec.mollify_cells)
    else:
        raise TypeError(f"unsupported region {type(region)!r}")
    phys = f.physical
    if isinstance(f, SpectralField):
        values = np.moveaxis(phys, 0, -1).reshape(-1, 3)
    else:
        values = phys.ravel()
    return w.ravel(), values, err_rel


def local_mass_field(values: np.ndarray, grid: GridSpec, radius: float,
                     mollify_cells: float = 1.0) -> np.ndarray:
    """Convolve a nonnegative density with the mollified ball indicator.

    Returns, at every grid node x, the midpoint approximation of
    integral_{B_radius(x)} values dy.  One pair of FFTs.
    """
    Ball((0.0, 0.0, 0.0), radius).check_fits(grid.box_length)
    w, _ = grid_ball_weights(grid, Ball((0.0, 0.0, 0.0), radius), mollify_cells)
    kernel_hat = fftn(np.asarray(w, dtype=complex))
    mass_hat = fftn(np.asarray(values, dtype=complex)) * kernel_hat
    return np.maximum(ifftn(mass_hat).real, 0.0)


def shifted_max(mass_hat_like: np.ndarray, grid: GridSpec, offsets: np.ndarray):
    """Evaluate an FFT-convolution field at sub-cell shifted sample lattices.

    mass_hat_like: spectral coefficients of the convolution result.
    Returns (best_value, best_location).
    """
    best_val = -np.inf
    best_loc = None
    k = grid.kvec
    for delta in offsets:
        phase = np.exp(1j * (k[0] * delta[0] + k[1] * delta[1] + k[2] * delta[2]))
        shifted = ifftn(mass_hat_like * phase).real
        idx = np.unravel_index(int(np.argmax(shifted)), shifted.shape)
        val = float(shifted[idx])
        if val > best_val:
            best_val = val
            best_loc = grid.mesh[:, idx[0], idx[1], idx[2]] + delta
    return best_val, np.asarray(best_loc)


def time_integrate(times: np.ndarray, series: np.ndarray) -> float:
    """Composite Simpson on (possibly uneven) samples; trapezoid fallback."""
    times = np.asarray(times, dtype=float)
    series = np.asarray(series, dtype=float)
    if len(times) < 2:
        return 0.0
    if len(times) >= 3 and np.allclose(np.diff(times), times[1] - times[0]):
        from scipy.integrate import simpson
        return float(simpson(series, x=times))
    return float(np.trapezoid(series, x=times))
