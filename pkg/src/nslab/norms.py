"""Function-space norms: Lebesgue, weak-Lebesgue, uniformly-local, Herz.

Sup-over-centers norms are discretized as a lattice scan (grid nodes for
grid fields, caller-supplied centers for analytic fields) followed by a
deterministic local pattern-search refinement around the coarse argmax.
Ties break toward the lexicographically first center.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ShellUnresolved
from .field import AnalyticField, ScalarField, SpectralField
from .geometry import Annulus, AnnulusDecomposition, Ball, ParabolicCylinder
from .gridspec import GridSpec, fftn
from .quadrature import (
    DEFAULT_QUAD,
    QuadratureSpec,
    grid_ball_weights,
    local_mass_field,
    region_samples,
    shifted_max,
    time_integrate,
)


@dataclass(frozen=True)
class NormReport:
    """Value of a norm plus the evidence it was computed from."""

    norm_id: str
    value: float
    params: dict = field(default_factory=dict)
    argmax_location: tuple | None = None
    quadrature_error: float = 0.0
    breakdown: tuple = ()

    def to_dict(self) -> dict:
        return {
            "norm_id": self.norm_id,
            "value": self.value,
            "params": dict(self.params),
            "argmax_location": list(self.argmax_location) if self.argmax_location else None,
            "quadrature_error": self.quadrature_error,
            "breakdown": [[label, v] for label, v in self.breakdown],
        }


@dataclass(frozen=True)
class HerzParams:
    """Exponents of the dyadic-shell norm sup_k 2^{ks} ||f||_{L^p(A_k)}."""

    s: float
    p: float
    flavor: str = "shell-sup"  # or "ball"

    def __post_init__(self):
        if self.p < 1:
            raise ValueError("p must be >= 1")
        if self.flavor not in ("shell-sup", "ball"):
            raise ValueError(f"unknown flavor {self.flavor!r}")

    @classmethod
    def scale_critical(cls, p: float, flavor: str = "shell-sup") -> "HerzParams":
        """The K_p preset: s = 1 - 3/p, invariant under f -> lam f(lam x)."""
        return cls(s=1.0 - 3.0 / p, p=p, flavor=flavor)


def _magnitude(values: np.ndarray) -> np.ndarray:
    if values.ndim >= 2 and values.shape[-1] == 3:
        return np.sqrt(np.sum(values ** 2, axis=-1))
    return np.abs(values)


def lp_norm(f, region, p: float, grid: GridSpec | None = None,
            spec: QuadratureSpec = DEFAULT_QUAD) -> NormReport:
    """L^p norm of |f| over a ball, annulus, or parabolic cylinder.

    p = inf gives the essential sup over quadrature nodes.  Cylinders need
    a trajectory-like f (``sample_times`` / ``field_at``); the time integral
    uses composite Simpson over the snapshots inside the window.
    """
    if isinstance(region, ParabolicCylinder):
        return _lp_norm_cylinder(f, region, p, spec)
    weights, values, err_rel = region_samples(f, region, grid, spec)
    mag = _magnitude(values)
    params = {"p": p, "region": type(region).__name__.lower()}
    if math.isinf(p):
        sel = weights > 0
        value = float(np.max(mag[sel])) if np.any(sel) else 0.0
        return NormReport("lp", value, params, None, 0.0)
    integral = float(np.sum(weights * mag ** p))
    value = integral ** (1.0 / p)
    err = value * err_rel / p if value > 0 else err_rel
    return NormReport("lp", value, params, None, err)


def _lp_norm_cylinder(traj, cyl: ParabolicCylinder, p: float,
                      spec: QuadratureSpec) -> NormReport:
    times = [t for t in traj.sample_times if cyl.t_start <= t <= cyl.t_end]
    if len(times) < 2:
        raise ValueError("cylinder window contains fewer than 2 snapshots")
    series = []
    err = 0.0
    for t in times:
        rep = lp_norm(traj.field_at(t), cyl.ball, p, spec=spec)
        series.append(rep.value ** p)
        err = max(err, rep.quadrature_error)
    value = time_integrate(np.asarray(times), np.asarray(series)) ** (1.0 / p)
    return NormReport("lp", value, {"p": p, "region": "cylinder"}, None, err)


def weak_lp_norm(f, region, p: float, grid: GridSpec | None = None,
                 spec: QuadratureSpec = DEFAULT_QUAD) -> NormReport:
    """Weak-L^p norm sup_lam lam |{|f| > lam}|^{1/p}.

    Exact for the empirical measure of the quadrature samples: sort |f|
    descending (weighted by node measure) and maximize value * mass^{1/p}
    over the cumulative rearrangement.  No binning.
    """
    weights, values, err_rel = region_samples(f, region, grid, spec)
    mag = _magnitude(values)
    sel = weights > 0
    mag, w = mag[sel], weights[sel]
    if mag.size == 0 or np.max(mag) == 0.0:
        return NormReport("weak-lp", 0.0, {"p": p}, None, 0.0)
    order = np.argsort(mag, kind="stable")[::-1]
    sorted_mag = mag[order]
    cum_mass = np.cumsum(w[order])
    candidates = sorted_mag * cum_mass ** (1.0 / p)
    value = float(np.max(candidates))
    return NormReport("weak-lp", value, {"p": p}, None, value * err_rel / p)


def _local_mass_analytic(f, q: float, rho: float, centers: np.ndarray,
                         spec: QuadratureSpec) -> np.ndarray:
    from .quadrature import ball_rule
    nodes0, w0 = ball_rule(Ball((0.0, 0.0, 0.0), rho), spec)
    masses = np.empty(len(centers))
    for i, c in enumerate(centers):
        vals = _magnitude(f.eval_at(nodes0 + np.asarray(c)))
        masses[i] = float(np.sum(w0 * vals ** q))
    return masses


def _refine_center(mass_fn, start: np.ndarray, step: float, rounds: int = 3) -> tuple:
    """Deterministic 3^3 pattern search, shrinking the stencil each round."""
    best_c = np.asarray(start, dtype=float)
    best_m = mass_fn(best_c[None])[0]
    for _ in range(rounds):
        offs = np.array([(i, j, k) for i in (-1, 0, 1) for j in (-1, 0, 1)
                         for k in (-1, 0, 1)], dtype=float) * step
        cands = best_c[None] + offs
        masses = mass_fn(cands)
        i = int(np.argmax(masses))
        if masses[i] > best_m:
            best_m = float(masses[i])
            best_c = cands[i]
        step *= 0.5
    return best_m, best_c


def sup_local_mass(f, q: float, rho: float, grid: GridSpec | None = None,
                   centers: np.ndarray | None = None,
                   spec: QuadratureSpec = DEFAULT_QUAD,
                   refine: bool = True) -> tuple[float, np.ndarray]:
    """sup over centers of integral_{B_rho(x)} |f|^q, with the argmax center.

    Grid fields scan every node via one FFT convolution (plus sub-cell
    shifted lattices when the grid is coarser than rho/4); analytic fields
    scan the supplied centers.  Both finish with a pattern-search polish.
    """
    if isinstance(f, AnalyticField):
        if centers is None:
            raise ValueError("analytic fields need an explicit center lattice")
        centers = np.atleast_2d(np.asarray(centers, dtype=float))
        masses = _local_mass_analytic(f, q, rho, centers, spec)
        i = int(np.argmax(masses))
        best, c = float(masses[i]), centers[i]
        if refine:
            fn = lambda cs: _local_mass_analytic(f, q, rho, cs, spec)
            best, c = _refine_center(fn, c, rho / 8.0)
        return best, c
    g = f.grid
    Ball((0, 0, 0), rho).check_fits(g.box_length)
    density = _magnitude(np.moveaxis(f.physical, 0, -1)) ** q \
        if isinstance(f, SpectralField) else np.abs(f.physical) ** q
    conv = local_mass_field(density, g, rho, spec.mollify_cells)
    idx = np.unravel_index(int(np.argmax(conv)), conv.shape)
    best = float(conv[idx])
    c = g.mesh[:, idx[0], idx[1], idx[2]].copy()
    n_sub = int(np.ceil(g.cell / (rho / 4.0)))
    if n_sub > 1:
        n_sub = min(n_sub, 4)
        conv_hat = fftn(np.asarray(conv, dtype=complex))
        offs = np.array([(i, j, k) for i in range(n_sub) for j in range(n_sub)
                         for k in range(n_sub)], dtype=float)[1:] * (g.cell / n_sub)
        val, loc = shifted_max(conv_hat, g, offs)
        if val > best:
            best, c = val, loc
    if refine:
        def fn(cs):
            out = np.empty(len(cs))
            for i, cc in enumerate(cs):
                w, _ = grid_ball_weights(g, Ball(tuple(cc), rho), spec.mollify_cells)
                out[i] = float(np.sum(w * density))
            return out
        best, c = _refine_center(fn, c, g.cell / 2.0)
    return best, np.asarray(c)


def uloc_norm(f, q: float, rho: float = 1.0, grid: GridSpec | None = None,
              centers: np.ndarray | None = None,
              spec: QuadratureSpec = DEFAULT_QUAD, refine: bool = True) -> NormReport:
    """Uniformly-local norm sup_x ||f||_{L^q(B_rho(x))}."""
    mass, center = sup_local_mass(f, q, rho, grid, centers, spec, refine)
    value = mass ** (1.0 / q)
    return NormReport("uloc", value, {"q": q, "rho": rho},
                      tuple(float(x) for x in center), 0.0)


def data_quantity_nr(v0, r: float, grid: GridSpec | None = None,
                     centers: np.ndarray | None = None,
                     spec: QuadratureSpec = DEFAULT_QUAD, refine: bool = True) -> NormReport:
    """Dimensionless data size: (1/r) * sup_x integral_{B_r(x)} |v0|^2."""
    mass, center = sup_local_mass(v0, 2.0, r, grid, centers, spec, refine)
    return NormReport("data-nr", mass / r, {"r": r},
                      tuple(float(x) for x in center), 0.0)


def sigma_schedule(n_r: float, c0: float) -> float:
    """Local-energy time horizon factor c0 * min(N_r^{-2}, 1)."""
    if n_r < 0:
        raise ValueError("N_r must be nonnegative")
    if c0 <= 0:
        raise ValueError("c0 must be positive")
    if n_r == 0.0:
        return c0
    return c0 * min(n_r ** -2, 1.0)


_BALL_DIRECTIONS = None


def probe_directions() -> np.ndarray:
    """26 lattice directions, normalized; deterministic order."""
    global _BALL_DIRECTIONS
    if _BALL_DIRECTIONS is None:
        dirs = [np.array((i, j, k), dtype=float)
                for i in (-1, 0, 1) for j in (-1, 0, 1) for k in (-1, 0, 1)
                if (i, j, k) != (0, 0, 0)]
        _BALL_DIRECTIONS = np.stack([d / np.linalg.norm(d) for d in dirs])
    return _BALL_DIRECTIONS


def herz_norm(f, params: HerzParams, decomp: AnnulusDecomposition | None = None,
              grid: GridSpec | None = None,
              spec: QuadratureSpec = DEFAULT_QUAD) -> NormReport:
    """Herz norm in shell form (sup_k 2^{ks} ||f||_{L^p(A_k)}) or ball form.

    The ball form discretizes sup_{x != 0} |x|^s ||f||_{L^p(B_{|x|/2}(x))}
    over probe directions times a geometric radius ladder spanning the
    shell range.
    """
    g = grid if grid is not None else getattr(f, "grid", None)
    if decomp is None:
        if g is None:
            decomp = AnnulusDecomposition(-8, 8)
        else:
            decomp = AnnulusDecomposition.for_grid(g)
    if g is not None and not isinstance(f, AnalyticField):
        if 2.0 ** (decomp.k_min - 1) < g.cell:
            raise ShellUnresolved(
                f"inner shell radius {2.0 ** (decomp.k_min - 1):g} below one cell {g.cell:g}")
    if params.flavor == "shell-sup":
        breakdown = []
        err = 0.0
        for k, ann in decomp.shells:
            rep = lp_norm(f, ann, params.p, grid=g, spec=spec)
            breakdown.append((f"k={k}", 2.0 ** (k * params.s) * rep.value))
            err = max(err, rep.quadrature_error)
        value = max(v for _, v in breakdown) if breakdown else 0.0
        return NormReport("herz-shell", value,
                          {"s": params.s, "p": params.p}, None, err,
                          tuple(breakdown))
    # ball flavor
    dirs = probe_directions()
    breakdown = []
    best = 0.0
    argmax = None
    for k, _ in decomp.shells:
        for frac in (1.0, 2.0 ** (1.0 / 3.0), 2.0 ** (2.0 / 3.0)):
            radius = 2.0 ** (k - 1) * frac
            shell_best = 0.0
            for d in dirs:
                x = radius * d
                rep = lp_norm(f, Ball(tuple(x), radius / 2.0), params.p, grid=g, spec=spec)
                val = radius ** params.s * rep.value
                if val > shell_best:
                    shell_best = val
                if val > best:
                    best = val
                    argmax = tuple(float(c) for c in x)
            breakdown.append((f"|x|={radius:.6g}", shell_best))
    return NormReport("herz-ball", best, {"s": params.s, "p": params.p},
                      argmax, 0.0, tuple(breakdown))


@dataclass(frozen=True)
class HerzDataCheck:
    n_r: float
    herz_sq: float
    measured_ratio: float
    budget: float
    violated: bool


def herz_controls_nr_check(v0, R: float, grid: GridSpec | None = None,
                           centers: np.ndarray | None = None,
                           decomp: AnnulusDecomposition | None = None,
                           budget: float = 10.0,
                           spec: QuadratureSpec = DEFAULT_QUAD) -> HerzDataCheck:
    """Measure N_R against R * ||v0||_{K_3}^2 and compare to a constant budget.

    The budget replaces an unverifiable absolute constant; the check reports
    the measured ratio rather than asserting any particular value.
    """
    nr = data_quantity_nr(v0, R, grid=grid, centers=centers, spec=spec).value
    herz = herz_norm(v0, HerzParams.scale_critical(3.0), decomp=decomp,
                     grid=grid, spec=spec).value
    herz_sq = herz ** 2
    denom = R * herz_sq
    ratio = nr / denom if denom > 0 else 0.0
    return HerzDataCheck(nr, herz_sq, ratio, budget, ratio > budget)


@dataclass(frozen=True)
class DecayProfile:
    radii: np.ndarray
    sup_values: np.ndarray
    envelope: np.ndarray      # running sup over larger radii
    decaying: bool
    threshold: float

    def to_dict(self) -> dict:
        return {
            "radii": self.radii.tolist(),
            "sup_values": self.sup_values.tolist(),
            "envelope": self.envelope.tolist(),
            "decaying": bool(self.decaying),
            "threshold": self.threshold,
        }


def e2_decay_indicator(f, q: float, radii: np.ndarray | None = None,
                       grid: GridSpec | None = None,
                       directions: np.ndarray | None = None,
                       spec: QuadratureSpec = DEFAULT_QUAD,
                       decay_threshold: float = 0.1) -> DecayProfile:
    """Profile rho -> sup_{|x| = rho} ||f||_{L^q(B_1(x))} with its monotone envelope.

    A field belongs to the decaying class exactly when the envelope falls
    off; within the box we can only flag whether it does so before L/2 - 1.
    """
    g = grid if grid is not None else getattr(f, "grid", None)
    if radii is None:
        if g is None:
            raise ValueError("need explicit radii for analytic fields without a grid")
        r_max = g.box_length / 2.0 - 1.0
        radii = np.linspace(0.0, r_max, 25)
    radii = np.asarray(radii, dtype=float)
    if isinstance(f, AnalyticField):
        dirs = directions if directions is not None else probe_directions()
        sup_vals = np.empty(len(radii))
        for i, rho in enumerate(radii):
            centers = rho * dirs if rho > 0 else np.zeros((1, 3))
            mass = _local_mass_analytic(f, q, 1.0, np.atleast_2d(centers), spec)
            sup_vals[i] = float(np.max(mass)) ** (1.0 / q)
    else:
        density = _magnitude(np.moveaxis(f.physical, 0, -1)) ** q \
            if isinstance(f, SpectralField) else np.abs(f.physical) ** q
        conv = local_mass_field(density, g, 1.0, spec.mollify_cells)
        dist = np.sqrt(np.sum(g.min_image_mesh((0.0, 0.0, 0.0)) ** 2, axis=0))
        half_band = max(np.diff(radii).min() / 2.0 if len(radii) > 1 else g.cell, g.cell)
        sup_vals = np.empty(len(radii))
        for i, rho in enumerate(radii):
            sel = np.abs(dist - rho) <= half_band
            sup_vals[i] = float(np.max(conv[sel])) ** (1.0 / q) if np.any(sel) else 0.0
    envelope = np.maximum.accumulate(sup_vals[::-1])[::-1]
    peak = float(np.max(envelope)) if envelope.size else 0.0
    decaying = bool(envelope[-1] <= decay_threshold * peak) if peak > 0 else True
    return DecayProfile(radii, sup_vals, envelope, decaying, decay_threshold)
