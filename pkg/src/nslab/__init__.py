"""Desk-scale periodic-box Navier-Stokes laboratory.

Divergence-free and discretely self-similar initial data, an
energy-tracking pseudo-spectral solver, and the local regularity
diagnostics evaluated on its trajectories.
"""

from .gridspec import GridSpec, set_fft_workers
from .field import (
    AnalyticField,
    ScalarField,
    SpectralField,
    curl,
    dealias,
    divergence,
    gradient,
    inner_product,
    leray_project,
    scale_field,
)
from .geometry import Annulus, AnnulusDecomposition, Ball, ParabolicCylinder
from .quadrature import QuadratureSpec, sample_on_ball
from .snapshot_io import read_snapshot, write_snapshot

__version__ = "0.1.0"
