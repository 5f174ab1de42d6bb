"""Graph map between the moving fluid domain and the reference rectangle.

A point ``(x, y)`` of the fluid domain under the beam ``y = 1 + eta(x)`` maps
to ``(x, z) = (x, y / (1 + eta(x)))``; the inverse is ``y = z (1 + eta(x))``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import AdmissibilityViolated
from .fields import Grid, ddx, d2x


@dataclass(frozen=True)
class BeamGeometry:
    grid: Grid
    eta: np.ndarray
    eta_x: np.ndarray
    eta_xx: np.ndarray
    one_plus_eta: np.ndarray
    inv_one_plus_eta: np.ndarray

    @property
    def min_one_plus_eta(self) -> float:
        return float(self.one_plus_eta.min())


def build_geometry(eta: np.ndarray, grid: Grid, delta0: float) -> BeamGeometry:
    """Derive slope, curvature and Jacobian factors of a beam displacement.

    Admissibility is checked at the nodes only: ``min(1 + eta) >= delta0``.
    """
    if not 0.0 < delta0 < 1.0:
        raise ValueError(f"delta0 must lie in (0, 1), got {delta0}")
    eta = np.array(eta, dtype=float)
    grid.check_beam(eta, "eta")
    one_plus = 1.0 + eta
    imin = int(np.argmin(one_plus))
    if not one_plus[imin] >= delta0:  # also catches NaN
        raise AdmissibilityViolated(one_plus[imin], imin, delta0)
    for a in (eta, one_plus):
        a.setflags(write=False)
    inv = 1.0 / one_plus
    ex = ddx(eta, grid)
    exx = d2x(eta, grid)
    for a in (inv, ex, exx):
        a.setflags(write=False)
    return BeamGeometry(grid, eta, ex, exx, one_plus, inv)


def sample_eta(geometry: BeamGeometry, x, kind: str = "cubic") -> np.ndarray:
    """Evaluate the displacement between nodes by periodic interpolation.

    ``kind="linear"`` is used for diagnostics, ``"cubic"`` (four-point
    Lagrange) wherever smooth sampling matters.
    """
    g = geometry.grid
    s = np.mod(np.asarray(x, dtype=float), g.L) / g.dx
    i0 = np.floor(s).astype(int)
    f = s - i0
    eta = geometry.eta
    n = g.Nx
    if kind == "linear":
        return (1.0 - f) * eta[i0 % n] + f * eta[(i0 + 1) % n]
    if kind != "cubic":
        raise ValueError(f"unknown interpolation kind {kind!r}")
    w = lagrange4_weights(f)
    return sum(w[a] * eta[(i0 - 1 + a) % n] for a in range(4))


def lagrange4_weights(f):
    """Cubic Lagrange weights for nodes at offsets -1, 0, 1, 2 evaluated at ``f``."""
    f = np.asarray(f, dtype=float)
    return (
        -f * (f - 1.0) * (f - 2.0) / 6.0,
        (f + 1.0) * (f - 1.0) * (f - 2.0) / 2.0,
        -(f + 1.0) * f * (f - 2.0) / 2.0,
        (f + 1.0) * f * (f - 1.0) / 6.0,
    )


def map_to_physical(x, z, geometry: BeamGeometry):
    """Inverse graph map ``(x, z) -> (x, z (1 + eta(x)))`` with linear sampling of eta."""
    x = np.asarray(x, dtype=float)
    eta = sample_eta(geometry, x, kind="linear")
    return x, np.asarray(z, dtype=float) * (1.0 + eta)


def map_to_reference(x, y, geometry: BeamGeometry):
    x = np.asarray(x, dtype=float)
    eta = sample_eta(geometry, x, kind="linear")
    return x, np.asarray(y, dtype=float) / (1.0 + eta)


def normal_vector(eta_x_value):
    """Outward unit normal ``(-eta_x, 1) / sqrt(1 + eta_x**2)`` of the beam graph."""
    ex = np.asarray(eta_x_value, dtype=float)
    s = np.sqrt(1.0 + ex * ex)
    return np.stack([-ex / s, 1.0 / s])


def jacobian_weight(geometry: BeamGeometry) -> np.ndarray:
    """Area factor ``1 + eta(x)`` as a scalar field constant along z."""
    g = geometry.grid
    return np.repeat(geometry.one_plus_eta[:, None], g.Nz + 1, axis=1)


def pull_back_field(physical_sampler: Callable, geometry: BeamGeometry, grid: Grid) -> np.ndarray:
    """Sample a function of the moving domain at the images of the reference nodes."""
    X, Z = grid.mesh()
    Y = Z * geometry.one_plus_eta[:, None]
    return np.broadcast_to(np.asarray(physical_sampler(X, Y), dtype=float), X.shape).copy()
