"""Linear continuity equation ``sigma_t + W . grad(sigma) = G1`` by characteristics.

Every level of a window is reconstructed from the window's initial density:
the foot of the characteristic through each node is traced back to the
window start with midpoint (RK2) substeps, the initial field is sampled
there, and the source is integrated along the path by the trapezoid rule.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fields import Grid
from .geometry import lagrange4_weights


@dataclass
class CharacteristicFootprints:
    """Positions of the characteristics through every node.

    ``x[m]``, ``z[m]`` hold the position at window level ``to_t + m``;
    the last entry is the arrival grid itself.
    """

    x: np.ndarray
    z: np.ndarray
    from_t: int
    to_t: int

    def at_level(self, m: int):
        j = m - self.to_t
        return self.x[j], self.z[j]


def _wrap(x, L):
    return np.mod(x, L)


def interp_bilinear(f: np.ndarray, x, z, grid: Grid) -> np.ndarray:
    """Bilinear interpolation of a nodal scalar field, periodic in x, clamped in z."""
    sx = _wrap(x, grid.L) / grid.dx
    sz = np.clip(z, 0.0, 1.0) / grid.dz
    i0 = np.floor(sx).astype(int)
    k0 = np.minimum(np.floor(sz).astype(int), grid.Nz - 1)
    fx = sx - i0
    fz = sz - k0
    i0 %= grid.Nx
    i1 = (i0 + 1) % grid.Nx
    return ((1 - fx) * (1 - fz) * f[i0, k0] + fx * (1 - fz) * f[i1, k0]
            + (1 - fx) * fz * f[i0, k0 + 1] + fx * fz * f[i1, k0 + 1])


def interp_cubic(f: np.ndarray, x, z, grid: Grid, monotone: bool = False) -> np.ndarray:
    """Tensor four-point Lagrange interpolation, periodic in x, clamped in z.

    Near the walls the z-stencil is shifted inward so it never leaves the
    grid.  Samples at exact nodes reproduce the nodal value and constant
    fields are reproduced bit for bit.  With ``monotone=True`` the result is
    clipped to the range of the enclosing cell, which gives a discrete
    maximum principle.
    """
    sx = _wrap(x, grid.L) / grid.dx
    sz = np.clip(z, 0.0, 1.0) / grid.dz
    i0 = np.floor(sx).astype(int)
    fx = sx - i0
    i0 %= grid.Nx
    kc = np.minimum(np.floor(sz).astype(int), grid.Nz - 1)
    k0 = np.clip(kc, 1, grid.Nz - 2)
    fz = sz - k0
    wx = lagrange4_weights(fx)
    wz = lagrange4_weights(fz)
    n = grid.Nx
    # interpolate deviations from an anchor node so constants come back bit-exact
    base = f[i0, k0]
    out = np.zeros(np.shape(sx))
    for a in range(4):
        ia = (i0 - 1 + a) % n
        row = np.zeros(np.shape(sx))
        for b in range(4):
            row += wz[b] * (f[ia, k0 - 1 + b] - base)
        out += wx[a] * row
    out += base
    if monotone:
        i1 = (i0 + 1) % n
        corners = np.stack([f[i0, kc], f[i1, kc], f[i0, kc + 1], f[i1, kc + 1]])
        out = np.clip(out, corners.min(axis=0), corners.max(axis=0))
    return out


def _velocity_at(W: np.ndarray, x, z, grid: Grid):
    return interp_bilinear(W[0], x, z, grid), interp_bilinear(W[1], x, z, grid)


def backtrack(W_traj, from_t: int, to_t: int, grid: Grid, dt: float) -> CharacteristicFootprints:
    """Trace characteristics of ``dX/dt = W(X, t)`` backward from level ``from_t``.

    Midpoint substeps of size ``dt``; the velocity at half levels is the
    average of the two bracketing levels.  Positions are reduced modulo L
    in x and clamped to ``[0, 1]`` in z.
    """
    if from_t < to_t:
        raise ValueError("from_t must be >= to_t")
    X, Z = grid.mesh()
    nlev = from_t - to_t + 1
    xs = np.empty((nlev,) + X.shape)
    zs = np.empty((nlev,) + X.shape)
    xs[-1], zs[-1] = X, Z
    px, pz = X.copy(), Z.copy()
    for m in range(from_t, to_t, -1):
        Wm, Wp = W_traj[m], W_traj[m - 1]
        k1x, k1z = _velocity_at(Wm, px, pz, grid)
        mx = _wrap(px - 0.5 * dt * k1x, grid.L)
        mz = np.clip(pz - 0.5 * dt * k1z, 0.0, 1.0)
        ax, az = _velocity_at(Wm, mx, mz, grid)
        bx, bz = _velocity_at(Wp, mx, mz, grid)
        px = _wrap(px - dt * 0.5 * (ax + bx), grid.L)
        pz = np.clip(pz - dt * 0.5 * (az + bz), 0.0, 1.0)
        xs[m - 1 - to_t], zs[m - 1 - to_t] = px, pz
    return CharacteristicFootprints(xs, zs, from_t, to_t)


def solve_window(sigma0, W_traj, G1_traj, grid: Grid, dt: float, monotone: bool = False):
    """Density at every level of a window from the representation formula.

    ``W_traj`` and ``G1_traj`` are sequences aligned with the window levels
    ``0..N``.  Returns a list of ``N + 1`` scalar fields, the first being a
    copy of ``sigma0``.
    """
    nlev = len(W_traj)
    if len(G1_traj) != nlev:
        raise ValueError("W_traj and G1_traj must have the same number of levels")
    out = [np.array(sigma0, dtype=float, copy=True)]
    for n in range(1, nlev):
        feet = backtrack(W_traj, n, 0, grid, dt)
        x0, z0 = feet.at_level(0)
        sig = interp_cubic(sigma0, x0, z0, grid, monotone=monotone)
        g_prev = interp_cubic(G1_traj[0], x0, z0, grid)
        integral = np.zeros_like(sig)
        for m in range(1, n + 1):
            xm, zm = feet.at_level(m)
            g_m = G1_traj[m] if m == n else interp_cubic(G1_traj[m], xm, zm, grid)
            integral += 0.5 * dt * (g_prev + g_m)
            g_prev = g_m
        out.append(sig + integral)
    return out


@dataclass
class DensityReport:
    min_density: float
    max_density: float
    lower: float
    upper: float

    @property
    def passed(self) -> bool:
        return self.lower <= self.min_density and self.max_density <= self.upper


def check_density_bounds(sigma, params, m: float, M: float) -> DensityReport:
    """Admissibility ``m/2 <= sigma + rho_bar <= 2M`` with the observed extrema."""
    rho = np.asarray(sigma) + params.rho_bar
    lo, hi = float(np.min(rho)), float(np.max(rho))
    if not (np.isfinite(lo) and np.isfinite(hi)):
        lo, hi = float("nan"), float("nan")
    return DensityReport(lo, hi, 0.5 * m, 2.0 * M)
