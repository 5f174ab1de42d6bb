"""Linear parabolic (Lame) problem for the homogeneous-Dirichlet velocity.

Solves ``s w_t - mu Lap w - (mu + mu') grad div w = G2`` with ``w = 0`` on
both walls by implicit Euler; each step is one SPD sparse solve.

Unknowns are the interior nodes ``k = 1..Nz-1`` of both components, ordered
component-major, then z, then x fastest.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import CoefficientOutOfBounds, LinearSolveDiverged
from .fields import Grid


def _periodic_second(n, h):
    e = np.ones(n)
    D = sp.diags([e[:-1], -2 * e, e[:-1]], [-1, 0, 1], format="lil")
    D[0, n - 1] = 1.0
    D[n - 1, 0] = 1.0
    return D.tocsr() / h**2


def _periodic_first(n, h):
    e = np.ones(n)
    D = sp.diags([-e[:-1], e[:-1]], [-1, 1], format="lil")
    D[0, n - 1] = -1.0
    D[n - 1, 0] = 1.0
    return D.tocsr() / (2 * h)


def _dirichlet_second(n, h):
    e = np.ones(n)
    return sp.diags([e[:-1], -2 * e, e[:-1]], [-1, 0, 1], format="csr") / h**2


def _dirichlet_first(n, h):
    e = np.ones(n)
    return sp.diags([-e[:-1], e[:-1]], [-1, 1], format="csr") / (2 * h)


@dataclass
class LameOperator:
    grid: Grid
    mu: float
    mu_prime: float
    matrix: sp.csr_matrix

    @property
    def n_interior(self) -> int:
        return self.grid.Nx * (self.grid.Nz - 1)

    @property
    def size(self) -> int:
        return 2 * self.n_interior

    def to_vector(self, w: np.ndarray) -> np.ndarray:
        """Interior values of a vector field, flattened (x fastest)."""
        inner = w[:, :, 1:-1]
        return np.concatenate([inner[0].T.ravel(), inner[1].T.ravel()])

    def to_field(self, vec: np.ndarray) -> np.ndarray:
        g = self.grid
        out = g.zeros_vector()
        n = self.n_interior
        out[0, :, 1:-1] = vec[:n].reshape(g.Nz - 1, g.Nx).T
        out[1, :, 1:-1] = vec[n:].reshape(g.Nz - 1, g.Nx).T
        return out

    def apply(self, w: np.ndarray) -> np.ndarray:
        """Apply the operator; wall values are taken as zero and output walls are zero."""
        return self.to_field(self.matrix @ self.to_vector(w))


def assemble_lame(grid: Grid, params) -> LameOperator:
    """Sparse ``-mu Lap - (mu + mu') grad div`` on interior nodes, Dirichlet walls.

    Second derivatives use three-point differences and the mixed terms use
    centred cross differences, so the matrix is symmetric positive definite.
    """
    nx, nzi = grid.Nx, grid.Nz - 1
    Ix = sp.identity(nx, format="csr")
    Iz = sp.identity(nzi, format="csr")
    Dxx = sp.kron(Iz, _periodic_second(nx, grid.dx))
    Dzz = sp.kron(_dirichlet_second(nzi, grid.dz), Ix)
    Dxz = sp.kron(_dirichlet_first(nzi, grid.dz), _periodic_first(nx, grid.dx))
    lap = Dxx + Dzz
    mu, lam = params.mu, params.mu + params.mu_prime
    A = sp.bmat([
        [-mu * lap - lam * Dxx, -lam * Dxz],
        [-lam * Dxz, -mu * lap - lam * Dzz],
    ], format="csr")
    return LameOperator(grid, params.mu, params.mu_prime, A)


def step(w_n, sigma_bar, G2, dt: float, op: LameOperator, params, lin_tol: float = 1e-10,
         bounds: tuple[float, float] | None = None) -> np.ndarray:
    """One implicit Euler step with frozen density coefficient ``sigma_bar + rho_bar``.

    Solves ``(diag(s)/dt + A) w_new = diag(s) w_n / dt + G2`` by
    Jacobi-preconditioned conjugate gradients.  ``bounds=(m, M)`` enforces
    ``m/2 <= s <= 2M``; without it only positivity is required.
    """
    if not lin_tol > 0:
        raise ValueError("lin_tol must be positive")
    s = np.asarray(sigma_bar, dtype=float) + params.rho_bar
    smin, smax = float(np.min(s)), float(np.max(s))
    lo, hi = (0.5 * bounds[0], 2.0 * bounds[1]) if bounds is not None else (0.0, np.inf)
    if not (smin > 0 and smin >= lo and smax <= hi):
        raise CoefficientOutOfBounds(
            f"density coefficient range [{smin:.6g}, {smax:.6g}] outside [{lo:.6g}, {hi:.6g}]")
    mass = op.to_vector(np.stack([s, s]))
    x0 = op.to_vector(w_n)
    rhs = mass * x0 / dt + op.to_vector(G2)
    system = op.matrix + sp.diags(mass / dt)
    diag = system.diagonal()
    precond = spla.LinearOperator(system.shape, matvec=lambda r: r / diag, dtype=float)
    maxiter = int(10 * np.sqrt(op.size))
    bnorm = np.linalg.norm(rhs)
    if bnorm == 0.0:
        return op.grid.zeros_vector()
    x, info = spla.cg(system, rhs, x0=x0, rtol=lin_tol, atol=0.0, maxiter=maxiter, M=precond)
    if info != 0 or not np.all(np.isfinite(x)):
        res = np.linalg.norm(system @ x - rhs) / bnorm
        raise LinearSolveDiverged(f"CG stopped with info={info}, relative residual {res:.3e}")
    return op.to_field(x)


def solve_window(w0, sigma_traj, G2_traj, dt: float, grid: Grid, params, lin_tol: float = 1e-10,
                 op: LameOperator | None = None, bounds=None):
    """Velocity at every window level; level n+1 uses ``sigma_traj[n+1]`` and ``G2_traj[n+1]``."""
    if op is None:
        op = assemble_lame(grid, params)
    out = [np.array(w0, dtype=float, copy=True)]
    for n in range(1, len(G2_traj)):
        out.append(step(out[-1], sigma_traj[n], G2_traj[n], dt, op, params, lin_tol, bounds))
    return out
