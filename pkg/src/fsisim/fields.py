"""Grid, nodal fields and finite-difference calculus on the reference channel.

The reference domain is the periodic strip ``[0, L) x [0, 1]``.  Fields are
plain numpy arrays:

* scalar field: shape ``(Nx, Nz + 1)`` indexed ``[i, k]`` (x-node, z-node)
* vector field: shape ``(2, Nx, Nz + 1)``; component 0 is along x, 1 along z
* beam field:   shape ``(Nx,)``, periodic

The last axis is always z and the x axis is the one before it (axis 0 for
beam fields).  When fields are written to disk the order is row-major with
x varying fastest, i.e. ``values.T.ravel()`` for a scalar field.

The x direction is periodic with no duplicated endpoint; the z direction has
nodes on both walls ``z = 0`` and ``z = 1``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionTooSmall, NonpositiveLength, ShapeMismatch


@dataclass(frozen=True)
class Grid:
    Nx: int
    Nz: int
    L: float
    dx: float = field(init=False)
    dz: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "dx", self.L / self.Nx)
        object.__setattr__(self, "dz", 1.0 / self.Nz)

    @property
    def x(self) -> np.ndarray:
        return np.arange(self.Nx) * self.dx

    @property
    def z(self) -> np.ndarray:
        return np.arange(self.Nz + 1) * self.dz

    @property
    def scalar_shape(self) -> tuple[int, int]:
        return (self.Nx, self.Nz + 1)

    @property
    def vector_shape(self) -> tuple[int, int, int]:
        return (2, self.Nx, self.Nz + 1)

    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        """Nodal coordinates ``(X, Z)``, each of scalar-field shape."""
        return np.meshgrid(self.x, self.z, indexing="ij")

    def zeros(self) -> np.ndarray:
        return np.zeros(self.scalar_shape)

    def zeros_vector(self) -> np.ndarray:
        return np.zeros(self.vector_shape)

    def zeros_beam(self) -> np.ndarray:
        return np.zeros(self.Nx)

    def check_scalar(self, f: np.ndarray, name: str = "field") -> None:
        if np.shape(f) != self.scalar_shape:
            raise ShapeMismatch(f"{name} has shape {np.shape(f)}, expected {self.scalar_shape}")

    def check_vector(self, f: np.ndarray, name: str = "field") -> None:
        if np.shape(f) != self.vector_shape:
            raise ShapeMismatch(f"{name} has shape {np.shape(f)}, expected {self.vector_shape}")

    def check_beam(self, f: np.ndarray, name: str = "field") -> None:
        if np.shape(f) != (self.Nx,):
            raise ShapeMismatch(f"{name} has shape {np.shape(f)}, expected {(self.Nx,)}")


def make_grid(Nx: int, Nz: int, L: float) -> Grid:
    if Nx < 4 or Nz < 4:
        raise DimensionTooSmall(f"need Nx >= 4 and Nz >= 4, got Nx={Nx}, Nz={Nz}")
    if not L > 0:
        raise NonpositiveLength(f"L must be positive, got {L}")
    return Grid(int(Nx), int(Nz), float(L))


def _xaxis(f: np.ndarray) -> int:
    return -1 if f.ndim == 1 else -2


def ddx(f: np.ndarray, grid: Grid) -> np.ndarray:
    """Centered difference in x with periodic wrap.

    Non-periodic data (a sawtooth, say) still yields finite values, but the
    wrap-around stencil is then meaningless; smoothness is the caller's job.
    """
    ax = _xaxis(f)
    return (np.roll(f, -1, axis=ax) - np.roll(f, 1, axis=ax)) / (2.0 * grid.dx)


def d2x(f: np.ndarray, grid: Grid) -> np.ndarray:
    ax = _xaxis(f)
    return (np.roll(f, -1, axis=ax) - 2.0 * f + np.roll(f, 1, axis=ax)) / grid.dx**2


def ddz(f: np.ndarray, grid: Grid) -> np.ndarray:
    """Centered difference in z; second-order one-sided rows on both walls."""
    out = np.empty_like(f, dtype=float)
    h = grid.dz
    out[..., 1:-1] = (f[..., 2:] - f[..., :-2]) / (2.0 * h)
    out[..., 0] = (-3.0 * f[..., 0] + 4.0 * f[..., 1] - f[..., 2]) / (2.0 * h)
    out[..., -1] = (3.0 * f[..., -1] - 4.0 * f[..., -2] + f[..., -3]) / (2.0 * h)
    return out


def d2z(f: np.ndarray, grid: Grid) -> np.ndarray:
    """Second z-difference; one-sided four-point rows on the walls (exact on cubics)."""
    out = np.empty_like(f, dtype=float)
    h2 = grid.dz**2
    out[..., 1:-1] = (f[..., 2:] - 2.0 * f[..., 1:-1] + f[..., :-2]) / h2
    out[..., 0] = (2.0 * f[..., 0] - 5.0 * f[..., 1] + 4.0 * f[..., 2] - f[..., 3]) / h2
    out[..., -1] = (2.0 * f[..., -1] - 5.0 * f[..., -2] + 4.0 * f[..., -3] - f[..., -4]) / h2
    return out


def dxz(f: np.ndarray, grid: Grid) -> np.ndarray:
    return ddx(ddz(f, grid), grid)


def laplacian(f: np.ndarray, grid: Grid) -> np.ndarray:
    """Five-point Laplacian (componentwise for vector fields)."""
    return d2x(f, grid) + d2z(f, grid)


def gradient(f: np.ndarray, grid: Grid) -> np.ndarray:
    return np.stack([ddx(f, grid), ddz(f, grid)])


def divergence(u: np.ndarray, grid: Grid) -> np.ndarray:
    return ddx(u[0], grid) + ddz(u[1], grid)


def grad_div(u: np.ndarray, grid: Grid) -> np.ndarray:
    """``grad(div u)`` built from second differences, not by composing first ones."""
    return np.stack([
        d2x(u[0], grid) + dxz(u[1], grid),
        dxz(u[0], grid) + d2z(u[1], grid),
    ])


def lame_apply(u: np.ndarray, grid: Grid, mu: float, mu_prime: float) -> np.ndarray:
    """Pointwise ``(-mu Lap - (mu + mu') grad div) u`` on every node, walls included."""
    return -mu * laplacian(u, grid) - (mu + mu_prime) * grad_div(u, grid)


# --- beam line: discrete Fourier transform in x ---------------------------
#
# Normalisation follows numpy: the forward transform is unnormalised, so a
# constant f = 1 maps to mode 0 with value Nx, and idft_x(dft_x(f)) == f.

def wavenumbers(grid: Grid) -> np.ndarray:
    """Signed wavenumbers 2*pi*j/L in numpy FFT order (Nyquist carries -pi*Nx/L)."""
    return 2.0 * np.pi * np.fft.fftfreq(grid.Nx, d=grid.dx)


def dft_x(f: np.ndarray) -> np.ndarray:
    return np.fft.fft(f, axis=-1)


def idft_x(c: np.ndarray) -> np.ndarray:
    """Inverse transform; returns the real part (inputs are conjugate-symmetric)."""
    return np.fft.ifft(c, axis=-1).real


def spectral_dx(f: np.ndarray, grid: Grid, order: int = 1) -> np.ndarray:
    """Exact derivative of the trigonometric interpolant of a beam field."""
    k = wavenumbers(grid)
    mult = (1j * k) ** order
    if grid.Nx % 2 == 0 and order % 2 == 1:
        # the Nyquist mode has no odd derivative on a real grid
        mult[grid.Nx // 2] = 0.0
    return idft_x(mult * dft_x(f))


# --- quadrature ------------------------------------------------------------

def z_weights(grid: Grid) -> np.ndarray:
    w = np.full(grid.Nz + 1, grid.dz)
    w[0] = w[-1] = 0.5 * grid.dz
    return w


def integrate_weighted(f: np.ndarray, wgt: np.ndarray, grid: Grid) -> float:
    """Integral of ``f * wgt`` over the reference rectangle.

    Rectangle rule in x (exact for periodic trigonometric data below the
    Nyquist mode) and trapezoid rule in z.
    """
    f = np.asarray(f, dtype=float)
    wgt = np.broadcast_to(np.asarray(wgt, dtype=float), f.shape)
    if f.shape != grid.scalar_shape:
        raise ShapeMismatch(f"field shape {f.shape} does not match grid {grid.scalar_shape}")
    col = (f * wgt) @ z_weights(grid)
    return float(np.sum(col) * grid.dx)


def integrate(f: np.ndarray, grid: Grid) -> float:
    return integrate_weighted(f, 1.0, grid)


def integrate_beam(f: np.ndarray, grid: Grid) -> float:
    return float(np.sum(f) * grid.dx)


def l2_norm(f: np.ndarray, grid: Grid) -> float:
    """Discrete L2 norm over the rectangle; vector fields sum their components."""
    f = np.asarray(f, dtype=float)
    if f.ndim == 3:
        return float(np.sqrt(sum(integrate(c * c, grid) for c in f)))
    return float(np.sqrt(integrate(f * f, grid)))


def l2_norm_beam(f: np.ndarray, grid: Grid) -> float:
    return float(np.sqrt(integrate_beam(f * f, grid)))
