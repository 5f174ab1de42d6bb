"""Explicit right-hand sides of the fixed-domain and homogenised systems.

Everything here is a pure nodal evaluation.  Velocities named ``u_hat`` are
the pulled-back physical velocity; ``w`` is the homogeneous-Dirichlet unknown
``w = u_hat - z * eta_t * e2``.

The beam forcing is computed directly from the normal traction on the beam
(stress times the unnormalised normal ``(-eta_x, 1)``).  The closed-form
expression of that force written in the reference variables is available as
``compute_F3_printed`` for comparison only; at a flat interface the two
disagree in the viscous coefficient, see ``f3_comparison``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import NonpositiveDensity, ValidationError
from .fields import (
    Grid,
    d2x,
    d2z,
    ddx,
    ddz,
    divergence,
    dxz,
    gradient,
    lame_apply,
    spectral_dx,
)
from .geometry import BeamGeometry, build_geometry


@dataclass(frozen=True)
class PhysParams:
    """Physical constants: viscosities, pressure law ``a rho**gamma``, beam moduli.

    ``rho_bar`` fixes the external pressure ``p_ext = a * rho_bar**gamma``.
    """

    mu: float = 1.0
    mu_prime: float = 0.0
    a: float = 1.0
    gamma: float = 1.4
    rho_bar: float = 1.0
    alpha: float = 1.0
    beta: float = 1.0
    delta: float = 1.0
    L: float = 1.0

    def __post_init__(self):
        checks = {
            "mu": self.mu > 0,
            "mu_prime": self.mu_prime >= 0,
            "a": self.a > 0,
            "gamma": self.gamma > 1,
            "rho_bar": self.rho_bar > 0,
            "alpha": self.alpha > 0,
            "beta": self.beta >= 0,
            "delta": self.delta > 0,
            "L": self.L > 0,
        }
        for name, ok in checks.items():
            if not ok:
                raise ValidationError(name, f"invalid value {getattr(self, name)!r}")

    @property
    def p_ext(self) -> float:
        return self.a * self.rho_bar**self.gamma


@dataclass
class CoupledState:
    """One time level of the homogenised unknowns (sigma, w, eta, eta_t)."""

    sigma: np.ndarray
    w: np.ndarray
    eta: np.ndarray
    eta_t: np.ndarray
    t: float = 0.0

    def velocity(self, grid: Grid) -> np.ndarray:
        """Reference-domain fluid velocity ``w + z eta_t e2``."""
        return lift_velocity(self.w, self.eta_t, grid)

    def copy(self) -> "CoupledState":
        return CoupledState(self.sigma.copy(), self.w.copy(), self.eta.copy(),
                            self.eta_t.copy(), self.t)


@dataclass
class TimeDerivatives:
    """Time-derivative data consumed by the sources: ``w_t`` and ``eta_tt``."""

    w_t: np.ndarray
    eta_tt: np.ndarray


@dataclass
class SourceSet:
    g1: np.ndarray
    g2: np.ndarray
    g3: np.ndarray
    terms: dict = field(default_factory=dict, repr=False)


def steady_state(grid: Grid, t: float = 0.0) -> CoupledState:
    return CoupledState(grid.zeros(), grid.zeros_vector(), grid.zeros_beam(), grid.zeros_beam(), t)


def lift_velocity(w: np.ndarray, eta_t: np.ndarray, grid: Grid) -> np.ndarray:
    v = np.array(w, dtype=float, copy=True)
    v[1] += grid.z[None, :] * eta_t[:, None]
    return v


def _check_density(rho_hat):
    rho_hat = np.asarray(rho_hat, dtype=float)
    if not np.all(rho_hat > 0):
        raise NonpositiveDensity(f"density must be positive, min = {np.nanmin(rho_hat):.6g}")
    return rho_hat


def pressure(rho_hat, params: PhysParams) -> np.ndarray:
    """Normalised pressure ``P = a rho**gamma - p_ext``."""
    rho_hat = _check_density(rho_hat)
    return params.a * rho_hat**params.gamma - params.p_ext


def pressure_prime(rho_hat, params: PhysParams) -> np.ndarray:
    rho_hat = _check_density(rho_hat)
    return params.a * params.gamma * rho_hat ** (params.gamma - 1.0)


def _col(b: np.ndarray) -> np.ndarray:
    return b[:, None]


def compute_F1(rho_hat, u_hat, geometry: BeamGeometry, grid: Grid) -> np.ndarray:
    z = grid.z[None, :]
    u1z = ddz(u_hat[0], grid)
    u2z = ddz(u_hat[1], grid)
    inv = _col(geometry.inv_one_plus_eta)
    return inv * (u1z * z * _col(geometry.eta_x) * rho_hat + _col(geometry.eta) * rho_hat * u2z)


def f2_terms(rho_hat, u_hat, u_hat_t, geometry: BeamGeometry, eta_t, params: PhysParams,
             grid: Grid, printed: bool = False) -> dict:
    """Named subterms of the transformed momentum remainder; they sum to F2.

    ``printed=True`` keeps the sign of the curvature contribution inside the
    ``(mu + mu')`` column exactly as usually typeset; the default uses the
    sign obtained by transforming ``grad div`` directly (the two differ by
    ``2 (mu + mu') z ((1+eta) eta_xx - 2 eta_x**2) u1_z / (1 + eta)``).
    """
    z = grid.z[None, :]
    eta = _col(geometry.eta)
    ex = _col(geometry.eta_x)
    exx = _col(geometry.eta_xx)
    inv = _col(geometry.inv_one_plus_eta)
    et = _col(eta_t)
    mu, mup = params.mu, params.mu_prime

    ux = ddx(u_hat, grid)
    uz = ddz(u_hat, grid)
    uxx = d2x(u_hat, grid)
    uzz = d2z(u_hat, grid)
    uxz = dxz(u_hat, grid)
    u1 = u_hat[0]
    u2 = u_hat[1]
    curv = ((1.0 + eta) * z * exx - 2.0 * ex**2 * z) * inv

    P = pressure(rho_hat, params)
    Px = ddx(P, grid)
    Pz = ddz(P, grid)

    terms = {}
    terms["inertia_eta"] = -eta * rho_hat * u_hat_t
    terms["mesh_velocity"] = z * rho_hat * uz * et
    terms["convection_eta"] = -eta * rho_hat * u1 * ux
    terms["convection_slope"] = u1 * uz * ex * rho_hat * z
    terms["viscous_mu"] = mu * (
        eta * uxx - eta * uzz * inv - 2.0 * ex * z * uxz + uzz * z**2 * ex**2 * inv - uz * curv
    )
    terms["convection"] = -rho_hat * (u1 * ux + u2 * uz)
    sign = 1.0 if printed else -1.0
    col1 = (
        eta * uxx[0]
        - uxz[0] * z * ex
        - ex * z * (uxz[0] - uzz[0] * z * ex * inv)
        + sign * uz[0] * curv
        - ex * uz[1] * inv
        - ex * z * uzz[1] * inv
    )
    col2 = -ex * uz[0] * inv - ex * z * uzz[0] * inv - eta * uzz[1] * inv
    terms["viscous_lame"] = (mu + mup) * np.stack([col1, col2])
    terms["pressure_correction"] = np.stack([-(eta * Px - Pz * z * ex), np.zeros_like(Px)])
    return terms


def compute_F2(rho_hat, u_hat, u_hat_t, geometry: BeamGeometry, eta_t, params: PhysParams,
               grid: Grid, printed: bool = False) -> np.ndarray:
    terms = f2_terms(rho_hat, u_hat, u_hat_t, geometry, eta_t, params, grid, printed)
    return sum(terms.values())


def _traces(u_hat, grid: Grid):
    top = np.s_[..., -1]
    return (ddx(u_hat[0], grid)[top], ddz(u_hat[0], grid)[top],
            ddx(u_hat[1], grid)[top], ddz(u_hat[1], grid)[top])


def compute_F3(rho_hat, u_hat, geometry: BeamGeometry, params: PhysParams, grid: Grid) -> np.ndarray:
    """Vertical fluid traction on the beam (minus ``p_ext``), per unit reference length.

    Evaluates ``([-2 mu D(u) - mu' div(u) I] n + P n) * sqrt(1 + eta_x**2) . e2``
    on the top wall with physical derivatives expressed through the graph map.
    """
    mu, mup = params.mu, params.mu_prime
    ex = geometry.eta_x
    c = geometry.inv_one_plus_eta
    u1x, u1z, u2x, u2z = _traces(u_hat, grid)
    # physical derivatives at z = 1
    u1_x = u1x - ex * c * u1z
    u1_y = c * u1z
    u2_x = u2x - ex * c * u2z
    u2_y = c * u2z
    d21 = 0.5 * (u1_y + u2_x)
    div = u1_x + u2_y
    P = pressure(np.asarray(rho_hat)[..., -1], params)
    return 2.0 * mu * ex * d21 - 2.0 * mu * u2_y - mup * div + P


def compute_F3_printed(rho_hat, u_hat, geometry: BeamGeometry, params: PhysParams,
                       grid: Grid) -> np.ndarray:
    """Closed-form reference-variable beam forcing as typeset; comparison only."""
    mu, mup = params.mu, params.mu_prime
    eta, ex, c = geometry.eta, geometry.eta_x, geometry.inv_one_plus_eta
    _, u1z, u2x, u2z = _traces(u_hat, grid)
    z = 1.0
    P = pressure(np.asarray(rho_hat)[..., -1], params)
    return (
        -mu * (-u2z + ex * u2x + u2z * c * ex**2 * z - 2.0 * eta * u2z * c - ex * u1z * c)
        - mup * (-2.0 * u2z + u1z * c * ex * z - eta * u2z * c)
        + P
    )


def f3_comparison(rho_hat, u_hat, geometry: BeamGeometry, params: PhysParams, grid: Grid) -> dict:
    first = compute_F3(rho_hat, u_hat, geometry, params, grid)
    printed = compute_F3_printed(rho_hat, u_hat, geometry, params, grid)
    diff = printed - first
    scale = max(np.abs(first).max(), np.finfo(float).tiny)
    return {
        "max_abs_first_principles": float(np.abs(first).max()),
        "max_abs_printed": float(np.abs(printed).max()),
        "max_abs_discrepancy": float(np.abs(diff).max()),
        "relative_discrepancy": float(np.abs(diff).max() / scale),
    }


def compute_W_tilde(w, geometry: BeamGeometry, grid: Grid) -> np.ndarray:
    """Transport velocity ``(w1, (w2 - w1 z eta_x) / (1 + eta))`` for the density."""
    z = grid.z[None, :]
    return np.stack([
        w[0],
        (w[1] - w[0] * z * _col(geometry.eta_x)) * _col(geometry.inv_one_plus_eta),
    ])


def compute_sources(state: CoupledState, derivs: TimeDerivatives, params: PhysParams,
                    geometry: BeamGeometry, grid: Grid, keep_terms: bool = False) -> SourceSet:
    """Right-hand sides G1, G2, G3 of the homogenised system at one time level.

    ``derivs.eta_tt`` is taken as given data (previous iterate or the t = 0
    formula); it is never obtained by differencing ``eta_t`` here.
    """
    z = grid.z[None, :]
    rho = _check_density(state.sigma + params.rho_bar)
    v = lift_velocity(state.w, state.eta_t, grid)
    v_t = lift_velocity(derivs.w_t, derivs.eta_tt, grid)

    g1_div = -rho * divergence(v, grid)
    g1_f1 = compute_F1(rho, v, geometry, grid)

    lift = grid.zeros_vector()
    lift[1] = z * _col(state.eta_t)
    zero = grid.zeros()
    g2_parts = {
        "pressure_gradient": -pressure_prime(rho, params) * gradient(state.sigma, grid),
        "lift_acceleration": np.stack([zero, -z * _col(derivs.eta_tt) * rho]),
        "lift_viscous": -lame_apply(lift, grid, params.mu, params.mu_prime),
    }
    f2 = f2_terms(rho, v, v_t, geometry, state.eta_t, params, grid)
    g2 = sum(g2_parts.values()) + sum(f2.values())
    g3 = compute_F3(rho, v, geometry, params, grid)
    terms = {}
    if keep_terms:
        terms = {"g1_divergence": g1_div, "F1": g1_f1, **g2_parts,
                 **{f"F2.{k}": val for k, val in f2.items()}}
    return SourceSet(g1_div + g1_f1, g2, g3, terms)


# --- initial time -----------------------------------------------------------

def initial_g3(rho0, u0, params: PhysParams, grid: Grid) -> np.ndarray:
    """Beam forcing at t = 0 (flat beam).  Reduces to ``-(2 mu + mu') u0_{2,z} + P(rho0)``
    when ``u0_1`` vanishes along the beam."""
    flat = build_geometry(grid.zeros_beam(), grid, 0.5)
    return compute_F3(rho0, u0, flat, params, grid)


def initial_values(rho0, u0, eta1, params: PhysParams, grid: Grid):
    """Initial-time data ``(G2_0, G3_0, eta_tt_0, w_t_0)`` for a flat beam.

    ``eta_tt_0 = delta eta1_xx + G3_0`` and
    ``w_t_0 = (G2_0 - lame(u0 - z eta1 e2)) / rho0`` in the interior, zero on
    the walls where ``w`` is pinned.
    """
    rho0 = _check_density(rho0)
    eta1 = np.asarray(eta1, dtype=float)
    g3_0 = initial_g3(rho0, u0, params, grid)
    eta_tt_0 = params.delta * spectral_dx(eta1, grid, 2) + g3_0
    w0 = np.array(u0, dtype=float, copy=True)
    w0[1] -= grid.z[None, :] * eta1[:, None]
    state = CoupledState(rho0 - params.rho_bar, w0, grid.zeros_beam(), eta1.copy(), 0.0)
    flat = build_geometry(grid.zeros_beam(), grid, 0.5)
    # the eta * u_t term of F2 vanishes on a flat beam, so w_t is irrelevant here
    src = compute_sources(state, TimeDerivatives(grid.zeros_vector(), eta_tt_0), params, flat, grid)
    g2_0 = src.g2
    w_t_0 = (g2_0 - lame_apply(w0, grid, params.mu, params.mu_prime)) / rho0
    w_t_0[..., 0] = 0.0
    w_t_0[..., -1] = 0.0
    return g2_0, g3_0, eta_tt_0, w_t_0


@dataclass
class CompatibilityReport:
    b1_residual: float
    b2_residual: float
    tol: float

    @property
    def b1_pass(self) -> bool:
        return self.b1_residual < self.tol

    @property
    def b2_pass(self) -> bool:
        return self.b2_residual < self.tol

    @property
    def passed(self) -> bool:
        return self.b1_pass and self.b2_pass

    def lines(self) -> list[str]:
        word = {True: "pass", False: "FAIL"}
        return [
            f"(b)1 velocity trace   residual={self.b1_residual:.6e}  {word[self.b1_pass]}",
            f"(b)2 momentum trace   residual={self.b2_residual:.6e}  {word[self.b2_pass]}",
            f"tol={self.tol:.3e}  overall {word[self.passed]}",
        ]


def compatibility_residuals(rho0, u0, eta1, params: PhysParams, grid: Grid):
    """Boundary residual fields of the two compatibility conditions.

    Returns ``(r1, r2)``: ``r1 = u0 - (0, z eta1)`` and ``r2`` the t = 0
    momentum balance, both on full vector-field arrays; only the wall rows
    are meaningful.
    """
    rho0 = _check_density(rho0)
    eta1 = np.asarray(eta1, dtype=float)
    z = grid.z[None, :]
    r1 = np.array(u0, dtype=float, copy=True)
    r1[1] -= z * eta1[:, None]

    mu, mup = params.mu, params.mu_prime
    grad_p = pressure_prime(rho0, params) * gradient(rho0, grid)
    u0z = ddz(u0, grid)
    beam_acc = params.delta * _col(spectral_dx(eta1, grid, 2)) \
        - (2.0 * mu + mup) * u0z[1] + pressure(rho0, params)
    conv = u0[0] * ddx(u0, grid) + u0[1] * u0z
    r2 = (
        -grad_p
        - np.stack([np.zeros_like(rho0), beam_acc * z * rho0])
        + z * rho0 * u0z * _col(eta1)
        - rho0 * conv
        - lame_apply(u0, grid, mu, mup)
    )
    return r1, r2


def check_compatibility(rho0, u0, eta1, params: PhysParams, grid: Grid, tol: float) -> CompatibilityReport:
    r1, r2 = compatibility_residuals(rho0, u0, eta1, params, grid)
    walls = np.s_[..., [0, -1]]
    return CompatibilityReport(float(np.abs(r1[walls]).max()), float(np.abs(r2[walls]).max()), tol)
