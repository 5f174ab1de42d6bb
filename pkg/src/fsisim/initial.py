"""Initial data presets and the time-derivative data needed at t = 0."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .beam import eta_tt_from_equation
from .fields import Grid, lame_apply
from .geometry import build_geometry
from .io import read_snapshot
from .sources import (
    CoupledState,
    PhysParams,
    TimeDerivatives,
    compute_F3,
    compute_sources,
    initial_values,
    lift_velocity,
)


@dataclass
class InitialData:
    rho0: np.ndarray
    u0: np.ndarray
    eta1: np.ndarray
    state: CoupledState
    w_t0: np.ndarray
    eta_tt0: np.ndarray


def preset_fields(preset: str, amplitude: float, mode: int, grid: Grid, params: PhysParams):
    """``(rho0, u0, eta1)`` for a named preset with a flat beam at t = 0.

    ``beam_kick`` sets ``u0 = (0, z eta1)`` so the velocity matches the beam
    on both walls.
    """
    X, Z = grid.mesh()
    wave = np.sin(2.0 * np.pi * mode * grid.x / grid.L)
    rho0 = np.full(grid.scalar_shape, params.rho_bar)
    u0 = grid.zeros_vector()
    eta1 = grid.zeros_beam()
    if preset == "steady":
        pass
    elif preset == "density_bump":
        rho0 = params.rho_bar * (1.0 + amplitude * np.sin(2.0 * np.pi * mode * X / grid.L))
    elif preset == "beam_kick":
        eta1 = amplitude * wave
        u0[1] = Z * eta1[:, None]
    else:
        raise ValueError(f"unknown preset {preset!r}")
    return rho0, u0, eta1


def _derivatives_general(state: CoupledState, params: PhysParams, grid: Grid, delta0: float,
                         sweeps: int = 20):
    """``(w_t, eta_tt)`` for an arbitrary admissible state.

    ``eta_tt`` follows from the beam equation with the current traction.
    ``w_t`` appears on both sides of the momentum balance (through the
    ``eta * rho * u_t`` remainder), so it is found by a short fixed-point sweep.
    """
    geom = build_geometry(state.eta, grid, delta0)
    rho = state.sigma + params.rho_bar
    v = lift_velocity(state.w, state.eta_t, grid)
    g3 = compute_F3(rho, v, geom, params, grid)
    eta_tt = eta_tt_from_equation(state.eta, state.eta_t, g3, params)
    lame_w = lame_apply(state.w, grid, params.mu, params.mu_prime)
    w_t = grid.zeros_vector()
    for _ in range(sweeps):
        src = compute_sources(state, TimeDerivatives(w_t, eta_tt), params, geom, grid)
        new = (src.g2 - lame_w) / rho
        new[..., 0] = 0.0
        new[..., -1] = 0.0
        if np.array_equal(new, w_t):
            break
        w_t = new
    return w_t, eta_tt


def build_initial(cfg, grid: Grid, params: PhysParams) -> InitialData:
    spec = cfg.initial
    if spec.preset == "from_snapshot":
        state, _ = read_snapshot(spec.path, expected=grid)
        rho0 = state.sigma + params.rho_bar
        u0 = lift_velocity(state.w, state.eta_t, grid)
        w_t0, eta_tt0 = _derivatives_general(state, params, grid, cfg.numerics.delta0)
        return InitialData(rho0, u0, state.eta_t.copy(), state, w_t0, eta_tt0)
    rho0, u0, eta1 = preset_fields(spec.preset, spec.amplitude, spec.mode, grid, params)
    w0 = u0.copy()
    w0[1] -= grid.z[None, :] * eta1[:, None]
    state = CoupledState(rho0 - params.rho_bar, w0, grid.zeros_beam(), eta1.copy(), 0.0)
    _, _, eta_tt0, w_t0 = initial_values(rho0, u0, eta1, params, grid)
    return InitialData(rho0, u0, eta1, state, w_t0, eta_tt0)
