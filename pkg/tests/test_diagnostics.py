import numpy as np
import pytest

from fsisim.coupling import Trajectory
from fsisim.diagnostics import (
    TIMESERIES_COLUMNS, EnergyReport, energy_budget, monitor_norms, state_energy, steady_residual,
    timeseries_row,
)
from fsisim.fields import make_grid
from fsisim.sources import CoupledState, steady_state


def test_rest_state_has_zero_energy(grid, params):
    rep = state_energy(steady_state(grid), params, grid)
    assert all(v == 0.0 for v in rep.as_dict().values())
    assert rep.total == 0.0 and rep.dissipation == 0.0


def test_uniform_flow_kinetic_energy(grid, params):
    st = steady_state(grid)
    st.sigma[:] = 0.5
    st.w[0] = 0.3  # walls included: energy counts the whole field
    rep = state_energy(st, params, grid)
    assert rep.kinetic == pytest.approx(0.5 * 1.5 * 0.09 * grid.L, rel=1e-12)
    assert rep.viscous_dissipation == pytest.approx(0.0, abs=1e-20)


def test_internal_energy_of_uniform_density(grid, params):
    st = steady_state(grid)
    r = 1.2
    st.sigma[:] = r - params.rho_bar
    a, g = params.a, params.gamma
    rel = a * (r**g - 1 - g * (r - 1)) / (g - 1)
    assert state_energy(st, params, grid).internal == pytest.approx(rel * grid.L, rel=1e-12)
    assert rel > 0


def test_beam_energy_of_sine_mode(params):
    g = make_grid(32, 4, params.L)
    st = steady_state(g)
    k = 2 * np.pi / g.L
    st.eta_t[:] = 0.1 * np.sin(k * g.x)
    st.w[1] = 0.0
    rep = state_energy(st, params, g)
    assert rep.beam_kinetic == pytest.approx(0.5 * 0.01 * g.L / 2, rel=1e-12)
    assert rep.beam_dissipation == pytest.approx(params.delta * k**2 * 0.01 * g.L / 2, rel=1e-12)
    # the lift z*eta_t moves the fluid too
    assert rep.kinetic > 0


def test_shear_dissipation(params):
    g = make_grid(8, 64, params.L)
    st = steady_state(g)
    _, Z = g.mesh()
    st.w[0] = Z * (1 - Z)
    rep = state_energy(st, params, g)
    assert rep.viscous_dissipation == pytest.approx(params.mu * g.L / 3, rel=1e-3)


def test_budget_residual_definition(grid, params):
    a = steady_state(grid)
    b = steady_state(grid)
    b.sigma[:] = 0.1
    dt = 0.01
    rep = energy_budget(a, b, dt, params, grid)
    e1 = state_energy(b, params, grid)
    assert rep.budget_residual == pytest.approx(e1.total / dt + e1.dissipation - e1.pext_work)


def test_steady_residual(grid):
    st = steady_state(grid)
    assert steady_residual(st) == 0.0
    st.eta_t[3] = -0.25
    assert steady_residual(st) == 0.25


def test_monitor_norms(grid, rng):
    st = steady_state(grid)
    traj = Trajectory([st, st.copy()], [grid.zeros_beam()] * 2, 0.1)
    rep = monitor_norms(traj, grid, thresholds={"w_l2": 1.0})
    assert all(v == 0.0 for v in rep.values.values())
    assert len(rep.values) == 14 and rep.flags == {"w_l2": False}
    moved = st.copy()
    moved.sigma = rng.standard_normal(grid.scalar_shape)
    rep = monitor_norms(Trajectory([st, moved], [grid.zeros_beam()] * 2, 0.1), grid,
                        thresholds={"sigma_t": 1.0})
    assert rep.values["sigma_t"] == pytest.approx(rep.values["sigma_l2"] / 0.1)
    assert rep.flags["sigma_t"]


def test_timeseries_row_columns(grid, params):
    st = steady_state(grid)
    row = timeseries_row(0.5, EnergyReport(), st, params, 3)
    assert tuple(row) == TIMESERIES_COLUMNS and len(row) == 15
    assert row["t"] == 0.5 and row["picard_iters"] == 3
    assert row["min_one_plus_eta"] == 1.0 and row["min_density"] == params.rho_bar
