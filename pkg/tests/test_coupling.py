import numpy as np
import pytest

from fsisim.config import GridSpec, InitialSpec, NumericsSpec, OutputSpec, SimConfig
from fsisim.coupling import (
    CouplingSettings, Outcome, Trajectory, WindowInit, apply_L, composite_delta, picard_solve,
    run_simulation, seed_trajectory,
)
from fsisim.errors import ShapeMismatch, ValidationError
from fsisim.initial import build_initial
from fsisim.sources import CoupledState, steady_state


def _cfg(preset="steady", amplitude=0.0, t_end=0.02, dt=1e-3, window=10, nx=16, nz=8, **num):
    return SimConfig(grid=GridSpec(nx, nz, 2.0),
                     numerics=NumericsSpec(t_end=t_end, dt=dt, window_steps=window, **num),
                     initial=InitialSpec(preset=preset, amplitude=amplitude),
                     output=OutputSpec(dir="unused"))


def _window_init(cfg):
    grid, params = cfg.make_grid(), cfg.phys_params()
    data = build_initial(cfg, grid, params)
    m, M = float(data.rho0.min()), float(data.rho0.max())
    settings = CouplingSettings(grid, cfg.numerics.dt, m, M, tol_pic=cfg.numerics.tol_pic,
                                max_iter=cfg.numerics.max_iter)
    return WindowInit(data.state, data.w_t0, data.eta_tt0), params, settings


def test_steady_seed_is_a_fixed_point():
    init, params, settings = _window_init(_cfg())
    seed = seed_trajectory(init, 5, settings.dt)
    out = apply_L(seed, init, params, settings)
    assert composite_delta(out, seed, settings.grid) == 0.0
    traj, rep = picard_solve(init, 5, params, settings)
    assert rep.converged and rep.iterations == 1 and rep.deltas == [0.0]


def test_seed_levels_and_times():
    init, _, settings = _window_init(_cfg())
    seed = seed_trajectory(init, 4, 0.1)
    assert seed.n_steps == 4
    assert [s.t for s in seed.states] == pytest.approx([0, 0.1, 0.2, 0.3, 0.4])
    assert np.all(seed.w_t(3, init) == 0.0)


def test_small_perturbation_contracts():
    init, params, settings = _window_init(_cfg("beam_kick", 1e-3))
    traj, rep = picard_solve(init, 10, params, settings)
    assert rep.converged
    d = np.array(rep.deltas)
    assert np.all(d[1:] < d[:-1])
    assert d[-1] < settings.tol_pic


def test_converged_window_is_a_fixed_point():
    init, params, settings = _window_init(_cfg("beam_kick", 1e-3))
    traj, rep = picard_solve(init, 10, params, settings)
    again = apply_L(traj, init, params, settings)
    assert composite_delta(again, traj, settings.grid) < settings.tol_pic


def test_composite_delta_examples(grid):
    st = steady_state(grid)
    st.sigma[:] = 0.5
    a = Trajectory([st, st.copy()], [grid.zeros_beam()] * 2, 0.1)
    assert composite_delta(a, a, grid) == 0.0
    b_state = st.copy()
    b_state.sigma[:] = 0.25
    b = Trajectory([st, b_state], [grid.zeros_beam()] * 2, 0.1)
    assert composite_delta(a, b, grid) == pytest.approx(0.5, rel=1e-12)
    # w, eta and eta_t are zero in a: floored scale makes any difference huge
    c_state = st.copy()
    c_state.eta_t[:] = 1e-9
    c = Trajectory([st, c_state], [grid.zeros_beam()] * 2, 0.1)
    expected = 1e-9 * np.sqrt(grid.L) / 1e-12
    assert composite_delta(a, c, grid) == pytest.approx(expected, rel=1e-9)


def test_composite_delta_shape_mismatch(grid):
    st = steady_state(grid)
    a = Trajectory([st, st], [grid.zeros_beam()] * 2, 0.1)
    b = Trajectory([st], [grid.zeros_beam()], 0.1)
    with pytest.raises(ShapeMismatch):
        composite_delta(a, b, grid)


def test_near_vacuum_reports_density_violation(grid, params):
    st = steady_state(grid)
    st.sigma[3, 4] = -0.6
    init = WindowInit(st, grid.zeros_vector(), grid.zeros_beam())
    settings = CouplingSettings(grid, 1e-3, params.rho_bar, params.rho_bar)
    _, rep = picard_solve(init, 3, params, settings)
    assert rep.outcome is Outcome.DENSITY and not rep.converged and rep.iterations == 0


def test_collapsed_beam_reports_admissibility(grid, params):
    st = steady_state(grid)
    st.eta[:] = -0.6
    init = WindowInit(st, grid.zeros_vector(), grid.zeros_beam())
    settings = CouplingSettings(grid, 1e-3, 1.0, 1.0, delta0=0.5)
    _, rep = picard_solve(init, 3, params, settings)
    assert rep.outcome is Outcome.ADMISSIBILITY


def test_max_iterations_outcome():
    cfg = _cfg("beam_kick", 1e-3, max_iter=2, tol_pic=1e-14)
    init, params, settings = _window_init(cfg)
    _, rep = picard_solve(init, 10, params, settings)
    assert rep.outcome is Outcome.MAX_ITERATIONS and rep.iterations == 2 and len(rep.deltas) == 2


def test_steady_run_stays_exact():
    cfg = _cfg(t_end=0.2, window=2)
    res = run_simulation(cfg, write_files=False)
    assert len(res.window_iterations) == 100 and set(res.window_iterations) == {1}
    assert res.halvings == 0
    st = res.final_state
    for arr in (st.sigma, st.w, st.eta, st.eta_t):
        assert np.all(arr == 0.0)
    assert st.t == pytest.approx(0.2)
    assert all(r["steady_residual"] == 0.0 for r in res.rows)


def test_small_perturbation_run_bounded():
    amp = 1e-3
    res = run_simulation(_cfg("beam_kick", amp, t_end=0.02), write_files=False)
    assert res.halvings == 0
    assert min(r["min_one_plus_eta"] for r in res.rows) >= 1 - 1.5 * amp
    assert np.abs(res.final_state.eta).max() <= 1.5 * amp


def test_window_length_does_not_change_answer_much():
    a = run_simulation(_cfg("beam_kick", 1e-3, t_end=0.02, window=10, tol_pic=1e-12),
                       write_files=False)
    b = run_simulation(_cfg("beam_kick", 1e-3, t_end=0.02, window=5, tol_pic=1e-12),
                       write_files=False)
    assert np.abs(a.final_state.eta - b.final_state.eta).max() < 1e-9
    assert np.abs(a.final_state.w - b.final_state.w).max() < 1e-9


def test_runs_are_deterministic():
    cfg = _cfg("beam_kick", 1e-3, t_end=0.01)
    a = run_simulation(cfg, write_files=False)
    b = run_simulation(cfg, write_files=False)
    for x, y in zip((a.final_state.sigma, a.final_state.w, a.final_state.eta),
                    (b.final_state.sigma, b.final_state.w, b.final_state.eta)):
        assert np.array_equal(x, y)
    assert a.rows == b.rows


def test_min_window_above_window_rejected():
    with pytest.raises(ValidationError):
        _cfg(window=4, min_window_steps=8)


def test_step_mode_uses_single_step_windows():
    res = run_simulation(_cfg("beam_kick", 1e-3, t_end=0.005, coupling_mode="step"),
                         write_files=False)
    assert len(res.window_iterations) == 5
