"""Fixed-point coupling of the three linear solvers over a time window.

``apply_L`` freezes a trajectory iterate, evaluates all sources and the
transport velocity from it, and solves the transport, momentum and beam
problems independently.  ``picard_solve`` iterates that map to a fixed point;
``run_simulation`` marches window by window and halves the window whenever
the iteration fails.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from . import beam, momentum, transport
from .errors import (
    AdmissibilityViolated,
    CoefficientOutOfBounds,
    DensityBoundsViolated,
    LinearSolveDiverged,
    NonpositiveDensity,
    ShapeMismatch,
)
from .fields import Grid, l2_norm, l2_norm_beam
from .geometry import build_geometry
from .sources import (
    CoupledState,
    PhysParams,
    TimeDerivatives,
    compute_sources,
    compute_W_tilde,
)

log = logging.getLogger(__name__)

_SCALE_FLOOR = 1e-12


@dataclass(frozen=True)
class CouplingSettings:
    """Numerical controls consumed by the coupling loop."""

    grid: Grid
    dt: float
    m: float
    M: float
    delta0: float = 0.5
    tol_pic: float = 1e-8
    max_iter: int = 50
    lin_tol: float = 1e-10
    monotone_transport: bool = False


@dataclass
class WindowInit:
    """Data inherited by a window: its first state plus ``w_t`` and ``eta_tt`` there."""

    state: CoupledState
    w_t: np.ndarray
    eta_tt: np.ndarray


@dataclass
class Trajectory:
    """States at levels ``0..N`` of one window together with ``eta_tt`` per level."""

    states: list
    eta_tt: list
    dt: float

    @property
    def n_steps(self) -> int:
        return len(self.states) - 1

    def field(self, name: str) -> list:
        return [getattr(s, name) for s in self.states]

    def w_t(self, n: int, init: WindowInit) -> np.ndarray:
        if n == 0:
            return init.w_t
        return (self.states[n].w - self.states[n - 1].w) / self.dt

    def end(self) -> WindowInit:
        return WindowInit(self.states[-1], self.w_t(self.n_steps, None), self.eta_tt[-1])


class Outcome(str, Enum):
    CONVERGED = "Converged"
    MAX_ITERATIONS = "MaxIterations"
    ADMISSIBILITY = "AdmissibilityViolated"
    DENSITY = "DensityBoundsViolated"
    SOLVER = "LinearSolveDiverged"


@dataclass
class PicardReport:
    iterations: int = 0
    deltas: list = field(default_factory=list)
    outcome: Outcome = Outcome.MAX_ITERATIONS
    message: str = ""

    @property
    def converged(self) -> bool:
        return self.outcome is Outcome.CONVERGED


def seed_trajectory(init: WindowInit, n_steps: int, dt: float) -> Trajectory:
    """Constant-in-time extension of the window's first state."""
    s0 = init.state
    states = [s0]
    for n in range(1, n_steps + 1):
        s = s0.copy()
        s.t = s0.t + n * dt
        states.append(s)
    return Trajectory(states, [init.eta_tt.copy() for _ in range(n_steps + 1)], dt)


def _check_density(sigma, params: PhysParams, s: CouplingSettings, level: int):
    rep = transport.check_density_bounds(sigma, params, s.m, s.M)
    if not rep.passed:
        raise DensityBoundsViolated(
            f"level {level}: density range [{rep.min_density:.6g}, {rep.max_density:.6g}] "
            f"outside [{rep.lower:.6g}, {rep.upper:.6g}]")


def check_admissible(traj_or_state, params: PhysParams, s: CouplingSettings) -> None:
    states = traj_or_state.states if isinstance(traj_or_state, Trajectory) else [traj_or_state]
    for n, st in enumerate(states):
        build_geometry(st.eta, s.grid, s.delta0)
        _check_density(st.sigma, params, s, n)


def apply_L(iterate: Trajectory, init: WindowInit, params: PhysParams, settings: CouplingSettings,
            op: momentum.LameOperator | None = None) -> Trajectory:
    """One application of the fixed-point map.

    Sources and the transport velocity come from ``iterate``; the three
    solvers then run independently from ``init``.  Raises
    ``AdmissibilityViolated`` or ``DensityBoundsViolated`` when the output
    leaves the admissible set.
    """
    g, dt = settings.grid, settings.dt
    if op is None:
        op = momentum.assemble_lame(g, params)
    W, G1, G2, G3 = [], [], [], []
    for n, st in enumerate(iterate.states):
        geom = build_geometry(st.eta, g, settings.delta0)
        derivs = TimeDerivatives(iterate.w_t(n, init), iterate.eta_tt[n])
        src = compute_sources(st, derivs, params, geom, g)
        W.append(compute_W_tilde(st.w, geom, g))
        G1.append(src.g1)
        G2.append(src.g2)
        G3.append(src.g3)

    sig = transport.solve_window(init.state.sigma, W, G1, g, dt, monotone=settings.monotone_transport)
    w = momentum.solve_window(init.state.w, iterate.field("sigma"), G2, dt, g, params,
                              lin_tol=settings.lin_tol, op=op, bounds=(settings.m, settings.M))
    bt = beam.solve_window(init.state.eta, init.state.eta_t, G3, dt, params)

    t0 = init.state.t
    states = [init.state]
    for n in range(1, len(sig)):
        states.append(CoupledState(sig[n], w[n], bt.eta[n], bt.eta_t[n], t0 + n * dt))
    out = Trajectory(states, [init.eta_tt] + bt.eta_tt[1:], dt)
    for n, st in enumerate(states[1:], start=1):
        if not all(np.all(np.isfinite(a)) for a in (st.sigma, st.w, st.eta, st.eta_t)):
            raise DensityBoundsViolated(f"level {n}: non-finite values")
        build_geometry(st.eta, g, settings.delta0)
        _check_density(st.sigma, params, settings, n)
    return out


def _scale(values, norm) -> float:
    return max(max(norm(v) for v in values), _SCALE_FLOOR)


def composite_delta(a: Trajectory, b: Trajectory, grid: Grid) -> float:
    """Max over levels of the summed L2 differences, each relative to its field scale in ``a``.

    The scale of a field is its largest L2 norm over the window (floored at
    1e-12 so identically zero fields do not divide by zero).
    """
    if len(a.states) != len(b.states):
        raise ShapeMismatch(f"trajectories have {len(a.states)} and {len(b.states)} levels")
    specs = (("sigma", lambda f: l2_norm(f, grid)), ("w", lambda f: l2_norm(f, grid)),
             ("eta", lambda f: l2_norm_beam(f, grid)), ("eta_t", lambda f: l2_norm_beam(f, grid)))
    per_level = np.zeros(len(a.states))
    for name, norm in specs:
        fa, fb = a.field(name), b.field(name)
        if fa[0].shape != fb[0].shape:
            raise ShapeMismatch(f"{name}: shapes {fa[0].shape} and {fb[0].shape}")
        scale = _scale(fa, norm)
        per_level += np.array([norm(x - y) for x, y in zip(fa, fb)]) / scale
    return float(per_level.max())


def picard_solve(init: WindowInit, n_steps: int, params: PhysParams, settings: CouplingSettings,
                 op: momentum.LameOperator | None = None):
    """Iterate ``X <- L(X)`` from the constant seed until the composite delta drops below tol.

    Returns ``(trajectory, report)``; failures are reported, not raised.
    The returned trajectory is the last successful iterate.
    """
    report = PicardReport()
    if op is None:
        op = momentum.assemble_lame(settings.grid, params)
    X = seed_trajectory(init, n_steps, settings.dt)
    try:
        check_admissible(init.state, params, settings)
    except AdmissibilityViolated as exc:
        report.outcome, report.message = Outcome.ADMISSIBILITY, str(exc)
        return X, report
    except DensityBoundsViolated as exc:
        report.outcome, report.message = Outcome.DENSITY, str(exc)
        return X, report

    with np.errstate(all="ignore"):
        for it in range(1, settings.max_iter + 1):
            try:
                Y = apply_L(X, init, params, settings, op)
            except AdmissibilityViolated as exc:
                report.outcome, report.message = Outcome.ADMISSIBILITY, str(exc)
                return X, report
            except (DensityBoundsViolated, CoefficientOutOfBounds, NonpositiveDensity) as exc:
                report.outcome, report.message = Outcome.DENSITY, str(exc)
                return X, report
            except (LinearSolveDiverged, ArithmeticError) as exc:
                report.outcome, report.message = Outcome.SOLVER, str(exc)
                return X, report
            delta = composite_delta(Y, X, settings.grid)
            report.iterations = it
            report.deltas.append(delta)
            X = Y
            if delta < settings.tol_pic:
                report.outcome = Outcome.CONVERGED
                return X, report
    report.outcome = Outcome.MAX_ITERATIONS
    report.message = f"no convergence in {settings.max_iter} iterations"
    return X, report


# --- run driver -------------------------------------------------------------

@dataclass
class RunResult:
    final_state: CoupledState
    rows: list
    events: list
    window_iterations: list
    halvings: int
    out_dir: object = None


def settings_from_config(cfg, grid: Grid, m: float, M: float) -> CouplingSettings:
    n = cfg.numerics
    return CouplingSettings(grid=grid, dt=n.dt, m=m, M=M, delta0=n.delta0, tol_pic=n.tol_pic,
                            max_iter=n.max_iter, lin_tol=n.lin_tol)


def run_simulation(cfg, out_dir=None, write_files: bool = True) -> RunResult:
    """March from t = 0 to ``t_end`` window by window.

    A window whose Picard iteration fails is retried at half the length; a
    successful window restores the configured length.  When the length would
    drop below ``min_window_steps`` the run stops with ``WindowUnderflow``
    (carrying the partial ``RunResult`` as ``.result``) after flushing all
    output.  The run is deterministic for a given configuration.
    """
    from pathlib import Path

    from .diagnostics import TIMESERIES_COLUMNS, energy_budget, state_energy, timeseries_row
    from .errors import IncompatibleInitialData, WindowUnderflow
    from .initial import build_initial
    from .io import EventLog, TimeseriesWriter, write_snapshot
    from .sources import check_compatibility

    grid = cfg.make_grid()
    params = cfg.phys_params()
    num = cfg.numerics
    dt = num.dt
    out = Path(out_dir if out_dir is not None else cfg.output.dir) if write_files else None

    init_data = build_initial(cfg, grid, params)
    events = EventLog(out / "events.jsonl" if out else None)
    ts = TimeseriesWriter(out / "timeseries.csv", TIMESERIES_COLUMNS) if out else None
    rows = []

    def emit_row(row):
        rows.append(row)
        if ts is not None:
            ts.write(row)

    def snapshot(state, name):
        if out is not None:
            write_snapshot(state, out / "snapshots" / name, grid)

    try:
        compat = check_compatibility(init_data.rho0, init_data.u0, init_data.eta1, params, grid,
                                     num.compat_tol)
        events.emit("compatibility", b1_residual=compat.b1_residual,
                    b2_residual=compat.b2_residual, b1_pass=compat.b1_pass, b2_pass=compat.b2_pass)
        if not compat.b1_pass and not cfg.flags.allow_incompatible:
            raise IncompatibleInitialData(
                f"initial velocity differs from the beam velocity on the walls by "
                f"{compat.b1_residual:.3e} (tol {num.compat_tol:.1e})")

        m, M = float(np.min(init_data.rho0)), float(np.max(init_data.rho0))
        settings = settings_from_config(cfg, grid, m, M)
        op = momentum.assemble_lame(grid, params)
        window = cfg.effective_window
        min_window = 1 if num.coupling_mode == "step" else num.min_window_steps
        total = int(round(num.t_end / dt))
        if total < 1:
            raise ValueError("t_end shorter than one time step")
        events.emit("start", Nx=grid.Nx, Nz=grid.Nz, dt=dt, steps=total, window=window, m=m, M=M)

        state0 = init_data.state
        e0 = state_energy(state0, params, grid)
        emit_row(timeseries_row(state0.t, e0, state0, params, 0))
        snapshot(state0, f"snap_{0:06d}.txt")

        init = WindowInit(state0, init_data.w_t0, init_data.eta_tt0)
        k, current, widx, halvings = 0, window, 0, 0
        window_iters = []
        while k < total:
            n = min(current, total - k)
            traj, rep = picard_solve(init, n, params, settings, op)
            events.emit("window", index=widx, t_start=init.state.t, steps=n,
                        iterations=rep.iterations, outcome=rep.outcome.value,
                        deltas=rep.deltas, message=rep.message)
            if not rep.converged:
                halvings += 1
                new = current // 2
                events.emit("halving", index=widx, from_steps=current, to_steps=new,
                            reason=rep.outcome.value)
                log.info("window %d failed (%s); halving %d -> %d", widx, rep.outcome.value,
                         current, new)
                if new < min_window:
                    events.emit("underflow", index=widx, t=init.state.t, min_window=min_window)
                    snapshot(init.state, "final.txt")
                    result = RunResult(init.state, rows, events.records, window_iters, halvings, out)
                    exc = WindowUnderflow(
                        f"window {widx} at t={init.state.t:.6g} failed ({rep.outcome.value}) "
                        f"with {current} step(s); minimum is {min_window}")
                    exc.result = result
                    raise exc
                current = new
                continue
            window_iters.append(rep.iterations)
            for lvl in range(1, n + 1):
                k += 1
                st = traj.states[lvl]
                if k % cfg.output.timeseries_every == 0 or k == total:
                    rep_e = energy_budget(traj.states[lvl - 1], st, dt, params, grid)
                    emit_row(timeseries_row(st.t, rep_e, st, params, rep.iterations))
                if cfg.output.snapshot_every and k % cfg.output.snapshot_every == 0:
                    snapshot(st, f"snap_{k:06d}.txt")
            init = traj.end()
            widx += 1
            current = window
        events.emit("finish", t=init.state.t, windows=widx, halvings=halvings)
        snapshot(init.state, "final.txt")
        return RunResult(init.state, rows, events.records, window_iters, halvings, out)
    finally:
        events.close()
        if ts is not None:
            ts.close()
