"""Independent reference computations used by the tests and the ``oracle`` subcommands.

* transformation consistency: residuals of the fixed-domain equations (with
  the F1/F2 remainders) against physical-coordinate residuals of the same
  manufactured flow, computed by finite differences on the fitted grid;
* transport: exact translation and an explicit first-order upwind scheme;
* beam: per-mode rates measured from a trajectory against the roots of the
  dispersion relation.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import beam, transport
from .fields import (
    Grid,
    divergence,
    gradient,
    lame_apply,
    make_grid,
)
from .geometry import build_geometry
from .sources import PhysParams, compute_F1, compute_F2, f3_comparison, pressure

TWO_PI = 2.0 * np.pi


# --- manufactured moving-domain flow ----------------------------------------

@dataclass(frozen=True)
class ManufacturedFlow:
    """Smooth 1-periodic density, velocity and beam with ``max|eta| = eta_amp``."""

    eta_amp: float = 0.2

    def eta(self, x, t):
        return self.eta_amp * np.sin(TWO_PI * x - t)

    def eta_t(self, x, t):
        return -self.eta_amp * np.cos(TWO_PI * x - t)

    def rho(self, x, y, t):
        return 1.0 + 0.1 * np.cos(TWO_PI * x + 0.5 * t) * np.cos(y)

    def u1(self, x, y, t):
        return 0.3 * np.sin(TWO_PI * x) * np.cos(1.5 * y + 0.2 * t)

    def u2(self, x, y, t):
        return 0.2 * np.cos(TWO_PI * x - 0.3 * t) * np.sin(y) + 0.1 * y

    def u(self, x, y, t):
        return np.stack([self.u1(x, y, t), self.u2(x, y, t)])


def _physical_stencil(f, X, Y, hx, hy, t):
    """Value and central differences of ``f(x, y, t)`` at physical points."""
    c = f(X, Y, t)
    xp, xm = f(X + hx, Y, t), f(X - hx, Y, t)
    yp, ym = f(X, Y + hy, t), f(X, Y - hy, t)
    fxy = (f(X + hx, Y + hy, t) - f(X + hx, Y - hy, t)
           - f(X - hx, Y + hy, t) + f(X - hx, Y - hy, t)) / (4.0 * hx * hy)
    return {
        "f": c,
        "x": (xp - xm) / (2.0 * hx),
        "y": (yp - ym) / (2.0 * hy),
        "xx": (xp - 2.0 * c + xm) / hx**2,
        "yy": (yp - 2.0 * c + ym) / hy**2,
        "xy": fxy,
    }


def transformation_residuals(n: int, params: PhysParams, flow: ManufacturedFlow | None = None,
                             t: float = 0.3, tau: float = 1e-4) -> dict:
    """Both residual pairs on an ``n x n`` grid of the unit channel.

    ``*_fixed``: the fixed-domain equations evaluated with the package's
    stencils and remainders.  ``*_physical``: the physical equations by
    central differences at the images of the reference nodes, with steps
    ``dx`` and the local fitted spacing ``dz (1 + eta)``; the momentum
    residual is multiplied by ``1 + eta`` (the Jacobian), which is the form
    the fixed-domain momentum equation takes.  Time derivatives use a
    central difference of width ``tau`` in both.
    """
    flow = flow or ManufacturedFlow()
    g = make_grid(n, n, 1.0)
    X, Z = g.mesh()
    geom = build_geometry(flow.eta(g.x, t), g, 0.5)
    jac = geom.one_plus_eta[:, None]

    def pull(f, tt):
        return f(X, Z * (1.0 + flow.eta(X, tt)), tt)

    rh = pull(flow.rho, t)
    uh = pull(flow.u, t)
    rh_t = (pull(flow.rho, t + tau) - pull(flow.rho, t - tau)) / (2.0 * tau)
    uh_t = (pull(flow.u, t + tau) - pull(flow.u, t - tau)) / (2.0 * tau)
    et = flow.eta_t(g.x, t)
    V = np.stack([uh[0], (uh[1] - et[:, None] * Z - uh[0] * Z * geom.eta_x[:, None]) / jac])
    gr = gradient(rh, g)
    cont_fixed = rh_t + V[0] * gr[0] + V[1] * gr[1] + rh * divergence(uh, g) \
        - compute_F1(rh, uh, geom, g)
    mom_fixed = rh * uh_t + lame_apply(uh, g, params.mu, params.mu_prime) \
        + gradient(pressure(rh, params), g) - compute_F2(rh, uh, uh_t, geom, et, params, g)

    Y = Z * jac
    hx, hy = g.dx, g.dz * jac
    r = _physical_stencil(flow.rho, X, Y, hx, hy, t)
    u = [_physical_stencil(flow.u1, X, Y, hx, hy, t), _physical_stencil(flow.u2, X, Y, hx, hy, t)]
    p = _physical_stencil(lambda x, y, s: pressure(flow.rho(x, y, s), params), X, Y, hx, hy, t)
    r_t = (flow.rho(X, Y, t + tau) - flow.rho(X, Y, t - tau)) / (2.0 * tau)
    u_t = [(f(X, Y, t + tau) - f(X, Y, t - tau)) / (2.0 * tau) for f in (flow.u1, flow.u2)]
    div = u[0]["x"] + u[1]["y"]
    cont_phys = r_t + u[0]["f"] * r["x"] + u[1]["f"] * r["y"] + r["f"] * div
    graddiv = (u[0]["xx"] + u[1]["xy"], u[0]["xy"] + u[1]["yy"])
    mom_phys = []
    for c in range(2):
        conv = u[0]["f"] * u[c]["x"] + u[1]["f"] * u[c]["y"]
        lap = u[c]["xx"] + u[c]["yy"]
        res = r["f"] * (u_t[c] + conv) - params.mu * lap \
            - (params.mu + params.mu_prime) * graddiv[c] + (p["x"], p["y"])[c]
        mom_phys.append(jac * res)
    return {
        "grid": g,
        "geometry": geom,
        "rho_hat": rh,
        "u_hat": uh,
        "continuity_fixed": cont_fixed,
        "continuity_physical": cont_phys,
        "momentum_fixed": mom_fixed,
        "momentum_physical": np.stack(mom_phys),
    }


def transformation_table(params: PhysParams, sizes=(16, 32, 64, 128),
                         flow: ManufacturedFlow | None = None) -> list[dict]:
    """Refinement table of the fixed-vs-physical residual discrepancy.

    Relative values divide by the sup norm of the physical residual.  The
    ``order_*`` entries are log2 ratios against the previous row.
    """
    rows = []
    for n in sizes:
        res = transformation_residuals(n, params, flow)
        row = {"n": n}
        for eq in ("continuity", "momentum"):
            d = res[f"{eq}_fixed"] - res[f"{eq}_physical"]
            row[f"{eq}_abs"] = float(np.abs(d).max())
            row[f"{eq}_rel"] = row[f"{eq}_abs"] / float(np.abs(res[f"{eq}_physical"]).max())
        for c, name in ((0, "momentum_x"), (1, "momentum_z")):
            d = res["momentum_fixed"][c] - res["momentum_physical"][c]
            row[f"{name}_abs"] = float(np.abs(d).max())
        f3 = f3_comparison(res["rho_hat"], res["u_hat"], res["geometry"], params, res["grid"])
        row["f3_printed_vs_first_principles_rel"] = f3["relative_discrepancy"]
        rows.append(row)
    for prev, row in zip(rows, rows[1:]):
        for eq in ("continuity", "momentum"):
            row[f"order_{eq}"] = float(np.log(prev[f"{eq}_abs"] / row[f"{eq}_abs"])
                                       / np.log(row["n"] / prev["n"]))
    return rows


# --- transport ----------------------------------------------------------------

def translation_errors(sizes=(16, 32, 64, 128), t_end: float = 0.5, cfl: float = 0.4,
                       speed: float = 1.0, nz: int = 4) -> list[dict]:
    """Semi-Lagrangian translation of ``sin(2 pi x)`` on the unit period.

    ``dx`` and ``dt = cfl dx / speed`` are refined together.  The error is the
    sup over every level of the window, since the final level alone can land
    exactly on grid nodes.
    """
    rows = []
    for nx in sizes:
        g = make_grid(nx, nz, 1.0)
        X, _ = g.mesh()
        dt = cfl * g.dx / speed
        steps = int(round(t_end / dt))
        dt = t_end / steps
        W = np.zeros(g.vector_shape)
        W[0] = speed
        sig0 = np.sin(TWO_PI * X)
        levels = transport.solve_window(sig0, [W] * (steps + 1), [g.zeros()] * (steps + 1), g, dt)
        err = max(float(np.abs(s - np.sin(TWO_PI * (X - speed * n * dt))).max())
                  for n, s in enumerate(levels))
        rows.append({"n": nx, "dt": dt, "steps": steps, "error": err})
    for prev, row in zip(rows, rows[1:]):
        row["order"] = float(np.log(prev["error"] / row["error"]) / np.log(row["n"] / prev["n"]))
    return rows


def _oracle_velocity(g: Grid) -> np.ndarray:
    X, Z = g.mesh()
    return np.stack([np.ones_like(X), 0.3 * np.sin(TWO_PI * X) * np.sin(np.pi * Z)])


def _oracle_sigma0(g: Grid) -> np.ndarray:
    X, Z = g.mesh()
    return np.sin(TWO_PI * X) * np.cos(np.pi * Z)


def upwind_transport(sigma0, W, g1, grid: Grid, dt: float, steps: int) -> np.ndarray:
    """Explicit first-order upwind for ``sigma_t + W . grad sigma = g1`` (steady W, g1)."""
    s = np.array(sigma0, dtype=float, copy=True)
    for _ in range(steps):
        back_x = (s - np.roll(s, 1, axis=0)) / grid.dx
        fwd_x = (np.roll(s, -1, axis=0) - s) / grid.dx
        back_z = np.zeros_like(s)
        fwd_z = np.zeros_like(s)
        back_z[:, 1:] = (s[:, 1:] - s[:, :-1]) / grid.dz
        fwd_z[:, :-1] = (s[:, 1:] - s[:, :-1]) / grid.dz
        dz = np.where(W[1] > 0, back_z, fwd_z)
        dx = np.where(W[0] > 0, back_x, fwd_x)
        s = s - dt * (W[0] * dx + W[1] * dz) + dt * g1
    return s


def upwind_comparison(n: int = 16, t_end: float = 0.25, cfl: float = 0.4, g1_value: float = 0.5) -> dict:
    """Semi-Lagrangian vs upwind on ``n x n`` and upwind self-convergence from ``2n``.

    Returns the discrepancies on ``n`` and ``2n`` grids and the upwind
    self-convergence estimate ``|UW_n - UW_2n|`` sampled on the coarse nodes.
    """
    out = {}
    sols = {}
    for m in (n, 2 * n):
        g = make_grid(m, m, 1.0)
        W = _oracle_velocity(g)
        wmax = max(np.abs(W[0]).max() / g.dx, np.abs(W[1]).max() / g.dz)
        steps = int(np.ceil(t_end * wmax / cfl))
        dt = t_end / steps
        s0 = _oracle_sigma0(g)
        g1 = np.full(g.scalar_shape, g1_value)
        sl = transport.solve_window(s0, [W] * (steps + 1), [g1] * (steps + 1), g, dt)[-1]
        uw = upwind_transport(s0, W, g1, g, dt, steps)
        sols[m] = (sl, uw)
        out[f"discrepancy_{m}"] = float(np.abs(sl - uw).max())
    uw_c, uw_f = sols[n][1], sols[2 * n][1][::2, ::2]
    out["upwind_self_convergence"] = float(np.abs(uw_c - uw_f).max())
    out["bound"] = 3.0 * out["upwind_self_convergence"]
    out["passed"] = (out[f"discrepancy_{n}"] <= out["bound"]
                     and out[f"discrepancy_{2 * n}"] < out[f"discrepancy_{n}"])
    return out


# --- beam dispersion ------------------------------------------------------------

def dispersion_roots(j: int, params: PhysParams) -> np.ndarray:
    """Roots of ``lam^2 + delta k^2 lam + (alpha k^4 + beta k^2) = 0``, ``k = 2 pi j / L``."""
    k2 = (TWO_PI * j / params.L) ** 2
    b = params.delta * k2
    c = params.alpha * k2 * k2 + params.beta * k2
    disc = np.sqrt(complex(b * b - 4.0 * c))
    return np.array([(-b + disc) / 2.0, (-b - disc) / 2.0])


def measured_rates(j: int, params: PhysParams, dt: float, nx: int = 16, steps: int = 40) -> np.ndarray:
    """Complex rates of mode ``j`` recovered from a free beam trajectory.

    The mode amplitude obeys a two-term linear recurrence; its coefficients
    are fitted by least squares (Prony) and the recurrence roots ``mu`` give
    rates ``log(mu) / dt``.
    """
    x = np.arange(nx) * params.L / nx
    eta = np.cos(TWO_PI * j * x / params.L)
    eta_t = np.zeros(nx)
    system = beam.BeamModeSystem(nx, dt, params)
    amps = [np.fft.fft(eta)[j]]
    zero = np.zeros(nx)
    for _ in range(steps):
        eta, eta_t = beam.beam_step(eta, eta_t, zero, dt, params, system)
        amps.append(np.fft.fft(eta)[j])
    a = np.real(np.array(amps))
    A = np.column_stack([a[1:-1], a[:-2]])
    p, q = np.linalg.lstsq(A, a[2:], rcond=None)[0]
    mu = np.roots([1.0, -p, -q]).astype(complex)
    lam = np.log(mu) / dt
    return lam[np.argsort(-lam.imag)]


def dispersion_table(params: PhysParams, modes=(1, 2, 3, 4), target: float = 0.1,
                     refinements: int = 3) -> list[dict]:
    """Measured vs exact rates per mode at ``dt |lam| = target`` and finer steps."""
    rows = []
    for j in modes:
        exact = dispersion_roots(j, params)
        exact = exact[np.argsort(-exact.imag)]
        dt0 = target / np.abs(exact).max()
        for r in range(refinements):
            dt = dt0 / 2**r
            lam = measured_rates(j, params, dt)
            err = float(np.max(np.abs(lam - exact) / np.abs(exact)))
            rows.append({"mode": j, "dt": dt, "dt_abs_lambda": dt * float(np.abs(exact).max()),
                         "exact_re": exact[0].real, "exact_im": exact[0].imag,
                         "measured_re": lam[0].real, "measured_im": lam[0].imag,
                         "rel_error": err})
    for prev, row in zip(rows, rows[1:]):
        if prev["mode"] == row["mode"]:
            row["order"] = float(np.log(prev["rel_error"] / row["rel_error"]) / np.log(2.0))
    return rows
