import numpy as np
import pytest

from fsisim.errors import NonpositiveDensity, ValidationError
from fsisim.fields import ddz, lame_apply, make_grid, spectral_dx
from fsisim.geometry import build_geometry
from fsisim.sources import (
    CoupledState, PhysParams, TimeDerivatives, check_compatibility, compute_F1, compute_F2,
    compute_F3, compute_F3_printed, compute_sources, compute_W_tilde, f2_terms, f3_comparison,
    initial_values, pressure, pressure_prime, steady_state,
)


def _flat(grid):
    return build_geometry(grid.zeros_beam(), grid, 0.5)


def _wavy(grid, amp=0.15):
    return build_geometry(amp * np.sin(2 * np.pi * grid.x / grid.L), grid, 0.5)


def _random_smooth(grid, rng):
    X, Z = grid.mesh()
    k = 2 * np.pi / grid.L
    c = rng.uniform(-1, 1, 8)
    rho = 1.0 + 0.2 * np.sin(k * X + c[0]) * np.cos(Z + c[1])
    u = np.stack([0.3 * np.cos(k * X + c[2]) * np.sin(2 * Z + c[3]),
                  0.2 * np.sin(k * X + c[4]) * np.cos(Z + c[5])])
    u_t = np.stack([np.cos(k * X + c[6]) * Z, np.sin(k * X + c[7]) * Z**2])
    return rho, u, u_t


def test_params_validation():
    for bad in ({"mu": 0.0}, {"mu_prime": -1.0}, {"gamma": 0.5}, {"gamma": 1.0}, {"alpha": 0.0},
                {"beta": -0.1}, {"delta": 0.0}, {"rho_bar": 0.0}, {"L": -1.0}, {"a": 0.0}):
        with pytest.raises(ValidationError):
            PhysParams(**bad)


def test_pressure_examples(grid):
    p = PhysParams(a=1.0, gamma=2.0, rho_bar=1.0)
    np.testing.assert_array_equal(pressure(np.full(grid.scalar_shape, 1.0), p), 0.0)
    np.testing.assert_allclose(pressure(np.full(grid.scalar_shape, 2.0), p), 3.0)
    np.testing.assert_allclose(pressure_prime(np.full(grid.scalar_shape, 2.0), p), 4.0)
    rho = np.ones(grid.scalar_shape)
    rho[2, 3] = 0.0
    with pytest.raises(NonpositiveDensity):
        pressure(rho, p)
    with pytest.raises(NonpositiveDensity):
        pressure_prime(rho, p)


def test_F1_vanishes(grid, params, rng):
    rho, u, _ = _random_smooth(grid, rng)
    flat = _flat(grid)
    assert np.all(compute_F1(np.full(grid.scalar_shape, 1.0), grid.zeros_vector(), flat, grid) == 0.0)
    assert np.all(compute_F1(rho, u, flat, grid) == 0.0)


def test_F2_vanishes_without_motion(grid, params, rng):
    rho, _, _ = _random_smooth(grid, rng)
    f2 = compute_F2(rho, grid.zeros_vector(), grid.zeros_vector(), _flat(grid),
                    grid.zeros_beam(), params, grid)
    assert np.all(f2 == 0.0)


def test_F2_subterms_sum(grid, params, rng):
    rho, u, u_t = _random_smooth(grid, rng)
    geo = _wavy(grid)
    eta_t = 0.3 * np.cos(2 * np.pi * grid.x / grid.L)
    terms = f2_terms(rho, u, u_t, geo, eta_t, params, grid)
    assert set(terms) == {"inertia_eta", "mesh_velocity", "convection_eta", "convection_slope",
                          "viscous_mu", "convection", "viscous_lame", "pressure_correction"}
    np.testing.assert_allclose(sum(terms.values()), compute_F2(rho, u, u_t, geo, eta_t, params, grid))


def test_F2_printed_sign_differs_only_in_curvature_term(grid, params, rng):
    rho, u, u_t = _random_smooth(grid, rng)
    geo = _wavy(grid)
    eta_t = grid.zeros_beam()
    corrected = compute_F2(rho, u, u_t, geo, eta_t, params, grid)
    printed = compute_F2(rho, u, u_t, geo, eta_t, params, grid, printed=True)
    z = grid.z[None, :]
    eta, ex, exx = (a[:, None] for a in (geo.eta, geo.eta_x, geo.eta_xx))
    curv = ((1 + eta) * z * exx - 2 * ex**2 * z) / (1 + eta)
    expected = 2 * (params.mu + params.mu_prime) * ddz(u[0], grid) * curv
    np.testing.assert_allclose(printed[0] - corrected[0], expected, atol=1e-10)
    np.testing.assert_array_equal(printed[1], corrected[1])


def test_F3_flat_interface_first_principles(grid, params):
    """Normal traction at a flat beam with u = (0, u2(z)): -(2 mu + mu') u2_z + P."""
    _, Z = grid.mesh()
    s = 0.7
    u = grid.zeros_vector()
    u[1] = s * Z + 0.3 * Z**2 - 0.3 * 2 * Z  # u2_z(1) = s
    rho = np.full(grid.scalar_shape, params.rho_bar)
    f3 = compute_F3(rho, u, _flat(grid), params, grid)
    np.testing.assert_allclose(f3, -(2 * params.mu + params.mu_prime) * s, atol=1e-11)
    printed = compute_F3_printed(rho, u, _flat(grid), params, grid)
    np.testing.assert_allclose(printed, (params.mu + 2 * params.mu_prime) * s, atol=1e-11)


def test_F3_comparison_report(grid, params, rng):
    rho, u, _ = _random_smooth(grid, rng)
    rep = f3_comparison(rho, u, _wavy(grid), params, grid)
    assert rep["max_abs_discrepancy"] > 1e-3
    assert set(rep) >= {"max_abs_first_principles", "max_abs_printed", "relative_discrepancy"}


def test_steady_sources_are_exact_zero(grid, params):
    st = steady_state(grid)
    src = compute_sources(st, TimeDerivatives(grid.zeros_vector(), grid.zeros_beam()),
                          params, _flat(grid), grid, keep_terms=True)
    for arr in (src.g1, src.g2, src.g3):
        assert np.all(arr == 0.0)
    for name, term in src.terms.items():
        assert np.all(term == 0.0), name


def test_only_lift_acceleration_survives(grid, params):
    st = steady_state(grid)
    c = 0.8
    src = compute_sources(st, TimeDerivatives(grid.zeros_vector(), np.full(grid.Nx, c)),
                          params, _flat(grid), grid)
    _, Z = grid.mesh()
    assert np.all(src.g1 == 0.0)
    assert np.all(src.g3 == 0.0)
    assert np.all(src.g2[0] == 0.0)
    np.testing.assert_allclose(src.g2[1], -Z * c * params.rho_bar, atol=1e-15)


def test_flat_reduction_term_by_term(grid, params, rng):
    """Flat, motionless beam: G1 = -rho div w and every eta-carrying F2 term vanishes."""
    rho, u, u_t = _random_smooth(grid, rng)
    w = u.copy()
    w[..., 0] = 0.0
    w[..., -1] = 0.0
    st = CoupledState(rho - params.rho_bar, w, grid.zeros_beam(), grid.zeros_beam())
    src = compute_sources(st, TimeDerivatives(u_t, grid.zeros_beam()), params, _flat(grid),
                          grid, keep_terms=True)
    from fsisim.fields import divergence, gradient
    np.testing.assert_allclose(src.g1, -rho * divergence(w, grid), atol=1e-14)
    for name in ("F1", "F2.inertia_eta", "F2.mesh_velocity", "F2.convection_eta",
                 "F2.convection_slope", "F2.viscous_mu", "F2.viscous_lame",
                 "F2.pressure_correction", "lift_acceleration", "lift_viscous"):
        assert np.all(src.terms[name] == 0.0), name
    expected = -pressure_prime(rho, params) * gradient(st.sigma, grid) + src.terms["F2.convection"]
    np.testing.assert_allclose(src.g2, expected, atol=1e-13)


def test_W_tilde(grid, rng):
    w = rng.standard_normal(grid.vector_shape)
    w[..., 0] = 0.0
    w[..., -1] = 0.0
    assert np.all(compute_W_tilde(grid.zeros_vector(), _wavy(grid), grid) == 0.0)
    np.testing.assert_array_equal(compute_W_tilde(w, _flat(grid), grid), w)
    W = compute_W_tilde(w, _wavy(grid), grid)
    assert np.abs(W[1][:, [0, -1]]).max() < 1e-13


def test_initial_values_steady(grid, params):
    rho = np.full(grid.scalar_shape, params.rho_bar)
    out = initial_values(rho, grid.zeros_vector(), grid.zeros_beam(), params, grid)
    for arr in out:
        assert np.all(arr == 0.0)


def test_initial_values_constant_density(grid, params):
    rho1 = 1.3
    rho = np.full(grid.scalar_shape, rho1)
    g2, g3, ett, wt = initial_values(rho, grid.zeros_vector(), grid.zeros_beam(), params, grid)
    P1 = params.a * (rho1**params.gamma - params.rho_bar**params.gamma)
    np.testing.assert_allclose(g3, P1, rtol=1e-14)
    np.testing.assert_allclose(ett, P1, rtol=1e-14)
    _, Z = grid.mesh()
    np.testing.assert_allclose(g2[0], 0.0, atol=1e-14)
    np.testing.assert_allclose(g2[1], -P1 * Z * rho1, atol=1e-13)


def test_initial_w_t_matches_momentum_balance(grid, params):
    """rho0 w_t + Lame(w0) = G2 in the interior at t = 0."""
    X, Z = grid.mesh()
    k = 2 * np.pi / grid.L
    rho = params.rho_bar * (1 + 0.1 * np.sin(k * X) * np.cos(np.pi * Z))
    eta1 = 0.05 * np.sin(k * grid.x)
    u0 = np.stack([0.1 * np.sin(np.pi * Z) * np.cos(k * X), Z * eta1[:, None]])
    g2, g3, ett, wt = initial_values(rho, u0, eta1, params, grid)
    w0 = u0.copy()
    w0[1] -= Z * eta1[:, None]
    res = rho * wt + lame_apply(w0, grid, params.mu, params.mu_prime) - g2
    assert np.abs(res[..., 1:-1]).max() < 1e-12
    assert np.all(wt[..., [0, -1]] == 0.0)
    np.testing.assert_allclose(ett, params.delta * spectral_dx(eta1, grid, 2) + g3, atol=1e-12)


def test_compatibility_examples(grid, params):
    rho = np.full(grid.scalar_shape, params.rho_bar)
    rep = check_compatibility(rho, grid.zeros_vector(), grid.zeros_beam(), params, grid, 1e-12)
    assert rep.passed and rep.b1_residual == 0.0 and rep.b2_residual == 0.0
    _, Z = grid.mesh()
    u = grid.zeros_vector()
    u[1] = Z
    rep = check_compatibility(rho, u, grid.zeros_beam(), params, grid, 1e-6)
    assert not rep.b1_pass
    assert rep.b1_residual == pytest.approx(1.0, abs=1e-12)


def test_compatibility_b2_density_bump(grid, params):
    X, Z = grid.mesh()
    rho = params.rho_bar * (1 + 0.1 * np.sin(2 * np.pi * X / grid.L))
    rep = check_compatibility(rho, grid.zeros_vector(), grid.zeros_beam(), params, grid, 1e-8)
    assert rep.b1_pass
    # independent evaluation on the two walls: P'(rho) d_x rho and P(rho) z rho
    drho = params.rho_bar * 0.1 * (2 * np.pi / grid.L) * np.cos(2 * np.pi * grid.x / grid.L)
    Pp = params.a * params.gamma * rho[:, 0] ** (params.gamma - 1)
    P = params.a * (rho[:, 0] ** params.gamma - params.rho_bar**params.gamma)
    from fsisim.fields import ddx
    fd_drho = ddx(rho, grid)[:, 0]
    expected = max(np.abs(Pp * fd_drho).max(), np.abs(P * 1.0 * rho[:, -1]).max())
    assert rep.b2_residual == pytest.approx(expected, rel=1e-12)
    assert np.abs(fd_drho - drho).max() < 0.05 * np.abs(drho).max()


def test_compatibility_monotone_in_tol(grid, params):
    X, _ = grid.mesh()
    rho = params.rho_bar * (1 + 0.1 * np.sin(2 * np.pi * X / grid.L))
    r = check_compatibility(rho, grid.zeros_vector(), grid.zeros_beam(), params, grid, 1.0)
    tols = np.logspace(-3, 2, 30)
    verdicts = [check_compatibility(rho, grid.zeros_vector(), grid.zeros_beam(), params, grid, t).passed
                for t in tols]
    first = verdicts.index(True)
    assert all(verdicts[first:])
    assert "residual" in "\n".join(r.lines())
