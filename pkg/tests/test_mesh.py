import math

import numpy as np
import pytest

from ksns import mesh
from ksns.errors import DomainError, UnderResolvedCutoff


@pytest.fixture
def grid():
    return mesh.Grid(64, 64)


def test_grid_invariants():
    g = mesh.Grid(40, 24, 2.0, 1.5)
    assert g.nx * g.hx == pytest.approx(2.0, rel=1e-15)
    assert g.ny * g.hy == pytest.approx(1.5, rel=1e-15)
    assert g.shape == (40, 24)
    with pytest.raises(DomainError):
        mesh.Grid(4, 16)


def test_gradient_of_constant_vanishes(grid):
    gx, gy = mesh.gradient(grid, np.full(grid.shape, 5.0))
    assert not gx.any() and not gy.any()


def test_gradient_exact_for_linear(grid):
    X, _ = grid.centers()
    gx, gy = mesh.gradient(grid, X)
    np.testing.assert_allclose(gx[1:-1], 1.0, rtol=1e-12)
    assert np.all(gx[[0, -1]] == 0.0)
    assert np.abs(gy).max() == 0.0


def test_gradient_second_order():
    errs = []
    for n in (32, 64, 128):
        g = mesh.Grid(n, n)
        X, _ = g.centers()
        gx, _ = mesh.gradient(g, np.cos(np.pi * X))
        Xf, _ = g.x_faces()
        errs.append(np.abs(gx[1:-1] + np.pi * np.sin(np.pi * Xf[1:-1])).max())
    for a, b in zip(errs, errs[1:]):
        assert 3.5 <= a / b <= 4.5


def test_divergence_of_zero_and_telescoping(grid):
    rng = np.random.default_rng(1)
    assert not mesh.divergence(grid, np.zeros((65, 64)), np.zeros((64, 65))).any()
    wx = rng.standard_normal((65, 64))
    wy = rng.standard_normal((64, 65))
    wx[[0, -1]] = 0
    wy[:, [0, -1]] = 0
    total = np.sum(mesh.divergence(grid, wx, wy)) * grid.cell_area
    assert abs(total) <= 1e-12 * max(np.abs(wx).max(), np.abs(wy).max())


def test_div_grad_is_laplacian(grid):
    f = np.random.default_rng(2).standard_normal(grid.shape)
    np.testing.assert_allclose(
        mesh.divergence(grid, *mesh.gradient(grid, f)), mesh.laplacian_neumann(grid, f), atol=1e-9, rtol=1e-12
    )


def test_laplacian_matrix_matches_stencil(grid):
    f = np.random.default_rng(3).standard_normal(grid.shape)
    a = mesh.laplacian_matrix(grid)
    np.testing.assert_allclose((a @ f.ravel()).reshape(grid.shape), mesh.laplacian_neumann(grid, f), atol=1e-8)
    np.testing.assert_allclose(np.asarray(a.sum(axis=1)).ravel(), 0.0, atol=1e-9)


def test_laplacian_constant_eigenfunction_and_compatibility():
    errs = []
    for n in (32, 64, 128):
        g = mesh.Grid(n, n)
        X, _ = g.centers()
        f = np.cos(np.pi * X)
        errs.append(np.abs(mesh.laplacian_neumann(g, f) + np.pi**2 * f).max())
        assert not mesh.laplacian_neumann(g, np.full(g.shape, 3.0)).any()
        r = np.random.default_rng(n).standard_normal(g.shape)
        assert abs(mesh.integrate(g, mesh.laplacian_neumann(g, r))) < 1e-9
    assert 3.5 <= errs[0] / errs[1] <= 4.5


def test_discrete_mu1_is_eigenvalue(grid):
    X, _ = grid.centers()
    f = np.cos(np.pi * X)
    np.testing.assert_allclose(-mesh.laplacian_neumann(grid, f), mesh.discrete_mu1(grid) * f, atol=1e-9)


def test_cutoff_phi_support_and_range(grid):
    q, delta = (0.5, 0.5), 0.3
    phi = mesh.cutoff_phi(grid, q, delta)
    X, Y = grid.centers()
    r = np.hypot(X - 0.5, Y - 0.5)
    assert phi.min() >= 0 and phi.max() <= 1
    assert np.all(phi[r <= delta / 2] == 1.0)
    assert np.all(phi[r >= delta] == 0.0)
    # radially non-increasing
    order = np.argsort(r.ravel())
    assert np.all(np.diff(phi.ravel()[order]) <= 1e-15)


def test_cutoff_phi_sqrt_gradient_bound():
    g = mesh.Grid(256, 256)
    kd = []
    for delta in (0.1, 0.2, 0.4):
        phi = mesh.cutoff_phi(g, (0.5, 0.5), delta)
        gx, gy = mesh.cutoff_phi_gradient(g, (0.5, 0.5), delta)
        mask = phi > 0
        k = np.max(np.hypot(gx, gy)[mask] / np.sqrt(phi[mask]))
        kd.append(k * delta)
    assert max(kd) / min(kd) < 1.2
    # the quintic bridge gives K * delta <= 2 * sup |rho'| / sqrt(rho) over (0, 1)
    t = np.linspace(1e-6, 1, 100001)
    bound = 2 * np.max(30 * t**2 * (1 - t) ** 2 / np.sqrt(t**3 * (10 - 15 * t + 6 * t**2)))
    assert max(kd) <= bound * (1 + 1e-6)


def test_cutoff_phi_under_resolved(grid):
    with pytest.raises(UnderResolvedCutoff):
        mesh.cutoff_phi(grid, (0.5, 0.5), 2 * grid.hx)


def test_psi_values():
    eta = 0.5 * math.exp(-1)
    assert mesh.psi_value(eta, eta) == 0.0
    assert float(mesh.psi_value(eta**2, eta)) == pytest.approx(math.log(2.0), abs=1e-14)
    with pytest.raises(DomainError):
        mesh.cutoff_psi(math.exp(-1))
    with pytest.raises(DomainError):
        mesh.cutoff_psi(0.0)


def test_psi_closed_forms():
    for eta in (1e-2, 1e-3, 1e-4):
        prof = mesh.cutoff_psi(eta)
        L = -math.log(eta)
        assert prof.grad_sq() == pytest.approx(2 * math.pi / L, rel=1e-10)
        assert prof.grad_of_square_sq() == pytest.approx(16 * math.pi / L, rel=1e-10)
        assert np.dot(prof.weights_r, np.ones_like(prof.r)) == pytest.approx(eta, rel=1e-8)


def test_psi_h1_decreasing():
    assert mesh.cutoff_psi(1e-3).h1_norm() < mesh.cutoff_psi(1e-2).h1_norm()
    near = mesh.cutoff_psi(0.36)
    assert 0 < near.h1_norm() < np.inf and 0 < near.grad_of_square_sq() < np.inf


def test_face_integral_partition(grid):
    f = np.random.default_rng(4).standard_normal(grid.shape)
    gx, gy = mesh.gradient(grid, f)
    cells = mesh.faces_to_cells(gx**2, gy**2)
    assert mesh.integrate(grid, cells) == pytest.approx(mesh.grad_sq_integral(grid, f), rel=1e-13)


def test_mac_velocity_no_slip():
    g = mesh.Grid(8, 10)
    v = mesh.MacVelocity(np.ones((9, 10)), np.ones((8, 11))).enforce_no_slip()
    assert not v.u[[0, -1]].any() and not v.v[:, [0, -1]].any()
    assert v.max_speed() == 1.0
    assert mesh.MacVelocity.zeros(g).is_zero()
