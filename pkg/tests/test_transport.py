import numpy as np
import pytest

from ksns import elliptic, fluid, mesh, transport
from ksns.errors import DomainError, TimeStepError
from ksns.sensitivity import SensitivitySpec

ISO = SensitivitySpec("isotropic", s0=1.0, s1=1.0)
ZERO = SensitivitySpec("isotropic", s0=0.0, s1=1.0)


@pytest.fixture
def grid():
    return mesh.Grid(32, 32)


def test_zero_drift_constant_unchanged(grid):
    n = np.full(grid.shape, 2.0)
    vel = mesh.MacVelocity.zeros(grid)
    out = transport.advance_cells(grid, n, n, vel, ZERO, 1e-2)
    np.testing.assert_array_equal(out, n)


def test_heat_eigenmode_decay():
    errs = []
    for N, dt in ((32, 1e-3), (64, 2.5e-4)):
        g = mesh.Grid(N, N)
        X, _ = g.centers()
        n = 1 + 0.1 * np.cos(np.pi * X)
        out = transport.advance_cells(g, n, n, mesh.MacVelocity.zeros(g), ZERO, dt)
        factor = (out - 1).max() / (n - 1).max()
        errs.append(abs(factor - np.exp(-np.pi**2 * dt)))
    assert errs[0] < 1e-4
    assert errs[1] < errs[0]


def test_zero_drift_equals_heat_step(grid):
    n = np.random.default_rng(0).random(grid.shape)
    out = transport.advance_cells(grid, n, n, mesh.MacVelocity.zeros(grid), ZERO, 3e-3)
    np.testing.assert_allclose(out, transport.heat_step(grid, n, 3e-3), rtol=0, atol=1e-15)


def test_one_step_conservation_and_positivity(grid):
    rng = np.random.default_rng(1)
    n = rng.random(grid.shape) ** 3
    c = elliptic.solve_signal(grid, n)
    w = fluid.project(grid, mesh.MacVelocity(rng.standard_normal((33, 32)), rng.standard_normal((32, 33))))
    drift = transport.drift_field(grid, n, c, w, ISO)
    dt = 0.9 * transport.positivity_dt_limit(grid, drift)
    out = transport.advance_cells(grid, n, c, w, ISO, dt, drift)
    assert abs(out.sum() - n.sum()) / n.sum() <= 1e-13
    assert out.min() >= 0


def test_cfl_violation_raises(grid):
    X, _ = grid.centers()
    n = 1 + 0.5 * np.cos(np.pi * X)
    c = elliptic.solve_signal(grid, 50 * n)
    drift = transport.drift_field(grid, n, c, mesh.MacVelocity.zeros(grid), ISO)
    limit = transport.positivity_dt_limit(grid, drift)
    with pytest.raises(TimeStepError) as info:
        transport.advance_cells(grid, n, c, mesh.MacVelocity.zeros(grid), ISO, 2 * limit, drift)
    assert info.value.dt_allowed == pytest.approx(limit)


def test_negative_density_rejected(grid):
    n = np.ones(grid.shape)
    n[3, 3] = -0.1
    with pytest.raises(DomainError):
        transport.advance_cells(grid, n, np.ones(grid.shape), mesh.MacVelocity.zeros(grid), ISO, 1e-3)


def test_drift_equals_velocity_for_constant_signal(grid):
    rng = np.random.default_rng(2)
    w = fluid.project(grid, mesh.MacVelocity(rng.standard_normal((33, 32)), rng.standard_normal((32, 33))))
    d = transport.drift_field(grid, np.ones(grid.shape), np.full(grid.shape, 3.0), w, ISO)
    np.testing.assert_array_equal(d.wx, w.u)
    np.testing.assert_array_equal(d.wy, w.v)
    assert d.max_speed == max(np.abs(d.wx).max(), np.abs(d.wy).max())


def test_drift_analytic_signal_gradient():
    errs = []
    for N in (32, 64):
        g = mesh.Grid(N, N)
        X, _ = g.centers()
        c = 1 + np.cos(np.pi * X)
        d = transport.drift_field(g, np.ones(g.shape), c, mesh.MacVelocity.zeros(g), ISO)
        Xf, _ = g.x_faces()
        cf = 1 + np.cos(np.pi * Xf)
        exact = -(1.0 / (1.0 + cf)) * np.pi * np.sin(np.pi * Xf)
        errs.append(np.abs(d.wx[1:-1] - exact[1:-1]).max())
        assert np.abs(d.wy).max() == 0
    assert 3.0 < errs[0] / errs[1] < 5.0


def test_mirror_symmetry(grid):
    rng = np.random.default_rng(3)
    half = rng.random((16, 32))
    n = np.concatenate([half, half[::-1]], axis=0)
    c = elliptic.solve_signal(grid, n)
    out = transport.advance_cells(grid, n, c, mesh.MacVelocity.zeros(grid), ISO, 1e-3)
    np.testing.assert_allclose(out, out[::-1], rtol=0, atol=1e-14)


def test_many_steps_conservation(grid):
    rng = np.random.default_rng(4)
    n = 1 + 0.5 * rng.random(grid.shape)
    s0 = n.sum()
    vel = mesh.MacVelocity.zeros(grid)
    for _ in range(200):
        c = elliptic.solve_signal(grid, n)
        n = transport.advance_cells(grid, n, c, vel, ISO, 1e-3)
    assert abs(n.sum() - s0) / s0 < 1e-12
