import numpy as np
import pytest

from ksns import fluid, mesh
from ksns.errors import TimeStepError


def _random_field(grid, seed):
    rng = np.random.default_rng(seed)
    return mesh.MacVelocity(rng.standard_normal((grid.nx + 1, grid.ny)), rng.standard_normal((grid.nx, grid.ny + 1)))


def _vortex(grid, amp=1.0):
    # discrete curl of a stream function vanishing on the wall is divergence-free
    Xn = np.linspace(0, grid.lx, grid.nx + 1)[:, None]
    Yn = np.linspace(0, grid.ly, grid.ny + 1)[None, :]
    psi = amp * np.sin(np.pi * Xn / grid.lx) ** 2 * np.sin(np.pi * Yn / grid.ly) ** 2
    u = (psi[:, 1:] - psi[:, :-1]) / grid.hy
    v = -(psi[1:, :] - psi[:-1, :]) / grid.hx
    return mesh.MacVelocity(u, v)


@pytest.fixture
def grid():
    return mesh.Grid(32, 32)


def test_projection_properties(grid):
    w = _random_field(grid, 0)
    p1 = fluid.project(grid, w)
    assert np.abs(fluid.divergence(grid, p1)).max() <= 1e-10 * max(1.0, np.abs(fluid.divergence(grid, w)).max())
    p2 = fluid.project(grid, p1)
    assert max(np.abs(p2.u - p1.u).max(), np.abs(p2.v - p1.v).max()) <= 2e-10
    vort = _vortex(grid)
    assert np.abs(fluid.divergence(grid, vort)).max() < 1e-10
    back = fluid.project(grid, vort)
    np.testing.assert_allclose(back.u, vort.u, atol=1e-10)


def test_uniform_density_stays_at_rest(grid):
    X, Y = grid.centers()
    phi = np.sin(2 * X) + Y**2
    vel, p = fluid.ns_step(grid, mesh.MacVelocity.zeros(grid), np.zeros(grid.shape), np.full(grid.shape, 1.5), phi, 1e-2)
    assert vel.max_speed() < 1e-12
    assert abs(p.mean()) < 1e-12


def test_energy_non_increasing_without_forcing(grid):
    vel = fluid.project(grid, _random_field(grid, 1))
    zero = np.zeros(grid.shape)
    e = fluid.kinetic_energy(grid, vel)
    p = zero
    for _ in range(30):
        dt = 0.5 * min(1e-2, fluid.advective_dt_limit(grid, vel))
        vel, p = fluid.ns_step(grid, vel, p, zero, zero, dt)
        e_new = fluid.kinetic_energy(grid, vel)
        assert e_new <= e * (1 + 1e-14)
        e = e_new
        assert np.abs(fluid.divergence(grid, vel)).max() <= 1e-9
        assert abs(p.mean()) < 1e-10
        assert not vel.u[[0, -1]].any() and not vel.v[:, [0, -1]].any()


def test_cfl_violation(grid):
    vel = fluid.project(grid, _random_field(grid, 2))
    limit = fluid.advective_dt_limit(grid, vel)
    with pytest.raises(TimeStepError):
        fluid.ns_step(grid, vel, np.zeros(grid.shape), np.zeros(grid.shape), np.zeros(grid.shape), 2 * limit)


def _decay_rate(N, t_end=0.05, dt=2.5e-4):
    g = mesh.Grid(N, N)
    vel = _vortex(g, amp=0.01)
    zero = np.zeros(g.shape)
    p = zero
    e0 = fluid.kinetic_energy(g, vel)
    for _ in range(int(round(t_end / dt))):
        vel, p = fluid.ns_step(g, vel, p, zero, zero, dt)
    return -np.log(fluid.kinetic_energy(g, vel) / e0) / t_end


def test_low_mode_decay_self_convergence():
    rates = {N: _decay_rate(N) for N in (32, 64, 128)}
    ref = rates[128]
    assert abs(rates[64] - ref) / ref < 0.05
    assert abs(rates[64] - ref) < abs(rates[32] - ref)


def test_enstrophy_matches_face_gradients(grid):
    vel = _vortex(grid)
    assert fluid.enstrophy(grid, vel) > 0
    assert fluid.enstrophy(grid, mesh.MacVelocity.zeros(grid)) == 0
