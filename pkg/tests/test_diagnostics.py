import math

import numpy as np
import pytest
from scipy.integrate import quad

from ksns import diagnostics as dg
from ksns import mesh
from ksns.errors import DomainError, FitError
from ksns.fields import SimConfig, State, initialize
from ksns.runner import Simulation


def _state(grid, n, c):
    return State(0.0, n, c, mesh.MacVelocity.zeros(grid), np.zeros(grid.shape), grid)


def test_record_uniform_state():
    cfg = SimConfig(nx=16, ny=16)
    g = cfg.grid
    one = np.ones(g.shape)
    rec = dg.record(_state(g, one, one), cfg)
    assert rec.entropy == pytest.approx(math.exp(-1) * g.area, rel=1e-14)
    assert rec.grad_log_n1_sq == 0 and rec.enstrophy == 0 and rec.kinetic == 0
    assert rec.lyapunov == 0 and rec.weighted[2.0] == 0
    assert rec.dev_n_linf == 0


def test_record_is_read_only():
    cfg = SimConfig(nx=16, ny=16, fluid=True, u0="random(amplitude=0.2)", n0="random()")
    s = initialize(cfg)
    before = s.digest()
    dg.record(s, cfg)
    assert s.digest() == before


def test_row_columns_match_header():
    cfg = SimConfig(nx=16, ny=16, betas=(2.0, 3.5))
    s = initialize(cfg)
    row = dg.record(s, cfg).as_row()
    assert tuple(row) == dg.columns(cfg.betas)


def test_entropy_like_functional_decreases_under_diffusion():
    cfg = SimConfig(nx=32, ny=32, s0=0.0, n0="1 + 0.1*cos(pi*x)", dt_max=1e-3, t_end=0.1)
    sim = Simulation(cfg)
    vals = [dg.record(sim.state, cfg).n_log_n1]
    while not sim.done():
        sim.step()
        vals.append(dg.record(sim.state, cfg).n_log_n1)
    assert np.all(np.diff(vals) < 0)


def _weighted_1d(N):
    h = 1.0 / N
    xc = (np.arange(N) + 0.5) * h
    c = 1 + np.cos(np.pi * xc)
    g = np.diff(c) / h
    cf = 0.5 * (c[1:] + c[:-1])
    return float(np.sum(g**2 / (1 + cf) ** 3) * h)


def test_weighted_gradient_one_dimensional_reduction():
    for N in (32, 64):
        g = mesh.Grid(N, N)
        X, _ = g.centers()
        val = dg.weighted_gradient(g, 1 + np.cos(np.pi * X), beta=2.0, s1=1.0)
        assert val == pytest.approx(_weighted_1d(N), rel=1e-10, abs=1e-10)


def test_weighted_gradient_converges_to_quadrature():
    exact = quad(lambda x: (np.pi * np.sin(np.pi * x)) ** 2 / (2 + np.cos(np.pi * x)) ** 3, 0, 1, epsabs=1e-14)[0]
    errs = []
    for N in (32, 64, 128):
        g = mesh.Grid(N, N)
        X, _ = g.centers()
        errs.append(abs(dg.weighted_gradient(g, 1 + np.cos(np.pi * X), 2.0, 1.0) - exact))
    assert 3.5 < errs[0] / errs[1] < 4.5 and 3.5 < errs[1] / errs[2] < 4.5


def test_localized_weighted_gradient():
    g = mesh.Grid(32, 32)
    X, Y = g.centers()
    c = 1 + 0.5 * np.cos(np.pi * X) * np.cos(np.pi * Y)
    assert dg.localized_weighted_gradient(g, np.full(g.shape, 2.0), (0.3, 0.3), 0.2, 2.0, 1.0) == 0
    full = dg.localized_weighted_gradient(g, c, (0.5, 0.5), g.diam, 2.0, 1.0)
    assert full == pytest.approx(dg.weighted_gradient(g, c, 2.0, 1.0), rel=1e-13)
    vals = [dg.localized_weighted_gradient(g, c, (0.2, 0.7), d, 2.0, 1.0) for d in (0.05, 0.1, 0.2, 0.4)]
    assert all(a <= b for a, b in zip(vals, vals[1:]))
    with pytest.raises(DomainError):
        dg.localized_weighted_gradient(g, c, (0.5, 0.5), 0.2, 1.0, 1.0)


def test_partition_consistency():
    g = mesh.Grid(32, 32)
    X, Y = g.centers()
    c = 1 + 0.5 * np.cos(np.pi * X) * np.cos(2 * np.pi * Y)
    dens = dg.weighted_gradient_density(g, c, 2.0, 1.0)
    # 4 x 4 tiling by cell-centre membership
    tiles = 0.0
    for a in range(4):
        for b in range(4):
            mask = (X >= a / 4) & (X < (a + 1) / 4) & (Y >= b / 4) & (Y < (b + 1) / 4)
            tiles += dens[mask].sum() * g.cell_area
    assert tiles == pytest.approx(dg.weighted_gradient(g, c, 2.0, 1.0), rel=1e-13)


def test_modulus_monotone_and_shrinking():
    g = mesh.Grid(32, 32)
    X, Y = g.centers()
    cs = [1 + a * np.cos(np.pi * X) * np.cos(np.pi * Y) for a in (0.2, 0.5)]
    vals = dg.concentration_modulus(g, cs, [0.05, 0.1, 0.2, 0.4], 2.0, 1.0)
    assert np.all(np.diff(vals) >= 0)
    assert vals[0] < 0.1 * vals[-1]


def test_decay_rate_examples():
    t = np.linspace(0, 5, 201)
    fit = dg.decay_rate(t, 3 * np.exp(-2 * t))
    assert fit.lam == pytest.approx(2.0, abs=1e-6) and fit.r_squared >= 0.999999
    assert dg.decay_rate(t, np.full_like(t, 4.0)).lam == 0.0
    # the envelope dominates once the window spans several periods
    tl = np.linspace(0, 40, 2001)
    fit = dg.decay_rate(tl, np.exp(-tl) * (2 + np.cos(tl)))
    assert 0.8 <= fit.lam <= 1.2
    with pytest.raises(FitError):
        dg.decay_rate(t, np.cos(t))


def test_mu1_rectangle():
    assert dg.mu1_rectangle(1, 1) == pytest.approx(9.8696, abs=1e-4)
    assert dg.mu1_rectangle(2, 1) == pytest.approx(2.4674, abs=1e-4)
    assert dg.mu1_rectangle(3, 1.5) == pytest.approx(dg.mu1_rectangle(1, 0.5) / 9, rel=1e-14)


def test_s_star_examples():
    assert dg.HESSIAN_RATIO == pytest.approx(0.863545, abs=1e-6)
    s = dg.s_star(1.0, 1.0, math.pi**2, 1.0)
    assert s == pytest.approx(1.101321 / 0.964866, rel=1e-6)
    assert s == pytest.approx(1.1414, abs=1e-4)
    assert dg.s_star(1.0, 7.0, math.pi**2, 0.3) == s
    gam, mass, co = 1.5, 2.0, 0.7
    limit = gam / dg.HESSIAN_RATIO * (mass / co) ** (gam - 1)
    assert dg.s_star(gam, mass, 1e9, co) == pytest.approx(limit, rel=1e-6)
    with pytest.raises(DomainError):
        dg.s_star(0.9, 1.0, 1.0, 1.0)


def test_holder_examples():
    g = mesh.Grid(16, 16)
    X, _ = g.centers()
    const = [(0.0, np.ones(g.shape)), (0.5, np.ones(g.shape))]
    assert dg.holder_seminorm(g, const, 0.5) == 0
    theta = 0.4
    # the largest x-separation of cell centres is lx - hx
    val = dg.holder_seminorm(g, [(0.0, X), (1.0, X)], theta)
    assert val == pytest.approx((g.lx - g.hx) ** (1 - theta), rel=1e-12)
    rng = np.random.default_rng(0)
    hist = [(t, rng.random(g.shape)) for t in (0.0, 0.5, 1.0)]
    full = dg.holder_seminorm(g, hist, 0.5)
    sub = dg.holder_seminorm(g, hist, 0.5, max_pairs=5000, exhaustive_limit=0)
    assert sub <= full


def test_lyapunov_of_mean_state_zero():
    g = mesh.Grid(16, 16)
    assert dg.lyapunov(g, np.full(g.shape, 1.3), 1.3) == 0.0
