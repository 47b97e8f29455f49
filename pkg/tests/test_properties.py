import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from ksns import elliptic, fluid, mesh, transport
from ksns.fields import SimConfig, initialize
from ksns.sensitivity import SensitivitySpec, sample_tensors

grids = st.builds(mesh.Grid, st.integers(8, 24), st.integers(8, 24), st.floats(0.5, 2.0), st.floats(0.5, 2.0))


@settings(max_examples=25, deadline=None)
@given(grids, st.integers(0, 2**31 - 1))
def test_neumann_compatibility(grid, seed):
    f = np.random.default_rng(seed).standard_normal(grid.shape)
    assert abs(np.sum(mesh.laplacian_neumann(grid, f))) * grid.cell_area <= 1e-10 * max(1.0, 1 / grid.hx**2)


@settings(max_examples=25, deadline=None)
@given(grids, st.integers(0, 2**31 - 1), st.floats(0.0, 3.0), st.floats(0.1, 2.0))
def test_transport_positivity_and_mass(grid, seed, s0, gamma):
    rng = np.random.default_rng(seed)
    n = rng.random(grid.shape) ** 2
    spec = SensitivitySpec("isotropic", s0=s0, s1=0.5, gamma=gamma)
    c = elliptic.solve_signal(grid, n)
    w = fluid.project(grid, mesh.MacVelocity(rng.standard_normal((grid.nx + 1, grid.ny)),
                                             rng.standard_normal((grid.nx, grid.ny + 1))))
    drift = transport.drift_field(grid, n, c, w, spec)
    dt = min(1e-2, 0.99 * transport.positivity_dt_limit(grid, drift))
    out = transport.advance_cells(grid, n, c, w, spec, dt, drift)
    assert out.min() >= 0
    assert abs(out.sum() - n.sum()) <= 1e-13 * n.sum()


@settings(max_examples=20, deadline=None)
@given(st.sampled_from(["isotropic", "rotational", "negative_semidefinite"]), st.floats(0.0, 5.0),
       st.floats(0.0, 2.0), st.floats(0.0, 3.0), st.floats(-np.pi, np.pi), st.floats(-0.3, 0.3))
def test_decay_bound_any_parameters(variant, s0, s1, gamma, angle, skew):
    spec = SensitivitySpec(variant, s0=s0, s1=s1 + 1e-3, gamma=gamma, angle=angle,
                           matrix=((-0.5, 0.1), (0.1, -0.4)), skew=skew)
    t, bound = sample_tensors(spec, samples=500, seed=1)
    assert np.all(np.linalg.norm(t, 2, axis=(-2, -1)) <= bound * (1 + 1e-12) + 1e-14)


@settings(max_examples=12, deadline=None)
@given(st.integers(8, 20), st.integers(8, 20), st.booleans(), st.integers(0, 1000), st.floats(0.1, 0.9))
def test_initialized_state_invariants(nx, ny, fl, seed, amp):
    cfg = SimConfig(nx=nx, ny=ny, fluid=fl, seed=seed, n0=f"random(amplitude={amp})",
                    u0="random(amplitude=0.3)" if fl else "0")
    s = initialize(cfg)
    assert s.n.min() >= 0 and s.c.min() > 0
    assert np.abs(fluid.divergence(s.grid, s.vel)).max() <= 1e-9
    assert abs(s.c.sum() - s.n.sum()) <= 1e-9 * s.n.sum()
    assert np.all(np.isfinite(s.c))
