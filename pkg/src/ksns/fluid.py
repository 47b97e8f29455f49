"""Incompressible Navier-Stokes step on the staggered grid.

Chorin-type splitting: explicit donor-cell advection, backward-Euler
viscous step with unit viscosity, body force ``n grad(Phi)`` averaged to
faces, then projection onto discretely divergence-free fields.
"""

from functools import lru_cache

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from . import mesh
from .errors import SolverStall, TimeStepError


def _dirichlet_1d(n, h):
    off = np.ones(n - 1)
    return sp.diags([off, -2.0 * np.ones(n), off], [-1, 0, 1], format="csr") / h**2


def _wall_1d(n, h):
    # wall halfway between the first unknown and its ghost, ghost = -value
    main = -2.0 * np.ones(n)
    main[0] = main[-1] = -3.0
    off = np.ones(n - 1)
    return sp.diags([off, main, off], [-1, 0, 1], format="csr") / h**2


@lru_cache(maxsize=8)
def viscous_matrices(grid):
    """No-slip vector Laplacians on the interior u- and v-faces."""
    lu_ = sp.kron(_dirichlet_1d(grid.nx - 1, grid.hx), sp.identity(grid.ny)) + sp.kron(
        sp.identity(grid.nx - 1), _wall_1d(grid.ny, grid.hy)
    )
    lv_ = sp.kron(_wall_1d(grid.nx, grid.hx), sp.identity(grid.ny - 1)) + sp.kron(
        sp.identity(grid.nx), _dirichlet_1d(grid.ny - 1, grid.hy)
    )
    return lu_.tocsr(), lv_.tocsr()


@lru_cache(maxsize=32)
def _viscous_lu(grid, dt):
    lu_, lv_ = viscous_matrices(grid)
    a = spla.splu((sp.identity(lu_.shape[0]) - dt * lu_).tocsc())
    b = spla.splu((sp.identity(lv_.shape[0]) - dt * lv_).tocsc())
    return a, b


@lru_cache(maxsize=8)
def _pressure_lu(grid):
    lap = mesh.laplacian_matrix(grid).tocsc()
    # pin cell 0; compatible right-hand sides then satisfy the dropped row too
    return spla.splu(lap[1:, 1:].tocsc())


def solve_pressure_poisson(grid, rhs):
    """Mean-zero solution of the Neumann problem ``lap phi = rhs``."""
    rhs = np.asarray(rhs, dtype=float).ravel()
    phi = np.zeros(grid.size)
    phi[1:] = _pressure_lu(grid).solve(rhs[1:] - rhs.mean())
    phi -= phi.mean()
    return phi.reshape(grid.shape)


def divergence(grid, vel):
    return mesh.divergence(grid, vel.u, vel.v)


def _project(grid, w, tol):
    out = w.copy().enforce_no_slip()
    div = divergence(grid, out)
    scale = max(1.0, float(np.abs(div).max()))
    phi = solve_pressure_poisson(grid, div)
    gx, gy = mesh.gradient(grid, phi)
    out.u -= gx
    out.v -= gy
    residual = float(np.abs(divergence(grid, out)).max())
    if residual > tol * scale:
        raise SolverStall(f"projection left divergence {residual:.3e}", [residual])
    return out, phi


def project(grid, w, tol=1e-10):
    """Remove the discrete gradient part of a face field."""
    return _project(grid, w, tol)[0]


def projection_potential(grid, w):
    """The potential ``phi`` removed by :func:`project` (mean zero)."""
    return solve_pressure_poisson(grid, divergence(grid, w))


def _advect_u(grid, u, v):
    hx, hy = grid.hx, grid.hy
    uc = 0.5 * (u[:-1, :] + u[1:, :])
    a_e, a_w = uc[1:, :], uc[:-1, :]
    vbar = 0.5 * (v[:-1, :] + v[1:, :])  # corners above/below interior u-faces
    a_n, a_s = vbar[:, 1:], vbar[:, :-1]
    up = np.pad(u[1:-1, :], ((0, 0), (1, 1)))
    p = u[1:-1, :]
    du = (-np.minimum(a_e, 0.0) * (u[2:, :] - p) + np.maximum(a_w, 0.0) * (u[:-2, :] - p)) / hx
    du += (-np.minimum(a_n, 0.0) * (up[:, 2:] - p) + np.maximum(a_s, 0.0) * (up[:, :-2] - p)) / hy
    inflow = (-np.minimum(a_e, 0.0) + np.maximum(a_w, 0.0)) / hx + (-np.minimum(a_n, 0.0) + np.maximum(a_s, 0.0)) / hy
    return du, inflow


def _advect_v(grid, u, v):
    hx, hy = grid.hx, grid.hy
    vc = 0.5 * (v[:, :-1] + v[:, 1:])
    a_n, a_s = vc[:, 1:], vc[:, :-1]
    ubar = 0.5 * (u[:, :-1] + u[:, 1:])
    a_e, a_w = ubar[1:, :], ubar[:-1, :]
    vp = np.pad(v[:, 1:-1], ((1, 1), (0, 0)))
    p = v[:, 1:-1]
    dv = (-np.minimum(a_n, 0.0) * (v[:, 2:] - p) + np.maximum(a_s, 0.0) * (v[:, :-2] - p)) / hy
    dv += (-np.minimum(a_e, 0.0) * (vp[2:, :] - p) + np.maximum(a_w, 0.0) * (vp[:-2, :] - p)) / hx
    inflow = (-np.minimum(a_n, 0.0) + np.maximum(a_s, 0.0)) / hy + (-np.minimum(a_e, 0.0) + np.maximum(a_w, 0.0)) / hx
    return dv, inflow


def advective_dt_limit(grid, vel):
    """Largest dt keeping the donor-cell update a convex combination."""
    if vel.is_zero():
        return np.inf
    _, in_u = _advect_u(grid, vel.u, vel.v)
    _, in_v = _advect_v(grid, vel.u, vel.v)
    worst = max(in_u.max(initial=0.0), in_v.max(initial=0.0))
    return np.inf if worst == 0 else 1.0 / worst


def buoyancy(grid, n, phi):
    """Face samples of ``n grad(Phi)`` using face-averaged ``n``."""
    nx_, ny_ = mesh.face_average(grid, n)
    gx, gy = mesh.gradient(grid, phi)
    return nx_ * gx, ny_ * gy


def ns_step(grid, vel, p, n, phi, dt, tol=1e-10):
    """Advance velocity and pressure by one step; returns ``(vel, p)``."""
    du, in_u = _advect_u(grid, vel.u, vel.v)
    dv, in_v = _advect_v(grid, vel.u, vel.v)
    worst = max(in_u.max(initial=0.0), in_v.max(initial=0.0))
    if dt * worst > 1.0:
        raise TimeStepError(f"advective CFL violated: dt={dt:.3e} > {1.0 / worst:.3e}", dt, 1.0 / worst)
    ustar = vel.u[1:-1, :] + dt * du
    vstar = vel.v[:, 1:-1] + dt * dv
    lu_u, lu_v = _viscous_lu(grid, float(dt))
    new = mesh.MacVelocity.zeros(grid)
    new.u[1:-1, :] = lu_u.solve(ustar.ravel()).reshape(ustar.shape)
    new.v[:, 1:-1] = lu_v.solve(vstar.ravel()).reshape(vstar.shape)
    # force after the viscous solve so a gradient force is removed exactly
    fx, fy = buoyancy(grid, n, phi)
    new.u += dt * fx
    new.v += dt * fy
    new, phi_p = _project(grid, new, tol)
    pressure = phi_p / dt
    return new, pressure - pressure.mean()


def kinetic_energy(grid, vel):
    """``int |u|^2`` with each face owning one cell area."""
    return float((np.sum(vel.u**2) + np.sum(vel.v**2)) * grid.cell_area)


def enstrophy(grid, vel):
    """``int |grad u|^2`` as the quadratic form of the no-slip Laplacian."""
    lu_, lv_ = viscous_matrices(grid)
    a = vel.u[1:-1, :].ravel()
    b = vel.v[:, 1:-1].ravel()
    return float(-(a @ (lu_ @ a) + b @ (lv_ @ b)) * grid.cell_area)
