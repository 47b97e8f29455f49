"""Conservative, positivity-preserving update of the cell density.

The total flux is ``F = n w - grad n`` with drift ``w = u + S grad c``.
The drift part is explicit donor-cell upwind, the diffusive part backward
Euler.  Both are in flux form with zero flux through the wall, so the cell
sum of ``n`` is preserved up to round-off.
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from . import mesh
from .errors import DomainError, TimeStepError


@dataclass
class DriftField:
    wx: np.ndarray
    wy: np.ndarray
    max_speed: float


@lru_cache(maxsize=32)
def _heat_lu(grid, dt):
    a = sp.identity(grid.size, format="csc") - dt * mesh.laplacian_matrix(grid).tocsc()
    return spla.splu(a.tocsc())


def chemotactic_velocity(grid, n, c, spec):
    """Face samples of ``S(x, n, c) grad c``; zero on wall faces."""
    sx = np.zeros((grid.nx + 1, grid.ny))
    sy = np.zeros((grid.nx, grid.ny + 1))
    if spec.is_zero:
        return sx, sy
    gx, gy = mesh.gradient(grid, c)
    cgx, cgy = mesh.cell_gradient(grid, c)
    cfx, cfy = mesh.face_average(grid, c)
    nfx, nfy = mesh.face_average(grid, n)

    Xf, Yf = grid.x_faces()
    gy_at_x = 0.5 * (cgy[1:, :] + cgy[:-1, :])
    s11, s12, _, _ = spec.components(Xf[1:-1], Yf[1:-1], nfx[1:-1], cfx[1:-1])
    sx[1:-1, :] = s11 * gx[1:-1, :] + s12 * gy_at_x

    Xf, Yf = grid.y_faces()
    gx_at_y = 0.5 * (cgx[:, 1:] + cgx[:, :-1])
    _, _, s21, s22 = spec.components(Xf[:, 1:-1], Yf[:, 1:-1], nfy[:, 1:-1], cfy[:, 1:-1])
    sy[:, 1:-1] = s21 * gx_at_y + s22 * gy[:, 1:-1]
    return sx, sy


def drift_field(grid, n, c, vel, spec):
    """Assemble ``w = u + S grad c`` on faces with its maximum speed."""
    sx, sy = chemotactic_velocity(grid, n, c, spec)
    wx = vel.u + sx
    wy = vel.v + sy
    wx[0, :] = wx[-1, :] = 0.0
    wy[:, 0] = wy[:, -1] = 0.0
    speed = float(max(np.abs(wx).max(), np.abs(wy).max()))
    return DriftField(wx, wy, speed)


def upwind_flux(grid, wx, wy, n):
    """Donor-cell face fluxes ``n_upwind * w``; wall fluxes are zero."""
    fx = np.zeros_like(wx)
    fy = np.zeros_like(wy)
    a = wx[1:-1, :]
    fx[1:-1, :] = np.maximum(a, 0.0) * n[:-1, :] + np.minimum(a, 0.0) * n[1:, :]
    b = wy[:, 1:-1]
    fy[:, 1:-1] = np.maximum(b, 0.0) * n[:, :-1] + np.minimum(b, 0.0) * n[:, 1:]
    return fx, fy


def outflow_rate(grid, drift):
    """Per-cell rate at which the explicit drift step drains ``n``."""
    wx, wy = drift.wx, drift.wy
    return (np.maximum(wx[1:, :], 0.0) - np.minimum(wx[:-1, :], 0.0)) / grid.hx + (
        np.maximum(wy[:, 1:], 0.0) - np.minimum(wy[:, :-1], 0.0)
    ) / grid.hy


def positivity_dt_limit(grid, drift):
    """Largest dt for which the explicit drift step keeps ``n >= 0``."""
    worst = float(outflow_rate(grid, drift).max())
    return np.inf if worst <= 0 else 1.0 / worst


def heat_step(grid, n, dt):
    """Backward-Euler step of the Neumann heat equation.

    Solved for the increment, so constants are reproduced exactly.
    """
    n = np.asarray(n, dtype=float)
    rhs = dt * mesh.laplacian_neumann(grid, n)
    return n + _heat_lu(grid, float(dt)).solve(rhs.ravel()).reshape(grid.shape)


def advance_cells(grid, n, c, vel, spec, dt, drift=None):
    """Advance the cell density by ``dt``.

    ``drift`` may be passed in when the caller already assembled it for
    time-step control.
    """
    n = np.asarray(n, dtype=float)
    scale = float(np.abs(n).max(initial=0.0))
    if n.min(initial=0.0) < -1e-12 * max(scale, 1.0):
        raise DomainError(f"negative cell density {n.min():.3e}")
    if drift is None:
        drift = drift_field(grid, n, c, vel, spec)
    limit = positivity_dt_limit(grid, drift)
    if dt > limit:
        raise TimeStepError(f"drift CFL violated: dt={dt:.3e} > {limit:.3e}", dt, limit)
    fx, fy = upwind_flux(grid, drift.wx, drift.wy, n)
    explicit = n - dt * mesh.divergence(grid, fx, fy)
    return heat_step(grid, explicit, dt)
