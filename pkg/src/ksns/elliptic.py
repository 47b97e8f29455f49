"""Signal equation ``-lap c + u . grad c + c = n`` with Neumann boundary.

The advection term is assembled in conservative upwind form on the MAC
faces.  For a discretely divergence-free ``u`` that vanishes on the wall
this keeps ``I - lap + U`` an M-matrix with unit row sums, so constants are
reproduced, positivity holds, and the cell sum of ``c`` equals that of ``n``.
"""

from functools import lru_cache

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from . import mesh
from .errors import DomainError, SolverStall


@lru_cache(maxsize=16)
def _helmholtz_lu(grid):
    a = sp.identity(grid.size, format="csc") - mesh.laplacian_matrix(grid).tocsc()
    return spla.splu(a.tocsc())


def helmholtz_matrix(grid):
    """``I - lap_h`` as a sparse matrix."""
    return (sp.identity(grid.size, format="csr") - mesh.laplacian_matrix(grid)).tocsr()


def advection_matrix(grid, vel):
    """Conservative donor-cell matrix ``U`` with ``U c = div(upwind(u c))``."""
    nx, ny = grid.nx, grid.ny
    idx = np.arange(grid.size).reshape(nx, ny)
    rows, cols, vals = [], [], []

    def add_faces(a, left, right, h):
        # face velocity a carries flux from `left` to `right` when positive
        ap = np.maximum(a, 0.0).ravel() / h
        am = np.minimum(a, 0.0).ravel() / h
        l, r = left.ravel(), right.ravel()
        rows.extend([l, l, r, r])
        cols.extend([l, r, l, r])
        vals.extend([ap, am, -ap, -am])

    add_faces(vel.u[1:-1, :], idx[:-1, :], idx[1:, :], grid.hx)
    add_faces(vel.v[:, 1:-1], idx[:, :-1], idx[:, 1:], grid.hy)
    mat = sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(grid.size, grid.size)
    )
    return mat.tocsr()


def signal_operator(grid, vel=None):
    a = helmholtz_matrix(grid)
    if vel is not None and not vel.is_zero():
        a = a + advection_matrix(grid, vel)
    return a.tocsr()


def relative_residual(grid, c, n, vel=None):
    a = signal_operator(grid, vel)
    b = np.asarray(n, dtype=float).ravel()
    res = b - a @ np.asarray(c, dtype=float).ravel()
    nb = np.linalg.norm(b)
    return float(np.linalg.norm(res) / nb) if nb > 0 else float(np.linalg.norm(res))


def solve_signal(grid, n, vel=None, tol=1e-10, maxiter=400):
    """Solve for the signal concentration given density ``n`` and velocity.

    The mean of ``n`` is split off first, so constant data are reproduced
    exactly.  With ``vel`` absent or zero the cached sparse LU of
    ``I - lap`` is used directly.  Otherwise GMRES runs on the full nonsymmetric operator,
    preconditioned by that same factorisation, until the relative residual
    is at most ``tol``.
    """
    n = np.asarray(n, dtype=float)
    if n.shape != grid.shape:
        raise DomainError(f"density has shape {n.shape}, grid is {grid.shape}")
    lu = _helmholtz_lu(grid)
    # split off the mean: the operator maps constants to themselves
    m = float(n.mean())
    if vel is None or vel.is_zero():
        return m + lu.solve((n - m).ravel()).reshape(grid.shape)

    a = signal_operator(grid, vel)
    b = n.ravel()
    nb = np.linalg.norm(b)
    if nb == 0.0:
        return np.zeros(grid.shape)
    precond = spla.LinearOperator(a.shape, matvec=lu.solve, dtype=float)
    r0 = b - m * (a @ np.ones(grid.size))
    y = lu.solve(r0)
    history = [float(np.linalg.norm(r0 - a @ y) / nb)]
    for _ in range(max(1, maxiter // 20)):
        if history[-1] <= tol:
            break
        y, _info = spla.gmres(a, r0, x0=y, M=precond, rtol=0.0, atol=0.5 * tol * nb, restart=20, maxiter=1)
        history.append(float(np.linalg.norm(r0 - a @ y) / nb))
    if history[-1] > tol:
        raise SolverStall(f"signal solve stalled at residual {history[-1]:.3e} > {tol:.1e}", history)
    return m + y.reshape(grid.shape)


def helmholtz_solve(grid, w):
    """Solve ``-lap z + z = w`` for one field or a stack ``(k, nx, ny)``."""
    w = np.asarray(w, dtype=float)
    lu = _helmholtz_lu(grid)
    if w.ndim == 2:
        return lu.solve(w.ravel()).reshape(grid.shape)
    flat = w.reshape(w.shape[0], -1).T
    return lu.solve(np.ascontiguousarray(flat)).T.reshape(w.shape)


def weighted_gradient_faces(grid, c, sigma, power):
    """Face density ``|grad c|^2 / (sigma + c)**power`` (face-averaged c)."""
    gx, gy = mesh.gradient(grid, c)
    cx, cy = mesh.face_average(grid, c)
    bx, by = sigma + cx, sigma + cy
    if np.any(bx <= 0) or np.any(by <= 0):
        raise DomainError("sigma + c must be positive")
    return gx**2 / bx**power, gy**2 / by**power


def weighted_identity_residual(grid, c, n, sigma1, r):
    """Defect of the weighted signal identity on a fluid-free snapshot.

    Returns ``|r int |grad c|^2/(s+c)^(r+1) + int n/(s+c)^r - int c/(s+c)^r|``.
    """
    c = np.asarray(c, dtype=float)
    n = np.asarray(n, dtype=float)
    base = sigma1 + c
    if np.any(base <= 0):
        raise DomainError("sigma1 + c must be positive everywhere")
    grad_term = 0.0
    if r != 0:
        wx, wy = weighted_gradient_faces(grid, c, sigma1, r + 1.0)
        grad_term = r * mesh.face_integral(grid, wx, wy)
    weight = base ** (-r)
    return abs(grad_term + mesh.integrate(grid, n * weight) - mesh.integrate(grid, c * weight))


def source_lattice(grid, samples=8):
    """Cell indices of the sampled point sources: a sublattice plus corners."""
    ii = np.unique(np.floor((np.arange(samples) + 0.5) * grid.nx / samples).astype(int))
    jj = np.unique(np.floor((np.arange(samples) + 0.5) * grid.ny / samples).astype(int))
    cells = {(int(i), int(j)) for i in ii for j in jj}
    cells |= {(0, 0), (grid.nx - 1, 0), (0, grid.ny - 1), (grid.nx - 1, grid.ny - 1)}
    return sorted(cells)


def lower_bound_ratio(grid, w):
    """``min z / int w`` for ``-lap z + z = w`` (one source or a stack)."""
    z = helmholtz_solve(grid, w)
    w = np.asarray(w, dtype=float)
    if w.ndim == 2:
        return float(z.min() / mesh.integrate(grid, w))
    mass = w.reshape(w.shape[0], -1).sum(axis=1) * grid.cell_area
    return z.reshape(z.shape[0], -1).min(axis=1) / mass


def estimate_C_Omega(grid, samples=8):
    """Grid surrogate for the pointwise lower-bound constant.

    Minimum of ``min z / int w`` over unit-mass single-cell sources on the
    sampled lattice.  Any source gives an upper bound on the true constant.
    """
    if samples < 4:
        raise DomainError("estimate_C_Omega needs samples >= 4")
    cells = source_lattice(grid, samples)
    w = np.zeros((len(cells),) + grid.shape)
    for k, (i, j) in enumerate(cells):
        w[k, i, j] = 1.0 / grid.cell_area
    return float(np.min(lower_bound_ratio(grid, w)))
