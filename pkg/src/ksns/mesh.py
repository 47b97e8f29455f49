"""Uniform cell-centred grid on a rectangle with Neumann-aware operators.

Scalar fields are plain ``ndarray`` objects of shape ``(nx, ny)`` indexed
``[i, j]`` with ``x`` along the first axis.  Face fields are pairs
``(fx, fy)`` with shapes ``(nx + 1, ny)`` and ``(nx, ny + 1)``, the same
layout as the staggered velocity in :class:`MacVelocity`.
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.sparse as sp

from .errors import DomainError, UnderResolvedCutoff


@dataclass(frozen=True)
class Grid:
    """Uniform ``nx`` by ``ny`` cell grid on ``[0, lx] x [0, ly]``."""

    nx: int
    ny: int
    lx: float = 1.0
    ly: float = 1.0

    def __post_init__(self):
        if int(self.nx) != self.nx or int(self.ny) != self.ny:
            raise DomainError("cell counts must be integers")
        if self.nx < 8 or self.ny < 8:
            raise DomainError(f"grid needs at least 8 cells per direction, got {self.nx}x{self.ny}")
        if not (self.lx > 0 and self.ly > 0):
            raise DomainError("domain extents must be positive")
        object.__setattr__(self, "nx", int(self.nx))
        object.__setattr__(self, "ny", int(self.ny))
        object.__setattr__(self, "lx", float(self.lx))
        object.__setattr__(self, "ly", float(self.ly))

    @property
    def hx(self):
        return self.lx / self.nx

    @property
    def hy(self):
        return self.ly / self.ny

    @property
    def shape(self):
        return (self.nx, self.ny)

    @property
    def size(self):
        return self.nx * self.ny

    @property
    def cell_area(self):
        return self.hx * self.hy

    @property
    def area(self):
        return self.lx * self.ly

    @property
    def diam(self):
        return float(np.hypot(self.lx, self.ly))

    @property
    def xc(self):
        return (np.arange(self.nx) + 0.5) * self.hx

    @property
    def yc(self):
        return (np.arange(self.ny) + 0.5) * self.hy

    def centers(self):
        """Cell-centre coordinate arrays ``X, Y`` of shape ``(nx, ny)``."""
        return np.meshgrid(self.xc, self.yc, indexing="ij")

    def x_faces(self):
        """Coordinates of the x-normal faces, shape ``(nx + 1, ny)``."""
        return np.meshgrid(np.arange(self.nx + 1) * self.hx, self.yc, indexing="ij")

    def y_faces(self):
        """Coordinates of the y-normal faces, shape ``(nx, ny + 1)``."""
        return np.meshgrid(self.xc, np.arange(self.ny + 1) * self.hy, indexing="ij")

    def zeros(self):
        return np.zeros(self.shape)

    def sample(self, func):
        """Evaluate ``func(x, y)`` at the cell centres."""
        X, Y = self.centers()
        return np.broadcast_to(np.asarray(func(X, Y), dtype=float), self.shape).copy()


@dataclass
class MacVelocity:
    """Staggered velocity: ``u`` on x-faces, ``v`` on y-faces."""

    u: np.ndarray
    v: np.ndarray

    @classmethod
    def zeros(cls, grid):
        return cls(np.zeros((grid.nx + 1, grid.ny)), np.zeros((grid.nx, grid.ny + 1)))

    def copy(self):
        return MacVelocity(self.u.copy(), self.v.copy())

    def is_zero(self):
        return not (self.u.any() or self.v.any())

    def max_speed(self):
        return float(max(np.abs(self.u).max(initial=0.0), np.abs(self.v).max(initial=0.0)))

    def enforce_no_slip(self):
        self.u[0, :] = 0.0
        self.u[-1, :] = 0.0
        self.v[:, 0] = 0.0
        self.v[:, -1] = 0.0
        return self

    def cell_centered(self):
        return 0.5 * (self.u[1:, :] + self.u[:-1, :]), 0.5 * (self.v[:, 1:] + self.v[:, :-1])


def gradient(grid, f):
    """Face-centred differences of a cell field.

    Boundary faces get zero normal gradient, which is the ghost-cell
    reflection ``f[-1] = f[0]`` written out.
    """
    f = np.asarray(f, dtype=float)
    gx = np.zeros((grid.nx + 1, grid.ny))
    gy = np.zeros((grid.nx, grid.ny + 1))
    gx[1:-1, :] = (f[1:, :] - f[:-1, :]) / grid.hx
    gy[:, 1:-1] = (f[:, 1:] - f[:, :-1]) / grid.hy
    return gx, gy


def divergence(grid, wx, wy):
    """Cell-wise sum of face differences of a face field."""
    return (wx[1:, :] - wx[:-1, :]) / grid.hx + (wy[:, 1:] - wy[:, :-1]) / grid.hy


def laplacian_neumann(grid, f):
    """Five-point Laplacian with reflected ghosts (homogeneous Neumann)."""
    f = np.asarray(f, dtype=float)
    fp = np.pad(f, 1, mode="edge")
    return ((fp[2:, 1:-1] - f) - (f - fp[:-2, 1:-1])) / grid.hx**2 + (
        (fp[1:-1, 2:] - f) - (f - fp[1:-1, :-2])
    ) / grid.hy**2


def _neumann_1d(n, h):
    main = -2.0 * np.ones(n)
    main[0] = main[-1] = -1.0
    off = np.ones(n - 1)
    return sp.diags([off, main, off], [-1, 0, 1], format="csr") / h**2


@lru_cache(maxsize=16)
def laplacian_matrix(grid):
    """Sparse matrix of :func:`laplacian_neumann` acting on ``f.ravel()``."""
    ax = _neumann_1d(grid.nx, grid.hx)
    ay = _neumann_1d(grid.ny, grid.hy)
    mat = sp.kron(ax, sp.identity(grid.ny)) + sp.kron(sp.identity(grid.nx), ay)
    return mat.tocsr()


def discrete_mu1(grid):
    """Smallest positive eigenvalue of the discrete Neumann ``-laplacian``."""
    lam_x = 2.0 / grid.hx**2 * (1.0 - np.cos(np.pi / grid.nx))
    lam_y = 2.0 / grid.hy**2 * (1.0 - np.cos(np.pi / grid.ny))
    return float(min(lam_x, lam_y))


def face_average(grid, f):
    """Average a cell field onto faces; boundary faces copy the adjacent cell."""
    fp_x = np.pad(f, ((1, 1), (0, 0)), mode="edge")
    fp_y = np.pad(f, ((0, 0), (1, 1)), mode="edge")
    return 0.5 * (fp_x[1:, :] + fp_x[:-1, :]), 0.5 * (fp_y[:, 1:] + fp_y[:, :-1])


def cell_gradient(grid, f):
    """Central differences at cell centres with reflected ghosts."""
    fp = np.pad(np.asarray(f, dtype=float), 1, mode="edge")
    fx = (fp[2:, 1:-1] - fp[:-2, 1:-1]) / (2.0 * grid.hx)
    fy = (fp[1:-1, 2:] - fp[1:-1, :-2]) / (2.0 * grid.hy)
    return fx, fy


def hessian(grid, f):
    """Cell-centred second derivatives ``(fxx, fxy, fyy)``, Neumann ghosts."""
    f = np.asarray(f, dtype=float)
    fp = np.pad(f, 1, mode="edge")
    fxx = (fp[2:, 1:-1] - 2.0 * f + fp[:-2, 1:-1]) / grid.hx**2
    fyy = (fp[1:-1, 2:] - 2.0 * f + fp[1:-1, :-2]) / grid.hy**2
    fxy = (fp[2:, 2:] - fp[2:, :-2] - fp[:-2, 2:] + fp[:-2, :-2]) / (4.0 * grid.hx * grid.hy)
    return fxx, fxy, fyy


def integrate(grid, f):
    """Midpoint quadrature: cell sum times cell area."""
    return float(np.sum(f) * grid.cell_area)


def face_integral(grid, gx, gy):
    """Integral of a face-sampled density, each face owning one cell area."""
    return float((np.sum(gx) + np.sum(gy)) * grid.cell_area)


def grad_sq_integral(grid, f):
    """Discrete Dirichlet energy ``sum_faces |grad f|^2 * hx * hy``."""
    gx, gy = gradient(grid, f)
    return face_integral(grid, gx**2, gy**2)


def faces_to_cells(gx, gy):
    """Split each face value equally between its two neighbouring cells.

    Summing the result over cells reproduces the sum over faces when the
    boundary face values vanish.
    """
    return 0.5 * (gx[1:, :] + gx[:-1, :]) + 0.5 * (gy[:, 1:] + gy[:, :-1])


def _smootherstep(t):
    return t * t * t * (10.0 + t * (-15.0 + 6.0 * t))


def cutoff_phi(grid, q, delta):
    """Radial bump equal to 1 on ``B(q, delta/2)`` and 0 outside ``B(q, delta)``.

    The bridge is the quintic smootherstep in ``t = 2 (1 - |x - q| / delta)``,
    which is C^2 and vanishes cubically at the outer rim so that
    ``|grad phi| <= K phi**0.5`` with ``K`` of order ``1 / delta``.
    """
    if delta <= 2.0 * max(grid.hx, grid.hy):
        raise UnderResolvedCutoff(f"cutoff radius {delta} is not resolved by spacing {max(grid.hx, grid.hy)}")
    X, Y = grid.centers()
    s = np.hypot(X - q[0], Y - q[1]) / delta
    t = np.clip(2.0 * (1.0 - s), 0.0, 1.0)
    return _smootherstep(t)


def cutoff_phi_gradient(grid, q, delta):
    """Analytic gradient of :func:`cutoff_phi` at the cell centres."""
    X, Y = grid.centers()
    dx, dy = X - q[0], Y - q[1]
    r = np.hypot(dx, dy)
    t = np.clip(2.0 * (1.0 - r / delta), 0.0, 1.0)
    drho_dt = 30.0 * t * t * (1.0 - t) ** 2
    drho_dr = drho_dt * (-2.0 / delta)
    with np.errstate(invalid="ignore", divide="ignore"):
        gx = np.where(r > 0, drho_dr * dx / r, 0.0)
        gy = np.where(r > 0, drho_dr * dy / r, 0.0)
    return gx, gy


def sphere_area(d):
    """Surface area ``sigma_d`` of the unit sphere in ``R^d``."""
    from math import gamma, pi

    return 2.0 * pi ** (d / 2.0) / gamma(d / 2.0)


@dataclass(frozen=True)
class PsiProfile:
    """Radial samples of the log-log cutoff together with a quadrature rule.

    Nodes are Gauss-Legendre points on geometrically graded panels in
    ``tau = ln(-ln r)``; uniform spacing in ``tau`` is node density
    ``1 / (r |ln r|)`` in ``r``.  ``weights_tau`` integrate in ``tau``;
    ``weights_r`` integrate functions of ``r`` over ``(0, eta)``.
    """

    eta: float
    d: int
    tau: np.ndarray
    weights_tau: np.ndarray

    @property
    def tau_eta(self):
        return float(np.log(-np.log(self.eta)))

    @property
    def r(self):
        return np.exp(-np.exp(self.tau))

    @property
    def values(self):
        return self.tau - self.tau_eta

    @property
    def weights_r(self):
        return self.weights_tau * self.r * np.exp(self.tau)

    def dpsi_dr(self):
        with np.errstate(divide="ignore", over="ignore"):
            return -1.0 / (self.r * np.exp(self.tau))

    def l2_sq(self):
        """``||psi||^2`` in ``L^2(R^d)``."""
        s = self.values
        integrand = s * s * np.exp(self.tau - self.d * np.exp(self.tau))
        return sphere_area(self.d) * float(np.dot(self.weights_tau, integrand))

    def grad_sq(self):
        """``||grad psi||^2`` in ``L^2(R^d)``."""
        integrand = np.exp(-self.tau - (self.d - 2) * np.exp(self.tau))
        return sphere_area(self.d) * float(np.dot(self.weights_tau, integrand))

    def grad_of_square_sq(self):
        """``||grad psi^2||^2`` in ``L^2(R^d)``."""
        s = self.values
        integrand = 4.0 * s * s * np.exp(-self.tau - (self.d - 2) * np.exp(self.tau))
        return sphere_area(self.d) * float(np.dot(self.weights_tau, integrand))

    def h1_norm(self):
        return float(np.sqrt(self.l2_sq() + self.grad_sq()))


def psi_value(r, eta):
    """Closed form of the cutoff: ``ln(-ln r) - ln(-ln eta)`` inside ``B_eta``."""
    r = np.asarray(r, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        inside = np.log(-np.log(r)) - np.log(-np.log(eta))
    return np.where((r > 0) & (r < eta), inside, 0.0)


def cutoff_psi(eta, d=2, nodes_per_panel=16, span=64.0):
    """Sample the log-log cutoff on graded nodes with its quadrature rule."""
    if not (0.0 < eta < np.exp(-1.0)):
        raise DomainError(f"eta must lie in (0, 1/e), got {eta}")
    x, w = np.polynomial.legendre.leggauss(nodes_per_panel)
    edges = np.concatenate([[0.0], 2.0 ** np.arange(-10, 1, dtype=float), 2.0 ** np.arange(1, int(np.log2(span)) + 1)])
    taus, weights = [], []
    t0 = np.log(-np.log(eta))
    for a, b in zip(edges[:-1], edges[1:]):
        taus.append(t0 + 0.5 * (b - a) * x + 0.5 * (b + a))
        weights.append(0.5 * (b - a) * w)
    return PsiProfile(float(eta), int(d), np.concatenate(taus), np.concatenate(weights))
