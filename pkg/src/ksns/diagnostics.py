"""Monitored functionals, decay-rate fits and the stability threshold."""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import xlogy

from . import elliptic, fluid, mesh
from .errors import DomainError, FitError

BASE_COLUMNS = (
    "t",
    "mass",
    "n_l2",
    "n_l3",
    "n_linf",
    "entropy",
    "n_log_n1",
    "grad_log_n1_sq",
    "kinetic",
    "enstrophy",
    "c_min",
    "c_w1inf",
    "lyapunov",
    "ctilde_h1",
    "dev_n_l2",
    "dev_n_linf",
    "dev_c_w1inf",
)


def weighted_column(beta):
    return f"wgrad_b{beta:g}"


def columns(betas):
    return BASE_COLUMNS[:12] + tuple(weighted_column(b) for b in betas) + BASE_COLUMNS[12:]


@dataclass
class DiagnosticsRecord:
    t: float
    mass: float
    n_l2: float
    n_l3: float
    n_linf: float
    entropy: float
    n_log_n1: float
    grad_log_n1_sq: float
    kinetic: float
    enstrophy: float
    c_min: float
    c_w1inf: float
    lyapunov: float
    ctilde_h1: float
    dev_n_l2: float
    dev_n_linf: float
    dev_c_w1inf: float
    weighted: dict = field(default_factory=dict)

    def as_row(self):
        row = {name: getattr(self, name) for name in BASE_COLUMNS}
        out = {k: row[k] for k in BASE_COLUMNS[:12]}
        out.update({weighted_column(b): v for b, v in self.weighted.items()})
        out.update({k: row[k] for k in BASE_COLUMNS[12:]})
        return out


def w1inf_norm(grid, f):
    gx, gy = mesh.cell_gradient(grid, f)
    return float(np.abs(f).max() + np.hypot(gx, gy).max())


def weighted_gradient(grid, c, beta, s1):
    """``int |grad c|^2 / (s1 + c)**(beta + 1)`` on faces."""
    wx, wy = elliptic.weighted_gradient_faces(grid, c, s1, beta + 1.0)
    return mesh.face_integral(grid, wx, wy)


def weighted_gradient_density(grid, c, beta, s1):
    """Cell density whose cell sum times area equals :func:`weighted_gradient`."""
    wx, wy = elliptic.weighted_gradient_faces(grid, c, s1, beta + 1.0)
    return mesh.faces_to_cells(wx, wy)


def lyapunov(grid, c, nbar0):
    """``int (ct^2 + |grad ct|^2)`` with ``ct = c - nbar0``."""
    ct = np.asarray(c) - nbar0
    return mesh.integrate(grid, ct**2) + mesh.grad_sq_integral(grid, ct)


def record(state, config, nbar0=None):
    """All monitored functionals of a snapshot; never modifies ``state``."""
    grid = state.grid or config.grid
    n, c = state.n, state.c
    mass = mesh.integrate(grid, n)
    if nbar0 is None:
        nbar0 = mass / grid.area
    ln1 = np.log1p(n)
    npos = np.clip(n, 0.0, None)
    y = lyapunov(grid, c, nbar0)
    dev = n - nbar0
    return DiagnosticsRecord(
        t=float(state.t),
        mass=mass,
        n_l2=math.sqrt(mesh.integrate(grid, n**2)),
        n_l3=mesh.integrate(grid, np.abs(n) ** 3) ** (1.0 / 3.0),
        n_linf=float(np.abs(n).max()),
        entropy=mesh.integrate(grid, xlogy(npos, npos) + math.exp(-1.0)),
        n_log_n1=mesh.integrate(grid, n * ln1),
        grad_log_n1_sq=mesh.grad_sq_integral(grid, ln1),
        kinetic=fluid.kinetic_energy(grid, state.vel),
        enstrophy=fluid.enstrophy(grid, state.vel),
        c_min=float(c.min()),
        c_w1inf=w1inf_norm(grid, c),
        lyapunov=y,
        ctilde_h1=math.sqrt(y),
        dev_n_l2=math.sqrt(mesh.integrate(grid, dev**2)),
        dev_n_linf=float(np.abs(dev).max()),
        dev_c_w1inf=w1inf_norm(grid, c - nbar0),
        weighted={float(b): weighted_gradient(grid, c, b, config.s1) for b in config.betas},
    )


def _ball_mask(grid, q, delta):
    X, Y = grid.centers()
    return np.hypot(X - q[0], Y - q[1]) < delta


def localized_weighted_gradient(grid, c, q, delta, beta, s1):
    """Weighted gradient integral over the cells whose centres lie in ``B(q, delta)``."""
    if beta <= 1:
        raise DomainError("beta must exceed 1")
    dens = weighted_gradient_density(grid, c, beta, s1)
    return float(np.sum(dens[_ball_mask(grid, q, delta)]) * grid.cell_area)


def q_lattice(grid, m=8):
    """``(m + 1)^2`` points covering the closed rectangle, boundary included."""
    xs = np.linspace(0.0, grid.lx, m + 1)
    ys = np.linspace(0.0, grid.ly, m + 1)
    return [(float(x), float(y)) for x in xs for y in ys]


def concentration_modulus(grid, c_snapshots, deltas, beta, s1, lattice=8):
    """``delta -> sup over snapshots and q of the localized weighted gradient``."""
    qs = q_lattice(grid, lattice)
    X, Y = grid.centers()
    dens = [weighted_gradient_density(grid, c, beta, s1) for c in c_snapshots]
    out = []
    for delta in deltas:
        best = 0.0
        for qx, qy in qs:
            mask = np.hypot(X - qx, Y - qy) < delta
            for d in dens:
                best = max(best, float(np.sum(d[mask]) * grid.cell_area))
        out.append(best)
    return np.array(out)


@dataclass(frozen=True)
class DecayFit:
    lam: float
    r_squared: float
    intercept: float
    points: int


def decay_rate(t, y, window=0.5):
    """Least-squares slope of ``ln y`` over the trailing fraction ``window``."""
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    if not (0.0 < window <= 1.0):
        raise FitError("window must lie in (0, 1]")
    if t.size < 2:
        raise FitError("need at least two samples")
    t0 = t[-1] - window * (t[-1] - t[0])
    sel = t >= t0 - 1e-12 * max(1.0, abs(t[-1]))
    if sel.sum() < 2:
        sel = np.zeros_like(sel)
        sel[-2:] = True
    ts, ys = t[sel], y[sel]
    if np.any(~np.isfinite(ys)) or np.any(ys <= 0):
        raise FitError("nonpositive or non-finite values in the fit window")
    ly = np.log(ys)
    slope, intercept = np.polyfit(ts, ly, 1)
    resid = ly - (slope * ts + intercept)
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    ss_res = float(np.sum(resid**2))
    flat = np.ptp(ly) <= 1e-14 * max(1.0, float(np.abs(ly).max()))
    r2 = 1.0 if flat else 1.0 - ss_res / ss_tot
    lam = 0.0 if flat else -float(slope)
    return DecayFit(lam, r2, float(intercept), int(sel.sum()))


def mu1_rectangle(lx, ly):
    """First positive Neumann eigenvalue of ``-laplacian`` on the rectangle."""
    if not (lx > 0 and ly > 0):
        raise DomainError("extents must be positive")
    return (math.pi / max(lx, ly)) ** 2


HESSIAN_RATIO = (7.0 + 4.0 * math.sqrt(2.0)) / (9.0 + 4.0 * math.sqrt(2.0))


def s_star(gamma, mass, mu1, c_omega):
    """Threshold below which the isotropic fluid-free system stabilises.

    ``c_omega`` is the constant in ``sup 1/c <= c_omega / mass``, i.e. the
    reciprocal of the pointwise lower-bound constant; see
    :func:`c_omega_from_lower_bound`.
    """
    if gamma < 1:
        raise DomainError("the threshold is defined for gamma >= 1")
    if not (mass > 0 and mu1 > 0 and c_omega > 0):
        raise DomainError("mass, mu1 and c_omega must be positive")
    inv = 1.0 / mu1
    return (1.0 + inv) / (HESSIAN_RATIO / gamma + inv) * (mass / c_omega) ** (gamma - 1.0)


def c_omega_from_lower_bound(lower_bound_constant):
    """Convert ``z >= C int w`` into the ``sup 1/c <= C_Omega / mass`` form."""
    return 1.0 / lower_bound_constant


def _pair_ratios(pa, fa, pb, fb, theta, tb=True):
    dx = np.hypot(pa[:, None, 0] - pb[None, :, 0], pa[:, None, 1] - pb[None, :, 1])
    dt = np.abs(pa[:, None, 2] - pb[None, :, 2])
    den = dx**theta + dt ** (theta / 2.0)
    num = np.abs(fa[:, None] - fb[None, :])
    with np.errstate(invalid="ignore", divide="ignore"):
        r = np.where(den > 0, num / den, 0.0)
    return float(r.max(initial=0.0))


def holder_seminorm(grid, history, theta, max_pairs=100_000, seed=0, exhaustive_limit=32 * 32):
    """Discrete parabolic Hoelder seminorm over a space-time history.

    ``history`` is a sequence of ``(t, field)``.  Every pair is visited when
    the grid has at most ``exhaustive_limit`` cells; otherwise ``max_pairs``
    seeded random pairs are drawn, which gives a lower estimate.
    """
    if not (0.0 < theta < 1.0):
        raise DomainError("theta must lie in (0, 1)")
    history = list(history)
    if len(history) < 1:
        raise DomainError("need at least one snapshot")
    X, Y = grid.centers()
    pts = np.concatenate(
        [np.column_stack([X.ravel(), Y.ravel(), np.full(grid.size, float(t))]) for t, _ in history]
    )
    vals = np.concatenate([np.asarray(f, dtype=float).ravel() for _, f in history])
    total = vals.size
    if grid.size <= exhaustive_limit:
        best = 0.0
        chunk = max(1, 4_000_000 // total)
        for a in range(0, total, chunk):
            best = max(best, _pair_ratios(pts[a : a + chunk], vals[a : a + chunk], pts, vals, theta))
        return best
    rng = np.random.default_rng(seed)
    i = rng.integers(0, total, max_pairs)
    j = rng.integers(0, total, max_pairs)
    dx = np.hypot(pts[i, 0] - pts[j, 0], pts[i, 1] - pts[j, 1])
    dt = np.abs(pts[i, 2] - pts[j, 2])
    den = dx**theta + dt ** (theta / 2.0)
    ok = den > 0
    return float((np.abs(vals[i] - vals[j])[ok] / den[ok]).max(initial=0.0))


def spatial_holder_seminorm(grid, f, theta, **kwargs):
    """Hoelder seminorm of a single snapshot over pairs of cell centres."""
    return holder_seminorm(grid, [(0.0, f)], theta, **kwargs)
