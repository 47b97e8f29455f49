"""Numerical checks of the functional inequalities behind the estimates.

The constants in these inequalities are existential, so the checks report
the smallest constant that makes each instance hold and count violations
against a fixed trial constant over seeded random ensembles.
"""

import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy.optimize import brentq
from scipy.special import gamma as gamma_fn
from scipy.special import gammaincc, xlogy

from . import diagnostics, mesh
from .errors import DomainError
from .fields import random_smooth


@dataclass(frozen=True)
class CheckResult:
    lhs: float
    rhs: float
    satisfied: bool
    minimal_C: float = float("nan")

    @property
    def slack(self):
        return self.rhs - self.lhs


def check_trudinger_moser(grid, f, g, a, lam, C):
    """Trudinger-Moser type bound for ``int f |g|``.

    The right side is affine in ``C``; ``minimal_C`` is the least
    non-negative ``C`` that makes it dominate (one joint constant for both
    ``C`` terms).
    """
    f = np.asarray(f, dtype=float)
    g = np.asarray(g, dtype=float)
    if np.any(f < 0) or not f.any():
        raise DomainError("f must be non-negative and not identically zero")
    mass = mesh.integrate(grid, f)
    fbar = mass / grid.area
    lhs = mesh.integrate(grid, f * np.abs(g))
    entropy = mesh.integrate(grid, xlogy(f, f) - f * math.log(fbar))
    fixed = entropy / a + (1.0 + lam) * a / (8.0 * math.pi) * mass * mesh.grad_sq_integral(grid, g)
    per_c = a * mass * mesh.integrate(grid, np.abs(g)) ** 2 + mass / a
    rhs = fixed + C * per_c
    cmin = max(0.0, (lhs - fixed) / per_c)
    return CheckResult(lhs, rhs, bool(lhs <= rhs), cmin)


def _lnimpr_terms(grid, f, p, s, eps):
    gx, gy = mesh.gradient(grid, f)
    fx, fy = mesh.face_average(grid, f)
    with np.errstate(divide="ignore", invalid="ignore"):
        wx = np.where(gx != 0, fx ** (p - 2.0) * gx**2, 0.0)
        wy = np.where(gy != 0, fy ** (p - 2.0) * gy**2, 0.0)
    grad_term = mesh.face_integral(grid, wx, wy)
    entropy = mesh.integrate(grid, xlogy(f, f) + math.exp(-1.0))
    coef = (p + 1.0) ** 2 / math.log(s) * entropy * grad_term
    q = 0.5 * eps * (p + 1.0) / (1.0 + eps)
    low = mesh.integrate(grid, f**q) ** (2.0 * (1.0 + eps) / eps)
    const = 6.0 * s ** (p + 1.0) * grid.area
    return coef, low, const


def check_lnimpr(grid, f, p, s, eps, C):
    """Bound of ``int f^(p+1)`` by entropy times a weighted Dirichlet energy."""
    f = np.asarray(f, dtype=float)
    if np.any(f < 0):
        raise DomainError("f must be non-negative")
    if p < 1 or s <= 1 or eps <= 0:
        raise DomainError("need p >= 1, s > 1, eps > 0")
    lhs = mesh.integrate(grid, f ** (p + 1.0))
    coef, low, const = _lnimpr_terms(grid, f, p, s, eps)

    def rhs_of(cc):
        return cc * coef + (4.0 * cc) ** (1.0 + 0.5 * eps) * low + const

    rhs = rhs_of(C)
    if lhs <= const:
        cmin = 0.0
    else:
        hi = 1.0
        while rhs_of(hi) < lhs:
            hi *= 2.0
        cmin = brentq(lambda cc: rhs_of(cc) - lhs, 0.0, hi, xtol=1e-14, rtol=1e-12)
    return CheckResult(lhs, rhs, bool(lhs <= rhs), float(cmin))


@dataclass(frozen=True)
class InterpolationResult:
    pointwise_ok: bool
    bound_value: float
    two_regime_bound: float
    seminorm: float
    lp_norm: float
    r_star: float
    r_used: float
    min_slack: float
    linf: float


def check_interpolation(grid, f, theta, p, cone_constant=4.0 / math.pi, d=2):
    """Pointwise Hoelder/L^p interpolation bound at every cell centre.

    Uses ``|f(x)| <= [f] r^theta + C13 r^(-d/p) ||f||_p`` at the optimising
    radius, clipped to ``R0 = min(lx, ly) / 2``, with
    ``C13 = cone_constant**(1/p)``.  For the quarter-disc cone of a
    rectangle ``cone_constant = 4/pi``; up to ``R0`` every cell centre has a
    full lattice quarter disc inside the grid, so the discrete bound holds.
    """
    f = np.asarray(f, dtype=float)
    if not (0.0 < theta < 1.0) or p < 1:
        raise DomainError("need theta in (0, 1) and p >= 1")
    linf = float(np.abs(f).max())
    lp = mesh.integrate(grid, np.abs(f) ** p) ** (1.0 / p)
    limit = max(64 * 64, grid.size)
    semi = diagnostics.spatial_holder_seminorm(grid, f, theta, exhaustive_limit=limit)
    c13 = cone_constant ** (1.0 / p)
    r0 = 0.5 * min(grid.lx, grid.ly)
    if semi == 0.0:
        bound = grid.area ** (-1.0 / p) * lp
        ok = linf <= bound * (1.0 + 1e-12)
        return InterpolationResult(bool(ok), bound, bound, 0.0, lp, math.inf, r0, bound - linf, linf)
    r_star = (d * c13 * lp / (p * theta * semi)) ** (p / (p * theta + d))
    r = min(r_star, r0)
    bound = semi * r**theta + c13 * r ** (-d / p) * lp
    if r_star <= r0:
        two = bound
    else:
        two = (d * c13 / (p * theta) + c13) * r0 ** (-d / p) * lp
    slack = float(np.min(bound - np.abs(f)))
    ok = slack >= -1e-12 * max(1.0, bound)
    return InterpolationResult(bool(ok), float(bound), float(two), semi, lp, r_star, r, slack, linf)


@dataclass(frozen=True)
class PoincareResult:
    ratio1: float
    ratio2: float
    satisfied: bool


def check_poincare(grid, f, discrete=True, tol=1e-8):
    """Both Poincare ratios for a mean-zero field (ideally at most one)."""
    f = np.asarray(f, dtype=float)
    mean = mesh.integrate(grid, f) / grid.area
    if abs(mean) > 1e-12 * max(1.0, float(np.abs(f).max())):
        raise DomainError(f"field must have zero mean, got {mean:.3e}")
    mu = mesh.discrete_mu1(grid) if discrete else diagnostics.mu1_rectangle(grid.lx, grid.ly)
    l2 = mesh.integrate(grid, f**2)
    dirichlet = mesh.grad_sq_integral(grid, f)
    lap = mesh.integrate(grid, mesh.laplacian_neumann(grid, f) ** 2)
    r1 = l2 * mu / dirichlet if dirichlet > 0 else 0.0
    r2 = dirichlet * mu / lap if lap > 0 else 0.0
    return PoincareResult(float(r1), float(r2), bool(r1 <= 1 + tol and r2 <= 1 + tol))


def crucial_constants(k, d=2):
    """Constant of the first Hessian inequality for the given ``k``."""
    if k == 4:
        return (2.0 + math.sqrt(d)) ** 2
    return ((2.0 + math.sqrt(d)) / (4.0 - k)) ** 2


@dataclass(frozen=True)
class CrucialResult:
    lhs1: float
    rhs1: float
    lhs2: float
    rhs2: float
    satisfied: bool


def _frob_sq(h):
    fxx, fxy, fyy = h
    return fxx**2 + 2.0 * fxy**2 + fyy**2


def check_crucial(grid, f, gamma, k, delta, d=2):
    """Hessian inequalities with ``H(f) = f**gamma`` and ``Theta = int_1^f 1/H``."""
    f = np.asarray(f, dtype=float)
    if f.min() <= 0:
        raise DomainError("f must be positive")
    if delta <= 0:
        raise DomainError("delta must be positive")
    H = f**gamma
    dH = gamma * f ** (gamma - 1.0)
    theta_f = np.log(f) if gamma == 1 else (f ** (1.0 - gamma) - 1.0) / (1.0 - gamma)
    gx, gy = mesh.cell_gradient(grid, f)
    grad4 = (gx**2 + gy**2) ** 2
    hess_theta = _frob_sq(mesh.hessian(grid, theta_f))
    hess_f = _frob_sq(mesh.hessian(grid, f))

    i4 = mesh.integrate(grid, dH / H**k * grad4)
    j = mesh.integrate(grid, H ** (4.0 - k) / dH * hess_theta)
    if k == 4:
        rhs1 = crucial_constants(k, d) * mesh.integrate(grid, np.log(H) ** 2 / dH * hess_theta)
    else:
        rhs1 = crucial_constants(k, d) * j
    lhs2 = mesh.integrate(grid, H ** (2.0 - k) / dH * hess_f)
    rhs2 = (delta + 1.0) / delta * i4 + (1.0 + delta) * j
    return CrucialResult(i4, rhs1, lhs2, rhs2, bool(i4 <= rhs1 and lhs2 <= rhs2))


def psi_eta_norm_table(etas, d=2):
    """Rows ``{eta, H1_norm, grad_sq_norm, grad_sq_bound}`` for the log-log cutoff."""
    rows = []
    for eta in etas:
        prof = mesh.cutoff_psi(eta, d=d)
        tau_eta = prof.tau_eta
        upper = 4.0 * mesh.sphere_area(d) * gamma_fn(3.0) * gammaincc(3.0, tau_eta)
        rows.append(
            {
                "eta": float(eta),
                "H1_norm": prof.h1_norm(),
                "grad_sq_norm": math.sqrt(prof.grad_of_square_sq()),
                "grad_sq_bound": math.sqrt(upper),
            }
        )
    return rows


# --- seeded ensembles ----------------------------------------------------------

TRIAL_C = 1.0
ENSEMBLE_GRID = mesh.Grid(32, 32)


def _rng(seed, trial):
    return np.random.default_rng([int(seed), int(trial)])


def _trial_tm(grid, rng):
    f = 1.0 + 0.9 * random_smooth(grid, rng)
    g = 2.0 * random_smooth(grid, rng) + rng.normal()
    res = check_trudinger_moser(grid, f, g, a=1.0, lam=2.0, C=TRIAL_C)
    return res.satisfied, res.slack, {"lhs": res.lhs, "rhs": res.rhs, "minimal_C": res.minimal_C}


def _trial_lnimpr(grid, rng):
    f = np.exp(2.0 * random_smooth(grid, rng))
    res = check_lnimpr(grid, f, p=3.0, s=2.0, eps=1.0, C=TRIAL_C)
    return res.satisfied, res.slack, {"lhs": res.lhs, "rhs": res.rhs, "minimal_C": res.minimal_C}


def _trial_interp(grid, rng):
    f = random_smooth(grid, rng) + rng.normal()
    res = check_interpolation(grid, f, theta=0.5, p=2.0)
    return res.pointwise_ok, res.min_slack, {"seminorm": res.seminorm, "lp_norm": res.lp_norm, "bound": res.bound_value}


def _trial_poincare(grid, rng):
    f = random_smooth(grid, rng, modes=8) + 0.1 * rng.standard_normal(grid.shape)
    f -= f.mean()
    res = check_poincare(grid, f)
    return res.satisfied, 1.0 - max(res.ratio1, res.ratio2), {"ratio1": res.ratio1, "ratio2": res.ratio2}


def _trial_crucial(grid, rng):
    f = 1.0 + 0.5 * random_smooth(grid, rng)
    gam = float(rng.choice([1.0, 1.5, 2.0]))
    delta = (2.0 + math.sqrt(2.0)) / 2.0
    res = check_crucial(grid, f, gamma=gam, k=2.0, delta=delta)
    slack = min(res.rhs1 - res.lhs1, res.rhs2 - res.lhs2)
    return res.satisfied, slack, {"gamma": gam, "lhs1": res.lhs1, "rhs1": res.rhs1, "lhs2": res.lhs2, "rhs2": res.rhs2}


CHECKS = {
    "trudinger_moser": _trial_tm,
    "lnimpr": _trial_lnimpr,
    "interpolation": _trial_interp,
    "poincare": _trial_poincare,
    "crucial": _trial_crucial,
}


def run_ensemble(name, trials=100, seed=0, grid=ENSEMBLE_GRID):
    """Run one check over ``trials`` seeded random fields.

    Returns ``(rows, summary)``; each trial ``i`` draws from
    ``default_rng([seed, i])`` so members are reproducible individually.
    """
    fn = CHECKS[name]
    rows = []
    for i in range(trials):
        ok, slack, extra = fn(grid, _rng(seed, i))
        rows.append(dict({"trial": i, "satisfied": bool(ok), "slack": float(slack)}, **extra))
    slacks = [r["slack"] for r in rows]
    summary = {
        "check": name,
        "trials": trials,
        "violations": sum(not r["satisfied"] for r in rows),
        "min_slack": float(min(slacks)),
        "max_slack": float(max(slacks)),
    }
    if rows and "minimal_C" in rows[0]:
        summary["max_minimal_C"] = float(max(r["minimal_C"] for r in rows))
        summary["trial_C"] = TRIAL_C
    return rows, summary


def psi_summary(etas=(1e-2, 1e-3, 1e-4)):
    rows = psi_eta_norm_table(etas)
    h1 = [r["H1_norm"] for r in rows]
    g2 = [r["grad_sq_norm"] for r in rows]
    decreasing = all(a > b for a, b in zip(h1, h1[1:])) and all(a > b for a, b in zip(g2, g2[1:]))
    bounded = all(r["grad_sq_norm"] <= r["grad_sq_bound"] * (1 + 1e-12) for r in rows)
    return rows, {"check": "psi_eta", "trials": len(rows), "violations": int(not decreasing) + int(not bounded),
                  "strictly_decreasing": decreasing, "within_gamma_bound": bounded}


def as_dict(result):
    return asdict(result)
