"""Tensor-valued chemotactic sensitivities with signal-power decay.

Every closed-form family is written as ``decay(c) * M`` with
``decay(c) = s0 / (s1 + c)**gamma`` and a constant matrix ``M`` whose
spectral norm is at most one, so the decay bound holds by construction.
"""

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import DomainError, SingularSignal

VARIANTS = ("isotropic", "rotational", "negative_semidefinite", "custom")
_ALIASES = {
    "isotropic": "isotropic",
    "rotational": "rotational",
    "negativesemidefinite": "negative_semidefinite",
    "negative_semidefinite": "negative_semidefinite",
    "nsd": "negative_semidefinite",
    "custom": "custom",
}

_J = np.array([[0.0, -1.0], [1.0, 0.0]])


def _norm_variant(name):
    key = str(name).strip().lower().replace("-", "_")
    key = _ALIASES.get(key, _ALIASES.get(key.replace("_", ""), None))
    if key is None:
        raise DomainError(f"unknown sensitivity variant {name!r}; expected one of {VARIANTS}")
    return key


@dataclass(frozen=True)
class SensitivitySpec:
    """Parametrised sensitivity family.

    ``angle`` (rotational) gives ``M = cos(a) I + sin(a) J`` with ``J`` the
    quarter turn; ``a = pi/2`` is the purely antisymmetric case.
    ``matrix`` and ``skew`` (negative_semidefinite) give
    ``M = matrix + skew * J`` with ``matrix`` symmetric and negative
    semi-definite.  ``func(x, y, n, c)`` (custom) returns an array of shape
    ``(..., 2, 2)``; its decay bound is checked by sampling only.
    """

    variant: str = "isotropic"
    s0: float = 1.0
    s1: float = 0.0
    gamma: float = 1.0
    angle: float = 0.5 * np.pi
    matrix: tuple = ((-1.0, 0.0), (0.0, -1.0))
    skew: float = 0.0
    func: Optional[Callable] = field(default=None, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "variant", _norm_variant(self.variant))
        if self.s0 < 0 or self.s1 < 0 or self.gamma < 0:
            raise DomainError("s0, s1 and gamma must be non-negative")
        if self.variant == "custom" and self.func is None:
            raise DomainError("custom sensitivity needs a func(x, y, n, c)")
        if self.variant == "negative_semidefinite":
            m = np.asarray(self.matrix, dtype=float)
            if m.shape != (2, 2) or not np.allclose(m, m.T, rtol=0, atol=1e-14):
                raise DomainError("negative_semidefinite matrix must be a symmetric 2x2")
            if np.linalg.eigvalsh(m).max() > 1e-14:
                raise DomainError("negative_semidefinite matrix has a positive eigenvalue")
            if np.linalg.norm(m + self.skew * _J, 2) > 1.0 + 1e-12:
                raise DomainError("matrix + skew*J must have spectral norm <= 1")

    def base_matrix(self):
        """The constant factor ``M`` (not defined for custom)."""
        if self.variant == "isotropic":
            return np.eye(2)
        if self.variant == "rotational":
            cs, sn = np.cos(self.angle), np.sin(self.angle)
            # snap round-off so angle = pi/2 is exactly antisymmetric
            cs = 0.0 if abs(cs) < 1e-15 else cs
            sn = 0.0 if abs(sn) < 1e-15 else sn
            return cs * np.eye(2) + sn * _J
        if self.variant == "negative_semidefinite":
            return np.asarray(self.matrix, dtype=float) + self.skew * _J
        raise DomainError("custom sensitivities have no constant base matrix")

    def decay(self, c):
        """``s0 / (s1 + c)**gamma``; raises on a nonpositive base."""
        c = np.asarray(c, dtype=float)
        base = self.s1 + c
        if np.any(base <= 0):
            raise SingularSignal("sensitivity evaluated at s1 + c <= 0")
        return self.s0 / base**self.gamma

    def components(self, x, y, n, c):
        """Broadcast tensor entries ``(S11, S12, S21, S22)``."""
        if self.variant == "custom":
            if np.any(self.s1 + np.asarray(c) <= 0):
                raise SingularSignal("sensitivity evaluated at s1 + c <= 0")
            t = np.asarray(self.func(x, y, n, c), dtype=float)
            return t[..., 0, 0], t[..., 0, 1], t[..., 1, 0], t[..., 1, 1]
        f = self.decay(c)
        m = self.base_matrix()
        return f * m[0, 0], f * m[0, 1], f * m[1, 0], f * m[1, 1]

    def eval(self, x, n, c):
        """The 2x2 tensor at a single point ``x = (x1, x2)``."""
        s11, s12, s21, s22 = self.components(x[0], x[1], n, c)
        return np.array([[s11, s12], [s21, s22]], dtype=float)

    @property
    def is_zero(self):
        return self.s0 == 0.0 and self.variant != "custom"


def evaluate(spec, x, n, c):
    """Function form of :meth:`SensitivitySpec.eval`."""
    return spec.eval(x, n, c)


@dataclass(frozen=True)
class StructureReport:
    decay_ok: bool
    neg_semidef: bool
    isotropic_form: bool
    max_norm_ratio: float
    max_frobenius_ratio: float


def _sample_points(rng, samples, bounds):
    (x0, x1), (y0, y1) = bounds
    x = rng.uniform(x0, x1, samples)
    y = rng.uniform(y0, y1, samples)
    n = rng.uniform(0.0, 10.0, samples)
    c = np.exp(rng.uniform(np.log(1e-3), np.log(1e3), samples))
    return x, y, n, c


def sample_tensors(spec, samples=10_000, seed=0, bounds=((0.0, 1.0), (0.0, 1.0))):
    """Evaluate ``spec`` on random ``(x, n, c)``; returns ``(tensors, bounds)``."""
    rng = np.random.default_rng(seed)
    x, y, n, c = _sample_points(rng, samples, bounds)
    s11, s12, s21, s22 = (np.broadcast_to(a, x.shape) for a in spec.components(x, y, n, c))
    t = np.stack([np.stack([s11, s12], -1), np.stack([s21, s22], -1)], -2)
    bound = spec.s0 / (spec.s1 + c) ** spec.gamma
    return t, bound


def sym_part_nsd(t, tol=1e-14):
    """Negative semi-definiteness of the symmetric part, via trace and det."""
    t = np.asarray(t, dtype=float)
    sym = 0.5 * (t + np.swapaxes(t, -1, -2))
    tr = sym[..., 0, 0] + sym[..., 1, 1]
    det = sym[..., 0, 0] * sym[..., 1, 1] - sym[..., 0, 1] * sym[..., 1, 0]
    scale = np.maximum(np.abs(sym).max(axis=(-2, -1)), 1e-300)
    return np.logical_and(tr <= tol * scale, det >= -tol * scale**2)


def classify(spec, samples=10_000, seed=0, bounds=((0.0, 1.0), (0.0, 1.0))):
    """Decide the structural hypotheses used by the stabilisation results."""
    t, bound = sample_tensors(spec, samples, seed, bounds)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(bound > 0, np.linalg.norm(t, 2, axis=(-2, -1)) / bound, 0.0)
        frob = np.where(bound > 0, np.linalg.norm(t, "fro", axis=(-2, -1)) / bound, 0.0)
    if spec.variant == "custom":
        decay_ok = bool(np.all(ratio <= 1.0 + 1e-12))
        nsd = bool(np.all(sym_part_nsd(t)))
        iso = False
    else:
        m = spec.base_matrix()
        decay_ok = bool(np.linalg.norm(m, 2) <= 1.0 + 1e-14)
        nsd = bool(sym_part_nsd(m) or spec.s0 == 0.0)
        iso = spec.variant == "isotropic" and spec.s1 == 0.0
    return StructureReport(decay_ok, nsd, iso, float(ratio.max(initial=0.0)), float(frob.max(initial=0.0)))
