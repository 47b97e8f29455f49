"""Simulation configuration, model state and initial data."""

import ast
import hashlib
import math
import re
from dataclasses import dataclass, field, fields, replace

import numpy as np

from . import elliptic, fluid, mesh
from .errors import DomainError, InvalidConfig, InvalidInitialData
from .sensitivity import VARIANTS, SensitivitySpec, _norm_variant

# dotted config key -> SimConfig attribute
CONFIG_KEYS = {
    "grid.nx": "nx",
    "grid.ny": "ny",
    "grid.lx": "lx",
    "grid.ly": "ly",
    "time.dt_max": "dt_max",
    "time.t_end": "t_end",
    "time.cfl": "cfl",
    "time.dt_min": "dt_min",
    "model.fluid": "fluid",
    "model.gamma": "gamma",
    "model.s0": "s0",
    "model.s1": "s1",
    "model.phi": "phi",
    "model.sensitivity.variant": "variant",
    "model.sensitivity.angle": "angle",
    "model.sensitivity.matrix": "matrix",
    "model.sensitivity.skew": "skew",
    "ic.n0": "n0",
    "ic.u0": "u0",
    "solver.linear_tol": "linear_tol",
    "output.every": "every",
    "output.snapshots": "snapshots",
    "output.binary": "binary",
    "output.betas": "betas",
    "output.figures": "figures",
    "seed": "seed",
}


@dataclass(frozen=True)
class SimConfig:
    nx: int = 64
    ny: int = 64
    lx: float = 1.0
    ly: float = 1.0
    dt_max: float = 1e-3
    t_end: float = 1.0
    cfl: float = 0.2
    dt_min: float = 1e-8
    fluid: bool = False
    gamma: float = 1.0
    s0: float = 1.0
    s1: float = 1.0
    variant: str = "isotropic"
    angle: float = 0.5 * math.pi
    matrix: tuple = ((-1.0, 0.0), (0.0, -1.0))
    skew: float = 0.0
    phi: str = "y"
    n0: str = "1 + 0.3*cos(pi*x/Lx)"
    u0: str = "0"
    linear_tol: float = 1e-10
    every: float = 0.01
    snapshots: int = 5
    binary: bool = False
    betas: tuple = (2.0,)
    figures: bool = True
    seed: int = 0

    @property
    def grid(self):
        return mesh.Grid(self.nx, self.ny, self.lx, self.ly)

    def sensitivity(self):
        return SensitivitySpec(
            variant=self.variant,
            s0=self.s0,
            s1=self.s1,
            gamma=self.gamma,
            angle=self.angle,
            matrix=tuple(tuple(float(v) for v in row) for row in self.matrix),
            skew=self.skew,
        )

    def with_overrides(self, overrides):
        """Copy with dotted-key overrides (``{"model.s0": 0.5}``)."""
        changes = {}
        for key, value in overrides.items():
            attr = CONFIG_KEYS.get(key, key if key in _ATTRS else None)
            if attr is None:
                raise InvalidConfig([f"unknown config key {key!r}"])
            changes[attr] = _coerce(attr, value)
        return replace(self, **changes)

    def to_mapping(self):
        """Flat dotted-key view, the inverse of :func:`config_from_mapping`."""
        out = {}
        for key, attr in CONFIG_KEYS.items():
            value = getattr(self, attr)
            if isinstance(value, tuple):
                value = [list(v) if isinstance(v, tuple) else v for v in value]
            out[key] = value
        return out


_ATTRS = {f.name: f for f in fields(SimConfig)}


def _coerce(attr, value):
    default = _ATTRS[attr].default
    if attr == "matrix":
        return tuple(tuple(float(v) for v in row) for row in value)
    if attr == "betas":
        if isinstance(value, (int, float)):
            value = [value]
        return tuple(float(v) for v in value)
    if isinstance(default, bool):
        if isinstance(value, str):
            return value.strip().lower() in ("1", "true", "yes", "on")
        return bool(value)
    if isinstance(default, int):
        return int(value)
    if isinstance(default, float):
        return float(value)
    return str(value)


def _flatten(mapping, prefix=""):
    for key, value in mapping.items():
        full = f"{prefix}{key}"
        if isinstance(value, dict):
            yield from _flatten(value, full + ".")
        else:
            yield full, value


def config_from_mapping(mapping):
    """Build a config from a nested (TOML-style) or flat dotted mapping."""
    changes, bad = {}, []
    for key, value in _flatten(mapping):
        attr = CONFIG_KEYS.get(key)
        if attr is None:
            bad.append(f"unknown config key {key!r}")
            continue
        try:
            changes[attr] = _coerce(attr, value)
        except (TypeError, ValueError) as exc:
            bad.append(f"{key}: {exc}")
    if bad:
        raise InvalidConfig(bad)
    return replace(SimConfig(), **changes)


def load_config(path):
    try:
        import tomllib
    except ModuleNotFoundError:  # python < 3.11
        import tomli as tomllib
    with open(path, "rb") as fh:
        return config_from_mapping(tomllib.load(fh))


# --- closed-form descriptors -------------------------------------------------

_SAFE_FUNCS = {
    name: getattr(np, name)
    for name in ("sin", "cos", "tan", "exp", "log", "sqrt", "tanh", "cosh", "sinh", "abs", "where", "minimum", "maximum")
}
_SAFE_NODES = (
    ast.Expression, ast.BinOp, ast.UnaryOp, ast.Call, ast.Name, ast.Load, ast.Constant,
    ast.Add, ast.Sub, ast.Mult, ast.Div, ast.Pow, ast.USub, ast.UAdd, ast.Mod,
    ast.Compare, ast.Lt, ast.Gt, ast.LtE, ast.GtE,
)
_GENERATOR = re.compile(r"^\s*(random|peak)\s*(?:\((.*)\))?\s*$")


def _check_expr(text, names):
    tree = ast.parse(text, mode="eval")
    for node in ast.walk(tree):
        if not isinstance(node, _SAFE_NODES):
            raise DomainError(f"disallowed syntax {type(node).__name__} in {text!r}")
        if isinstance(node, ast.Name) and node.id not in names:
            raise DomainError(f"unknown name {node.id!r} in {text!r}")
        if isinstance(node, ast.Call) and not (isinstance(node.func, ast.Name) and node.func.id in _SAFE_FUNCS):
            raise DomainError(f"only elementary functions may be called in {text!r}")
    return compile(tree, "<expr>", "eval")


def eval_expression(text, X, Y, grid):
    """Evaluate a closed-form expression in ``x, y`` on coordinate arrays."""
    names = dict(_SAFE_FUNCS, x=X, y=Y, pi=math.pi, e=math.e, Lx=grid.lx, Ly=grid.ly)
    code = _check_expr(str(text), names)
    value = eval(code, {"__builtins__": {}}, names)  # noqa: S307 - AST-whitelisted
    return np.broadcast_to(np.asarray(value, dtype=float), X.shape).copy()


def _parse_kwargs(text):
    if not text or not text.strip():
        return {}
    call = ast.parse(f"f({text})", mode="eval").body
    return {kw.arg: ast.literal_eval(kw.value) for kw in call.keywords}


def random_smooth(grid, rng, modes=4, amplitude=1.0):
    """Random Neumann-compatible cosine series with unit max amplitude scaling."""
    X, Y = grid.centers()
    out = np.zeros(grid.shape)
    for k in range(modes + 1):
        for m in range(modes + 1):
            if k == m == 0:
                continue
            coef = rng.normal() / (1.0 + k * k + m * m)
            out += coef * np.cos(k * np.pi * X / grid.lx) * np.cos(m * np.pi * Y / grid.ly)
    peak = np.abs(out).max()
    return amplitude * out / peak if peak > 0 else out


def peaked_density(grid, ratio=20.0, x0=None, y0=None, width=0.05, background=1.0):
    """Gaussian bump over a constant background with ``max/mean = ratio``."""
    x0 = 0.5 * grid.lx if x0 is None else x0
    y0 = 0.5 * grid.ly if y0 is None else y0
    X, Y = grid.centers()
    g = np.exp(-((X - x0) ** 2 + (Y - y0) ** 2) / (2.0 * width**2))
    gmax, gmean = g.max(), g.mean()
    denom = background * (gmax - ratio * gmean)
    if denom <= 0:
        raise DomainError(f"peak width {width} too large for max/mean ratio {ratio}")
    amp = (ratio - 1.0) * background / denom
    return background * (1.0 + amp * g)


def sample_n0(config, grid=None):
    grid = grid or config.grid
    m = _GENERATOR.match(str(config.n0))
    if m:
        kind, args = m.group(1), _parse_kwargs(m.group(2))
        if kind == "random":
            rng = np.random.default_rng(args.pop("seed", config.seed))
            amp = float(args.pop("amplitude", 0.5))
            base = float(args.pop("mean", 1.0))
            return base * (1.0 + amp * random_smooth(grid, rng, **args))
        return peaked_density(grid, **args)
    return eval_expression(config.n0, *grid.centers(), grid)


def sample_u0(config, grid=None):
    """Face samples of the initial velocity (before projection)."""
    grid = grid or config.grid
    vel = mesh.MacVelocity.zeros(grid)
    text = str(config.u0).strip()
    m = _GENERATOR.match(text)
    if m and m.group(1) == "random":
        args = _parse_kwargs(m.group(2))
        rng = np.random.default_rng(args.pop("seed", config.seed + 7919))
        amp = float(args.pop("amplitude", 0.1))
        vel.u[1:-1, :] = amp * rng.standard_normal((grid.nx - 1, grid.ny))
        vel.v[:, 1:-1] = amp * rng.standard_normal((grid.nx, grid.ny - 1))
        return vel
    if text in ("", "0", "0.0"):
        return vel
    parts = [p.strip() for p in text.split(";")]
    if len(parts) != 2:
        raise DomainError("ic.u0 must be '0', 'random(...)' or 'expr_u; expr_v'")
    Xu, Yu = grid.x_faces()
    Xv, Yv = grid.y_faces()
    vel.u[:] = eval_expression(parts[0], Xu, Yu, grid)
    vel.v[:] = eval_expression(parts[1], Xv, Yv, grid)
    return vel.enforce_no_slip()


def sample_phi(config, grid=None):
    grid = grid or config.grid
    return eval_expression(config.phi, *grid.centers(), grid)


# --- validation ----------------------------------------------------------------


def validate(config):
    """Every violated requirement, as human-readable messages."""
    out = []
    if int(config.nx) < 8 or int(config.ny) < 8:
        out.append("grid.nx and grid.ny must be >= 8")
    if not (config.lx > 0 and config.ly > 0):
        out.append("grid.lx and grid.ly must be positive")
    if not config.dt_max > 0:
        out.append("time.dt_max must be positive")
    if not config.t_end > 0:
        out.append("time.t_end must be positive")
    if not (0.0 < config.cfl < 1.0):
        out.append(f"time.cfl must lie in (0, 1), got {config.cfl}")
    if not (0.0 < config.dt_min <= config.dt_max if config.dt_max > 0 else True):
        out.append("time.dt_min must lie in (0, dt_max]")
    if config.fluid:
        if not (config.gamma > 0.5 and config.s1 > 0):
            out.append(
                f"fluid-coupled regime requires gamma > 1/2 and s1 > 0 (got gamma={config.gamma}, s1={config.s1})"
            )
    else:
        if not config.gamma > 0:
            out.append(f"fluid-free regime requires gamma > 0 (got {config.gamma})")
        if config.s1 < 0:
            out.append(f"s1 must be >= 0 (got {config.s1})")
    if config.s0 < 0:
        out.append("model.s0 must be non-negative")
    try:
        variant = _norm_variant(config.variant)
        if variant == "custom":
            out.append("custom sensitivities cannot be configured from a file")
    except DomainError:
        out.append(f"model.sensitivity.variant must be one of {VARIANTS}")
    else:
        try:
            config.sensitivity()
        except DomainError as exc:
            out.append(f"model.sensitivity: {exc}")
    if not (0.0 < config.linear_tol < 1e-2):
        out.append("solver.linear_tol must lie in (0, 1e-2)")
    if config.every < 0:
        out.append("output.every must be >= 0")
    if any(b <= 1 for b in config.betas):
        out.append("output.betas entries must exceed 1")
    if not out:
        grid = config.grid
        try:
            n0 = sample_n0(config, grid)
            if not np.all(np.isfinite(n0)):
                out.append("ic.n0 is not finite")
            elif np.clip(n0, 0.0, None).sum() <= 0:
                out.append("ic.n0 must not vanish identically")
        except Exception as exc:  # noqa: BLE001 - report any descriptor failure
            out.append(f"ic.n0: {exc}")
        for key, fn in (("ic.u0", sample_u0), ("model.phi", sample_phi)):
            try:
                fn(config, grid)
            except Exception as exc:  # noqa: BLE001
                out.append(f"{key}: {exc}")
    return out


# --- state ---------------------------------------------------------------------


@dataclass
class State:
    t: float
    n: np.ndarray
    c: np.ndarray
    vel: mesh.MacVelocity
    p: np.ndarray
    grid: mesh.Grid = field(repr=False, default=None)

    def copy(self):
        return State(self.t, self.n.copy(), self.c.copy(), self.vel.copy(), self.p.copy(), self.grid)

    def digest(self):
        h = hashlib.sha256()
        h.update(np.float64(self.t).tobytes())
        for arr in (self.n, self.c, self.vel.u, self.vel.v, self.p):
            h.update(np.ascontiguousarray(arr).tobytes())
        return h.hexdigest()


def initialize(config):
    """Sample initial data, project ``u0`` and solve for the initial signal."""
    problems = validate(config)
    if problems:
        raise InvalidConfig(problems)
    grid = config.grid
    n0 = np.clip(sample_n0(config, grid), 0.0, None)
    if not n0.any():
        raise InvalidInitialData("initial density vanishes identically")
    if config.fluid:
        vel = fluid.project(grid, sample_u0(config, grid), tol=config.linear_tol)
    else:
        vel = mesh.MacVelocity.zeros(grid)
    c = elliptic.solve_signal(grid, n0, vel, tol=config.linear_tol)
    return State(0.0, n0, c, vel, np.zeros(grid.shape), grid)
