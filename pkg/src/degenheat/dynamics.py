"""Mild-solution integrator for u_t - div(omega grad u) = sum_i h_i(t) f_i(u).

The march is IMEX: diffusion implicit (backward Euler), sources explicit with
the time profile integrated exactly over each step, so profiles t^r with
r in (-1, 0) lose no accuracy on the first step.  Step size adapts on the
relative solution change; blow-up is declared when the sup norm crosses a
threshold or the step collapses under super-linear growth.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, NumericError
from .grids import Field, GridSpec
from .semigroup import apply_semigroup, build_operator
from .weight import WeightSpec

_TINY = 1e-300


@dataclass(frozen=True)
class TimeProfile:
    """Time dependence of a source term: t^exponent, a constant, or zero."""

    kind: str  # "power" | "constant" | "zero"
    exponent: float = 0.0
    value: float = 1.0

    def __post_init__(self):
        if self.kind == "power":
            if self.exponent <= -1.0:
                raise ConfigError(f"power profile needs exponent > -1, got {self.exponent}")
        elif self.kind == "constant":
            if self.value < 0.0:
                raise ConfigError(f"constant profile needs value >= 0, got {self.value}")
        elif self.kind != "zero":
            raise ConfigError(f"unknown time profile kind {self.kind!r}")

    @classmethod
    def power(cls, exponent: float) -> "TimeProfile":
        return cls("power", exponent=exponent)

    @classmethod
    def constant(cls, value: float = 1.0) -> "TimeProfile":
        return cls("constant", value=value)

    @classmethod
    def zero(cls) -> "TimeProfile":
        return cls("zero")

    @property
    def is_zero(self) -> bool:
        return self.kind == "zero" or (self.kind == "constant" and self.value == 0.0)

    def __call__(self, t: float) -> float:
        if self.kind == "power":
            return t ** self.exponent if t > 0 else (1.0 if self.exponent == 0 else 0.0)
        if self.kind == "constant":
            return self.value
        return 0.0

    def primitive(self, t: float) -> float:
        """Closed-form integral over [0, t]."""
        if t < 0.0:
            raise ConfigError(f"time must be nonnegative, got {t}")
        if self.kind == "power":
            e = self.exponent
            return t ** (e + 1.0) / (e + 1.0)
        if self.kind == "constant":
            return self.value * t
        return 0.0


@dataclass(frozen=True)
class Nonlinearity:
    """Source nonlinearity: u^p, or (1+u) ln(1+u)^q."""

    kind: str  # "power" | "log_power"
    exponent: float

    def __post_init__(self):
        if self.kind not in ("power", "log_power"):
            raise ConfigError(f"unknown nonlinearity kind {self.kind!r}")
        if self.exponent <= 1.0:
            raise ConfigError(f"nonlinearity exponent must exceed 1, got {self.exponent}")

    @classmethod
    def power(cls, p: float) -> "Nonlinearity":
        return cls("power", p)

    @classmethod
    def log_power(cls, q: float) -> "Nonlinearity":
        return cls("log_power", q)

    def __call__(self, u):
        # domain is [0, inf); clip so roundoff-negative states stay evaluable
        u = np.maximum(np.asarray(u, dtype=float), 0.0)
        with np.errstate(over="ignore"):
            if self.kind == "power":
                return u ** self.exponent
            return (1.0 + u) * np.log1p(u) ** self.exponent

    def slope(self, u):
        """f(u)/u, extended by continuity with value 0 at u = 0."""
        u = np.asarray(u, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.where(u > 0.0, self(np.maximum(u, 0.0)) / np.where(u > 0, u, 1.0), 0.0)
        return out


@dataclass(frozen=True)
class ForcingTerm:
    profile: TimeProfile
    nonlinearity: Nonlinearity


@dataclass
class SimConfig:
    weight: WeightSpec
    grid: GridSpec
    forcings: list
    u0: Field
    horizon: float
    blowup_threshold: float = 1e8
    dt_floor: float = 1e-12
    tol: float = 1e-3
    diffusionless: bool = False

    def __post_init__(self):
        if self.horizon <= 0.0:
            raise ConfigError(f"horizon must be positive, got {self.horizon}")
        if self.dt_floor <= 0.0:
            raise ConfigError(f"dt_floor must be positive, got {self.dt_floor}")
        if self.tol <= 0.0:
            raise ConfigError(f"tol must be positive, got {self.tol}")
        sup0 = self.u0.sup()
        if sup0 > 0.0 and self.blowup_threshold < 1e3 * sup0:
            raise ConfigError(
                f"blowup_threshold {self.blowup_threshold} is below 1e3 * sup(u0) = {1e3 * sup0}"
            )


@dataclass
class SimResult:
    status: str                # "completed" | "blown_up"
    horizon: float
    t_star: float | None
    times: np.ndarray
    sup_history: np.ndarray
    mass_history: np.ndarray
    window_mass_history: np.ndarray
    step_count: int
    final: Field | None = None

    @property
    def blew_up(self) -> bool:
        return self.status == "blown_up"

    def trace(self):
        """(t, sup) pairs with only finite sup values."""
        ok = np.isfinite(self.sup_history)
        return self.times[ok], self.sup_history[ok]

    def to_json(self) -> str:
        payload = {
            "status": self.status,
            "horizon": self.horizon,
            "steps": self.step_count,
            "history": [
                {"t": float(t), "sup": float(s), "mass": float(m)}
                for t, s, m in zip(self.times, self.sup_history, self.mass_history)
            ],
        }
        if self.t_star is not None:
            payload["t_star"] = float(self.t_star)
        return json.dumps(payload, indent=2)


def _source_increment(forcings, u, t, dt):
    """Exact-in-time explicit source: sum_i [H_i(t+dt) - H_i(t)] f_i(u)."""
    du = np.zeros_like(u)
    for term in forcings:
        if term.profile.is_zero:
            continue
        weight = term.profile.primitive(t + dt) - term.profile.primitive(t)
        if weight != 0.0:
            du += weight * term.nonlinearity(u)
    return du


def _growth_runaway(sups) -> bool:
    """Last three recorded sup norms each grew by >= 10x."""
    if len(sups) < 4:
        return False
    a, b, c, d = sups[-4:]
    return b >= 10 * a > 0 and c >= 10 * b and d >= 10 * c


def simulate(config: SimConfig) -> SimResult:
    """March the semilinear problem to its horizon or to blow-up."""
    op = None if config.diffusionless else build_operator(config.grid, config.weight)
    u = config.u0.values.copy()
    grid = config.grid
    vols = grid.node_volumes()
    radii = grid.radii()
    scale_exp = config.weight.scaling_exponent

    rc_hi = min(0.1, math.sqrt(config.tol))
    rc_lo = rc_hi / 10.0

    t = 0.0
    dt = config.horizon * 1e-4
    times = [0.0]
    sups = [float(np.max(np.abs(u)))]
    masses = [float(u @ vols)]
    window = [masses[0]]
    steps = 0

    for _ in range(5_000_000):
        if t >= config.horizon * (1.0 - 1e-14):
            return SimResult("completed", config.horizon, None, np.array(times),
                             np.array(sups), np.array(masses), np.array(window),
                             steps, Field(grid, u))
        dt = min(dt, config.horizon - t)

        u_star = u + _source_increment(config.forcings, u, t, dt)
        if np.all(np.isfinite(u_star)):
            u_new = u_star if op is None else op.solve_shifted(dt, u_star)
        else:
            u_new = u_star
        scale = max(float(np.max(np.abs(u))), _TINY)
        finite = bool(np.all(np.isfinite(u_new)))
        rel = float(np.max(np.abs(u_new - u))) / scale if finite else math.inf

        if rel > rc_hi and dt > config.dt_floor:
            dt /= 2.0
            continue

        sup_new = float(np.max(np.abs(u_new))) if finite else math.inf
        if not finite and sup_new == math.inf and not _growth_runaway(sups):
            raise NumericError(
                f"non-finite state at t={t} before the blow-up threshold; "
                f"recent sups: {sups[-5:]}"
            )

        t += dt
        u = u_new
        steps += 1
        times.append(t)
        sups.append(sup_new)
        masses.append(float(u @ vols) if finite else math.inf)
        rad = t ** (1.0 / scale_exp)
        inside = radii <= rad
        window.append(float(u[inside] @ vols[inside]) if finite else math.inf)

        if sup_new >= config.blowup_threshold:
            return SimResult("blown_up", config.horizon, t, np.array(times),
                             np.array(sups), np.array(masses), np.array(window), steps)
        if dt <= config.dt_floor and _growth_runaway(sups):
            return SimResult("blown_up", config.horizon, t, np.array(times),
                             np.array(sups), np.array(masses), np.array(window), steps)
        if rel < rc_lo:
            dt *= 2.0
    raise NumericError("simulate exceeded the step cap")


@dataclass
class IterateReport:
    """Outcome of the monotone fixed-point iteration on a time mesh."""

    mesh: np.ndarray
    gaps: list            # sup distance between successive iterates
    monotone_ok: bool
    cap_ok: bool
    violations: list = field(default_factory=list)
    delta: float = 0.0
    beta: float = 0.0


def default_mesh(horizon: float, points: int = 24, start_frac: float = 1e-3) -> np.ndarray:
    """Geometric time mesh on (0, horizon], prefixed with t = 0."""
    inner = np.geomspace(horizon * start_frac, horizon, points)
    return np.concatenate(([0.0], inner))


def monotone_iterates(config: SimConfig, v0: Field, beta: float, k_max: int,
                      delta: float | None = None, mesh=None,
                      panel_steps: int = 8) -> IterateReport:
    """Run the Picard iteration u^k = S(t)u0 + Duhamel(u^{k-1}) on a time mesh.

    u0 = delta*v0 with delta below 1/(1+beta) unless the caller overrides it
    (deliberate violations are reported, not raised: a falsification mode).
    Checks nodewise monotonicity in k and the cap u^k <= (1+beta) S(t)u0.
    Each mesh panel is advanced with ``panel_steps`` fixed backward-Euler
    substeps so the discrete semigroup is one fixed monotone matrix per panel.
    """
    if beta <= 0.0:
        raise ConfigError(f"beta must be positive, got {beta}")
    if k_max < 1:
        raise ConfigError(f"k_max must be >= 1, got {k_max}")
    if delta is None:
        delta = 0.9 / (1.0 + beta)
    if mesh is None:
        mesh = default_mesh(config.horizon)
    mesh = np.asarray(mesh, dtype=float)
    if mesh[0] != 0.0 or np.any(np.diff(mesh) <= 0):
        raise ConfigError("mesh must start at 0 and increase strictly")

    op = build_operator(config.grid, config.weight)
    u0 = Field(config.grid, delta * v0.values)
    npts = mesh.size

    # linear baseline S(t_j) u0 along the mesh
    lin = [u0.copy()]
    for j in range(1, npts):
        lin.append(apply_semigroup(op, lin[-1], mesh[j] - mesh[j - 1],
                                   n_steps=panel_steps))

    scale = max(f.sup() for f in lin)
    slack = 1e-10 * max(scale, _TINY)
    prev = [f.copy() for f in lin]
    gaps = []
    violations = []
    monotone_ok = True
    cap_ok = True

    for k in range(1, k_max + 1):
        cur = [u0.copy()]
        overflowed = False
        for j in range(1, npts):
            dt_panel = mesh[j] - mesh[j - 1]
            src = np.zeros(config.grid.nodes)
            with np.errstate(over="ignore"):
                for term in config.forcings:
                    if term.profile.is_zero:
                        continue
                    w = term.profile.primitive(mesh[j]) - term.profile.primitive(mesh[j - 1])
                    src += w * term.nonlinearity(np.maximum(prev[j - 1].values, 0.0))
            carried_values = cur[-1].values + src
            if not np.all(np.isfinite(carried_values)):
                # runaway iterate: a cap violation in the making; record and stop
                cap_ok = False
                violations.append(("nonfinite", k, float(mesh[j]), math.inf))
                overflowed = True
                break
            carried = Field(config.grid, carried_values)
            cur.append(apply_semigroup(op, carried, dt_panel, n_steps=panel_steps))
        if overflowed:
            break

        gap = max(float(np.max(np.abs(c.values - p.values)))
                  for c, p in zip(cur, prev))
        gaps.append(gap)
        for j in range(npts):
            drop = float(np.min(cur[j].values - prev[j].values))
            if drop < -slack:
                monotone_ok = False
                violations.append(("monotone", k, float(mesh[j]), drop))
            over = float(np.max(cur[j].values - (1.0 + beta) * lin[j].values))
            if over > slack:
                cap_ok = False
                violations.append(("cap", k, float(mesh[j]), over))
        prev = cur

    return IterateReport(mesh, gaps, monotone_ok, cap_ok, violations, delta, beta)


@dataclass
class ComparisonReport:
    max_defect: float     # max over time of max nodewise (u - v)+
    scale: float          # running max of ||v||_inf
    t_end: float


def compare_runs(config: SimConfig, u0: Field, v0: Field) -> ComparisonReport:
    """Co-advance ordered initial data on a shared step sequence.

    The IMEX step is order preserving (monotone sources, M-matrix solve), so
    the positive-part defect stays at roundoff when u0 <= v0.
    """
    if np.any(u0.values > v0.values):
        raise ConfigError("compare_runs needs u0 <= v0 nodewise")
    op = None if config.diffusionless else build_operator(config.grid, config.weight)
    u = u0.values.copy()
    v = v0.values.copy()
    rc_hi = min(0.1, math.sqrt(config.tol))
    rc_lo = rc_hi / 10.0
    t = 0.0
    dt = config.horizon * 1e-4
    defect = 0.0
    scale = max(float(np.max(np.abs(v))), _TINY)

    for _ in range(2_000_000):
        if t >= config.horizon * (1.0 - 1e-14):
            break
        dt = min(dt, config.horizon - t)
        nu = u + _source_increment(config.forcings, u, t, dt)
        nv = v + _source_increment(config.forcings, v, t, dt)
        if not (np.all(np.isfinite(nu)) and np.all(np.isfinite(nv))):
            if dt > config.dt_floor:
                dt /= 2.0
                continue
            break
        if op is not None:
            nu = op.solve_shifted(dt, nu)
            nv = op.solve_shifted(dt, nv)
        rel = max(float(np.max(np.abs(nu - u))) / max(float(np.max(np.abs(u))), _TINY),
                  float(np.max(np.abs(nv - v))) / max(float(np.max(np.abs(v))), _TINY))
        if rel > rc_hi and dt > config.dt_floor:
            dt /= 2.0
            continue
        t += dt
        u, v = nu, nv
        sup_v = float(np.max(np.abs(v)))
        scale = max(scale, sup_v)
        defect = max(defect, float(np.max(u - v)))
        if sup_v >= config.blowup_threshold:
            break
        if rel < rc_lo:
            dt *= 2.0
    return ComparisonReport(max(defect, 0.0), scale, t)
