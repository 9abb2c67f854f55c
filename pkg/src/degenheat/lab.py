"""Sweep orchestration: classify parameter points as blow-up or global-like.

"Global" is undecidable numerically.  A point is GlobalLike when the final
escalation horizon completes and either the sup trace is non-increasing over
its last decade or the analytic smallness index certifies global existence.
Blow-up is the solver's threshold crossing.  Everything else is Undetermined.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .criteria import evaluate as evaluate_criteria
from .criteria import fujita_exponents
from .dynamics import ForcingTerm, Nonlinearity, SimConfig, simulate
from .errors import ConfigError, NumericError
from .grids import GridSpec, InitialProfile
from .weight import WeightSpec

AXIS_NAMES = ("p", "q", "r", "s", "alpha", "amplitude")


@dataclass(frozen=True)
class RunSpec:
    """Everything needed to build a SimConfig, minus the horizon and grid size."""

    weight: WeightSpec
    grid: GridSpec
    forcings: tuple
    profile: InitialProfile
    blowup_threshold: float = 1e8
    dt_floor: float = 1e-12
    tol: float = 1e-2
    diffusionless: bool = False

    def config(self, horizon: float, grid: GridSpec | None = None) -> SimConfig:
        g = grid or self.grid
        return SimConfig(self.weight, g, list(self.forcings), self.profile.realize(g),
                         horizon, self.blowup_threshold, self.dt_floor, self.tol,
                         self.diffusionless)


@dataclass(frozen=True)
class EscalationLevel:
    horizon: float
    grid: GridSpec | None = None


def default_escalation(horizons=(10.0, 100.0, 1000.0)) -> tuple:
    return tuple(EscalationLevel(h) for h in horizons)


@dataclass
class PhasePoint:
    axis_values: tuple
    classification: str        # "BlowUp" | "GlobalLike" | "Undetermined"
    t_star: float | None
    horizon: float
    index_I: float | None
    certificate_tau: float | None
    reason: str = ""


def _level_grid(run: RunSpec, level: EscalationLevel, notch: int) -> GridSpec:
    if level.grid is not None:
        return level.grid
    g = run.grid
    for _ in range(notch):
        g = g.refined()
    return g


def _trace_non_increasing(times, sups, horizon) -> bool:
    mask = times >= horizon / 10.0
    if mask.sum() < 2:
        return False
    s = sups[mask]
    return bool(np.all(np.diff(s) <= 1e-8 * max(s.max(), 1e-300)))


def point_criteria(run: RunSpec, horizon: float):
    """Linear-flow trace of the point's data, fed to the analytic criteria."""
    linear = replace(run, forcings=(), blowup_threshold=math.inf)
    cfg = linear.config(horizon)
    res = simulate(cfg)
    return evaluate_criteria(res.trace(), list(run.forcings), run.weight)


def classify_point(run: RunSpec, escalation, with_criteria: bool = True) -> PhasePoint:
    """Escalate horizons until blow-up or a defensible global-like completion."""
    escalation = tuple(escalation)
    if not escalation:
        raise ConfigError("escalation ladder is empty")

    report = None
    if with_criteria:
        try:
            report = point_criteria(run, escalation[0].horizon)
        except (ConfigError, NumericError):
            report = None
    index = report.smallness_index if report else None
    tau = report.certificate_tau if report else None

    result = None
    for notch, level in enumerate(escalation):
        cfg = run.config(level.horizon, _level_grid(run, level, notch))
        try:
            result = simulate(cfg)
        except NumericError as exc:
            return PhasePoint((), "Undetermined", None, level.horizon, index, tau,
                              f"numeric failure: {exc}")
        if result.blew_up:
            return PhasePoint((), "BlowUp", result.t_star, level.horizon, index, tau)

    final_horizon = escalation[-1].horizon
    times, sups = result.trace()
    decaying = _trace_non_increasing(times, sups, final_horizon)
    small = index is not None and index < 1.0
    if decaying or small:
        why = "decaying trace" if decaying else "smallness index < 1"
        return PhasePoint((), "GlobalLike", None, final_horizon, index, tau, why)
    return PhasePoint((), "Undetermined", None, final_horizon, index, tau,
                      "completed but neither decaying nor certified small")


def apply_axis(run: RunSpec, name: str, value: float) -> RunSpec:
    """Move one sweep axis: nonlinearity powers, profile exponents, alpha, amplitude."""
    if name == "alpha":
        return replace(run, weight=replace(run.weight, alpha=float(value)))
    if name == "amplitude":
        return replace(run, profile=run.profile.scaled(float(value)))
    if name in ("p", "q"):
        kind = "power" if name == "p" else "log_power"
        terms = []
        hit = False
        for term in run.forcings:
            if term.nonlinearity.kind == kind:
                terms.append(ForcingTerm(term.profile, Nonlinearity(kind, float(value))))
                hit = True
            else:
                terms.append(term)
        if not hit:
            raise ConfigError(f"axis {name!r} has no matching forcing term")
        return replace(run, forcings=tuple(terms))
    if name in ("r", "s"):
        kind = "power" if name == "r" else "log_power"
        terms = []
        hit = False
        for term in run.forcings:
            if term.nonlinearity.kind == kind:
                terms.append(ForcingTerm(replace(term.profile, kind="power",
                                                 exponent=float(value)),
                                         term.nonlinearity))
                hit = True
            else:
                terms.append(term)
        if not hit:
            raise ConfigError(f"axis {name!r} has no matching forcing term")
        return replace(run, forcings=tuple(terms))
    raise ConfigError(f"unknown sweep axis {name!r}; valid axes: {AXIS_NAMES}")


@dataclass(frozen=True)
class SweepSpec:
    base: RunSpec
    axes: tuple               # 1 or 2 entries of (name, values)
    escalation: tuple = field(default_factory=default_escalation)
    with_criteria: bool = True

    def __post_init__(self):
        if not 1 <= len(self.axes) <= 2:
            raise ConfigError("a sweep needs 1 or 2 axes")
        for name, values in self.axes:
            if name not in AXIS_NAMES:
                raise ConfigError(f"unknown sweep axis {name!r}")
            vals = list(values)
            if any(b <= a for a, b in zip(vals, vals[1:])):
                raise ConfigError(f"axis {name!r} grid must be strictly increasing")
        horizons = [lv.horizon for lv in self.escalation]
        if not horizons or any(b <= a for a, b in zip(horizons, horizons[1:])):
            raise ConfigError("escalation horizons must be strictly increasing")

    def points(self):
        """Deterministically ordered (index, axis_values, run) triples."""
        name1, vals1 = self.axes[0]
        if len(self.axes) == 2:
            name2, vals2 = self.axes[1]
            for i, v1 in enumerate(vals1):
                for j, v2 in enumerate(vals2):
                    run = apply_axis(apply_axis(self.base, name1, v1), name2, v2)
                    yield (i, j), (v1, v2), run
        else:
            for i, v1 in enumerate(vals1):
                yield (i,), (v1,), apply_axis(self.base, name1, v1)


def _eval_point(args):
    idx, values, run, escalation, with_criteria = args
    try:
        point = classify_point(run, escalation, with_criteria)
    except ConfigError as exc:
        point = PhasePoint((), "Undetermined", None,
                           escalation[-1].horizon, None, None, f"config error: {exc}")
    point.axis_values = values
    return idx, point


def run_sweep(spec: SweepSpec, worker_count: int = 1):
    """Evaluate every grid point; output order is independent of scheduling."""
    jobs = [(idx, values, run, spec.escalation, spec.with_criteria)
            for idx, values, run in spec.points()]
    if worker_count <= 1:
        results = [_eval_point(job) for job in jobs]
    else:
        with ProcessPoolExecutor(max_workers=worker_count) as pool:
            results = list(pool.map(_eval_point, jobs))
    results.sort(key=lambda pair: pair[0])
    return [point for _, point in results]


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float) and math.isinf(value):
        return "inf"
    return f"{value:.10g}"


def points_to_csv(points) -> str:
    lines = ["axis1,axis2,classification,t_star,horizon,index_I,certificate_tau"]
    for pt in points:
        ax1 = _fmt(pt.axis_values[0]) if pt.axis_values else ""
        ax2 = _fmt(pt.axis_values[1]) if len(pt.axis_values) > 1 else ""
        lines.append(",".join([ax1, ax2, pt.classification, _fmt(pt.t_star),
                               _fmt(pt.horizon), _fmt(pt.index_I),
                               _fmt(pt.certificate_tau)]))
    return "\n".join(lines) + "\n"


def points_to_json(points) -> list:
    return [
        {
            "axis1": pt.axis_values[0] if pt.axis_values else None,
            "axis2": pt.axis_values[1] if len(pt.axis_values) > 1 else None,
            "classification": pt.classification,
            "t_star": pt.t_star,
            "horizon": pt.horizon,
            "index_I": None if pt.index_I is None
            else ("inf" if math.isinf(pt.index_I) else pt.index_I),
            "certificate_tau": pt.certificate_tau,
        }
        for pt in points
    ]


_CLASS_COLORS = {"BlowUp": "#c0392b", "GlobalLike": "#2d72b8", "Undetermined": "#95a5a6"}


def sweep_svg(spec: SweepSpec, points) -> str:
    """Axis-aligned classification heat map with the analytic boundary overlay."""
    name1, vals1 = spec.axes[0]
    vals1 = list(vals1)
    if len(spec.axes) == 2:
        name2, vals2 = spec.axes[1]
        vals2 = list(vals2)
    else:
        name2, vals2 = "", [0.0]
    cell = 40
    pad = 60
    width = pad * 2 + cell * len(vals1)
    height = pad * 2 + cell * len(vals2)
    rows = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">']
    rows.append(f'<rect width="{width}" height="{height}" fill="white"/>')
    grid = {pt.axis_values: pt for pt in points}
    for i, v1 in enumerate(vals1):
        for j, v2 in enumerate(vals2):
            key = (v1, v2) if len(spec.axes) == 2 else (v1,)
            pt = grid.get(key)
            color = _CLASS_COLORS.get(pt.classification if pt else "", "#ffffff")
            x = pad + i * cell
            y = pad + (len(vals2) - 1 - j) * cell
            rows.append(f'<rect x="{x}" y="{y}" width="{cell}" height="{cell}" '
                        f'fill="{color}" stroke="black"/>')
    for i, v1 in enumerate(vals1):
        rows.append(f'<text x="{pad + i * cell + cell / 2}" y="{height - pad / 2}" '
                    f'font-size="11" text-anchor="middle">{v1:g}</text>')
    for j, v2 in enumerate(vals2):
        if name2:
            rows.append(f'<text x="{pad / 2}" y="{pad + (len(vals2) - 1 - j) * cell + cell / 2}" '
                        f'font-size="11" text-anchor="middle">{v2:g}</text>')
    boundary = _axis_boundary(spec, name1, vals1)
    if boundary is not None:
        rows.append(f'<line x1="{boundary}" y1="{pad}" x2="{boundary}" '
                    f'y2="{height - pad}" stroke="black" stroke-width="2" '
                    f'stroke-dasharray="6,4"/>')
    rows.append(f'<text x="{width / 2}" y="{pad / 3}" font-size="13" '
                f'text-anchor="middle">{name1}{" x " + name2 if name2 else ""} sweep</text>')
    rows.append("</svg>")
    return "\n".join(rows) + "\n"


def _axis_boundary(spec: SweepSpec, name1: str, vals1):
    """Pixel x of the analytic critical value on the first axis, if crossed."""
    if name1 not in ("p", "q"):
        return None
    r = s = 0.0
    for term in spec.base.forcings:
        e = term.profile.exponent if term.profile.kind == "power" else 0.0
        if term.nonlinearity.kind == "power":
            r = e
        else:
            s = e
    p_star, q_star = fujita_exponents(spec.base.weight.alpha, spec.base.weight.dim, r, s)
    target = p_star if name1 == "p" else q_star
    if not vals1[0] <= target <= vals1[-1]:
        return None
    cell, pad = 40, 60
    centers = [pad + i * cell + cell / 2 for i in range(len(vals1))]
    return float(np.interp(target, vals1, centers))
