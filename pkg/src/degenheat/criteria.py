"""Analytic decision machinery: Osgood tails, smallness index, certificates,
critical exponents, and decay-envelope fitting.

Everything here consumes sup-norm traces of the *linear* flow plus the forcing
data; nothing re-runs the PDE.  Closed forms are used wherever the built-in
nonlinearities admit them, with quadrature reserved for cross-validation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError
from .dynamics import ForcingTerm, Nonlinearity, TimeProfile
from .weight import WeightSpec


@dataclass
class DecayEnvelope:
    """Fitted large-time envelope ||S(t)u0||_inf ~ C t^(-theta)."""

    theta: float
    constant: float
    window: tuple
    residual: float


@dataclass
class CriteriaReport:
    smallness_index: float | None
    certificate_tau: float | None
    osgood_tails: dict
    p_star: float | None
    q_star: float | None
    rho_star: float | None
    verdict: str               # "global_by_smallness" | "blowup_certified" | "undetermined"
    envelope: DecayEnvelope | None = None
    notes: list = field(default_factory=list)


def osgood_tail(nl: Nonlinearity, z: float) -> float:
    """Closed-form tail integral int_z^inf d(sigma)/f(sigma)."""
    if z <= 0.0:
        raise ConfigError(f"osgood tail needs z > 0, got {z}")
    e = nl.exponent
    if nl.kind == "power":
        return z ** (1.0 - e) / (e - 1.0)
    return math.log1p(z) ** (1.0 - e) / (e - 1.0)


def forcing_primitive(profile: TimeProfile, t: float) -> float:
    """Integral of the time profile over [0, t], in closed form."""
    return profile.primitive(t)


def blowup_certificate(sup_trace, forcings) -> float | None:
    """Smallest trace time at which some single term satisfies the Osgood test.

    The test fires at tau when tail(f_i, ||S(tau)u0||) <= int_0^tau h_i; one
    firing term certifies non-global existence.
    """
    times, sups = _as_trace(sup_trace)
    if times.size == 0:
        raise ConfigError("empty sup trace")
    for tau, s in zip(times, sups):
        if tau <= 0.0 or s <= 0.0:
            continue
        for term in forcings:
            if term.profile.is_zero:
                continue
            if osgood_tail(term.nonlinearity, s) <= term.profile.primitive(tau):
                return float(tau)
    return None


def _as_trace(sup_trace):
    if isinstance(sup_trace, tuple) and len(sup_trace) == 2:
        t, s = sup_trace
    else:
        arr = np.asarray(sup_trace, dtype=float)
        t, s = arr[:, 0], arr[:, 1]
    return np.asarray(t, dtype=float), np.asarray(s, dtype=float)


def decay_fit(sup_trace, window) -> DecayEnvelope:
    """Least-squares power-law fit of the sup trace over a time window.

    The window must span at least one decade so the slope is meaningful.
    """
    times, sups = _as_trace(sup_trace)
    lo, hi = window
    mask = (times >= lo) & (times <= hi) & (sups > 0)
    if mask.sum() < 3 or times[mask].max() < 9.5 * times[mask].min():
        raise ConfigError(f"fit window {window} does not span a usable decade of the trace")
    lt = np.log(times[mask])
    ls = np.log(sups[mask])
    slope, intercept = np.polyfit(lt, ls, 1)
    resid = float(np.sqrt(np.mean((ls - (slope * lt + intercept)) ** 2)))
    return DecayEnvelope(theta=-float(slope), constant=float(math.exp(intercept)),
                         window=(float(lo), float(hi)), residual=resid)


def _tail_exponents(term: ForcingTerm, theta: float):
    """Power exponents of the integrand envelope past T_num, largest first."""
    prof = term.profile
    r = prof.exponent if prof.kind == "power" else 0.0
    scale = prof.value if prof.kind == "constant" else 1.0
    e = term.nonlinearity.exponent
    if term.nonlinearity.kind == "power":
        return [(scale, r - theta * (e - 1.0), e - 1.0)]
    # ln(1+x) <= x turns the log term into x^(q-1) + x^q (upper bound)
    return [
        (scale, r - theta * (e - 1.0), e - 1.0),
        (scale, r - theta * e, e),
    ]


def smallness_index(sup_trace, tail_envelope: DecayEnvelope, forcings,
                    t_num: float) -> float:
    """The global-existence index: int_0^inf sum_i h_i f_i(s)/s with s the trace.

    Numeric part on [0, t_num] uses per-panel exact profile primitives times a
    trapezoid of f(s)/s (exact through integrable profile singularities at 0);
    the tail substitutes the fitted envelope and integrates in closed form.
    Returns math.inf when the tail integral diverges: blow-up-side evidence.
    """
    times, sups = _as_trace(sup_trace)
    mask = times <= t_num * (1.0 + 1e-12)
    if mask.sum() < 2:
        raise ConfigError(f"trace does not cover [0, {t_num}]")
    times, sups = times[mask], sups[mask]

    total = 0.0
    for term in forcings:
        if term.profile.is_zero:
            continue
        phi = term.nonlinearity.slope(sups)
        weights = np.diff([term.profile.primitive(t) for t in times])
        total += float(np.sum(weights * 0.5 * (phi[:-1] + phi[1:])))

    theta, c_env = tail_envelope.theta, tail_envelope.constant
    for term in forcings:
        if term.profile.is_zero:
            continue
        for scale, exponent, power_of_s in _tail_exponents(term, theta):
            if exponent >= -1.0:
                return math.inf
            amp = scale * (c_env ** power_of_s)
            total += amp * t_num ** (exponent + 1.0) / (-exponent - 1.0)
    return total


def fujita_exponents(alpha: float, dim: int, r: float, s: float):
    """Critical powers p* and q* for the two source families."""
    _validate_alpha(alpha)
    if dim < 1:
        raise ConfigError(f"dim must be >= 1, got {dim}")
    if r <= -1.0 or s <= -1.0:
        raise ConfigError("profile exponents must exceed -1")
    p_star = 1.0 + (2.0 - alpha) * (r + 1.0) / dim
    q_star = 1.0 + (2.0 - alpha) * (s + 1.0) / dim
    return p_star, q_star


def second_critical_exponent(alpha: float, dim: int, p: float, q: float,
                             r: float, s: float) -> float:
    """Critical initial-data decay rate rho* in the supercritical regime."""
    p_star, q_star = fujita_exponents(alpha, dim, r, s)
    if p <= p_star or q <= q_star:
        raise ConfigError(
            f"second critical exponent needs p > {p_star} and q > {q_star}, "
            f"got p={p}, q={q}"
        )
    return max((2.0 - alpha) * (r + 1.0) / (p - 1.0),
               (2.0 - alpha) * (s + 1.0) / (q - 1.0))


def _validate_alpha(alpha: float):
    if not (0.0 <= alpha < 2.0):
        raise ConfigError(f"alpha must lie in [0, 2), got {alpha}")


def critical_mass_growth(times, window_mass, window):
    """Regression of windowed mass against ln t: (slope, residual).

    A positive slope is the discrete echo of the logarithmic mass growth that
    drives the critical-case blow-up argument.  Diagnostic, not a verdict.
    """
    times = np.asarray(times, dtype=float)
    wm = np.asarray(window_mass, dtype=float)
    lo, hi = window
    mask = (times >= lo) & (times <= hi) & np.isfinite(wm) & (wm > 0)
    if mask.sum() < 4:
        raise ConfigError(f"too few usable samples in window {window}")
    x = np.log(times[mask])
    y = wm[mask]
    slope, intercept = np.polyfit(x, y, 1)
    resid = float(np.sqrt(np.mean((y - (slope * x + intercept)) ** 2)))
    return float(slope), resid


def evaluate(sup_trace, forcings, weight: WeightSpec, t_num: float | None = None,
             fit_window=None) -> CriteriaReport:
    """Assemble the full report: envelope fit, index, certificate, exponents."""
    times, sups = _as_trace(sup_trace)
    if times.size < 4:
        raise ConfigError("trace too short for a criteria report")
    t_end = float(times[-1])
    if t_num is None:
        t_num = t_end
    if fit_window is None:
        fit_window = (t_end / 10.0, t_end)

    notes = []
    envelope = None
    index = None
    try:
        envelope = decay_fit((times, sups), fit_window)
        index = smallness_index((times, sups), envelope, forcings, t_num)
    except ConfigError as exc:
        notes.append(f"decay fit unavailable: {exc}")

    tau = blowup_certificate((times, sups), forcings)

    p = q = None
    r = s = None
    for term in forcings:
        e_prof = term.profile.exponent if term.profile.kind == "power" else 0.0
        if term.profile.is_zero:
            continue
        if term.nonlinearity.kind == "power":
            p, r = term.nonlinearity.exponent, e_prof
        else:
            q, s = term.nonlinearity.exponent, e_prof
    p_star = q_star = rho_star = None
    if r is not None or s is not None:
        p_star, q_star = fujita_exponents(weight.alpha, weight.dim,
                                          r if r is not None else 0.0,
                                          s if s is not None else 0.0)
        candidates = []
        if p is not None:
            if p <= p_star:
                candidates = None
            else:
                candidates.append((2.0 - weight.alpha) * (r + 1.0) / (p - 1.0))
        if candidates is not None and q is not None:
            if q <= q_star:
                candidates = None
            else:
                candidates.append((2.0 - weight.alpha) * (s + 1.0) / (q - 1.0))
        if candidates:
            rho_star = max(candidates)

    tails = {}
    z_ref = float(sups[-1]) if sups[-1] > 0 else None
    if z_ref:
        for term in forcings:
            key = f"{term.nonlinearity.kind}({term.nonlinearity.exponent:g})"
            tails[key] = osgood_tail(term.nonlinearity, z_ref)

    if tau is not None:
        verdict = "blowup_certified"
    elif index is not None and index < 1.0:
        verdict = "global_by_smallness"
    else:
        verdict = "undetermined"
        if index == math.inf:
            notes.append("smallness index diverges: blow-up-side evidence")

    return CriteriaReport(index, tau, tails, p_star, q_star, rho_star,
                          verdict, envelope, notes)
