"""Lyapunov energies, power-law rate fits and distance traces for trajectories.

All functions post-process an immutable :class:`~riemflow.integrator.Trajectory`.
"""
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import InputError

STAGNATION_TOL = 1e-12
MONOTONE_SLACK = 1e-8


@dataclass
class EnergyTrace:
    t: float
    W: float  # 1/2 |v|^2 + f - f*
    gap: float  # f - f*
    scaled_gap: float  # t^2 (f - f*); NaN once the gap has stagnated
    h: float  # 1/2 d(x, z)^2
    shadow_W: float = math.nan  # W - (dt/2) <v, grad f>


@dataclass
class SubcriticalEnergy:
    t: float
    p: float
    lambda_t: float
    eta_t: float
    A: float
    B: float
    C: float

    @property
    def W(self):
        return self.A + self.B + self.C


@dataclass
class RateFit:
    fitted_exponent: float
    window: tuple
    r_squared: float
    n_samples: int


def stagnation_index(gaps, tol=STAGNATION_TOL):
    """Index of the first sample with ``gap < tol``, or None."""
    hits = np.flatnonzero(np.asarray(gaps) < tol)
    return int(hits[0]) if hits.size else None


def energy_trace(traj, z, fstar, stagnation_tol=STAGNATION_TOL):
    """Per-sample energy ``W``, scaled gap ``t^2 (f - f*)`` and ``h = d(x, z)^2 / 2``.

    The scaled-gap series stops (NaN) from the first sample whose gap falls
    below ``stagnation_tol``; beyond that point finite precision dominates
    and ``t^2`` would amplify rounding into spurious growth.
    """
    man = traj.manifold
    fmin = min(s.f_val for s in traj.samples)
    if fstar > fmin + STAGNATION_TOL * max(1.0, abs(fmin)):
        raise InputError(f"fstar={fstar!r} lies above the smallest recorded value {fmin!r}")
    dt = traj.config.dt
    out = []
    stagnated = False
    for s in traj.samples:
        gap = s.f_val - fstar
        stagnated = stagnated or gap < stagnation_tol
        w = 0.5 * man.inner(s.x, s.v, s.v) + max(gap, 0.0)
        out.append(
            EnergyTrace(
                t=s.t,
                W=w,
                gap=gap,
                scaled_gap=math.nan if stagnated else s.t**2 * gap,
                h=0.5 * man.distance(s.x, z) ** 2,
                shadow_W=w - 0.5 * dt * s.v_dot_grad,
            )
        )
    return out


def max_increase(values):
    """Largest one-step increase of a series (``-inf`` for fewer than two points)."""
    v = np.asarray(values, dtype=float)
    if v.size < 2:
        return -math.inf
    return float(np.max(np.diff(v)))


def is_nonincreasing(values, rel_slack=MONOTONE_SLACK):
    """``max_k (v[k+1] - v[k]) <= rel_slack * (1 + v[0])``."""
    v = np.asarray(values, dtype=float)
    return max_increase(v) <= rel_slack * (1.0 + abs(v[0]))


def subcritical_coefficients(p, alpha, t):
    """``lambda(t) = 2 p t^(p-1)`` and ``eta(t) = 2 p (alpha - 4p + 1) t^(2p-2)``."""
    lam = 2.0 * p * t ** (p - 1.0)
    eta = 2.0 * p * (alpha - 4.0 * p + 1.0) * t ** (2.0 * p - 2.0)
    return lam, eta


def subcritical_exponent(alpha, delta):
    """Energy exponent for ``0 < alpha <= delta``.

    The admissible choice is ``min(1, alpha/delta, (alpha+1)/4)``; for
    ``delta >= 3`` this always equals ``alpha/delta``, which is returned.
    """
    if not 0 < alpha <= delta:
        raise InputError(f"sub-critical energy needs 0 < alpha <= delta, got alpha={alpha}, delta={delta}")
    return alpha / delta


def subcritical_energy(traj, z, fstar, alpha, profile):
    """``A + B + C`` energy for the sub-critical regime, sample by sample.

    ``A = t^{2p} (f - f*)``, ``B = |-lambda Log_x z + t^p v|^2 / 2`` and
    ``C = eta d(x, z)^2 / 2``. Both vectors in ``B`` live at ``x`` already.
    """
    man = traj.manifold
    p = subcritical_exponent(alpha, profile.delta)
    out = []
    for s in traj.samples:
        lam, eta = subcritical_coefficients(p, alpha, s.t)
        lg = man.log(s.x, z)
        u = -lam * lg + s.t**p * s.v
        a = s.t ** (2 * p) * max(s.f_val - fstar, 0.0)
        b = 0.5 * man.inner(s.x, u, u)
        c = 0.5 * eta * man.inner(s.x, lg, lg)
        out.append(SubcriticalEnergy(s.t, p, lam, eta, a, b, c))
    return out


def fit_power_law(t, y, window=None, floor=STAGNATION_TOL, min_samples=10):
    """Fit ``y ~ c t^{-q}`` by least squares in log-log coordinates.

    Samples from the first one below ``floor`` onwards are discarded. The
    default window is the last decade ``[t_end / 10, t_end]`` of what remains.
    """
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    cut = stagnation_index(y, floor)
    if cut is not None:
        t, y = t[:cut], y[:cut]
    if t.size == 0:
        raise InputError("no samples above the stagnation floor")
    if window is None:
        window = (t[-1] / 10.0, t[-1])
    lo, hi = window
    if not lo < hi:
        raise InputError(f"empty window {window}")
    sel = (t >= lo) & (t <= hi) & np.isfinite(y) & (y > 0)
    if sel.sum() < min_samples:
        raise InputError(f"only {int(sel.sum())} usable samples in window {window}, need {min_samples}")
    lx = np.log(t[sel])
    ly = np.log(y[sel])
    slope, intercept = np.polyfit(lx, ly, 1)
    resid = ly - (slope * lx + intercept)
    sst = np.sum((ly - ly.mean()) ** 2)
    r2 = 1.0 - np.sum(resid**2) / sst if sst > 0 else 1.0
    return RateFit(float(-slope), (float(lo), float(hi)), float(r2), int(sel.sum()))


def fit_rate(trace, window=None):
    """Decay exponent of ``f - f*`` over a window of an energy trace."""
    t = [e.t for e in trace]
    gaps = [e.gap for e in trace]
    return fit_power_law(t, gaps, window=window)


def distance_trace(traj, zref):
    """``(t, d(X(t), zref)^2)`` per sample."""
    man = traj.manifold
    return [(s.t, man.distance(s.x, zref) ** 2) for s in traj.samples]


def stagnation_time(trace):
    i = stagnation_index([e.gap for e in trace])
    return None if i is None else trace[i].t


@dataclass
class RunSummary:
    alpha: float
    fitted_exponent: Optional[float]
    fit_window: Optional[tuple]
    fit_r_squared: Optional[float]
    predicted_exponent: float
    stagnation_time: Optional[float]
    energy_max_increase: float
    energy_slack: float
    energy_monotone: bool
    shadow_energy_max_increase: float
    shadow_energy_monotone: bool
    subcritical_max_increase: Optional[float] = None
    subcritical_monotone: Optional[bool] = None
    final_gap: float = math.nan
    final_dist2: float = math.nan
    containment_violations: int = 0


def summarize(traj, trace, alpha, profile, sub=None):
    """Collect the scalar diagnostics of one run."""
    from .curvature import rate_exponent

    w = [e.W for e in trace]
    sw = [e.shadow_W for e in trace]
    slack = MONOTONE_SLACK * (1.0 + abs(w[0]))
    try:
        fit = fit_rate(trace)
        fitted, window, r2 = fit.fitted_exponent, fit.window, fit.r_squared
    except InputError:
        fitted = window = r2 = None
    summary = RunSummary(
        alpha=alpha,
        fitted_exponent=fitted,
        fit_window=window,
        fit_r_squared=r2,
        predicted_exponent=rate_exponent(alpha, profile),
        stagnation_time=stagnation_time(trace),
        energy_max_increase=max_increase(w),
        energy_slack=slack,
        energy_monotone=is_nonincreasing(w),
        shadow_energy_max_increase=max_increase(sw),
        shadow_energy_monotone=is_nonincreasing(sw),
        final_gap=trace[-1].gap,
        final_dist2=2.0 * trace[-1].h,
        containment_violations=sum(not s.containment_ok for s in traj.samples),
    )
    if sub is not None:
        sw = [e.W for e in sub]
        summary.subcritical_max_increase = max_increase(sw)
        summary.subcritical_monotone = is_nonincreasing(sw)
    return summary
