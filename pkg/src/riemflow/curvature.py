"""Curvature-dependent constants and the rate exponent.

``sigma`` and ``xi`` bound the eigenvalues of the Hessian of half the
squared distance function from below and above, given sectional curvature
bounds. ``zeta = xi(D)`` on a working ball of diameter ``D`` and
``delta = 2 zeta + 1`` is the damping threshold separating the two
convergence regimes (``delta = 3`` in flat space).
"""
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import DomainError, InputError, NumericalError

SERIES_THRESHOLD = 1e-4


def _x_cot_x(x):
    if abs(x) < SERIES_THRESHOLD:
        x2 = x * x
        return 1.0 - x2 / 3.0 - x2 * x2 / 45.0
    return x / math.tan(x)


def _x_coth_x(x):
    if abs(x) < SERIES_THRESHOLD:
        x2 = x * x
        return 1.0 + x2 / 3.0 - x2 * x2 / 45.0
    return x / math.tanh(x)


def sigma(p, k_max):
    """Lower comparison function: 1 if ``k_max <= 0``, else ``sqrt(k) p cot(sqrt(k) p)``."""
    if p < 0:
        raise InputError("distance argument must be non-negative")
    if k_max <= 0:
        return 1.0
    x = math.sqrt(k_max) * p
    if x >= math.pi:
        raise DomainError(f"sqrt(K_max) * p = {x:.6g} must be below pi")
    return _x_cot_x(x)


def xi(p, k_min):
    """Upper comparison function: 1 if ``k_min >= 0``, else ``sqrt(-k) p coth(sqrt(-k) p)``."""
    if p < 0:
        raise InputError("distance argument must be non-negative")
    if k_min >= 0:
        return 1.0
    return _x_coth_x(math.sqrt(-k_min) * p)


@dataclass(frozen=True)
class CurvatureProfile:
    k_min: float
    k_max: float
    diameter: float
    zeta: float
    delta: float
    notes: dict = field(default_factory=dict, compare=False)

    def to_dict(self):
        d = asdict(self)
        if not d["notes"]:
            d.pop("notes")
        return d


def profile(k_min, k_max, diameter, **notes):
    """Build a :class:`CurvatureProfile`, validating the diameter condition."""
    if k_min > k_max:
        raise InputError(f"K_min={k_min} exceeds K_max={k_max}")
    if not diameter > 0 or not math.isfinite(diameter):
        raise InputError("diameter must be positive and finite")
    if k_max > 0 and diameter >= math.pi / math.sqrt(k_max):
        raise InputError(f"diameter {diameter} violates D < pi/sqrt(K_max) = {math.pi / math.sqrt(k_max):.6g}")
    zeta = xi(diameter, k_min)
    return CurvatureProfile(float(k_min), float(k_max), float(diameter), zeta, 2.0 * zeta + 1.0, notes)


def rate_exponent(alpha, prof):
    """Guaranteed decay exponent ``min(2, 2 alpha / delta)`` of ``f(X(t)) - f*``."""
    if not alpha > 0:
        raise InputError("alpha must be positive")
    delta = prof.delta if isinstance(prof, CurvatureProfile) else float(prof)
    return min(2.0, 2.0 * alpha / delta)


@dataclass
class HessianBoundReport:
    samples: int
    violations: int
    # min over samples of (middle - lower) and (upper - middle), both scaled by 1/|v|^2
    worst_lower_margin: float
    worst_upper_margin: float
    rows: list

    @property
    def ok(self):
        return self.violations == 0


def covariant_log_derivative(manifold, x, v, z, h=1e-5):
    """``<nabla_v Log_x z, -v>`` by central differences along ``t -> exp(x, t v)``.

    The field values at the two shifted points are transported back to ``x``
    before differencing so the difference is taken in a single tangent space.
    """
    vnorm = manifold.norm(x, v)
    if h * vnorm < 1e-12 or h <= 0:
        raise NumericalError("differencing step underflows")
    vals = []
    for s in (h, -h):
        y = manifold.exp(x, s * v)
        vals.append(manifold.transport(y, x, manifold.log(y, z)))
    deriv = (vals[0] - vals[1]) / (2.0 * h)
    return -manifold.inner(x, deriv, v)


def hessian_bound_check(manifold, z, samples, prof, rng=None, radius=None, tol=1e-4, h=1e-5):
    """Sample ``(x, v)`` around ``z`` and test ``sigma(d)|v|^2 <= <nabla_v Log_x z, -v> <= xi(d)|v|^2``.

    Points are drawn within ``radius`` (default the profile diameter) of ``z``.
    The sandwich is checked with additive tolerance ``tol * |v|^2``.
    """
    rng = np.random.default_rng(rng)
    radius = prof.diameter if radius is None else radius
    if prof.k_max > 0:
        # keep clear of the cut locus where sigma vanishes and Log is singular
        radius = min(radius, 0.95 * math.pi / math.sqrt(prof.k_max))
    rows = []
    violations = 0
    worst_lo = np.inf
    worst_hi = np.inf
    for _ in range(samples):
        w = manifold.random_unit_tangent(z, rng)
        x = manifold.exp(z, radius * rng.uniform() * w)
        v = manifold.random_tangent(x, rng)
        v2 = manifold.inner(x, v, v)
        d = manifold.distance(x, z)
        mid = covariant_log_derivative(manifold, x, v, z, h=h)
        lo = sigma(d, prof.k_max) * v2
        hi = xi(d, prof.k_min) * v2
        ok = lo - tol * v2 <= mid <= hi + tol * v2
        violations += not ok
        worst_lo = min(worst_lo, (mid - lo) / v2)
        worst_hi = min(worst_hi, (hi - mid) / v2)
        rows.append({"distance": d, "lower": lo / v2, "middle": mid / v2, "upper": hi / v2, "ok": ok})
    return HessianBoundReport(samples, violations, float(worst_lo), float(worst_hi), rows)
