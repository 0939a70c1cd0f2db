"""Geodesically convex test objectives and their Riemannian gradients."""
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import linalg
from .errors import InputError
from .manifolds import SPD, Euclidean, Hemisphere, Manifold


class Objective:
    """An objective bound to the manifold it is defined on."""

    kind = None
    manifold: Manifold

    def value(self, x):
        raise NotImplementedError

    def gradient(self, x):
        raise NotImplementedError

    def _check(self, x):
        shape = np.shape(x)
        n = self.manifold.n
        if shape not in ((n,), (n, n)) or (isinstance(self.manifold, SPD) != (shape == (n, n))):
            raise InputError(f"point of shape {shape} does not belong to {self.manifold!r}")


class RayleighQuotient(Objective):
    """``f(x) = -x^T A x / 2`` on the hemisphere; minimizers are top eigenvectors."""

    kind = "rayleigh"

    def __init__(self, a, pole=None):
        a = np.asarray(a, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise InputError("A must be a square matrix")
        if linalg.relative_asymmetry(a) > 1e-10:
            raise InputError("A must be symmetric")
        self.a = linalg.symmetrize(a)
        self.manifold = Hemisphere(a.shape[0], pole=pole)

    def value(self, x):
        self._check(x)
        return float(-0.5 * x @ self.a @ x)

    def gradient(self, x):
        ax = self.a @ x
        return -(ax - np.dot(x, ax) * x)


class KarcherMean(Objective):
    """Sum of squared affine-invariant distances to ``A_1..A_m``."""

    kind = "karcher"

    def __init__(self, matrices):
        mats = [linalg.symmetrize(np.asarray(m, dtype=float)) for m in matrices]
        if not mats:
            raise InputError("Karcher objective needs at least one matrix")
        n = mats[0].shape[0]
        self.manifold = SPD(n)
        for m in mats:
            self.manifold.check_point(m)
        self.matrices = mats
        self.m = len(mats)

    def _logs(self, p):
        """``P^{1/2}`` and ``Logm(P^{-1/2} A_j P^{-1/2})`` for each j."""
        s, si = linalg.sqrtm_and_invsqrtm(p)
        return s, [linalg.logm(si @ aj @ si) for aj in self.matrices]

    def value(self, p):
        self._check(p)
        _, si = linalg.sqrtm_and_invsqrtm(p)
        total = 0.0
        for aj in self.matrices:
            w = np.linalg.eigvalsh(linalg.symmetrize(si @ aj @ si))
            total += float(np.sum(np.log(w) ** 2))
        return total

    def gradient(self, p):
        # grad d(P, A)^2 = -2 Log_P(A) = 2 P^{1/2} Logm(P^{1/2} A^{-1} P^{1/2}) P^{1/2}
        s, logs = self._logs(p)
        whitened = -2.0 * sum(logs)
        return linalg.symmetrize(s @ whitened @ s)

    def whitened_gradient(self, p):
        """``P^{-1/2} grad f(P) P^{-1/2}``; its Frobenius norm is the Riemannian gradient norm."""
        _, logs = self._logs(p)
        return -2.0 * sum(logs)


class FlatQuadratic(Objective):
    """``f(x) = (x - c)^T Q (x - c) / 2`` in flat space."""

    kind = "flat-quadratic"

    def __init__(self, q, center=None):
        q = np.atleast_2d(np.asarray(q, dtype=float))
        if linalg.relative_asymmetry(q) > 1e-10:
            raise InputError("quadratic form must be symmetric")
        if np.linalg.eigvalsh(q)[0] <= 0:
            raise InputError("quadratic form must be positive definite")
        self.q = q
        n = q.shape[0]
        self.center = np.zeros(n) if center is None else np.asarray(center, dtype=float)
        self.manifold = Euclidean(n)

    def value(self, x):
        self._check(x)
        d = x - self.center
        return float(0.5 * d @ self.q @ d)

    def gradient(self, x):
        return self.q @ (x - self.center)


def gradient_norm(obj, x):
    if isinstance(obj, KarcherMean):
        return float(np.linalg.norm(obj.whitened_gradient(x)))
    return obj.manifold.norm(x, obj.gradient(x))


@dataclass
class ProblemInstance:
    """An objective together with its start point and benchmark minimum."""

    objective: Objective
    x0: np.ndarray
    fstar: float
    zref: np.ndarray
    name: str = "instance"
    oracle_method: str = "unknown"
    meta: dict = field(default_factory=dict)
    # optional containment ball (center, radius) flagged by the integrator
    ball: Optional[tuple] = None

    @property
    def manifold(self):
        return self.objective.manifold


# --- checks ---------------------------------------------------------------


@dataclass
class ConvexityReport:
    samples: int
    violations: int
    worst_margin: float
    worst_pair: Optional[tuple] = None

    @property
    def ok(self):
        return self.violations == 0


def _sample_in_ball(manifold, center, radius, rng):
    v = manifold.random_unit_tangent(center, rng)
    r = radius * rng.uniform() ** (1.0 / 3.0)
    return manifold.exp(center, r * v)


def geodesic_convexity_check(obj, samples, ball, rng=None):
    """Sample pairs in a geodesic ball and count first-order convexity violations.

    A violation is ``f(y) < f(x) + <grad f(x), Log_x y> - 1e-8 (1 + |f(x)|)``.
    Violations are returned as data, never raised.
    """
    rng = np.random.default_rng(rng)
    center, radius = ball
    man = obj.manifold
    violations = 0
    worst = np.inf
    worst_pair = None
    for _ in range(samples):
        x = _sample_in_ball(man, center, radius, rng)
        y = _sample_in_ball(man, center, radius, rng)
        fx = obj.value(x)
        margin = obj.value(y) - fx - man.inner(x, obj.gradient(x), man.log(x, y))
        slack = margin + 1e-8 * (1.0 + abs(fx))
        if slack < 0:
            violations += 1
        if margin < worst:
            worst = margin
            worst_pair = (x, y)
    return ConvexityReport(samples, violations, float(worst), worst_pair)


@dataclass
class SmoothnessEstimate:
    L: float
    mu: float

    def __post_init__(self):
        if not self.L >= self.mu >= 0:
            raise InputError(f"need L >= mu >= 0, got L={self.L}, mu={self.mu}")


def estimate_strong_minimum(obj, xstar, samples, radius=1.0, rng=None):
    """Empirical strong-minimum modulus and smoothness constant around ``xstar``.

    ``mu`` is the sampled infimum of ``2 (f(x) - f(x*)) / d(x, x*)^2`` floored
    at zero; ``L`` is the sampled supremum of the transported gradient
    difference over distance.
    """
    rng = np.random.default_rng(rng)
    man = obj.manifold
    fstar = obj.value(xstar)
    gstar = obj.gradient(xstar)
    mu = np.inf
    lip = 0.0
    for _ in range(samples):
        x = _sample_in_ball(man, xstar, radius, rng)
        d = man.distance(x, xstar)
        if d < 1e-8:
            continue
        mu = min(mu, 2.0 * (obj.value(x) - fstar) / d**2)
        diff = obj.gradient(x) - man.transport(xstar, x, gstar)
        lip = max(lip, man.norm(x, diff) / d)
    mu = 0.0 if not np.isfinite(mu) else max(mu, 0.0)
    return SmoothnessEstimate(L=max(lip, mu), mu=mu)
