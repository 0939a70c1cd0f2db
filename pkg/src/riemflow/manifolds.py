"""Manifolds with exact exponential/logarithm maps and parallel transport.

Three instances are provided:

* :class:`Hemisphere` -- unit sphere in R^n restricted to the open half
  around a designated pole (constant curvature +1).
* :class:`SPD` -- symmetric positive-definite matrices with the
  affine-invariant metric ``<U, V>_P = tr(P^-1 U P^-1 V)``.
* :class:`Euclidean` -- flat space, used as a reference oracle.

Points and tangent vectors are plain numpy arrays. Every operation takes
the base point explicitly, so instances hold no mutable state.
"""
import abc
import json

import numpy as np

from . import linalg
from .errors import DomainError, InputError

POINT_TOL = 1e-10
ANTIPODAL_TOL = 1e-9


class Manifold(abc.ABC):
    name = None
    # sectional curvature bounds (None = not constant / see instance)
    k_min = None
    k_max = None

    @abc.abstractmethod
    def exp(self, x, v):
        """Follow the geodesic from ``x`` with initial velocity ``v`` for unit time."""

    @abc.abstractmethod
    def log(self, x, y):
        """Inverse of :meth:`exp`: the tangent vector at ``x`` pointing to ``y``."""

    @abc.abstractmethod
    def transport(self, x, y, v):
        """Parallel transport of ``v`` from ``x`` to ``y`` along the minimizing geodesic."""

    @abc.abstractmethod
    def inner(self, x, u, v):
        pass

    @abc.abstractmethod
    def check_point(self, x, tol=POINT_TOL):
        """Raise InputError unless ``x`` satisfies the point invariants."""

    @abc.abstractmethod
    def check_tangent(self, x, v, tol=POINT_TOL):
        """Raise InputError unless ``v`` is tangent at ``x``."""

    @abc.abstractmethod
    def random_point(self, rng):
        pass

    @abc.abstractmethod
    def random_tangent(self, x, rng):
        pass

    def norm(self, x, v):
        return float(np.sqrt(max(self.inner(x, v, v), 0.0)))

    def distance(self, x, y):
        return self.norm(x, self.log(x, y))

    def zero(self, x):
        return np.zeros_like(x)

    def contains(self, x):
        """Whether ``x`` lies in the working domain (always true except for the hemisphere)."""
        return True

    def random_unit_tangent(self, x, rng):
        v = self.random_tangent(x, rng)
        return v / self.norm(x, v)

    # serialization -------------------------------------------------------

    def to_json(self, a):
        a = np.asarray(a, dtype=float)
        return {"manifold": self.name, "shape": list(a.shape), "data": a.ravel().tolist()}

    def from_json(self, obj):
        if isinstance(obj, str):
            obj = json.loads(obj)
        if obj.get("manifold") != self.name:
            raise InputError(f"expected manifold {self.name!r}, got {obj.get('manifold')!r}")
        return np.asarray(obj["data"], dtype=float).reshape(obj["shape"])

    def __repr__(self):
        return f"{type(self).__name__}({self.dim_repr()})"

    def dim_repr(self):
        return ""


class Euclidean(Manifold):
    name = "euclidean"
    k_min = 0.0
    k_max = 0.0

    def __init__(self, n):
        self.n = int(n)

    def dim_repr(self):
        return str(self.n)

    def exp(self, x, v):
        return x + v

    def log(self, x, y):
        return y - x

    def transport(self, x, y, v):
        return v

    def inner(self, x, u, v):
        return float(np.dot(u, v))

    def distance(self, x, y):
        return float(np.linalg.norm(y - x))

    def check_point(self, x, tol=POINT_TOL):
        if np.shape(x) != (self.n,) or not np.all(np.isfinite(x)):
            raise InputError(f"expected a finite vector of length {self.n}")

    def check_tangent(self, x, v, tol=POINT_TOL):
        self.check_point(v)

    def random_point(self, rng):
        return rng.standard_normal(self.n)

    def random_tangent(self, x, rng):
        return rng.standard_normal(self.n)


class Hemisphere(Manifold):
    """Unit sphere S^{n-1} in R^n, restricted to ``<x, pole> > 0``.

    Geodesics are great circles; the maps below are exact. Leaving the
    open hemisphere is reported by :meth:`contains`, not prevented.
    """

    name = "hemisphere"
    k_min = 1.0
    k_max = 1.0

    def __init__(self, n, pole=None):
        self.n = int(n)
        if pole is None:
            pole = np.zeros(self.n)
            pole[0] = 1.0
        pole = np.asarray(pole, dtype=float)
        self.pole = pole / np.linalg.norm(pole)

    def dim_repr(self):
        return str(self.n)

    def contains(self, x):
        return bool(np.dot(x, self.pole) > 0.0)

    def exp(self, x, v):
        self.check_tangent(x, v, tol=1e-8)
        nv = np.linalg.norm(v)
        if nv == 0.0:
            return x.copy()
        y = np.cos(nv) * x + np.sin(nv) * (v / nv)
        # renormalize to keep drift at machine precision over long runs
        return y / np.linalg.norm(y)

    def _log_parts(self, x, y):
        c = float(np.dot(x, y))
        if c <= -1.0 + ANTIPODAL_TOL:
            raise DomainError("logarithm undefined for antipodal points")
        w = y - c * x
        s = np.linalg.norm(w)
        theta = float(np.arctan2(s, c))
        return w, s, theta

    def log(self, x, y):
        w, s, theta = self._log_parts(x, y)
        if s == 0.0:
            return np.zeros_like(x)
        return (theta / s) * w

    def distance(self, x, y):
        _, _, theta = self._log_parts(x, y)
        return theta

    def transport(self, x, y, v):
        w, s, theta = self._log_parts(x, y)
        if s == 0.0:
            return v.copy()
        e = w / s
        a = float(np.dot(e, v))
        out = v + a * ((np.cos(theta) - 1.0) * e - np.sin(theta) * x)
        # strip the normal component introduced by rounding
        return out - np.dot(out, y) * y

    def inner(self, x, u, v):
        return float(np.dot(u, v))

    def proj(self, x, u):
        return u - np.dot(x, u) * x

    def check_point(self, x, tol=POINT_TOL):
        if np.shape(x) != (self.n,):
            raise InputError(f"expected a vector of length {self.n}")
        if abs(np.linalg.norm(x) - 1.0) > tol:
            raise InputError("point is not on the unit sphere")

    def check_tangent(self, x, v, tol=POINT_TOL):
        if np.shape(v) != (self.n,):
            raise InputError(f"expected a vector of length {self.n}")
        if abs(np.dot(x, v)) > tol * max(1.0, np.linalg.norm(v)):
            raise InputError("vector is not tangent to the sphere at the base point")

    def random_point(self, rng):
        """Uniform sample from the open hemisphere about the pole."""
        x = rng.standard_normal(self.n)
        x /= np.linalg.norm(x)
        if np.dot(x, self.pole) < 0:
            x = -x
        return x

    def random_tangent(self, x, rng):
        return self.proj(x, rng.standard_normal(self.n))


class SPD(Manifold):
    """Symmetric positive-definite n x n matrices, affine-invariant metric.

    Sectional curvature lies in [-1/2, 0].
    """

    name = "spd"
    k_min = -0.5
    k_max = 0.0

    def __init__(self, n):
        self.n = int(n)

    def dim_repr(self):
        return str(self.n)

    def exp(self, p, v):
        self.check_tangent(p, v, tol=1e-8)
        s, si = linalg.sqrtm_and_invsqrtm(p)
        return linalg.symmetrize(s @ linalg.expm(si @ v @ si) @ s)

    def log(self, p, q):
        s, si = linalg.sqrtm_and_invsqrtm(p)
        return linalg.symmetrize(s @ linalg.logm(si @ q @ si) @ s)

    def distance(self, p, q):
        _, si = linalg.sqrtm_and_invsqrtm(p)
        w, _ = linalg.sym_eig(si @ q @ si)
        if w[0] <= 0:
            raise DomainError("second argument is not positive definite")
        return float(np.sqrt(np.sum(np.log(w) ** 2)))

    def transport(self, p, q, v):
        # E = (Q P^-1)^{1/2} = P^{1/2} (P^{-1/2} Q P^{-1/2})^{1/2} P^{-1/2}
        s, si = linalg.sqrtm_and_invsqrtm(p)
        e = s @ linalg.sqrtm(si @ q @ si) @ si
        return linalg.symmetrize(e @ v @ e.T)

    def inner(self, p, u, v):
        a = np.linalg.solve(p, u)
        b = np.linalg.solve(p, v)
        return float(np.sum(a * b.T))

    def check_point(self, p, tol=POINT_TOL):
        if np.shape(p) != (self.n, self.n):
            raise InputError(f"expected a {self.n}x{self.n} matrix")
        if linalg.relative_asymmetry(p) > tol:
            raise InputError("matrix is not symmetric")
        if np.linalg.eigvalsh(linalg.symmetrize(p))[0] <= 0:
            raise InputError("matrix is not positive definite")

    def check_tangent(self, p, v, tol=POINT_TOL):
        if np.shape(v) != (self.n, self.n):
            raise InputError(f"expected a {self.n}x{self.n} matrix")
        if linalg.relative_asymmetry(v) > tol:
            raise InputError("tangent matrix is not symmetric")

    def random_point(self, rng, scale=1.0):
        return self.exp(np.eye(self.n), scale * self.random_tangent(np.eye(self.n), rng))

    def random_tangent(self, p, rng):
        # congruence keeps the distribution affine-invariant around p
        a = linalg.symmetrize(rng.standard_normal((self.n, self.n)))
        s = linalg.sqrtm(p)
        return linalg.symmetrize(s @ a @ s)


def get_manifold(name, n, **kwargs):
    kinds = {"euclidean": Euclidean, "flat": Euclidean, "hemisphere": Hemisphere, "spd": SPD}
    try:
        cls = kinds[name]
    except KeyError:
        raise InputError(f"unknown manifold {name!r}") from None
    return cls(n, **kwargs)
