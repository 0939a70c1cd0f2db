"""Semi-implicit integration of the damped geodesic flow.

The second-order system ``nabla_t X' + (alpha/t) X' + grad f(X) = 0`` is
integrated in phase space ``(X, V)`` with

    V~  = (1 - alpha dt / t_k) V_k - grad f(X_k) dt
    X+  = Exp_{X_k}(dt V~)
    V+  = transport of V~ from X_k to X+

starting from rest at ``t = time_origin``.
"""
import logging
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from .errors import InputError, RiemflowError, StepError

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class SolverConfig:
    alpha: float
    dt: float = 0.1
    horizon: float = 200.0
    # None picks max(dt, alpha * dt), which keeps 1 - alpha dt / t_k in [0, 1)
    time_origin: Optional[float] = None
    record_every: int = 1

    def __post_init__(self):
        if not self.alpha > 0:
            raise InputError("alpha must be positive")
        if not self.dt > 0 or not self.horizon > 0:
            raise InputError("dt and horizon must be positive")
        if self.dt > self.horizon:
            raise InputError("dt must not exceed the horizon")
        if self.time_origin is not None and self.time_origin < self.dt:
            raise InputError("time_origin must be at least dt")
        if self.record_every < 1:
            raise InputError("record_every must be >= 1")

    @property
    def t0(self):
        if self.time_origin is None:
            return max(self.dt, self.alpha * self.dt)
        return self.time_origin

    @property
    def n_steps(self):
        return max(int(round((self.horizon - self.t0) / self.dt)), 0)

    def to_dict(self):
        d = asdict(self)
        d["time_origin"] = self.t0
        return d


@dataclass
class TrajectorySample:
    t: float
    x: np.ndarray
    v: np.ndarray
    f_val: float
    grad_norm: float
    containment_ok: bool
    # <v, grad f(x)>_x, used by the shadow energy
    v_dot_grad: float = float("nan")


@dataclass
class Trajectory:
    samples: list
    config: SolverConfig
    instance_id: str = ""
    manifold: object = None
    error: Optional[str] = None
    error_step: Optional[int] = None
    damping_warning: bool = False
    meta: dict = field(default_factory=dict)

    @property
    def ok(self):
        return self.error is None

    @property
    def times(self):
        return np.array([s.t for s in self.samples])

    @property
    def values(self):
        return np.array([s.f_val for s in self.samples])

    def __len__(self):
        return len(self.samples)


def step(manifold, x, v, t, dt, alpha, grad):
    """One semi-implicit step; ``grad`` is the Riemannian gradient at ``x``.

    Returns ``(x_next, v_next)``.
    """
    v_half = (1.0 - alpha * dt / t) * v - dt * grad
    x_next = manifold.exp(x, dt * v_half)
    v_next = manifold.transport(x, x_next, v_half)
    return x_next, v_next


def _contained(instance, x):
    man = instance.manifold
    if not man.contains(x):
        return False
    if instance.ball is not None:
        center, radius = instance.ball
        return man.distance(center, x) <= radius
    return True


def solve(instance, config, x0=None):
    """Integrate from ``instance.x0`` at rest over ``[t0, horizon]``.

    Samples are recorded every ``config.record_every`` steps and at the final
    step. A failing step stops integration; the partial trajectory is returned
    with ``error`` set.
    """
    obj = instance.objective
    man = obj.manifold
    x = np.array(instance.x0 if x0 is None else x0, dtype=float)
    v = man.zero(x)
    t = config.t0
    dt, alpha = config.dt, config.alpha
    g = obj.gradient(x)
    traj = Trajectory([], config, instance_id=instance.name, manifold=man)

    def record(t, x, v, g):
        traj.samples.append(
            TrajectorySample(
                t=t,
                x=x,
                v=v,
                f_val=obj.value(x),
                grad_norm=man.norm(x, g),
                containment_ok=_contained(instance, x),
                v_dot_grad=man.inner(x, v, g),
            )
        )

    record(t, x, v, g)
    n = config.n_steps
    for k in range(n):
        damping = 1.0 - alpha * dt / t
        if abs(damping) > 1.0 and not traj.damping_warning and np.any(v):
            log.warning("damping factor %.3g has modulus > 1 at t=%.3g (alpha=%g)", damping, t, alpha)
            traj.damping_warning = True
        try:
            x, v = step(man, x, v, t, dt, alpha, g)
            g = obj.gradient(x)
        except (RiemflowError, FloatingPointError, np.linalg.LinAlgError) as exc:
            err = StepError(k, exc)
            traj.error = str(err)
            traj.error_step = k
            log.error("integration aborted: %s", err)
            return traj
        t = config.t0 + (k + 1) * dt
        if (k + 1) % config.record_every == 0 or k + 1 == n:
            record(t, x, v, g)
    return traj
