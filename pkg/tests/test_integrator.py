import logging

import numpy as np
import pytest

from riemflow.errors import InputError
from riemflow.integrator import SolverConfig, solve, step
from riemflow.manifolds import Euclidean, Hemisphere
from riemflow.objectives import FlatQuadratic, ProblemInstance, RayleighQuotient

from .reference import bessel_solution, euclidean_reference


def flat_instance(x0, q=None):
    n = len(x0)
    obj = FlatQuadratic(np.eye(n) if q is None else q)
    return ProblemInstance(obj, np.asarray(x0, float), 0.0, np.zeros(n), name="flat")


def test_config_validation():
    with pytest.raises(InputError):
        SolverConfig(alpha=0.0)
    with pytest.raises(InputError):
        SolverConfig(alpha=1.0, dt=1.0, horizon=0.5)
    with pytest.raises(InputError):
        SolverConfig(alpha=1.0, dt=0.1, time_origin=0.05)
    assert SolverConfig(alpha=3.0, dt=0.1).t0 == pytest.approx(0.3)
    assert SolverConfig(alpha=0.5, dt=0.1).t0 == 0.1
    assert SolverConfig(alpha=3.0, dt=0.1, time_origin=0.1).t0 == 0.1


def test_stationary_point_stays():
    m = Hemisphere(3)
    x = np.eye(3)[0]
    x1, v1 = step(m, x, np.zeros(3), 1.0, 0.1, 3.0, np.zeros(3))
    np.testing.assert_array_equal(x1, x)
    np.testing.assert_array_equal(v1, 0.0)


@pytest.mark.parametrize("alpha", [0.5, 3.0, 40.0])
def test_first_step_from_rest_ignores_alpha(alpha, rng):
    m = Euclidean(3)
    x = rng.standard_normal(3)
    g = rng.standard_normal(3)
    x1, v1 = step(m, x, np.zeros(3), 0.1, 0.1, alpha, g)
    np.testing.assert_allclose(v1, -0.1 * g)
    np.testing.assert_allclose(x1, x - 0.01 * g)


def test_step_stages_on_the_sphere(rng):
    m = Hemisphere(4)
    x = m.random_point(rng)
    v = m.random_tangent(x, rng)
    g = m.random_tangent(x, rng)
    x1, v1 = step(m, x, v, 2.0, 0.1, 3.0, g)
    v_half = (1 - 3.0 * 0.1 / 2.0) * v - 0.1 * g
    np.testing.assert_allclose(x1, m.exp(x, 0.1 * v_half), atol=1e-15)
    np.testing.assert_allclose(v1, m.transport(x, x1, v_half), atol=1e-15)
    m.check_point(x1)
    m.check_tangent(x1, v1)


def test_horizon_equal_to_origin_gives_single_sample():
    inst = flat_instance([1.0, 2.0])
    traj = solve(inst, SolverConfig(alpha=3.0, dt=0.1, horizon=0.3, time_origin=0.3))
    assert len(traj) == 1
    np.testing.assert_array_equal(traj.samples[0].v, 0.0)


def test_times_strictly_increase_and_start_at_rest():
    traj = solve(flat_instance([1.0, -1.0]), SolverConfig(alpha=2.0, dt=0.05, horizon=3.0, record_every=7))
    t = traj.times
    assert np.all(np.diff(t) > 0)
    assert t[-1] == pytest.approx(3.0)
    np.testing.assert_array_equal(traj.samples[0].v, 0.0)


def test_reference_oracle_matches_closed_form():
    t = np.linspace(1, 50, 200)
    x0 = np.array([1.0, -0.5, 2.0])
    np.testing.assert_allclose(euclidean_reference(x0, np.eye(3), 3.0, t), bessel_solution(x0, 3.0, t), atol=1e-9)


@pytest.mark.parametrize("alpha", [1.0, 3.0, 5.0])
def test_flat_space_matches_reference_ode(alpha):
    x0 = np.array([1.0, -0.5, 2.0])
    traj = solve(flat_instance(x0), SolverConfig(alpha=alpha, dt=1e-3, horizon=50.0, record_every=10))
    t = traj.times
    sel = t >= 1.0
    xs = np.array([s.x for s in traj.samples])[sel]
    ref = euclidean_reference(x0, np.eye(3), alpha, t[sel])
    assert np.max(np.abs(xs - ref)) < 1e-3


def test_dt_refinement_order(rng):
    q = np.diag([0.3, 1.0, 2.0])
    x0 = np.array([1.0, 1.0, -1.0])
    ref = euclidean_reference(x0, q, 3.0, np.array([20.0]))[0]
    inst = flat_instance(x0, q)
    errs = []
    for dt in (0.02, 0.01, 0.005):
        traj = solve(inst, SolverConfig(alpha=3.0, dt=dt, horizon=20.0, time_origin=0.02))
        errs.append(np.linalg.norm(traj.samples[-1].x - ref))
    orders = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert np.all(orders >= 0.9), orders


def test_energy_decreases_overall(eigen_desk):
    inst, _ = eigen_desk
    traj = solve(inst, SolverConfig(alpha=3.0, dt=0.1, horizon=50.0))
    w = [0.5 * s.v @ s.v + s.f_val - inst.fstar for s in traj.samples]
    assert w[-1] < 0.01 * w[0]


def test_negative_damping_factor_is_logged(caplog):
    inst = flat_instance([1.0, 1.0])
    with caplog.at_level(logging.WARNING, logger="riemflow.integrator"):
        traj = solve(inst, SolverConfig(alpha=8.0, dt=0.1, horizon=1.0, time_origin=0.1))
    assert traj.damping_warning
    assert "damping factor" in caplog.text
    quiet = solve(inst, SolverConfig(alpha=8.0, dt=0.1, horizon=1.0))
    assert not quiet.damping_warning


def test_containment_violation_is_flagged_not_enforced():
    # start near the hemisphere boundary, minimizer on the other side
    a = np.diag([1.0, 0.0, 0.0])
    obj = RayleighQuotient(a, pole=[0.0, 1.0, 0.0])
    x0 = np.array([0.6, 0.01, 0.8])
    x0 /= np.linalg.norm(x0)
    inst = ProblemInstance(obj, x0, -0.5, np.eye(3)[0])
    traj = solve(inst, SolverConfig(alpha=3.0, dt=0.1, horizon=30.0))
    flags = [s.containment_ok for s in traj.samples]
    assert flags[0] and not all(flags)
    assert traj.ok


def test_step_error_returns_partial_trajectory():
    class Exploding(FlatQuadratic):
        calls = 0

        def gradient(self, x):
            self.calls += 1
            if self.calls > 5:
                raise InputError("boom")
            return super().gradient(x)

    inst = ProblemInstance(Exploding(np.eye(2)), np.ones(2), 0.0, np.zeros(2))
    traj = solve(inst, SolverConfig(alpha=1.0, dt=0.1, horizon=5.0))
    assert not traj.ok
    assert traj.error_step == 4
    assert "step 4" in traj.error
    assert len(traj) == 5


def test_karcher_desk_reaches_small_gradient(karcher_desk):
    inst, _ = karcher_desk
    # f stagnates near t = 70; the gradient keeps decaying like t^(-alpha/2) after that
    traj = solve(inst, SolverConfig(alpha=5.0, dt=0.1, horizon=1000.0, record_every=1000))
    assert traj.samples[-1].grad_norm < 1e-8
