import numpy as np
import pytest

from riemflow.errors import InputError
from riemflow.objectives import (
    FlatQuadratic,
    KarcherMean,
    RayleighQuotient,
    estimate_strong_minimum,
    geodesic_convexity_check,
    gradient_norm,
)


def _random_spd(rng, n, spread=2.0):
    from riemflow.manifolds import SPD

    return SPD(n).random_point(rng, scale=spread / np.sqrt(n))


def _objectives(rng):
    g = rng.standard_normal((12, 6))
    mats = [_random_spd(rng, 4) for _ in range(3)]
    return [
        RayleighQuotient(g.T @ g / 10.0),
        KarcherMean(mats),
        FlatQuadratic(np.diag([1.0, 2.0, 5.0])),
    ]


def fd_directional(obj, x, v, h=1e-5):
    man = obj.manifold
    return (obj.value(man.exp(x, h * v)) - obj.value(man.exp(x, -h * v))) / (2 * h)


def test_values_trivial():
    s = RayleighQuotient(np.eye(4))
    rng = np.random.default_rng(0)
    for _ in range(5):
        assert s.value(s.manifold.random_point(rng)) == pytest.approx(-0.5, abs=1e-15)
    a1 = np.diag([1.0, 2.0, 3.0])
    assert KarcherMean([a1]).value(a1) == pytest.approx(0.0, abs=1e-28)
    assert FlatQuadratic(np.eye(3)).value(np.zeros(3)) == 0.0


def test_karcher_value_is_sum_of_squared_distances(rng):
    mats = [_random_spd(rng, 3) for _ in range(4)]
    obj = KarcherMean(mats)
    p = _random_spd(rng, 3)
    expected = sum(obj.manifold.distance(p, a) ** 2 for a in mats)
    assert obj.value(p) == pytest.approx(expected, rel=1e-12)


def test_manifold_mismatch_raises():
    with pytest.raises(InputError):
        KarcherMean([np.eye(3)]).value(np.ones(3))
    with pytest.raises(InputError):
        RayleighQuotient(np.eye(3)).value(np.eye(3))


def test_gradient_vanishes_at_minimizers():
    a = np.diag([3.0, 2.0, 1.0])
    r = RayleighQuotient(a)
    for k in range(3):
        np.testing.assert_allclose(r.gradient(np.eye(3)[k]), 0.0, atol=1e-15)
    a1 = np.diag([1.0, 4.0])
    np.testing.assert_allclose(KarcherMean([a1]).gradient(a1), 0.0, atol=1e-14)


def test_gradient_matches_finite_differences(rng):
    """>= 100 random (x, v) per objective; central differences with h = 1e-5."""
    for obj in _objectives(rng):
        man = obj.manifold
        worst = 0.0
        for _ in range(100):
            x = man.random_point(rng)
            v = man.random_unit_tangent(x, rng)
            g = obj.gradient(x)
            man.check_tangent(x, g, tol=1e-10)
            analytic = man.inner(x, g, v)
            fd = fd_directional(obj, x, v)
            scale = max(abs(fd), man.norm(x, g) * man.norm(x, v))
            worst = max(worst, abs(analytic - fd) / scale)
        assert worst < 1e-6, (obj.kind, worst)


def test_rayleigh_minimizer_consistency(rng):
    g = rng.standard_normal((30, 8))
    a = g.T @ g
    r = RayleighQuotient(a)
    w, q = np.linalg.eigh(a)
    u = q[:, -1] if q[0, -1] > 0 else -q[:, -1]
    lam_max = np.max(np.linalg.eigvals(a).real)  # independent route (non-symmetric solver)
    assert r.value(u) == pytest.approx(-lam_max / 2, abs=1e-10)


def test_karcher_first_order_optimality_at_oracle(karcher_desk):
    inst, _ = karcher_desk
    assert gradient_norm(inst.objective, inst.zref) <= 1e-6


def test_flat_convexity_has_no_violations(rng):
    obj = FlatQuadratic(np.diag([1.0, 3.0]))
    rep = geodesic_convexity_check(obj, 300, (np.zeros(2), 5.0), rng=rng)
    assert rep.ok and rep.worst_margin >= 0


def test_karcher_convexity_has_no_violations(rng):
    mats = [_random_spd(rng, 3) for _ in range(4)]
    obj = KarcherMean(mats)
    rep = geodesic_convexity_check(obj, 300, (mats[0], 2.0), rng=rng)
    assert rep.violations == 0


def test_rayleigh_convexity_is_reported_not_raised(rng):
    obj = RayleighQuotient(np.diag([2.0, 1.0, 1.0, 1.0]))
    # a large ball around the top eigenvector reaches where -x^T A x / 2 is concave
    rep = geodesic_convexity_check(obj, 300, (np.eye(4)[0], 1.4), rng=rng)
    assert rep.samples == 300
    assert rep.violations > 0
    small = geodesic_convexity_check(obj, 300, (np.eye(4)[0], 0.3), rng=rng)
    assert small.violations == 0


def test_strong_minimum_trivial_cases(rng):
    est = estimate_strong_minimum(FlatQuadratic(np.eye(3)), np.zeros(3), 100, rng=rng)
    assert est.mu == pytest.approx(1.0, rel=1e-12)
    assert est.L == pytest.approx(1.0, rel=1e-12)
    a1 = _random_spd(rng, 3)
    est = estimate_strong_minimum(KarcherMean([a1]), a1, 100, rng=rng)
    assert est.mu == pytest.approx(2.0, rel=1e-8)


def test_strong_minimum_on_desk_karcher(karcher_desk, rng):
    inst, _ = karcher_desk
    est = estimate_strong_minimum(inst.objective, inst.zref, 50, radius=1.0, rng=rng)
    assert est.mu > 0
    assert est.L >= est.mu


def test_invalid_problem_data():
    with pytest.raises(InputError):
        RayleighQuotient(np.array([[1.0, 2.0], [0.0, 1.0]]))
    with pytest.raises(InputError):
        KarcherMean([])
    with pytest.raises(InputError):
        KarcherMean([np.diag([1.0, -1.0])])
    with pytest.raises(InputError):
        FlatQuadratic(np.diag([1.0, 0.0]))
