import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nbarrier.barrier import (
    BarrierConstruction,
    eval_pq,
    intercept_ordering_ok,
    intercepts,
    membership,
    verify_inclusion,
)
from nbarrier.bounds import BoundParams

LN2 = math.log(2.0)


def lower_example():
    return BarrierConstruction.lower((1, 2), BoundParams(alpha=(1, 1), k=(1, 1)), (1, 1))


def upper_example():
    return BarrierConstruction.upper((1, 2), (1, 1), (1, 1), (1, 1))


def test_eval_pq_examples():
    bc = BarrierConstruction.lower((1, 1), BoundParams(alpha=(1, 1), k=(1, 1)), (1, 1))
    assert eval_pq(bc, (0, 0)) == pytest.approx((0.0, 0.0), abs=1e-15)
    p, q = eval_pq(lower_example(), (1, 1))
    assert (p, q) == pytest.approx((2 * LN2, 3 * LN2), rel=1e-14)
    p, q = eval_pq(upper_example(), (1 / 3, 1 / 3))
    assert (p, q) == pytest.approx((2 / 3, 1.0), rel=1e-14)


def test_eval_pq_batch_matches_scalar(rng):
    bc = BarrierConstruction.upper((1, 3, 2), (1, 2, 0.5), (1, 2, 1.5), (1, 2, 3))
    pts = rng.uniform(0, 3, size=(3, 20))
    p, q = eval_pq(bc, pts)
    for j in range(20):
        ps, qs = eval_pq(bc, pts[:, j])
        assert (p[j], q[j]) == pytest.approx((ps, qs), rel=1e-14)


def test_eval_pq_rejects_negative_and_mismatch():
    with pytest.raises(ValueError):
        eval_pq(lower_example(), (-0.1, 0))
    with pytest.raises(ValueError):
        eval_pq(lower_example(), (0, 0, 0))


def test_membership_examples():
    tags = membership(lower_example(), (0, 0))
    assert all(bool(v) for v in tags.values())
    tags = membership(lower_example(), (1, 1))
    assert not any(bool(v) for v in tags.values())
    tags = membership(upper_example(), (4, 4))
    assert all(bool(v) for v in tags.values())


def test_intercepts_lie_on_level_sets():
    d, alpha, k, ulow = (1.0, 3.0, 2.0), (0.5, 2.0, 1.0), (0.3, 2.0, 1.5), (0.7, 0.4, 1.2)
    bc = BarrierConstruction.lower(d, BoundParams(alpha=alpha, k=k), ulow)
    ic = intercepts(bc)
    lam2, eta, lam1 = bc.levels.as_tuple()
    for j in range(3):
        # functionals evaluated in shifted coordinates, where intercepts may dip below zero
        def q_at(x):
            return sum(alpha[i] * d[i] * math.log((x if i == j else 0.0) + k[i]) for i in range(3))

        def p_at(x):
            return sum(alpha[i] * math.log((x if i == j else 0.0) + k[i]) for i in range(3))

        assert q_at(ic.u2[j]) == pytest.approx(lam2, rel=1e-12, abs=1e-12)
        assert q_at(ic.u1[j]) == pytest.approx(lam1, rel=1e-12, abs=1e-12)
        assert p_at(ic.u0[j]) == pytest.approx(eta, rel=1e-12, abs=1e-12)

    bc = BarrierConstruction.upper(d, alpha, (1.0, 2.0, 1.5), ulow)
    ic = intercepts(bc)
    m = (1.0, 2.0, 1.5)
    lam2, eta, lam1 = bc.levels.as_tuple()
    for j in range(3):
        assert alpha[j] * d[j] * ic.u2[j] ** m[j] == pytest.approx(lam2, rel=1e-12)
        assert alpha[j] * d[j] * ic.u1[j] ** m[j] == pytest.approx(lam1, rel=1e-12)
        assert alpha[j] * ic.u0[j] ** m[j] == pytest.approx(eta, rel=1e-12)


@pytest.mark.parametrize("make", [lower_example, upper_example])
def test_verify_inclusion_examples(make):
    rep = verify_inclusion(make(), samples=100_000, seed=0)
    assert rep.intercept_ordering_ok
    assert rep.violations == []
    assert rep.ok
    assert rep.samples == 100_000 and rep.seed == 0


def test_corrupted_lower_construction_is_caught():
    bc = lower_example()
    bad = bc.with_levels(lambda1=bc.levels.lambda2 + 1.0)
    rep = verify_inclusion(bad, samples=100_000, seed=0)
    assert len(rep.violations) >= 1
    assert not rep.intercept_ordering_ok
    assert not rep.ok
    idx = [v.index for v in rep.violations]
    assert idx == sorted(idx)
    assert rep.violations[0].rule == "in_Q1 => in_P"


def test_corrupted_upper_construction_is_caught():
    bc = upper_example()
    bad = bc.with_levels(lambda2=0.5)
    rep = verify_inclusion(bad, samples=10_000, seed=1)
    assert rep.violations and not rep.intercept_ordering_ok
    assert {v.rule for v in rep.violations} == {"in_Q2 => in_R"}


def test_violation_cap_and_determinism():
    bad = lower_example().with_levels(lambda1=10.0)
    a = verify_inclusion(bad, samples=5_000, seed=7, max_recorded=3)
    b = verify_inclusion(bad, samples=5_000, seed=7, max_recorded=3)
    assert len(a.violations) == 3
    assert a.violations == b.violations


def test_verify_rejects_zero_samples():
    with pytest.raises(ValueError):
        verify_inclusion(lower_example(), samples=0)


pos = st.floats(min_value=1e-2, max_value=1e2)


@st.composite
def constructions(draw):
    n = draw(st.integers(1, 4))
    vec = lambda s: tuple(draw(st.lists(s, min_size=n, max_size=n)))
    d, alpha, thr = vec(pos), vec(pos), vec(pos)
    if draw(st.booleans()):
        return BarrierConstruction.lower(d, BoundParams(alpha=alpha, k=vec(pos)), thr)
    return BarrierConstruction.upper(d, alpha, vec(st.floats(1.0, 3.0)), thr)


@settings(max_examples=150, deadline=None)
@given(constructions(), st.integers(0, 2**32 - 1))
def test_random_constructions_nest(bc, seed):
    rep = verify_inclusion(bc, samples=2_000, seed=seed)
    assert rep.intercept_ordering_ok
    assert rep.violations == []


@settings(max_examples=100, deadline=None)
@given(constructions())
def test_levels_consistent_with_intercept_order(bc):
    assert intercept_ordering_ok(bc)


def test_intercept_examples():
    r2, r4 = math.sqrt(2) - 1, 2**0.25 - 1
    ic = intercepts(BarrierConstruction.lower((1, 1), BoundParams(alpha=(1, 1), k=(1, 1)), (1, 1)))
    for v in (ic.u2, ic.u0, ic.u1):
        np.testing.assert_allclose(v, (1, 1), rtol=1e-14)
    ic = intercepts(lower_example())
    np.testing.assert_allclose(ic.u2, (1, r2), rtol=1e-14)
    np.testing.assert_allclose(ic.u0, (r2, r2), rtol=1e-14)
    np.testing.assert_allclose(ic.u1, (r2, r4), rtol=1e-14)
    ic = intercepts(upper_example())
    np.testing.assert_allclose(ic.u2, (2, 1), rtol=1e-14)
    np.testing.assert_allclose(ic.u0, (2, 2), rtol=1e-14)
    np.testing.assert_allclose(ic.u1, (4, 2), rtol=1e-14)


@settings(max_examples=100, deadline=None)
@given(constructions(), st.lists(st.floats(0.0, 10.0), min_size=4, max_size=4))
def test_eval_pq_monotone(bc, raw):
    u = np.asarray(raw[: bc.n])
    p0, q0 = eval_pq(bc, u)
    for i in range(bc.n):
        e = np.eye(bc.n)[i]
        p1, q1 = eval_pq(bc, u + 1e-6 * (1 + u[i]) * e)
        assert p1 >= p0 and q1 >= q0  # a tiny step may round away
        p2, q2 = eval_pq(bc, u + (1 + u[i]) * e)
        assert p2 > p0 and q2 > q0


@settings(max_examples=100, deadline=None)
@given(constructions(), st.lists(st.floats(0.05, 1.0), min_size=4, max_size=4))
def test_point_on_q2_surface(bc, raw):
    # walk along a ray from the origin until q reaches lambda2
    from scipy.optimize import brentq

    w = np.asarray(raw[: bc.n])
    lam2 = bc.levels.lambda2
    g = lambda t: float(eval_pq(bc, t * w)[1]) - lam2
    hi = 1.0
    while g(hi) < 0:
        hi *= 2
    t = brentq(g, 0.0, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps) if g(0.0) < 0 else 0.0
    if t == 0.0:
        return  # the origin already lies beyond the surface
    assert abs(g(t)) <= 1e-10 * max(1.0, abs(lam2))
    inside = membership(bc, t * w * (1 - 1e-6))["in_Q2"]
    outside = membership(bc, t * w * (1 + 1e-6))["in_Q2"]
    assert inside != outside
