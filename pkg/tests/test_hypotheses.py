import numpy as np
import pytest

from nbarrier.hypotheses import affine_slopes, check_h1, check_h2
from nbarrier.model import HypothesisRegion, LV2Params, SystemSpec, eval_reaction, lv2_system, lv2_thresholds

from conftest import lv


def test_h1_lv_thresholds_pass():
    spec, region, _ = lv(2, 2)
    rep = check_h1(spec, region)
    assert rep.holds and rep.method == "affine_exact"
    assert rep.worst_value == 0.0
    # vertex values: f1 = 1, 1/2, 0 and f2 = 1, 0, 1/2 at 0, (1/2,0), (0,1/2)
    verts = np.array([[0, 0.5, 0], [0, 0, 0.5]])
    np.testing.assert_allclose(eval_reaction(spec, verts), [[1, 0.5, 0], [1, 0, 0.5]])


def test_h1_oversized_thresholds_fail():
    spec, _, _ = lv(2, 2)
    rep = check_h1(spec, HypothesisRegion(lower=(2, 2)))
    assert not rep.holds
    # f1(2,0) = -1, but f2(2,0) = f1(0,2) = -3 is the most negative vertex value
    assert eval_reaction(spec, (2, 0))[0] == -1
    assert rep.worst_value == -3
    assert rep.worst_point == (0.0, 2.0)


def test_h1_kappa_scaling_keeps_sign():
    spec, region, _ = lv(3, 2, kappa=5)
    assert check_h1(spec, region).holds


def test_h2_examples():
    spec, region, _ = lv(2, 2)
    rep = check_h2(spec, region)
    assert rep.holds and rep.method == "affine_exact"
    assert rep.worst_value == 0.0

    spec, region, _ = lv(0.5, 0.5)
    assert region.upper == (2.0, 2.0)
    rep = check_h2(spec, region)
    assert rep.holds and rep.method == "affine_exact"

    spec, _, _ = lv(2, 2)
    rep = check_h2(spec, HypothesisRegion(upper=(0.25, 0.25)))
    assert not rep.holds
    assert rep.worst_value == pytest.approx(0.75)
    assert rep.worst_point == (0.0, 0.25)  # ties with (1/4, 0) go to the smaller point


def test_missing_thresholds():
    spec, _, _ = lv()
    with pytest.raises(ValueError):
        check_h1(spec, HypothesisRegion(upper=(1, 1)))
    with pytest.raises(ValueError):
        check_h2(spec, HypothesisRegion(lower=(1, 1)))
    with pytest.raises(ValueError):
        check_h1(spec, HypothesisRegion(lower=(1, 1, 1)))
    with pytest.raises(ValueError):
        check_h2(spec, lv2_thresholds(2, 2), box_factor=0.5)


def test_affine_detection():
    spec, _, _ = lv(3, 0.5, kappa=2)
    G = affine_slopes(spec, (1, 1))
    np.testing.assert_allclose(G, [[-1, -3], [-1, -2]], atol=1e-14)

    quad = SystemSpec(d=(1, 1), l=(1, 1), theta=0, reaction=lambda u: np.stack([1 - u[0] ** 2 - u[1], 1 - u[0] - u[1]]))
    assert affine_slopes(quad, (1, 1)) is None


def test_nonlinear_falls_back_to_sampling():
    # sign of 1 - u - v, times a positive nonlinear factor
    f = lambda u: np.stack([(1 - u[0] - u[1]) * (1 + u[0] ** 2), (1 - u[0] - u[1]) * np.exp(u[1])])
    spec = SystemSpec(d=(1, 1), l=(1, 1), theta=0, reaction=f)
    region = HypothesisRegion(lower=(1, 1), upper=(1, 1))
    r1 = check_h1(spec, region, budget=5_000, seed=3)
    r2 = check_h2(spec, region, budget=5_000, seed=3)
    assert r1.method == r2.method == "sampling"
    assert r1.holds and r2.holds
    assert "not a proof" in r1.note and "ubar" in r2.note
    assert r1.samples_used == r2.samples_used == 5_000
    # seeded sampling is reproducible
    assert check_h1(spec, region, budget=5_000, seed=3) == r1


def test_pointwise_only_reaction_is_supported():
    def f(u):
        if np.ndim(u) != 1:
            raise ValueError("one state at a time")
        return np.array([1 - u[0] - 2 * u[1], 1 - 2 * u[0] - u[1]])

    spec = SystemSpec(d=(1, 1), l=(1, 1), theta=0, reaction=f)
    rep = check_h1(spec, lv2_thresholds(2, 2), budget=500, force_sampling=True)
    assert rep.holds


def test_positive_slope_is_sampled():
    # cooperative coupling: f1 increases with v, so the face vertices are not enough
    f = lambda u: np.stack([1 - u[0] + 0.5 * u[1], 1 - u[1] + 0.5 * u[0]])
    spec = SystemSpec(d=(1, 1), l=(1, 1), theta=0, reaction=f)
    rep = check_h2(spec, HypothesisRegion(upper=(2, 2)), budget=20_000)
    assert rep.method == "sampling"
    assert "positive slope" in rep.note
    assert not rep.holds  # f1(2, 8) = 1 - 2 + 4 > 0


@pytest.mark.parametrize("seed", range(6))
def test_exact_and_sampling_agree(seed):
    rng = np.random.default_rng(seed)
    a1, a2, kappa = np.exp(rng.uniform(np.log(0.25), np.log(4), 3))
    spec, region, _ = lv2_system(LV2Params(a1, a2, kappa))
    # the LV thresholds hold; inflated ones should fail under both methods
    for scale in (1.0, 1.5):
        reg = HypothesisRegion(lower=tuple(scale * v for v in region.lower), upper=tuple(v / scale for v in region.upper))
        for check in (check_h1, check_h2):
            exact = check(spec, reg)
            sampled = check(spec, reg, budget=20_000, seed=seed, force_sampling=True)
            assert exact.method == "affine_exact"
            assert exact.holds == sampled.holds == (scale == 1.0)
