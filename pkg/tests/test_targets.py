"""Target potentials, gradients, and chart transforms."""

import numpy as np
import numpy.testing as npt
import pytest

from hmckit import (
    NumericError,
    TargetDensity,
    apply_chart,
    gaussian,
    identity_chart,
    iid_gaussian,
    invert_chart,
    make_target,
    scaling_chart,
    sinh_chart,
    warped_gaussian,
)

ALL_BUILTINS = [
    iid_gaussian(1),
    iid_gaussian(3),
    gaussian(np.zeros(2), np.array([[4.0, 1.0], [1.0, 2.0]])),
    warped_gaussian(2, 100.0, 0.1),
    warped_gaussian(5, 100.0, 0.1),
]


def fd_gradient(target, q, h=1e-5):
    out = np.empty(target.dim)
    for j in range(target.dim):
        e = np.zeros(target.dim)
        e[j] = h
        out[j] = (target.potential(q + e) - target.potential(q - e)) / (2 * h)
    return out


def test_warped_gaussian_mode_values():
    t = warped_gaussian(2, 100.0, 0.1)
    assert t.potential([0.0, 10.0]) == pytest.approx(0.0, abs=1e-15)
    npt.assert_allclose(t.gradient([0.0, 10.0]), [0.0, 0.0], atol=1e-15)
    assert t.potential([10.0, 0.0]) == pytest.approx(0.5)
    assert t.potential([0.0, 0.0]) == pytest.approx(50.0)


def test_iid_gaussian_values():
    t = iid_gaussian(1)
    assert t.potential([2.0]) == pytest.approx(2.0)
    npt.assert_allclose(t.gradient([2.0]), [2.0])
    assert t.potential([0.0]) == 0.0
    t2 = iid_gaussian(2)
    npt.assert_allclose(t2.gradient([1.0, -1.0]), [1.0, -1.0])


def test_gaussian_values():
    t = gaussian(np.zeros(2), np.eye(2))
    assert t.potential([3.0, 4.0]) == pytest.approx(12.5)
    t2 = gaussian(np.zeros(2), np.diag([4.0, 1.0]))
    npt.assert_allclose(t2.gradient([2.0, 0.0]), [0.5, 0.0])


def test_gaussian_rejects_bad_covariance():
    with pytest.raises(ValueError):
        gaussian(np.zeros(2), np.array([[1.0, 2.0], [2.0, 1.0]]))  # not PD
    with pytest.raises(ValueError):
        gaussian(np.zeros(2), np.array([[1.0, 0.5], [0.0, 1.0]]))  # not symmetric


def test_warped_gaussian_rejects_bad_args():
    with pytest.raises(ValueError):
        warped_gaussian(1)
    with pytest.raises(ValueError):
        warped_gaussian(2, sigma2=-1.0)


def test_make_target_dispatch():
    assert make_target("iid_gaussian", dim=3).dim == 3
    assert make_target("warped_gaussian", dim=2, sigma2=50.0, b=0.2).kind == "warped_gaussian"
    assert make_target("gaussian", cov=np.eye(2)).dim == 2
    with pytest.raises(ValueError):
        make_target("cauchy")


def test_dimension_mismatch_rejected():
    t = iid_gaussian(2)
    with pytest.raises(ValueError):
        t.potential([1.0, 2.0, 3.0])
    with pytest.raises(ValueError):
        t.gradient([1.0])


def test_nonfinite_potential_raises_numeric_error():
    bad = TargetDensity(1, lambda q: float("inf"), lambda q: q)
    with pytest.raises(NumericError):
        bad.potential([0.0])


@pytest.mark.parametrize("target", ALL_BUILTINS, ids=lambda t: t.label)
def test_gradient_matches_finite_differences(target):
    rng = np.random.default_rng(42)
    for _ in range(100):
        q = 2.0 * rng.standard_normal(target.dim)
        grad = target.gradient(q)
        fd = fd_gradient(target, q)
        npt.assert_array_less(np.abs(grad - fd), 1e-6 * (1.0 + np.abs(grad)))


@pytest.mark.parametrize("target", ALL_BUILTINS, ids=lambda t: t.label)
def test_hessian_symmetric(target):
    rng = np.random.default_rng(7)
    for _ in range(10):
        q = rng.standard_normal(target.dim)
        h = target.hessian(q)
        npt.assert_allclose(h, h.T, atol=1e-10)


def test_fd_hessian_fallback_matches_analytic():
    t = warped_gaussian(2, 100.0, 0.1)
    bare = TargetDensity(2, t.potential, t.gradient)  # no analytic Hessian
    rng = np.random.default_rng(3)
    for _ in range(5):
        q = rng.standard_normal(2)
        npt.assert_allclose(bare.hessian(q), t.hessian(q), atol=1e-5, rtol=1e-5)


def test_warped_potential_even_in_first_coordinate():
    t = warped_gaussian(3, 100.0, 0.1)
    rng = np.random.default_rng(5)
    for _ in range(20):
        q = rng.standard_normal(3) * 3.0
        flipped = q.copy()
        flipped[0] = -flipped[0]
        assert t.potential(q) == pytest.approx(t.potential(flipped), rel=1e-12)


def test_batch_potential_agrees_with_scalar():
    for target in ALL_BUILTINS:
        rng = np.random.default_rng(11)
        qs = rng.standard_normal((20, target.dim))
        batch = target.potential_batch(qs)
        single = np.array([target.potential(q) for q in qs])
        npt.assert_allclose(batch, single, rtol=1e-12)


def test_apply_chart_scaling_frozen_value():
    # standard normal under q = 2u: V'(u) = 2u^2 - log 2
    t = iid_gaussian(1)
    chart = scaling_chart([2.0])
    t2 = apply_chart(t, chart)
    for u in (-1.3, 0.0, 0.7, 2.5):
        expected = 2.0 * u * u - np.log(2.0)
        assert t2.potential([u]) == pytest.approx(expected, abs=1e-12)


def test_apply_chart_identity_is_noop():
    t = warped_gaussian(2)
    t2 = apply_chart(t, identity_chart(2))
    rng = np.random.default_rng(9)
    for _ in range(20):
        q = rng.standard_normal(2) * 2.0
        assert t2.potential(q) == pytest.approx(t.potential(q), abs=1e-12)


def test_apply_chart_round_trip():
    t = iid_gaussian(2)
    chart = sinh_chart(2)
    back = apply_chart(apply_chart(t, chart), invert_chart(chart))
    rng = np.random.default_rng(13)
    for _ in range(20):
        q = rng.standard_normal(2)
        assert back.potential(q) == pytest.approx(t.potential(q), abs=1e-10)


def test_chart_inverse_round_trip():
    for chart in (scaling_chart([2.0, 0.5]), sinh_chart(2)):
        rng = np.random.default_rng(17)
        for _ in range(20):
            u = rng.standard_normal(2)
            npt.assert_allclose(chart.inverse(np.asarray(chart.forward(u))), u, atol=1e-10)


def test_transformed_gradient_matches_finite_differences():
    t = iid_gaussian(2)
    for chart in (scaling_chart([2.0, 0.5]), sinh_chart(2)):
        t2 = apply_chart(t, chart)
        rng = np.random.default_rng(19)
        for _ in range(20):
            u = rng.standard_normal(2)
            npt.assert_allclose(t2.gradient(u), fd_gradient(t2, u), atol=1e-6)


def test_uncorrected_chart_differs_only_by_log_jacobian():
    t = iid_gaussian(1)
    chart = sinh_chart(1)
    good = apply_chart(t, chart)
    bad = apply_chart(t, chart, include_jacobian=False)
    u = np.array([0.8])
    gap = bad.potential(u) - good.potential(u)
    assert gap == pytest.approx(np.log(np.cosh(0.8)), abs=1e-12)
