import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from youngpath.coefficients import (
    Coefficient,
    check_hypotheses,
    evaluate,
    exact_seminorm,
    format_coefficient,
    interpolation_bound,
    parse_coefficient,
    recip_profile_integral,
    regularize,
    seminorm_estimate,
)


def dense_scan_seminorm(coeff, radius, n=3000):
    """Independent oracle: all-pairs ratio scan over a dense radius grid."""
    r = np.linspace(radius / n, radius, n)
    f = np.asarray(coeff.radial(r))
    i, j = np.triu_indices(n, k=1)
    return float(np.max(np.abs(f[j] - f[i]) / np.abs(r[j] ** coeff.kappa - r[i] ** coeff.kappa)))


class TestEvaluate:
    def test_power_scalar(self):
        c = Coefficient("power", kappa=0.5, scale=1.0)
        assert evaluate(c, 4.0) == pytest.approx(2.0, rel=1e-15)

    def test_zero_at_origin(self):
        c = Coefficient("power", kappa=0.3, scale=2.0)
        assert evaluate(c, 0.0) == 0.0

    def test_regularized_at_origin(self):
        c = regularize(Coefficient("power", kappa=0.5, scale=1.0), 3)
        assert evaluate(c, 0.0) == pytest.approx((1 / 8) ** 0.5, rel=1e-15)

    def test_regularized_inside_threshold(self):
        # C=2, kappa=0.5, n=3: clamp at 1/8, so the value at 0.01 is 2*(1/8)^0.5
        c = regularize(Coefficient("power", kappa=0.5, scale=2.0), 3)
        assert evaluate(c, 0.01) == pytest.approx(2.0 * (1 / 8) ** 0.5, rel=1e-15)

    def test_regularized_bitwise_equal_above_threshold(self):
        base = Coefficient("power", kappa=0.5, scale=1.3)
        reg = regularize(base, 2)
        xs = np.linspace(0.26, 3.0, 101)
        np.testing.assert_array_equal(reg.radial(xs), base.radial(xs))

    def test_boundary_level_zero(self):
        base = Coefficient("power", kappa=0.5, scale=1.0)
        reg = regularize(base, 0)
        assert evaluate(reg, 0.0) == evaluate(base, 1.0)

    def test_batch_and_vector_shapes(self):
        c3 = Coefficient("power", kappa=0.5, scale=1.0, output_dim=3)
        v = evaluate(c3, np.array([3.0, 0.0, 4.0]))
        assert v.shape == (3,)
        assert v[0] == pytest.approx(np.sqrt(5.0))
        assert v[1] == v[2] == 0.0
        batch = evaluate(c3, np.zeros((7, 3)))
        assert batch.shape == (7, 3)

    def test_radiality_under_rotation(self):
        c = Coefficient("power", kappa=0.4, scale=2.0, output_dim=3)
        rng = np.random.default_rng(5)
        for _ in range(20):
            xi = rng.standard_normal(3)
            q, _ = np.linalg.qr(rng.standard_normal((3, 3)))
            np.testing.assert_allclose(evaluate(c, q @ xi), evaluate(c, xi), rtol=1e-12)

    def test_profile_must_vanish_at_zero(self):
        with pytest.raises(ValueError):
            Coefficient("radial", kappa=0.5, profile=lambda r: r ** 0.5 + 1.0)

    def test_kappa_range_enforced(self):
        with pytest.raises(ValueError):
            Coefficient("power", kappa=1.0)


class TestSeminorm:
    def test_power_is_exact(self):
        c = Coefficient("power", kappa=0.5, scale=3.0)
        assert exact_seminorm(c) == 3.0
        est = seminorm_estimate(c, 100, 2.0, seed=1)
        assert est.value == pytest.approx(3.0, rel=1e-10)

    def test_power_plus_linear_bounded(self):
        # rho = r^0.5 + r on [0,1]: ratio splits as 0.5-part (=1) plus the
        # linear part's ratio, so the sup is 1 + sup(r2-r1)/(r2^.5-r1^.5)
        c = parse_coefficient("radial kappa=0.5 profile=power_plus_linear C=1 b=1")
        est = seminorm_estimate(c, 20000, 1.0, seed=2)
        oracle = dense_scan_seminorm(c, 1.0)
        assert est.value <= 1.0 + oracle
        assert est.value == pytest.approx(oracle, rel=0.01)

    def test_capped_power_matches_dense_scan(self):
        c = parse_coefficient("radial kappa=0.5 profile=capped_power C=1 cap=1")
        est = seminorm_estimate(c, 20000, 4.0, seed=3)
        assert est.value == pytest.approx(dense_scan_seminorm(c, 4.0), rel=0.01)

    def test_regularized_never_exceeds_base(self):
        base = Coefficient("power", kappa=0.5, scale=1.0)
        reg = regularize(base, 5)
        rng = np.random.default_rng(7)
        r1 = rng.uniform(0, 2, 100000)
        r2 = rng.uniform(0, 2, 100000)
        keep = np.abs(r1 - r2) > 1e-12
        r1, r2 = r1[keep], r2[keep]
        num = np.abs(np.asarray(reg.radial(r2)) - np.asarray(reg.radial(r1)))
        den = np.abs(r2 ** 0.5 - r1 ** 0.5)
        assert np.max(num / den) <= 1.0 + 1e-12


class TestInterpolationBound:
    def test_equal_points(self):
        c = Coefficient("power", kappa=0.5)
        lhs, rhs = interpolation_bound(c, [1.0], [1.0], eta=0.2)
        assert lhs == 0.0
        assert rhs >= 0.0

    def test_eta_zero_endpoint(self):
        c = Coefficient("power", kappa=0.4)
        xi1, xi2 = np.array([0.5]), np.array([2.0])
        lhs, rhs = interpolation_bound(c, xi1, xi2, eta=0.0)
        assert rhs == pytest.approx(2.0 * abs(2.0 - 0.5) ** 0.4)
        assert lhs <= rhs

    def test_rejects_bad_eta_and_zero_args(self):
        c = Coefficient("power", kappa=0.4)
        with pytest.raises(ValueError):
            interpolation_bound(c, [1.0], [2.0], eta=0.7)
        with pytest.raises(ValueError):
            interpolation_bound(c, [0.0], [2.0], eta=0.1)

    @given(st.integers(min_value=0, max_value=2 ** 32 - 1))
    @settings(max_examples=60, deadline=None)
    def test_holds_on_random_draws(self, seed):
        rng = np.random.default_rng(seed)
        kappa = float(rng.choice([0.3, 0.5, 0.7]))
        m = int(rng.choice([1, 3]))
        c = Coefficient("power", kappa=kappa, scale=float(rng.uniform(0.5, 3)), output_dim=m)
        xi1 = rng.standard_normal(m) * 10 ** rng.uniform(-3, 1)
        xi2 = rng.standard_normal(m) * 10 ** rng.uniform(-3, 1)
        eta = float(rng.uniform(0, 1 - kappa))
        lhs, rhs = interpolation_bound(c, xi1, xi2, eta)
        assert lhs <= rhs * (1 + 1e-12)


class TestHypotheses:
    def test_super_young_classification(self):
        c = Coefficient("power", kappa=0.5)
        rep = check_hypotheses(c, gamma=0.6)
        assert rep.regime == "super_young"
        assert rep.regime_product == pytest.approx(0.9)

    def test_classical_young_classification(self):
        c = Coefficient("power", kappa=0.9)
        rep = check_hypotheses(c, gamma=0.6)
        assert rep.regime == "classical_young"
        assert rep.regime_product == pytest.approx(1.14)

    def test_recip_integral_closed_form(self):
        # int_0^1 s^{-1/2} ds = 2
        c = Coefficient("power", kappa=0.5)
        assert recip_profile_integral(c, 1.0) == pytest.approx(2.0, rel=1e-8)
        rep = check_hypotheses(c, gamma=0.6)
        assert rep.recip_integrable

    def test_monotone_and_lower_bound(self):
        c = parse_coefficient("radial kappa=0.5 profile=power_plus_linear C=1 b=0.5")
        rep = check_hypotheses(c, gamma=0.6)
        assert rep.monotone_increasing
        assert rep.power_lower_ok
        assert rep.gradient_regularity == "assumed"


class TestParsing:
    def test_power_round_trip(self):
        c = parse_coefficient("power C=2.5 kappa=0.5")
        assert c.kind == "power" and c.scale == 2.5 and c.kappa == 0.5
        assert parse_coefficient(format_coefficient(c)).scale == 2.5

    def test_radial_builtin(self):
        c = parse_coefficient("radial kappa=0.4 profile=capped_power C=2 cap=1.5")
        assert c.radial(1000.0) == pytest.approx(1.5)
        text = format_coefficient(c)
        assert "capped_power" in text
        d = parse_coefficient(text.split(" [")[0])
        assert d.radial(1000.0) == pytest.approx(1.5)

    def test_unknown_profile_rejected(self):
        with pytest.raises(ValueError):
            parse_coefficient("radial kappa=0.5 profile=nope")
        with pytest.raises(ValueError):
            parse_coefficient("weird a=1")
