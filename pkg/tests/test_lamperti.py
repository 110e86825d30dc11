import numpy as np
import pytest
from scipy.integrate import quad

from youngpath.coefficients import Coefficient, parse_coefficient, regularize
from youngpath.errors import CertificateError
from youngpath.fractional import FracConfig, lambda_integral
from youngpath.lamperti import (
    Certificate,
    LampertiMap,
    certify,
    phi,
    phi_inverse,
    solve_lamperti,
    solve_regularized,
)
from youngpath.paths import GridPath, HurstSpec, generate_fbm


def power(C=1.0, kappa=0.5):
    return Coefficient("power", kappa=kappa, scale=C)


class TestPhi:
    def test_closed_form_sqrt(self):
        # int_0^4 s^{-1/2} ds = 2*sqrt(4) = 4
        m = LampertiMap(power())
        assert phi(m, 4.0) == pytest.approx(4.0, rel=1e-14)
        assert phi(m, 0.0) == 0.0

    def test_odd(self):
        m = LampertiMap(power(C=2.0, kappa=0.3))
        for v in (0.1, 1.0, 7.5):
            assert phi(m, -v) == -phi(m, v)

    def test_regularized_linear_inside_threshold(self):
        # n=2 -> threshold 1/4, rho(1/4) = 1/2: phi_n(1/8) = (1/8)/(1/2) = 0.25
        m = LampertiMap(power(), level=2)
        assert phi(m, 1 / 8) == pytest.approx(0.25, rel=1e-14)

    def test_regularized_continuous_at_threshold(self):
        m = LampertiMap(power(C=1.5, kappa=0.4), level=3)
        theta = 2.0 ** -3
        below = phi(m, theta * (1 - 1e-12))
        above = phi(m, theta * (1 + 1e-12))
        assert below == pytest.approx(above, rel=1e-9)

    def test_generic_profile_matches_quad(self):
        c = parse_coefficient("radial kappa=0.5 profile=power_plus_linear C=1 b=0.5")
        m = LampertiMap(c)
        for xi in (0.3, 1.0, 2.5):
            ref, _ = quad(lambda s: 1.0 / (np.sqrt(s) + 0.5 * s), 0, xi)
            assert phi(m, xi) == pytest.approx(ref, rel=1e-7)

    def test_generic_needs_integrable_reciprocal(self):
        steep = Coefficient("radial", kappa=0.5, profile=lambda r: r / (1 + r))
        with pytest.raises(CertificateError):
            LampertiMap(steep)


class TestPhiInverse:
    def test_closed_form(self):
        m = LampertiMap(power())
        assert phi_inverse(m, 4.0) == pytest.approx(4.0, rel=1e-14)
        assert phi_inverse(m, 0.0) == 0.0
        assert phi_inverse(m, -2.0) == pytest.approx(-1.0, rel=1e-14)

    def test_power_law_identity(self):
        # |phi^{-1}(v)| = [C(1-k)]^{1/(1-k)} |v|^{1/(1-k)} on a dense sample
        C, kappa = 2.0, 0.4
        m = LampertiMap(power(C, kappa))
        v = np.linspace(-5, 5, 1001)
        got = np.abs(phi_inverse(m, v))
        want = (C * (1 - kappa)) ** (1 / (1 - kappa)) * np.abs(v) ** (1 / (1 - kappa))
        np.testing.assert_allclose(got, want, rtol=1e-12)

    @pytest.mark.parametrize("spec", ["power C=1 kappa=0.5",
                                      "radial kappa=0.5 profile=power_plus_linear C=1 b=1"])
    def test_round_trip(self, spec):
        m = LampertiMap(parse_coefficient(spec))
        rng = np.random.default_rng(0)
        v = rng.uniform(-20, 20, 2000)
        w = phi(m, phi_inverse(m, v))
        assert np.max(np.abs(w - v) / (1 + np.abs(v))) < 1e-10

    def test_round_trip_regularized(self):
        m = LampertiMap(power(), level=4)
        rng = np.random.default_rng(1)
        v = rng.uniform(-10, 10, 2000)
        w = phi(m, phi_inverse(m, v))
        assert np.max(np.abs(w - v) / (1 + np.abs(v))) < 1e-10

    def test_domination_by_regularized_inverse(self):
        base = LampertiMap(power())
        v = np.linspace(-6, 6, 1001)
        for n in (0, 2, 5, 8):
            reg = LampertiMap(power(), level=n)
            assert np.all(np.abs(phi_inverse(base, v))
                          <= np.abs(phi_inverse(reg, v)) + 1e-14)

    def test_local_lipschitz_of_regularized_inverse(self):
        # difference quotients on |v| <= M are bounded by sigma_n(phi_n^{-1}(M))
        M = 3.0
        for n in (1, 3, 6):
            m = LampertiMap(power(), level=n)
            v = np.linspace(-M, M, 4001)
            y = phi_inverse(m, v)
            quot = np.abs(np.diff(y) / np.diff(v))
            cap = float(regularize(power(), n).radial(abs(phi_inverse(m, M))))
            assert np.max(quot) <= cap * (1 + 1e-9)


class TestSolvers:
    def test_zero_driver_zero_start(self):
        x = GridPath(np.zeros(64), horizon=1.0)
        y = solve_lamperti(x, power(), a=0.0)
        np.testing.assert_array_equal(y.values, 0.0)

    def test_linear_driver_quadratic_solution(self):
        # x_t = t, a = 0: y_t = t^2/4 and y' = sqrt(y) along the path
        t = np.linspace(0, 1, 513)
        y = solve_lamperti(GridPath(t, 1.0), power(), a=0.0)
        np.testing.assert_allclose(y.values1d(), t ** 2 / 4, atol=1e-13)
        mid = slice(1, -1)
        dy = np.gradient(y.values1d(), t)
        np.testing.assert_allclose(dy[mid], np.sqrt(y.values1d())[mid], atol=2e-3)

    def test_initial_value_honored(self):
        t = np.linspace(0, 1, 257)
        y = solve_lamperti(GridPath(t, 1.0), power(), a=1.0)
        assert y.values1d()[0] == pytest.approx(1.0, rel=1e-12)

    def test_driver_must_start_at_zero(self):
        with pytest.raises(ValueError):
            solve_lamperti(GridPath(np.linspace(1, 2, 16), 1.0), power())

    def test_regularized_sandwich_and_convergence(self):
        x = generate_fbm(HurstSpec(0.6, seed=4), 1025, 1.0)
        y = solve_lamperti(x, power(), a=0.0).values1d()
        prev = None
        for n in (1, 3, 6, 10):
            yn = solve_regularized(x, power(), n).values1d()
            assert np.all(np.abs(y) <= np.abs(yn) + 1e-12)
            if prev is not None:
                # |y^{n+1}| sits between |y^n| and |y|
                assert np.all(np.abs(yn) <= np.abs(prev) + 1e-12)
            prev = yn
        assert np.max(np.abs(prev - y)) < 0.05

    def test_regularized_matches_euler_oracle(self):
        # sigma_n is Lipschitz, so a fine Euler loop is a valid oracle
        x = generate_fbm(HurstSpec(0.65, seed=7), 8193, 1.0)
        n_level = 3
        yn = solve_regularized(x, power(), n_level).values1d()
        sig = regularize(power(), n_level)
        xv = x.values1d()
        y_euler = np.empty_like(xv)
        y_euler[0] = 0.0
        for i in range(len(xv) - 1):
            y_euler[i + 1] = y_euler[i] + float(sig.radial(abs(y_euler[i]))) \
                * np.sign(1.0) * (xv[i + 1] - xv[i])
        assert np.max(np.abs(y_euler - yn)) < 0.02

    def test_fixed_point_of_extended_integral(self):
        # y = phi^{-1}(x) solves y_t = int_0^t sigma(y) dx_s
        x = generate_fbm(HurstSpec(0.6, seed=3), 2049, 1.0)
        y = solve_lamperti(x, power(), a=0.0)
        cfg = FracConfig(gamma=0.58, kappa=0.5, eta=0.3)
        lam = lambda_integral(y, x, power(), cfg)
        resid = np.max(np.abs(y.values1d() - lam.values1d()))
        assert resid < 5e-3 * (1 + np.max(np.abs(y.values1d())))


class TestCertificate:
    def cfg(self, eta=0.3):
        return FracConfig(gamma=0.6, kappa=0.5, eta=eta)

    def test_window_values(self):
        cert = certify(GridPath(np.ones(32), 1.0), self.cfg())
        assert cert.admissible_eta_window[0] == pytest.approx(1 / 6)
        assert cert.admissible_eta_window[1] == pytest.approx(0.5)
        assert cert.passed
        assert cert.integral_value == pytest.approx(1.0, rel=1e-12)

    def test_failure_on_zero_plateau(self):
        v = np.concatenate([np.zeros(16), np.linspace(0, 1, 17)])
        cert = certify(GridPath(v, 1.0), self.cfg())
        assert cert.verdict == "fail"
        assert cert.integral_value == np.inf

    def test_lamperti_paths_certify(self):
        # exponent arithmetic: |y|^-eta ~ |x|^(-eta/(1-kappa)), power 0.6 < 1
        passed = 0
        for seed in range(20):
            x = generate_fbm(HurstSpec(0.6, seed=seed), 513, 1.0)
            y = solve_lamperti(x, power(), a=0.0)
            passed += certify(y, self.cfg()).passed
        assert passed >= 19
