import math

import numpy as np
import pytest

from infdiv.decompose import (
    LatticePmf,
    certify_id_nonneg,
    compound_geometric,
    levy_coeffs,
    renewal_increments,
    series_exp,
    series_log,
)
from infdiv.errors import DomainError, InputError, LogConvexityError
from infdiv.seqcheck import NonnegSeq, gen_log_convex


def geometric_pmf(rho, n):
    return LatticePmf(tuple((1 - rho) * rho**x for x in range(n + 1)))


def test_lattice_pmf_validation():
    with pytest.raises(InputError):
        LatticePmf(())
    with pytest.raises(InputError):
        LatticePmf((0.5, -0.1))
    with pytest.raises(InputError):
        LatticePmf((0.9, 0.2))  # mass 1.1
    p = geometric_pmf(0.5, 10)
    assert p.mass_deficit == pytest.approx(0.5**11, rel=1e-12)


class TestLevyCoeffs:
    def test_geometric_closed_form(self):
        # q(x) = rho^x / x and rate = -ln(1 - rho), exactly
        rho = 0.37
        rate, q = levy_coeffs(geometric_pmf(rho, 25))
        assert rate == pytest.approx(-math.log(1 - rho), rel=1e-14)
        expect = np.array([rho**x / x for x in range(1, 26)])
        np.testing.assert_allclose(q, expect, rtol=1e-12, atol=1e-300)

    def test_poisson_jump_is_unit(self):
        mu = 1.3
        probs = [math.exp(-mu) * mu**x / math.factorial(x) for x in range(20)]
        rate, q = levy_coeffs(LatticePmf(tuple(probs)))
        assert rate == pytest.approx(mu, rel=1e-13)
        assert q[0] == pytest.approx(mu, rel=1e-12)
        np.testing.assert_allclose(q[1:], 0.0, atol=1e-12)

    def test_negative_binomial(self):
        # P(s) = ((1-rho)/(1-rho s))^r  =>  q(x) = r rho^x / x
        rho, r = 0.45, 2.5
        probs = [(1 - rho) ** r]
        for x in range(1, 22):
            probs.append(probs[-1] * rho * (r + x - 1) / x / (1 - rho) ** 0)
        # recurrence above: p(x) = p(x-1) * rho * (r+x-1)/x
        rate, q = levy_coeffs(LatticePmf(tuple(probs)))
        expect = np.array([r * rho**x / x for x in range(1, 22)])
        np.testing.assert_allclose(q, expect, rtol=1e-11)

    def test_needs_positive_p0(self):
        with pytest.raises(DomainError):
            levy_coeffs(LatticePmf((0.0, 1.0)))


class TestSeriesLogExp:
    def test_round_trip_random(self):
        # keep a(0) dominant so log A converges on a disc covering the window
        rng = np.random.default_rng(42)
        for _ in range(200):
            a = rng.uniform(0.0, 1.0, size=15)
            a[0] = rng.uniform(1.0, 2.0)
            b = series_log(a)
            back = series_exp(b)
            np.testing.assert_allclose(back, a, rtol=1e-9, atol=1e-12)

    def test_log_of_geometric_series(self):
        # A(s) = 1/(1 - rho s)  =>  log A = sum rho^x s^x / x
        rho = 0.6
        a = np.array([rho**x for x in range(12)])
        b = series_log(a)
        assert b[0] == 0.0
        np.testing.assert_allclose(b[1:], [rho**x / x for x in range(1, 12)], rtol=1e-12)

    def test_exp_of_linear(self):
        # exp(mu s) termwise
        mu = 0.8
        a = series_exp(np.array([0.0, mu, 0.0, 0.0, 0.0]))
        np.testing.assert_allclose(a, [mu**k / math.factorial(k) for k in range(5)], rtol=1e-13)

    def test_rejects_nonpositive_head(self):
        with pytest.raises(DomainError):
            series_log(np.array([0.0, 1.0]))


class TestCompoundGeometric:
    def test_geometric_increment_is_single_jump(self):
        rho = 0.52
        rep = compound_geometric(geometric_pmf(rho, 15))
        assert rep.h[0] == pytest.approx(rho, rel=1e-13)
        np.testing.assert_allclose(rep.h[1:], 0.0, atol=1e-14)

    def test_round_trip(self):
        p = geometric_pmf(0.3, 12)
        back = compound_geometric(p).to_pmf()
        np.testing.assert_allclose(back.as_array(), p.as_array(), rtol=1e-12)

    def test_log_convex_pmf_gives_nonneg_increments(self):
        for seed in range(500):
            s = gen_log_convex(seed, 14).as_array()
            p = LatticePmf.of(s / s.sum())
            rep = compound_geometric(p)
            assert min(rep.h) >= -1e-12, seed


class TestRenewalIncrements:
    def test_geometric_kaluza(self):
        u = NonnegSeq(tuple(0.8**k for k in range(10)))
        f = renewal_increments(u)
        assert f[0] == pytest.approx(0.8, rel=1e-14)
        np.testing.assert_allclose(f[1:], 0.0, atol=1e-14)

    def test_constant_one(self):
        u = NonnegSeq((1.0,) * 8)
        f = renewal_increments(u)
        assert f[0] == pytest.approx(1.0)
        np.testing.assert_allclose(f[1:], 0.0, atol=1e-14)

    def test_degenerate(self):
        f = renewal_increments(NonnegSeq((1.0, 0.0, 0.0, 0.0)))
        np.testing.assert_allclose(f, 0.0, atol=0)

    def test_kaluza_gives_valid_waiting_law(self):
        # nonnegative increments with total mass at most one, for
        # nonincreasing windows
        for seed in range(500):
            u = gen_log_convex(seed, 12)
            f = renewal_increments(u)
            assert f.min() >= 0.0, seed
            assert f.sum() <= 1.0 + 1e-12, seed

    def test_round_trip_to_sequence(self):
        for seed in range(100):
            u = gen_log_convex(seed, 12)
            f = renewal_increments(u)
            back = np.zeros(len(u))
            back[0] = 1.0
            for n in range(1, len(u)):
                back[n] = np.dot(f[:n], back[n - 1 :: -1][:n])
            np.testing.assert_allclose(back, u.as_array(), rtol=1e-10, atol=1e-13)

    def test_rejects_non_kaluza(self):
        with pytest.raises(LogConvexityError):
            renewal_increments(NonnegSeq((1.0, 1.0, 0.5)))


class TestCertify:
    def test_geometric_certified(self):
        cert = certify_id_nonneg(geometric_pmf(0.5, 30))
        assert cert.verdict
        assert cert.witness is None
        # smallest Levy coefficient on the window is q(30) = rho^30/30
        assert cert.margin == pytest.approx(0.5**30 / 30, rel=1e-9)
        assert cert.route_discrepancy <= 1e-10

    def test_bernoulli_refuted_at_two(self):
        # fair coin: q(x) = (-1)^(x-1) / x, so q(2) = -1/2 refutes
        p = LatticePmf((0.5, 0.5, 0.0, 0.0, 0.0, 0.0))
        cert = certify_id_nonneg(p)
        assert not cert.verdict
        assert cert.witness == 2
        assert cert.margin == pytest.approx(-0.5, rel=1e-12)
        np.testing.assert_allclose(
            cert.levy.q, [(-1.0) ** (x - 1) / x for x in range(1, 6)], rtol=1e-12
        )

    def test_log_convex_always_certified(self):
        for seed in range(300):
            s = gen_log_convex(seed, 16).as_array()
            cert = certify_id_nonneg(LatticePmf.of(s / s.sum()))
            assert cert.verdict, seed
            assert min(cert.compound_geom.h) >= -1e-12, seed

    def test_levy_round_trip(self):
        p = geometric_pmf(0.41, 18)
        back = certify_id_nonneg(p).levy.to_pmf()
        np.testing.assert_allclose(back.as_array(), p.as_array(), rtol=1e-11)

    def test_point_mass_trivially_certified(self):
        cert = certify_id_nonneg(LatticePmf((1.0,)))
        assert cert.verdict and cert.margin == math.inf

    def test_window_recorded(self):
        cert = certify_id_nonneg(geometric_pmf(0.2, 7))
        assert cert.window == 7
