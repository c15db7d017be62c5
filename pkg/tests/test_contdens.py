import math

import numpy as np
import pytest
from scipy.integrate import quad

from infdiv.contdens import (
    FnHandle,
    MeasureFn,
    bump_fn,
    discretize_corollary3,
    discretize_lemma2,
    exp_measure,
    exp_mixture_density,
    exp_mixture_fn,
    exponential_fn,
    fn_from_json,
    grid_log_convex,
    sample_fn,
    scale_mixture_H,
    tail_integral_density,
)
from infdiv.errors import InputError
from infdiv.seqcheck import NonnegSeq, is_completely_monotone, is_log_convex
from infdiv.walkfactor import build_p_from_v, certify_id_two_sided


class TestLatticeIncrements:
    @pytest.mark.parametrize("n", [1, 2, 4, 8])
    def test_exponential_increments_are_geometric(self, n):
        inc = discretize_lemma2(exp_measure(rate=1.0), n, 20)
        expect = [math.exp(-m / n) * -math.expm1(-1.0 / n) for m in range(20)]
        np.testing.assert_allclose(inc.values, expect, rtol=1e-13)
        assert is_log_convex(inc, tol=1e-9).verdict
        assert inc.step == pytest.approx(1.0 / n)

    def test_atom_folds_into_first_increment(self):
        inc = discretize_lemma2(exp_measure(rate=1.0, atom=0.3), 4, 24)
        assert inc[0] == pytest.approx(0.3 + 0.7 * -math.expm1(-0.25), rel=1e-13)
        assert is_log_convex(inc, tol=1e-9).verdict

    @pytest.mark.parametrize("n", [1, 2, 4, 8])
    def test_step_function_sup_bound(self, n):
        # the step approximation takes the right-endpoint value, so its
        # vertical gap to G anywhere is at most the largest 1/n-increment
        G = exp_measure(rate=1.0)
        inc = discretize_lemma2(G, n, 40 * n)
        cum = np.concatenate(([0.0], np.cumsum(inc.values)))

        def G_n(x):
            m = math.floor(x * n) + 1
            return cum[min(m, len(cum) - 1)]

        xs = np.linspace(0.0, 10.0, 1001)
        sup_diff = max(abs(G_n(x) - G.eval(x)) for x in xs)
        bound = max(G.eval(x + 1.0 / n) - G.eval(x) for x in xs)
        assert sup_diff <= bound + 1e-12

    def test_increments_without_density_handle(self):
        # same function exposed only through pointwise evaluation
        G = MeasureFn(eval=lambda x: -math.expm1(-x) if x >= 0 else 0.0)
        inc = discretize_lemma2(G, 4, 20)
        expect = [math.exp(-m / 4) * -math.expm1(-0.25) for m in range(19)]
        np.testing.assert_allclose(inc.values, expect, rtol=1e-12)

    def test_rejects_non_monotone_measure(self):
        G = MeasureFn(eval=lambda x: math.sin(x) if x >= 0 else 0.0)
        with pytest.raises(InputError):
            discretize_lemma2(G, 4, 20)

    def test_rejects_bad_parameters(self):
        G = exp_measure()
        with pytest.raises(InputError):
            discretize_lemma2(G, 0, 20)
        with pytest.raises(InputError):
            discretize_lemma2(G, 4, 2)


class TestTailIntegralDensity:
    def test_two_exponentials_give_laplace(self):
        f = tail_integral_density(exponential_fn(), exponential_fn())
        assert f.norm == pytest.approx(2.0, rel=1e-12)
        for x in (-3.0, -0.7, 0.4, 2.5):
            assert f.eval(x) == pytest.approx(0.5 * math.exp(-abs(x)), rel=1e-8)
        assert f.cdf(-1.0) == pytest.approx(0.5 * math.exp(-1.0), rel=1e-9)
        assert f.cdf(1.0) == pytest.approx(1.0 - 0.5 * math.exp(-1.0), rel=1e-9)

    def test_halves_are_nonincreasing_away_from_origin(self):
        f = tail_integral_density(exponential_fn(rate=0.7),
                                  exp_mixture_fn([(1.0, 0.5), (2.0, 1.0)]))
        xs = np.linspace(0.1, 6.0, 40)
        right = [f.eval(x) for x in xs]
        left = [f.eval(-x) for x in xs]
        assert all(a >= b for a, b in zip(right, right[1:]))
        assert all(a >= b for a, b in zip(left, left[1:]))

    def test_divergent_tail_rejected(self):
        slow = FnHandle(eval=lambda y: 1.0 / (1.0 + y))
        with pytest.raises(InputError):
            tail_integral_density(slow, exponential_fn())

    def test_bump_tail_against_direct_quadrature(self):
        g = bump_fn()
        direct, _ = quad(g.eval, 0.3, 40.0, points=[1.0], limit=200)
        assert g.tail(0.3) == pytest.approx(direct, rel=1e-9)
        assert g.tail(2.0) == pytest.approx(math.exp(-2.0), rel=1e-13)


class TestLatticeSpecFromSides:
    def test_exponential_closed_form(self):
        for rate, n in ((1.0, 1), (1.0, 4), (2.0, 4)):
            v = discretize_corollary3(exponential_fn(rate=rate),
                                      exponential_fn(rate=rate), n)
            step = 1.0 / n
            c2 = (-math.expm1(-rate * step) / rate) ** 2
            for j in range(1, 10):
                expect = math.exp(-rate * (j - 1) * step) * c2
                assert v.v_pos.at(j - 1) == pytest.approx(expect, rel=1e-12)
                assert v.v_neg.at(j - 1) == pytest.approx(expect, rel=1e-12)
            # the family closes the tail with the exact per-step ratio
            assert v.v_pos.ratio == pytest.approx(math.exp(-rate * step), rel=1e-14)

    def test_constant_approaches_one_with_refinement(self):
        v1h, v2h = exp_mixture_density([(1.0, 0.5)], [(3.0, 0.5)])
        gaps = []
        for n in (1, 2, 4, 8):
            _, K = build_p_from_v(discretize_corollary3(v1h, v2h, n))
            gaps.append(abs(K - 1.0))
        assert gaps[0] > gaps[1] > gaps[2] > gaps[3]
        assert gaps[3] < 0.06

    def test_lattice_laws_converge_to_continuous(self):
        # sup-distance between the lattice d.f. (on the 1/n grid) and the
        # continuous one shrinks as the lattice refines
        f = tail_integral_density(exponential_fn(), exponential_fn())
        sups = []
        for n in (1, 2, 4, 8):
            v = discretize_corollary3(exponential_fn(), exponential_fn(), n)
            p, _ = build_p_from_v(v)
            sup = 0.0
            for t in np.linspace(-4.0, 4.0, 81):
                j_hi = math.floor(t * n)
                if j_hi < 0:
                    cdf = p.neg.sum_from(-j_hi - 1)
                else:
                    cdf = 1.0 - p.pos.sum_from(j_hi)
                sup = max(sup, abs(cdf - f.cdf(t)))
            sups.append(sup)
        assert sups[0] > sups[1] > sups[2] > sups[3]
        assert sups[3] < 0.04

    def test_mixture_windows_are_log_convex_and_certify(self):
        v1h, v2h = exp_mixture_density([(1.0, 0.3), (2.0, 0.2)],
                                       [(3.0, 0.25), (1.5, 0.25)])
        v = discretize_corollary3(v1h, v2h, 4)
        assert is_log_convex(NonnegSeq(v.v_neg.window), tol=1e-8).verdict
        assert is_log_convex(NonnegSeq(v.v_pos.window), tol=1e-8).verdict
        cert = certify_id_two_sided(v)
        assert cert.verdict, (cert.failures, cert.notes)
        assert cert.factorization_residual <= 1e-6

    def test_bump_side_log_convex_but_not_completely_monotone(self):
        # the kink in the exponent survives discretization: the window is
        # log-convex yet fails the alternating-difference test
        v = discretize_corollary3(exponential_fn(), bump_fn(), 4, tail_rel=1e-14)
        pos = NonnegSeq(v.v_pos.window)
        assert is_log_convex(pos, tol=1e-9).verdict
        assert is_completely_monotone(pos, max_order=4, tol=1e-12).verdict
        rep = is_completely_monotone(pos, max_order=8, tol=1e-12)
        assert not rep.verdict
        assert rep.margin < -1e-5

    def test_window_cap_respected(self):
        v = discretize_corollary3(exponential_fn(), exponential_fn(), 8, m_max=12)
        assert len(v.v_pos.window) <= 12


class TestExponentialMixtures:
    def test_single_atom_closed_form(self):
        (v1,), = (exp_mixture_density([(2.0, 1.0)], [(1.0, 1e-12)])[0].params,),
        # above unpacks the params of the first handle: coef = w * lam^2
        lam, coef = v1
        assert lam == 2.0
        assert coef == pytest.approx(4.0, rel=1e-9)

    def test_density_values(self):
        v1h, v2h = exp_mixture_density([(1.0, 0.5)], [(3.0, 0.5)])
        for y in (0.1, 1.0, 2.7):
            assert v1h.eval(y) == pytest.approx(0.5 * math.exp(-y), rel=1e-13)
            assert v2h.eval(y) == pytest.approx(0.5 * 9.0 * math.exp(-3.0 * y), rel=1e-13)

    def test_differential_inequality_two_atoms(self):
        v1h, v2h = exp_mixture_density([(1.0, 0.5)], [(3.0, 0.5)])
        h = 1e-4
        for v in (v1h, v2h):
            for y in np.linspace(0.2, 4.0, 25):
                f0 = v.eval(y)
                d1 = (v.eval(y + h) - v.eval(y - h)) / (2 * h)
                d2 = (v.eval(y + h) - 2 * f0 + v.eval(y - h)) / (h * h)
                assert f0 * d2 - d1 * d1 >= -1e-8

    def test_weight_and_rate_validation(self):
        with pytest.raises(InputError):
            exp_mixture_density([(1.0, 0.5)], [(2.0, 0.6)])  # total 1.1
        with pytest.raises(InputError):
            exp_mixture_density([(-1.0, 0.5)], [(2.0, 0.5)])
        with pytest.raises(InputError):
            exp_mixture_density([(1.0, 0.0)], [(2.0, 1.0)])

    def test_truncated_mixture_is_monotone_in_atoms(self):
        atoms = [(0.8, 0.2), (1.5, 0.3), (3.0, 0.5)]
        ys = np.linspace(0.1, 5.0, 30)
        prev = np.zeros_like(ys)
        for k in (1, 2, 3):
            h = exp_mixture_fn([(l, w * l * l) for l, w in atoms[:k]])
            cur = np.array([h.eval(y) for y in ys])
            assert np.all(cur >= prev - 1e-15)
            prev = cur
        full = exp_mixture_fn([(l, w * l * l) for l, w in atoms])
        np.testing.assert_allclose(prev, [full.eval(y) for y in ys], rtol=1e-13)


class TestScaleMixtures:
    def test_identity_scaling(self):
        G = exp_measure(rate=1.0)
        H = scale_mixture_H(G, [(1.0, 1.0)], 0.0)
        for x in np.linspace(0.0, 6.0, 61):
            assert H.eval(x) == G.eval(x)

    def test_two_atom_density_log_convex(self):
        H = scale_mixture_H(exp_measure(rate=1.0), [(1.0, 0.6), (2.5, 0.4)], 0.0)
        assert grid_log_convex(H.deriv, 0.01, 0.05, 200, tol=1e-9).verdict

    def test_density_matches_numeric_derivative(self):
        H = scale_mixture_H(exp_measure(rate=1.0), [(1.0, 0.6), (2.5, 0.4)], 0.0)
        for x in np.linspace(0.2, 4.0, 20):
            num = (H.eval(x + 5e-7) - H.eval(x - 5e-7)) / 1e-6
            assert num == pytest.approx(H.deriv.eval(x), rel=1e-6)

    def test_scale_constraints(self):
        G = exp_measure(rate=1.0)
        with pytest.raises(InputError):
            scale_mixture_H(G, [(0.5, 1.0)], 0.5)  # v < 1 with a > 0
        with pytest.raises(InputError):
            scale_mixture_H(G, [(0.0, 1.0)], 0.0)
        with pytest.raises(InputError):
            scale_mixture_H(G, [(1.0, -0.2)], 0.0)
        H = scale_mixture_H(G, [(0.5, 1.0)], 0.0)  # fine at a = 0
        assert grid_log_convex(H.deriv, 0.01, 0.05, 200, tol=1e-9).verdict

    def test_requires_density_handle(self):
        bare = MeasureFn(eval=lambda x: min(max(x, 0.0), 1.0))
        with pytest.raises(InputError):
            scale_mixture_H(bare, [(1.0, 1.0)], 0.0)


class TestFamilyRegistry:
    def test_bump_profile_log_convex_on_fine_grid(self):
        rep = grid_log_convex(bump_fn(), 0.005, 0.01, 400, tol=1e-9)
        assert rep.verdict

    def test_bump_tail_samples_log_convex_not_cm(self):
        g = bump_fn()
        tails = NonnegSeq(tuple(g.tail(0.5 * j) for j in range(40)), step=0.5)
        assert is_log_convex(tails, tol=1e-9).verdict
        rep = is_completely_monotone(tails, max_order=16, tol=1e-12)
        assert not rep.verdict
        assert rep.margin < -1e-3

    def test_json_round_trip(self):
        h = fn_from_json({"family": "exponential", "params": {"rate": 2.0}})
        assert h.eval(1.0) == pytest.approx(math.exp(-2.0), rel=1e-14)
        h = fn_from_json({"family": "exp_bump"})
        assert h.eval(0.5) == pytest.approx(math.exp(-0.5 + 0.25), rel=1e-14)
        h = fn_from_json({"family": "exp_mixture",
                          "params": {"atoms": [[1.0, 0.5], [3.0, 0.5]]}})
        assert h.eval(0.0) == pytest.approx(0.5 + 0.5 * 9.0, rel=1e-14)

    def test_json_validation(self):
        with pytest.raises(InputError):
            fn_from_json({"family": "gamma"})
        with pytest.raises(InputError):
            fn_from_json({"params": {}})
        with pytest.raises(InputError):
            fn_from_json({"family": "exp_mixture", "params": {}})

    def test_sampling_records_step(self):
        s = sample_fn(exponential_fn(), 0.0, 0.25, 10)
        assert s.step == 0.25
        assert s[2] == pytest.approx(math.exp(-0.5), rel=1e-14)

    def test_handle_validation(self):
        with pytest.raises(InputError):
            exponential_fn(rate=-1.0)
        with pytest.raises(InputError):
            exp_mixture_fn([])
        with pytest.raises(InputError):
            exp_mixture_fn([(1.0, -0.5)])
