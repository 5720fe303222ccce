import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cltdioph import charfn as C
from cltdioph import dioph as D
from cltdioph.dioph import AlphaSpec
from cltdioph.errors import InsufficientPeaks

SQRT2 = AlphaSpec.surd(0, 1, 1, 2)
SQRT3 = AlphaSpec.surd(0, 1, 1, 3)


class TestCharSpec:
    def test_product_no_weights(self):
        with pytest.raises(ValueError):
            C.CharSpec("product", (SQRT2,), (0.5, 0.5))

    def test_mixture_weight_length(self):
        with pytest.raises(ValueError):
            C.CharSpec.mixture([0.5, 0.25, 0.25], [SQRT2])

    def test_mixture_weight_sum(self):
        with pytest.raises(ValueError):
            C.CharSpec.mixture([0.5, 0.6], [SQRT2])
        with pytest.raises(ValueError):
            C.CharSpec.mixture([1.2, -0.2], [SQRT2])

    def test_parse_product(self):
        spec = C.CharSpec.parse("prod:surd:0,1,1,2,surd:0,1,1,3")
        assert spec.form == "product" and len(spec.alphas) == 2
        assert abs(spec.alphas[0].to_float() - math.sqrt(2)) < 1e-15
        assert abs(spec.alphas[1].to_float() - math.sqrt(3)) < 1e-15

    def test_parse_mixture(self):
        spec = C.CharSpec.parse("mix:0.5:surd:0,1,1,2=0.25,rat:1/3=0.25")
        assert spec.form == "mixture"
        assert spec.weights == (0.5, 0.25, 0.25)
        assert abs(spec.alphas[1].to_float() - 1 / 3) < 1e-15

    def test_parse_rejects_garbage(self):
        for text in ("sum:1,2", "mix:0.5", "mix:0.5:surd:0,1,1,2"):
            with pytest.raises(ValueError):
                C.CharSpec.parse(text)


class TestEval:
    def test_at_zero(self):
        for spec in (C.CharSpec.product([SQRT2]),
                     C.CharSpec.mixture([0.5, 0.5], [SQRT2]),
                     C.CharSpec.product([])):
            assert C.eval(spec, 0.0) == 1.0

    def test_empty_product_is_cos(self):
        spec = C.CharSpec.product([])
        for t in (0.3, 2.9, 17.0):
            assert C.eval(spec, t) == math.cos(t)

    def test_sqrt2_at_pi(self):
        # 50-digit reference for cos(pi) cos(sqrt(2) pi)
        mpmath.mp.dps = 50
        want = float(mpmath.cos(mpmath.pi) * mpmath.cos(mpmath.sqrt(2) * mpmath.pi))
        assert abs(C.eval(C.CharSpec.product([SQRT2]), math.pi) - want) < 1e-14

    def test_product_factorizes(self):
        spec = C.CharSpec.product([SQRT2, SQRT3])
        singles = [C.CharSpec.product([a]) for a in (SQRT2, SQRT3)]
        for t in (0.7, 5.0, 123.456):
            prod = math.cos(t)
            for s in singles:
                prod *= C.eval(s, t) / math.cos(t)
            assert abs(C.eval(spec, t) - prod) < 1e-14

    def test_bounded_by_one(self):
        spec = C.CharSpec.mixture([0.3, 0.3, 0.4], [SQRT2, SQRT3])
        for t in np.linspace(-100, 100, 501):
            assert abs(C.eval(spec, float(t))) <= 1.0 + 1e-15

    def test_large_t_against_mpmath(self):
        # extended-precision argument handling at t near the float128 limit
        mpmath.mp.dps = 60
        spec = C.CharSpec.product([SQRT2])
        for t in (1.0e5, 7.7e5):
            want = float(mpmath.cos(t) * mpmath.cos(mpmath.sqrt(2) * t))
            assert abs(C.eval(spec, t) - want) < 1e-10

    def test_beyond_f128_limit_falls_back(self):
        mpmath.mp.dps = 60
        spec = C.CharSpec.product([SQRT2])
        t = 3.0e6
        want = float(mpmath.cos(t) * mpmath.cos(mpmath.sqrt(2) * t))
        assert abs(C.eval(spec, t) - want) < 1e-9


class TestProfile:
    def test_zero(self):
        spec = C.CharSpec.product([SQRT2])
        assert C.one_minus_abs_profile(spec, [0.0]) == [(0.0, 0.0)]

    def test_values_in_unit_interval(self):
        spec = C.CharSpec.mixture([0.5, 0.5], [SQRT2])
        prof = C.one_minus_abs_profile(spec, np.linspace(0, 50, 201))
        assert all(0.0 <= v <= 1.0 for _, v in prof)

    def test_rejects_unsorted(self):
        with pytest.raises(ValueError):
            C.one_minus_abs_profile(C.CharSpec.product([SQRT2]), [2.0, 1.0])

    def test_local_minima_at_convergent_denominators(self):
        # near t = pi q_k the profile dips, and the dips shrink with q_k
        spec = C.CharSpec.product([SQRT2])
        dips = []
        for q in (2, 5, 12, 29):
            ts = np.linspace(math.pi * q - 1, math.pi * q + 1, 400)
            prof = C.one_minus_abs_profile(spec, ts)
            dips.append(min(v for _, v in prof))
        assert all(a > b for a, b in zip(dips, dips[1:]))
        assert dips[-1] < 1e-2

    def test_rational_periodicity(self):
        spec = C.CharSpec.mixture([0.5, 0.5], [AlphaSpec.rational(1, 1)])
        (_, v), = C.one_minus_abs_profile(spec, [2 * math.pi])
        assert v < 1e-15


class TestIneq61:
    def test_at_zero_all_equalities(self):
        res = C.ineq61_check(0.0)
        assert res.passed
        assert abs(res.exp_margin) < 1e-15
        assert abs(res.lower_margin) < 1e-15
        assert abs(res.upper_margin) < 1e-15

    def test_half_integer_extreme(self):
        res = C.ineq61_check(0.5)
        assert res.passed
        assert abs(res.exp_margin - math.exp(-math.pi ** 2 / 8)) < 1e-15
        # 4 ||x||^2 = 1 = 1 - |cos(pi/2)|: the lower bound is tight
        assert abs(res.lower_margin) < 1e-15
        assert abs(res.upper_margin - (math.pi ** 2 / 8 - 1.0)) < 1e-15

    def test_interior_point(self):
        res = C.ineq61_check(0.3)
        assert res.passed
        assert res.exp_margin > 0 and res.lower_margin > 0 and res.upper_margin > 0

    @settings(max_examples=500)
    @given(st.floats(-10, 10))
    def test_random_points(self, x):
        assert C.ineq61_check(x).passed

    def test_dense_grid(self):
        rng = np.random.default_rng(7)
        for x in rng.uniform(-10, 10, 10 ** 5):
            d = C.frac_dist(float(x))
            c = abs(math.cos(math.pi * x))
            assert c <= math.exp(-math.pi ** 2 * d * d / 2) + 1e-12
            assert 4 * d * d <= 1 - c + 1e-12 <= math.pi ** 2 / 2 * d * d + 2e-12


class TestNearestInt:
    def test_half_rounds_down(self):
        assert C.nearest_int_float(2.5) == 2
        assert C.nearest_int_float(-2.5) == -3
        assert C.nearest_int_float(2.4) == 2
        assert C.nearest_int_float(2.6) == 3

    def test_dist(self):
        assert C.frac_dist(2.5) == 0.5
        assert C.frac_dist(-0.25) == 0.25
        assert C.frac_dist(7.0) == 0.0


class TestLemma61:
    def test_integer_points(self):
        prof = D.eps_profile([SQRT2], 100)
        eps_at = lambda n: prof.values[n - 1]
        for n in range(1, 101):
            lhs, rhs = C.lemma61_lower([SQRT2], float(n), eps_at)
            assert lhs >= rhs - 1e-12

    def test_real_scan_with_offsets(self):
        prof = D.eps_profile([SQRT2], 101)
        eps_at = lambda n: prof.values[n - 1]
        for t in np.arange(1.0, 100.0, 1.0 / 64.0):
            lhs, rhs = C.lemma61_lower([SQRT2], float(t), eps_at)
            assert lhs >= rhs - 1e-12

    def test_two_alphas(self):
        prof = D.eps_profile([SQRT2, SQRT3], 51)
        eps_at = lambda n: prof.values[n - 1]
        for t in np.arange(1.0, 50.0, 0.25):
            lhs, rhs = C.lemma61_lower([SQRT2, SQRT3], float(t), eps_at)
            assert lhs >= rhs - 1e-12

    def test_preconditions(self):
        with pytest.raises(ValueError):
            C.lemma61_lower([SQRT2], 0.5, lambda n: 0.1)
        with pytest.raises(ValueError):
            C.lemma61_lower([], 2.0, lambda n: 0.1)
        with pytest.raises(ValueError):
            C.lemma61_lower([SQRT2], 2.0, lambda n: 0.0)


class TestGrowthFit:
    def test_product_sqrt2(self):
        fit = C.growth_fit(C.CharSpec.product([SQRT2]), 1e4, 8)
        assert not fit.degenerate
        assert 1.7 <= fit.p_hat <= 2.3
        assert fit.q_identifiable
        assert len(fit.sample) == 8

    def test_mixture_parity(self):
        p = C.growth_fit(C.CharSpec.product([SQRT2]), 1e4, 8).p_hat
        m = C.growth_fit(C.CharSpec.mixture([0.5, 0.5], [SQRT2]), 1e4, 8).p_hat
        assert abs(p - m) < 0.3

    def test_mixture_uneven_weights_parity(self):
        m = C.growth_fit(C.CharSpec.mixture([0.2, 0.8], [SQRT2]), 1e4, 8).p_hat
        assert 1.7 <= m <= 2.3

    def test_degenerate_pure_cosine(self):
        fit = C.growth_fit(C.CharSpec.product([]), 1e3, 8)
        assert fit.degenerate and math.isnan(fit.p_hat)

    def test_degenerate_rational(self):
        fit = C.growth_fit(C.CharSpec.product([AlphaSpec.rational(1, 2)]),
                           1e3, 8)
        assert fit.degenerate

    def test_sample_on_lower_envelope(self):
        fit = C.growth_fit(C.CharSpec.product([SQRT2]), 1e4, 8)
        oms = [om for _, om in fit.sample]
        assert all(a > b for a, b in zip(oms, oms[1:]))

    def test_q_not_identifiable_short_range(self):
        # golden ratio: Fibonacci convergents are dense enough for eight
        # record peaks inside a range too short to identify the log power
        golden = AlphaSpec.surd(1, 1, 2, 5)
        fit = C.growth_fit(C.CharSpec.product([golden]), 900.0, 8)
        assert fit.q_hat is None and not fit.q_identifiable
        assert 1.7 <= fit.p_hat <= 2.3

    def test_insufficient_peaks(self):
        with pytest.raises(InsufficientPeaks):
            C.growth_fit(C.CharSpec.product([SQRT2]), 20.0, 8)

    def test_preconditions(self):
        with pytest.raises(ValueError):
            C.growth_fit(C.CharSpec.product([SQRT2]), 5.0, 8)
        with pytest.raises(ValueError):
            C.growth_fit(C.CharSpec.product([SQRT2]), 1e3, 4)


class TestCompositionWithDioph:
    def test_cos_pi_n_alpha_bound(self):
        # |f(pi n)| for the single-factor product is |cos(pi n alpha)|
        # and obeys the exponential bound through ||n alpha||
        spec = C.CharSpec.product([SQRT2])
        for n in range(1, 1001):
            v, err = D.nearest_int_dist(SQRT2, n)
            lhs = abs(C.eval(spec, math.pi * n))
            # cos(pi n) = +/-1 exactly at integer n
            assert lhs <= math.exp(-math.pi ** 2 * v * v / 2) + 1e-10

    def test_profile_lower_bound_from_eps(self):
        # 1 - |f(pi t)| >= 1 - exp(-c' / profile) on a real grid, with c'
        # fitted as the worst observed ratio (reported, not asserted to a
        # specific value)
        spec = C.CharSpec.product([SQRT2])
        prof = D.eps_profile([SQRT2], 201)
        eps_at = lambda n: prof.values[n - 1]
        c = 1.0 / (1.0 + math.sqrt(2))
        ratios = []
        for t in np.arange(2.0, 200.0, 0.125):
            one_minus = 1.0 - abs(C.eval(spec, math.pi * float(t)))
            lhs, rhs = C.lemma61_lower([SQRT2], float(t), eps_at)
            # (6.1) composed with the lemma: 1 - |f| >= 4 c^2 eps(n)^2
            assert one_minus >= 4.0 * rhs - 1e-12
            if rhs > 0:
                ratios.append(one_minus / rhs)
        assert min(ratios) >= 4.0 - 1e-9
