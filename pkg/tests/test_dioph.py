import math
from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, strategies as st

from cltdioph import dioph as D
from cltdioph.errors import PrecisionExhausted

SQRT2 = D.AlphaSpec.surd(0, 1, 1, 2)
GOLDEN = D.AlphaSpec.surd(1, 1, 2, 5)
SQRT3 = D.AlphaSpec.surd(0, 1, 1, 3)


def nearest_dist(x):
    """Reference ||x|| for an mpmath real."""
    f = x - mpmath.floor(x)
    return float(min(f, 1 - f))


class TestAlphaSpec:
    def test_oracle_certifies(self):
        mpmath.mp.dps = 80
        targets = {
            SQRT2: mpmath.sqrt(2),
            GOLDEN: (1 + mpmath.sqrt(5)) / 2,
            D.AlphaSpec.from_cf(1, [], [2]): mpmath.sqrt(2),
            D.AlphaSpec.rational(-7, 3): mpmath.mpf(-7) / 3,
        }
        for spec, val in targets.items():
            for bits in (48, 64, 200):
                r = spec.approx(bits)
                assert abs(float(mpmath.mpf(r.numerator) / r.denominator - val)) < 2.0 ** -bits

    def test_oracle_monotone(self):
        mpmath.mp.dps = 80
        val = mpmath.sqrt(2)
        errs = [abs(mpmath.mpf(SQRT2.approx(b).numerator) / SQRT2.approx(b).denominator - val)
                for b in (32, 64, 128)]
        assert errs[0] > errs[1] > errs[2]

    def test_surd_rejects_bad_input(self):
        with pytest.raises(ValueError):
            D.AlphaSpec.surd(0, 1, 0, 2)
        with pytest.raises(ValueError):
            D.AlphaSpec.surd(0, 1, 1, -2)
        # perfect square collapses to a rational
        assert D.AlphaSpec.surd(1, 2, 3, 4).is_rational

    def test_decimal_budget(self):
        a = D.AlphaSpec.decimal("1.41421")
        with pytest.raises(PrecisionExhausted):
            a.mantissa(200)

    def test_parse_roundtrip(self):
        for text in ["surd:0,1,1,2", "rat:5/3", "dec:0.125",
                     "cf:1;periodic:2", "cf:0;1,2,periodic:3,4"]:
            spec = D.AlphaSpec.parse(text)
            assert isinstance(spec.to_float(), float)
        assert abs(D.AlphaSpec.parse("cf:1;periodic:2").to_float() - math.sqrt(2)) < 1e-12

    def test_finite_cf_is_rational(self):
        spec = D.AlphaSpec.from_cf(1, [1, 2])
        assert spec.is_rational
        assert spec.exact_fraction() == Fraction(5, 3)


class TestCfExpand:
    def test_sqrt2(self):
        cf = D.cf_expand(SQRT2, 6)
        assert cf.a0 == 1 and cf.quotients == [2, 2, 2, 2, 2]
        assert cf.period == 1

    def test_rational_terminates(self):
        cf = D.cf_expand(D.AlphaSpec.rational(5, 3), 10)
        assert cf.a0 == 1 and cf.quotients == [1, 2]
        assert cf.terminated

    def test_golden(self):
        cf = D.cf_expand(GOLDEN, 5)
        assert cf.a0 == 1 and cf.quotients == [1, 1, 1, 1]

    def test_negative_surd(self):
        # -sqrt(2) = [-2; 1, 1, 2, 2, 2, ...]
        cf = D.cf_expand(D.AlphaSpec.surd(0, -1, 1, 2), 7)
        assert cf.a0 == -2 and cf.quotients == [1, 1, 2, 2, 2, 2]

    def test_decimal_certification(self):
        # pi to 15 digits certifies a good prefix, but not 40 quotients
        pi = D.AlphaSpec.decimal("3.141592653589793")
        cf = D.cf_expand(pi, 5)
        assert cf.a0 == 3 and cf.quotients == [7, 15, 1, 292]
        with pytest.raises(PrecisionExhausted):
            D.cf_expand(pi, 40)
        partial = D.cf_expand(pi, 40, partial=True)
        assert partial.certified < 40

    def test_periodicity_detection(self):
        cf = D.cf_expand(D.AlphaSpec.surd(0, 1, 1, 7), 12)
        # sqrt(7) = [2; 1,1,1,4 repeating]
        assert cf.quotients[:8] == [1, 1, 1, 4, 1, 1, 1, 4]
        assert cf.period == 4


class TestConvergents:
    def test_sqrt2_values(self):
        cf = D.cf_expand(SQRT2, 8)
        assert D.convergents(cf, 4) == [Fraction(1), Fraction(3, 2),
                                        Fraction(7, 5), Fraction(17, 12),
                                        Fraction(41, 29)]

    def test_base_case(self):
        cf = D.cf_expand(D.AlphaSpec.rational(7, 2), 5)
        assert D.convergents(cf, 0) == [Fraction(3, 1)]

    def test_golden_fibonacci(self):
        cf = D.cf_expand(GOLDEN, 8)
        assert D.convergents(cf, 5) == [Fraction(1), Fraction(2), Fraction(3, 2),
                                        Fraction(5, 3), Fraction(8, 5), Fraction(13, 8)]

    def test_determinant_identity(self):
        cf = D.cf_expand(SQRT3, 25)
        cs = D.convergents(cf, 24)
        for k in range(1, len(cs)):
            p1, q1 = cs[k].numerator, cs[k].denominator
            p0, q0 = cs[k - 1].numerator, cs[k - 1].denominator
            assert p1 * q0 - p0 * q1 == (-1) ** (k - 1)

    def test_q_increasing(self):
        cf = D.cf_expand(SQRT2, 20)
        qs = [c.denominator for c in cf.convergents]
        assert all(qs[k] > qs[k - 1] for k in range(2, len(qs)))

    def test_out_of_range(self):
        cf = D.cf_expand(SQRT2, 3)
        with pytest.raises(ValueError):
            D.convergents(cf, 10)


class TestNearestIntDist:
    def test_rational_exact(self):
        v, err = D.nearest_int_dist(D.AlphaSpec.rational(9, 4), 1)
        assert v == 0.25 and err == 0.0

    def test_sqrt2_12(self):
        mpmath.mp.dps = 50
        v, err = D.nearest_int_dist(SQRT2, 12)
        assert err < 2.0 ** -40
        assert abs(v - nearest_dist(12 * mpmath.sqrt(2))) < 1e-12
        assert abs(v - 0.029437) < 1e-6

    def test_convergent_denominators_decrease(self):
        cf = D.cf_expand(SQRT2, 12)
        mpmath.mp.dps = 60
        prev = 1.0
        for conv in cf.convergents[1:]:
            q, p = conv.denominator, conv.numerator
            v, _ = D.nearest_int_dist(SQRT2, q)
            exact = abs(float(q * mpmath.sqrt(2) - p))
            assert abs(v - exact) < 2.0 ** -40
            assert v < prev
            prev = v

    def test_convergent_quality(self):
        # ||q_k alpha|| < 1/q_{k+1}
        cf = D.cf_expand(SQRT2, 14)
        cs = cf.convergents
        for k in range(1, len(cs) - 1):
            v, _ = D.nearest_int_dist(SQRT2, cs[k].denominator)
            assert v < 1.0 / cs[k + 1].denominator

    def test_half_integer_tie_exact(self):
        v, err = D.nearest_int_dist(D.AlphaSpec.rational(1, 2), 3)
        assert v == 0.5 and err == 0.0

    def test_range(self):
        for n in range(1, 50):
            v, _ = D.nearest_int_dist(GOLDEN, n)
            assert 0.0 < v <= 0.5


@given(st.floats(-50, 50), st.floats(-50, 50))
def test_nearest_dist_metric_properties(x, y):
    def nd(v):
        f = v - math.floor(v)
        return min(f, 1 - f)

    assert nd(x) <= abs(x) + 1e-12
    assert nd(x + y) <= nd(x) + nd(y) + 1e-12
    assert abs(nd(x) - nd(y)) <= nd(x - y) + 1e-12


class TestTypeEstimate:
    def test_sqrt2(self):
        est = D.type_estimate(SQRT2, 10 ** 4)
        assert 1.0 <= est.eta_hat <= 1.15
        for n, dist, scaled in est.witnesses:
            assert 1 <= n <= est.n_max
            assert 0.0 < dist <= 0.5

    def test_rational_degenerate(self):
        est = D.type_estimate(D.AlphaSpec.rational(3, 7), 100)
        assert est.degenerate

    def test_liouville_truncation(self):
        # 5-term truncation of sum 10^-k!; within the 10^4 horizon the
        # dominant witness is n = 100 against the 10^-6 digit block.
        digits = ["0"] * 120
        for k in (1, 2, 6, 24, 120):
            digits[k - 1] = "1"
        li = D.AlphaSpec.decimal("0." + "".join(digits))
        est = D.type_estimate(li, 10 ** 4)
        assert est.eta_hat > 1.5
        assert est.eta_hat > D.type_estimate(SQRT2, 10 ** 4).eta_hat


class TestEpsProfile:
    def test_sqrt2_values(self):
        prof = D.eps_profile([SQRT2], 3)
        expected = [0.41421, 0.17157, 0.24264]
        for got, want in zip(prof.values, expected):
            assert abs(got - want) < 1e-5

    def test_rational_zero(self):
        prof = D.eps_profile([D.AlphaSpec.rational(1, 2)], 2)
        assert prof.values[1] == 0.0

    def test_two_alphas_max(self):
        prof = D.eps_profile([SQRT2, SQRT3], 2)
        assert abs(prof.values[0] - 0.41421) < 1e-5
        assert abs(prof.values[1] - 0.46410) < 1e-5

    def test_diagnostic(self):
        prof = D.eps_profile([SQRT2], 10, eta=1.0, eta_prime=0.0)
        assert prof.diagnostic is not None
        for n, (v, d) in enumerate(zip(prof.values, prof.diagnostic), start=1):
            assert abs(d - n * v) < 1e-12

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            D.eps_profile([], 5)


class TestKhinchineR:
    def test_single_term(self):
        psi = D.KhinchinePsi(lambda n: 1.0, non_increasing=True)
        v, arg = D.khinchine_r(SQRT2, psi, 1)
        assert abs(v - 0.41421) < 1e-5 and arg == 1

    def test_argmin_at_convergent_denominator(self):
        psi = D.KhinchinePsi(lambda n: 1.0 / (n * math.log(n + 1) ** 1.5),
                             non_increasing=True, description="summable")
        v, arg = D.khinchine_r(SQRT2, psi, 1000)
        assert v > 0
        qs = {c.denominator for c in D.cf_expand(SQRT2, 20).convergents}
        assert arg in qs

    def test_rational_hits_zero(self):
        psi = D.KhinchinePsi(lambda n: 1.0)
        v, arg = D.khinchine_r(D.AlphaSpec.rational(2, 5), psi, 10)
        assert v == 0.0 and arg == 5

    def test_monotone_in_horizon(self):
        psi = D.KhinchinePsi(lambda n: 1.0 / n)
        vals = [D.khinchine_r(SQRT2, psi, n)[0] for n in (5, 50, 500)]
        assert vals[0] >= vals[1] >= vals[2]

    def test_psi_positive_enforced(self):
        psi = D.KhinchinePsi(lambda n: -1.0)
        with pytest.raises(ValueError):
            D.khinchine_r(SQRT2, psi, 3)


def test_oracle_thread_safety():
    import concurrent.futures
    spec = D.AlphaSpec.surd(0, 1, 1, 2)
    with concurrent.futures.ThreadPoolExecutor(8) as pool:
        results = list(pool.map(lambda _: spec.mantissa(512), range(32)))
    assert len(set(results)) == 1
