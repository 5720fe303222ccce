"""Characteristic functions of weighted Bernoulli families.

Covers the product form cos(t) cos(a1 t) ... cos(am t), the mixture form
p0 cos(t) + sum pk cos(ak t), the elementary cosine inequalities linking
1 - |cos(pi x)| to the distance-to-integer function, the lower bound
transferring a profile eps(n) from integers to real t, and power-law
fitting of 1/(1 - |f(t)|) at near-maximal points of |f|.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Optional

import mpmath
import numpy as np
from scipy.optimize import minimize_scalar

from .dioph import AlphaSpec
from .errors import InsufficientPeaks, PrecisionExhausted

#: above this |t * alpha| the extended-precision path is no longer certified
#: to 1e-12 and evaluation falls back to arbitrary precision
_F128_LIMIT = 1.0e6

_LONG = np.longdouble
_TWO = _LONG(2.0)


def _alpha_longdouble(alpha: AlphaSpec) -> np.longdouble:
    """Alpha as a long double via a hi/lo split of the 128-bit mantissa."""
    try:
        m = alpha.mantissa(128)
    except PrecisionExhausted:
        return _LONG(alpha.to_float())
    hi, lo = divmod(m, 1 << 64)
    return _LONG(hi) * _TWO ** -64 + _LONG(lo) * _TWO ** -128


def _cos_scaled(alpha: AlphaSpec, alpha_ld: np.longdouble, t: float) -> float:
    """cos(alpha t) with the product formed in extended precision."""
    arg = alpha_ld * _LONG(t)
    if abs(float(arg)) <= _F128_LIMIT:
        return float(np.cos(arg))
    bits = 128 + max(0, int(math.log2(abs(t))))
    try:
        frac = alpha.approx(bits)
    except PrecisionExhausted:
        frac = alpha.approx(64)
    with mpmath.workdps(int(bits * 0.302) + 20):
        a = mpmath.mpf(frac.numerator) / frac.denominator
        return float(mpmath.cos(a * t))


def nearest_int_float(x: float) -> int:
    """Closest integer to x, rounding exact halves down."""
    n = math.floor(x + 0.5)
    if x + 0.5 == n and n > x:
        n -= 1
    return n


def frac_dist(x: float) -> float:
    """Distance from x to the nearest integer."""
    return abs(x - nearest_int_float(x))


@dataclass(frozen=True)
class CharSpec:
    """Product or mixture of cosines over (1, alpha_1, ..., alpha_m)."""

    form: str
    alphas: tuple[AlphaSpec, ...]
    weights: Optional[tuple[float, ...]] = None
    _alpha_ld: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.form not in ("product", "mixture"):
            raise ValueError(f"unknown form {self.form!r}")
        if self.form == "product":
            if self.weights is not None:
                raise ValueError("product form takes no weights")
        else:
            if self.weights is None or len(self.weights) != len(self.alphas) + 1:
                raise ValueError("mixture needs weights p0..pm")
            if any(p <= 0 for p in self.weights):
                raise ValueError("mixture weights must be positive")
            if abs(math.fsum(self.weights) - 1.0) > 2.0 ** -45:
                raise ValueError("mixture weights must sum to 1")
        object.__setattr__(
            self, "_alpha_ld",
            tuple(_alpha_longdouble(a) for a in self.alphas))

    @classmethod
    def product(cls, alphas) -> "CharSpec":
        return cls("product", tuple(alphas))

    @classmethod
    def mixture(cls, weights, alphas) -> "CharSpec":
        return cls("mixture", tuple(alphas), tuple(float(p) for p in weights))

    @classmethod
    def parse(cls, text: str) -> "CharSpec":
        """`prod:<alpha>[,<alpha>...]` or `mix:p0:<alpha>=p1[,...]`."""
        if text.startswith("prod:"):
            body = text[len("prod:"):]
            parts = _split_alphas(body) if body else []
            return cls.product(AlphaSpec.parse(p) for p in parts)
        if text.startswith("mix:"):
            head, sep, body = text[len("mix:"):].partition(":")
            if not sep:
                raise ValueError(f"malformed mixture spec {text!r}")
            weights = [float(head)]
            alphas = []
            for part in _split_alphas(body):
                a_text, sep, p_text = part.rpartition("=")
                if not sep:
                    raise ValueError(f"missing weight in {part!r}")
                alphas.append(AlphaSpec.parse(a_text))
                weights.append(float(p_text))
            return cls.mixture(weights, alphas)
        raise ValueError(f"char spec must start with prod: or mix:, got {text!r}")


def _split_alphas(body: str) -> list[str]:
    # alpha grammars contain commas, so split only before a kind prefix
    return re.split(r",(?=(?:surd|cf|dec|rat):)", body)


def eval(spec: CharSpec, t: float) -> float:  # noqa: A001 (domain name)
    t = float(t)
    if spec.form == "product":
        val = math.cos(t)
        for a, a_ld in zip(spec.alphas, spec._alpha_ld):
            val *= _cos_scaled(a, a_ld, t)
        return val
    val = spec.weights[0] * math.cos(t)
    for p, a, a_ld in zip(spec.weights[1:], spec.alphas, spec._alpha_ld):
        val += p * _cos_scaled(a, a_ld, t)
    return val


def one_minus_abs_profile(spec: CharSpec, t_grid) -> list[tuple[float, float]]:
    ts = [float(t) for t in t_grid]
    if any(b < a for a, b in zip(ts, ts[1:])):
        raise ValueError("t_grid must be sorted")
    return [(t, min(1.0, max(0.0, 1.0 - abs(eval(spec, t))))) for t in ts]


class Ineq61Result(NamedTuple):
    """Margins of the three cosine inequalities at x (>= 0 means holds)."""

    exp_margin: float     # exp(-pi^2 ||x||^2 / 2) - |cos(pi x)|
    lower_margin: float   # (1 - |cos(pi x)|) - 4 ||x||^2
    upper_margin: float   # (pi^2/2) ||x||^2 - (1 - |cos(pi x)|)
    passed: bool


def ineq61_check(x: float, slack: float = 1e-12) -> Ineq61Result:
    d = frac_dist(x)
    c = abs(math.cos(math.pi * x))
    one_minus = 1.0 - c
    m1 = math.exp(-math.pi ** 2 * d * d / 2.0) - c
    m2 = one_minus - 4.0 * d * d
    m3 = (math.pi ** 2 / 2.0) * d * d - one_minus
    return Ineq61Result(m1, m2, m3,
                        m1 >= -slack and m2 >= -slack and m3 >= -slack)


def lemma61_lower(alphas, t: float,
                  eps_at: Callable[[int], float]) -> tuple[float, float]:
    """Both sides of ||t||^2 + sum ||t a_k||^2 >= (c eps(n(t)))^2.

    c is 1/(1 + max |a_k|); n(t) is the integer closest to t.
    """
    if t < 1.0:
        raise ValueError("t must be >= 1")
    alphas = list(alphas)
    if not alphas:
        raise ValueError("need at least one alpha")
    lds = [_alpha_longdouble(a) for a in alphas]
    lhs = frac_dist(t) ** 2
    for a_ld in lds:
        lhs += frac_dist(float(a_ld * _LONG(t))) ** 2
    n = nearest_int_float(t)
    eps = float(eps_at(n))
    if eps <= 0.0:
        raise ValueError(f"eps({n}) must be positive, got {eps}")
    c = 1.0 / (1.0 + max(abs(a.to_float()) for a in alphas))
    return lhs, (c * eps) ** 2


@dataclass(frozen=True)
class GrowthFit:
    """Power-law fit 1/(1 - |f(t)|) ~ t^p (log t)^q at the peaks of |f|."""

    p_hat: float
    q_hat: Optional[float]
    sample: tuple[tuple[float, float], ...]
    residual: float
    degenerate: bool = False

    @property
    def q_identifiable(self) -> bool:
        return self.q_hat is not None


def _refine_peak(spec: CharSpec, center: float) -> tuple[float, float]:
    res = minimize_scalar(lambda s: -abs(eval(spec, s)),
                          bounds=(center - 1.0, center + 1.0),
                          method="bounded",
                          options={"xatol": 1e-9})
    return float(res.x), float(-res.fun)


def growth_fit(spec: CharSpec, t_max: float, n_peaks: int = 8) -> GrowthFit:
    """Fit log(1/(1 - |f|)) against log t at record resonances of |f|.

    Candidate peaks sit near pi*n (product form) or 2*pi*n (mixture form).
    The retained sample is the sequence of records, peaks whose 1 - |f|
    undercuts every earlier peak. Records trace the lower envelope of
    1 - |f|, which is the object the growth law describes, and they
    space themselves along the log-t axis; taking literally the largest
    maxima would cluster the sample at the single sharpest resonance and
    leave the exponent unidentifiable.
    """
    if t_max <= 10.0:
        raise ValueError("t_max must exceed 10")
    if n_peaks < 8:
        raise ValueError("n_peaks must be at least 8")
    if spec.form == "product" and not spec.alphas:
        # pure cos(t): |f(pi n)| = 1 exactly, no growth law to fit
        return GrowthFit(math.nan, None, (), math.nan, degenerate=True)

    period = math.pi if spec.form == "product" else 2.0 * math.pi
    n_hi = int(t_max / period)
    if n_hi < n_peaks:
        raise InsufficientPeaks(
            f"only {n_hi} candidate peaks below t_max={t_max}")
    records: list[tuple[float, float]] = []
    best = 0.5  # near-peak regime cutoff doubles as the first record level
    for n in range(1, n_hi + 1):
        t_peak, f_peak = _refine_peak(spec, period * n)
        one_minus = 1.0 - f_peak
        if one_minus < 1e-15:
            # an exact return to |f| = 1: rational lattice resonance
            return GrowthFit(math.nan, None, (), math.nan, degenerate=True)
        if t_peak >= 2.0 and one_minus < best:
            best = one_minus
            records.append((t_peak, one_minus))
    if len(records) < n_peaks:
        raise InsufficientPeaks(
            f"found {len(records)} record peaks, need {n_peaks}")
    sample = tuple(records[-n_peaks:])
    ts = np.array([t for t, _ in sample])
    ys = np.log([1.0 / om for _, om in sample])
    logt = np.log(ts)
    # the exponent comes from a log-t-only regression; fitting log t and
    # log log t jointly is ill conditioned because the two regressors are
    # nearly affine over any feasible t range
    design = np.column_stack([np.ones_like(logt), logt])
    coef, *_ = np.linalg.lstsq(design, ys, rcond=None)
    resid_vec = ys - design @ coef
    resid = float(np.sqrt(np.mean(resid_vec ** 2)))
    if t_max >= 1e3:
        qdesign = np.column_stack([np.ones_like(logt), np.log(logt)])
        qcoef, *_ = np.linalg.lstsq(qdesign, resid_vec, rcond=None)
        q_hat = float(qcoef[1])
    else:
        q_hat = None
    return GrowthFit(float(coef[1]), q_hat, sample, resid)
