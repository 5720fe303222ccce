"""Certified-precision Diophantine toolkit.

Real numbers are described by an AlphaSpec (quadratic surd, continued
fraction, decimal string, or exact rational) that can produce, for any
requested bit count B, an integer mantissa M with |alpha - M/2^B| < 2^-B.
Everything downstream (distance to the nearest integer, irrationality-type
scans, Khinchine infima) consumes that oracle and either certifies its
answer or raises PrecisionExhausted.
"""

from __future__ import annotations

import math
import os
import threading
from dataclasses import dataclass, field
from fractions import Fraction
from math import isqrt
from typing import Callable, Optional, Sequence

from .errors import PrecisionExhausted

#: hard ceiling for the doubling precision protocol (bits); can be raised
#: via the CLT_DIOPH_PRECISION_BITS environment variable.
DEFAULT_MAX_BITS = 4096


def max_precision_bits() -> int:
    return int(os.environ.get("CLT_DIOPH_PRECISION_BITS", DEFAULT_MAX_BITS))


def _round_div(a: int, b: int) -> int:
    """Nearest integer to a/b, ties toward -inf (b > 0)."""
    if b < 0:
        a, b = -a, -b
    return (2 * a + b) // (2 * b)


def _floor_surd(p: int, d: int, q: int) -> int:
    """floor((p + sqrt(d)) / q) for non-square d > 0 and q != 0."""
    s = isqrt(d)  # sqrt(d) irrational, so floor(p + sqrt(d)) = p + s
    if q > 0:
        return (p + s) // q
    # x/q = -(x/|q|); x irrational, so floor(-y) = -floor(y) - 1
    return -((p + s) // (-q)) - 1


class AlphaSpec:
    """A real number with a certified-precision rational oracle.

    Construct through the classmethods ``surd``, ``from_cf``, ``decimal``,
    ``rational`` or ``parse``.  Instances are immutable; the mantissa cache
    is guarded by a lock so oracles are safe to share across threads.
    """

    def __init__(self, kind: str, text: str):
        self.kind = kind
        self.text = text
        self._cache: dict[int, int] = {}
        self._lock = threading.Lock()

    # -- constructors ------------------------------------------------------

    @classmethod
    def surd(cls, a: int, b: int, c: int, d: int) -> "AlphaSpec":
        """(a + b*sqrt(d)) / c with integer a, b, c, d."""
        if c == 0:
            raise ValueError("surd: c must be nonzero")
        if d < 0:
            raise ValueError("surd: d must be nonnegative")
        r = isqrt(d)
        if b == 0 or r * r == d:
            # degenerate surd; collapses to the rational (a + b*r)/c
            return cls.rational(a + b * r, c)
        self = cls("surd", f"surd:{a},{b},{c},{d}")
        self._a, self._b, self._c, self._d = a, b, c, d
        return self

    @classmethod
    def from_cf(cls, a0: int, quotients: Sequence[int],
                periodic: Sequence[int] = ()) -> "AlphaSpec":
        """Explicit continued fraction a0 + 1/(a1 + 1/(a2 + ...)).

        ``quotients`` is a finite prefix; ``periodic`` (optional) repeats
        forever after it.  All partial quotients must be positive.
        """
        quotients = list(quotients)
        periodic = list(periodic)
        if any(a <= 0 for a in quotients + periodic):
            raise ValueError("cf: partial quotients a1, a2, ... must be positive")
        if not quotients and not periodic:
            return cls.rational(a0, 1)
        if not periodic and len(quotients) >= 1:
            # finite CF: exact rational
            val = Fraction(quotients[-1])
            for a in reversed(quotients[:-1]):
                val = a + 1 / val
            return cls.rational(*(a0 + 1 / val).as_integer_ratio())
        body = ",".join(map(str, quotients))
        tail = ("periodic:" + ",".join(map(str, periodic))) if periodic else ""
        sep = "," if body and tail else ""
        self = cls("cf", f"cf:{a0};{body}{sep}{tail}")
        self._a0 = a0
        self._prefix = quotients
        self._period = periodic
        return self

    @classmethod
    def decimal(cls, digits: str) -> "AlphaSpec":
        """Decimal string; certified to +/- one unit in the last place."""
        s = digits.strip()
        sign = 1
        if s.startswith(("+", "-")):
            sign = -1 if s[0] == "-" else 1
            s = s[1:]
        if "." in s:
            intpart, fracpart = s.split(".", 1)
        else:
            intpart, fracpart = s, ""
        if not (intpart + fracpart).isdigit() or not (intpart or fracpart):
            raise ValueError(f"bad decimal string: {digits!r}")
        k = len(fracpart)
        v = sign * Fraction(int((intpart or "0") + fracpart), 10 ** k)
        self = cls("dec", f"dec:{digits}")
        self._value = v
        self._ulp = Fraction(1, 10 ** k)
        # largest B with 2^-(B+1) + ulp < 2^-B, i.e. 2^-(B+1) > ulp
        self._max_bits = max(0, int(k * math.log2(10)) - 1)
        return self

    @classmethod
    def rational(cls, p: int, q: int) -> "AlphaSpec":
        if q == 0:
            raise ValueError("rational: zero denominator")
        self = cls("rat", f"rat:{p}/{q}")
        self._frac = Fraction(p, q)
        return self

    @classmethod
    def parse(cls, text: str) -> "AlphaSpec":
        """Parse the text grammar surd:a,b,c,d | cf:a0;... | dec:... | rat:p/q."""
        head, _, body = text.partition(":")
        if head == "surd":
            parts = [int(x) for x in body.split(",")]
            if len(parts) != 4:
                raise ValueError(f"surd wants 4 integers, got {text!r}")
            return cls.surd(*parts)
        if head == "cf":
            a0_s, _, rest = body.partition(";")
            a0 = int(a0_s)
            pre: list[int] = []
            per: list[int] = []
            if rest:
                if "periodic:" in rest:
                    pre_s, per_s = rest.split("periodic:", 1)
                    pre = [int(x) for x in pre_s.strip(",").split(",") if x]
                    per = [int(x) for x in per_s.split(",") if x]
                else:
                    pre = [int(x) for x in rest.split(",") if x]
            return cls.from_cf(a0, pre, per)
        if head == "dec":
            return cls.decimal(body)
        if head == "rat":
            p_s, _, q_s = body.partition("/")
            return cls.rational(int(p_s), int(q_s) if q_s else 1)
        raise ValueError(f"unknown alpha spec {text!r}")

    # -- oracle ------------------------------------------------------------

    @property
    def is_rational(self) -> bool:
        return self.kind == "rat"

    def exact_fraction(self) -> Fraction:
        if not self.is_rational:
            raise ValueError("exact_fraction only for rational specs")
        return self._frac

    def mantissa(self, bits: int) -> int:
        """Integer M with |alpha - M/2^bits| < 2^-bits."""
        if bits < 1:
            raise ValueError("bits must be positive")
        with self._lock:
            m = self._cache.get(bits)
        if m is not None:
            return m
        m = self._mantissa_uncached(bits)
        with self._lock:
            self._cache[bits] = m
        return m

    def approx(self, bits: int) -> Fraction:
        """Exact rational r with |alpha - r| < 2^-bits (monotone in bits)."""
        return Fraction(self.mantissa(bits), 1 << bits)

    def to_float(self) -> float:
        if self.is_rational:
            return float(self._frac)
        bits = 80
        if self.kind == "dec":
            bits = min(bits, self._max_bits)
        return self.mantissa(bits) / float(1 << bits)

    def _mantissa_uncached(self, bits: int) -> int:
        if self.kind == "rat":
            f = self._frac
            return _round_div(f.numerator << bits, f.denominator)
        if self.kind == "dec":
            if bits > self._max_bits:
                raise PrecisionExhausted(
                    f"decimal spec certifies at most {self._max_bits} bits, "
                    f"{bits} requested")
            f = self._value
            return _round_div(f.numerator << bits, f.denominator)
        if self.kind == "surd":
            a, b, c, d = self._a, self._b, self._c, self._d
            slack = (abs(b) // abs(c) + 3).bit_length() + 4
            w = bits + slack
            s = isqrt(d << (2 * w))  # |s - 2^w sqrt(d)| < 1
            num = a * (1 << w) + b * s  # |num - 2^w c alpha| < |b| ... (alpha*c)
            return _round_div(num << bits, c << w)
        # cf kind: convergents certify |alpha - p/q| < 1/q^2
        p0, q0 = 1, 0
        p1, q1 = self._a0, 1
        for a in self._cf_quotients():
            p0, q0, p1, q1 = p1, q1, a * p1 + p0, a * q1 + q0
            if q1 * q1 >= (1 << (bits + 2)):
                return _round_div(p1 << bits, q1)
        raise PrecisionExhausted("finite CF exhausted (should be rational)")

    def _cf_quotients(self):
        """Yield a1, a2, ... (prefix then cycling periodic block)."""
        yield from self._prefix
        if self._period:
            while True:
                yield from self._period

    def __repr__(self) -> str:  # pragma: no cover
        return f"AlphaSpec({self.text!r})"


# ---------------------------------------------------------------------------
# continued fractions


@dataclass
class ContinuedFraction:
    """Partial quotients [a0; a1, a2, ...] with exact convergents."""

    a0: int
    quotients: list[int]            # a1, a2, ... (positive)
    convergents: list[Fraction] = field(default_factory=list)
    terminated: bool = False        # rational input ended before `depth`
    period: Optional[int] = None    # cycle length for quadratic surds
    certified: Optional[int] = None  # quotients certified (decimal kind)

    def __post_init__(self):
        if not self.convergents:
            self.convergents = _convergent_list(self.a0, self.quotients)
        for k in range(1, len(self.convergents)):
            p1, q1 = self.convergents[k].numerator, self.convergents[k].denominator
            p0, q0 = self.convergents[k - 1].numerator, self.convergents[k - 1].denominator
            if p1 * q0 - p0 * q1 != (-1) ** (k - 1):
                raise AssertionError("convergent determinant identity broken")


def _convergent_list(a0: int, quotients: Sequence[int]) -> list[Fraction]:
    convs = [Fraction(a0, 1)]
    p0, q0, p1, q1 = 1, 0, a0, 1
    for a in quotients:
        p0, q0, p1, q1 = p1, q1, a * p1 + p0, a * q1 + q0
        convs.append(Fraction(p1, q1))
    return convs


def _cf_rational(frac: Fraction, depth: int) -> ContinuedFraction:
    p, q = frac.numerator, frac.denominator
    a0 = p // q
    p, q = q, p - a0 * q
    quots: list[int] = []
    while q != 0 and len(quots) < depth - 1:
        a = p // q
        quots.append(a)
        p, q = q, p - a * q
    return ContinuedFraction(a0, quots, terminated=(q == 0))


def _cf_surd(alpha: AlphaSpec, depth: int) -> ContinuedFraction:
    a, b, c, d = alpha._a, alpha._b, alpha._c, alpha._d
    # normalize to (P + sqrt(D))/Q with Q | D - P^2
    if b > 0:
        P, Q, D = a, c, b * b * d
    else:
        P, Q, D = -a, -c, b * b * d
    if (D - P * P) % Q != 0:
        P, D, Q = P * abs(Q), D * Q * Q, Q * abs(Q)
    quots: list[int] = []
    a0 = _floor_surd(P, D, Q)
    x_a = a0
    seen: dict[tuple[int, int], int] = {}
    period = None
    i = 0
    while len(quots) < depth - 1:
        P = x_a * Q - P
        Q = (D - P * P) // Q
        state = (P, Q)
        if state in seen and period is None:
            period = i - seen[state]
        elif state not in seen:
            seen[state] = i
        x_a = _floor_surd(P, D, Q)
        quots.append(x_a)
        i += 1
    return ContinuedFraction(a0, quots, period=period)


def _cf_interval(lo: Fraction, hi: Fraction, depth: int) -> tuple[int, list[int], int]:
    """CF quotients certified by the interval [lo, hi]; returns (a0, quots, count)."""
    a0_lo, a0_hi = lo.numerator // lo.denominator, hi.numerator // hi.denominator
    if a0_lo != a0_hi:
        return a0_lo, [], 0
    a0 = a0_lo
    lo, hi = lo - a0, hi - a0
    quots: list[int] = []
    certified = 1
    while len(quots) < depth - 1:
        if lo <= 0 or hi <= 0:
            break
        lo, hi = 1 / hi, 1 / lo
        a_lo, a_hi = lo.numerator // lo.denominator, hi.numerator // hi.denominator
        if a_lo != a_hi:
            break
        quots.append(a_lo)
        certified += 1
        lo, hi = lo - a_lo, hi - a_lo
    return a0, quots, certified


def cf_expand(alpha: AlphaSpec, depth: int, partial: bool = False) -> ContinuedFraction:
    """First `depth` partial quotients of alpha (exact integer algorithms).

    For decimal specs only quotients certified by the digit budget are
    produced; fewer than `depth` raises PrecisionExhausted unless
    ``partial`` is set.
    """
    if depth < 1:
        raise ValueError("depth must be >= 1")
    if alpha.kind == "rat":
        return _cf_rational(alpha._frac, depth)
    if alpha.kind == "surd":
        return _cf_surd(alpha, depth)
    if alpha.kind == "cf":
        quots = []
        gen = alpha._cf_quotients()
        for _ in range(depth - 1):
            quots.append(next(gen))
        period = len(alpha._period) if alpha._period else None
        return ContinuedFraction(alpha._a0, quots, period=period)
    # decimal: interval arithmetic on [v - ulp, v + ulp]
    a0, quots, certified = _cf_interval(alpha._value - alpha._ulp,
                                        alpha._value + alpha._ulp, depth)
    if certified == 0 or (certified < depth and not partial):
        raise PrecisionExhausted(
            f"decimal digits certify only {certified} of {depth} quotients")
    return ContinuedFraction(a0, quots, certified=certified)


def convergents(cf: ContinuedFraction, k: int) -> list[Fraction]:
    """Convergents p_i/q_i for i = 0..k as exact rationals."""
    if k < 0 or k >= len(cf.convergents):
        raise ValueError(f"convergent index {k} out of range "
                         f"(have {len(cf.convergents)})")
    return cf.convergents[:k + 1]


# ---------------------------------------------------------------------------
# nearest-integer distance


def nearest_int_dist(alpha: AlphaSpec, n: int) -> tuple[float, float]:
    """(||n*alpha||, certified absolute error bound < 2^-40).

    Doubles the oracle bit budget until the nearest integer to n*alpha is
    unambiguous and the distance separates from 0 and 1/2 by more than the
    error bound.  Raises PrecisionExhausted at the budget ceiling.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if alpha.is_rational:
        f = n * alpha.exact_fraction()
        frac = f - (f.numerator // f.denominator)
        dist = min(frac, 1 - frac)
        return float(dist), 0.0
    cap = max_precision_bits()
    if alpha.kind == "dec":
        cap = min(cap, alpha._max_bits)
    bits = max(64, 41 + n.bit_length())
    if bits > cap:
        raise PrecisionExhausted(
            f"need {bits} bits to certify ||{n}*alpha||, budget is {cap}")
    while True:
        m = alpha.mantissa(bits)
        r = (n * m) % (1 << bits)          # fractional part numerator
        dist_num = min(r, (1 << bits) - r)
        err = n / float(1 << bits)          # |n*alpha - n*m/2^bits|
        dist = dist_num / float(1 << bits)
        half_gap = abs(dist - 0.5)
        if err < 2.0 ** -40 and dist > err and half_gap > err:
            return dist, err
        if bits >= cap:
            raise PrecisionExhausted(
                f"cannot separate {n}*alpha from 0 or 1/2 within {cap} bits")
        bits = min(2 * bits, cap)


# ---------------------------------------------------------------------------
# irrationality-type estimate


@dataclass
class TypeEstimate:
    """Finite-horizon proxy for the irrationality type eta(alpha)."""

    eta_hat: float
    witnesses: list[tuple[int, float, float]]  # (n, ||n alpha||, n^eta * ||n alpha||)
    n_max: int
    degenerate: bool = False  # rational alpha: ||n alpha|| = 0 occurred


def type_estimate(alpha: AlphaSpec, n_max: int) -> TypeEstimate:
    """Empirical exponent max_n log(1/(2||n alpha||)) / log n over the horizon.

    The scan is restricted to sqrt(n_max) <= n <= n_max so the estimate
    tracks the asymptotic regime: a plain max over all n >= 2 is monotone
    in the horizon and stays pinned to small-n artifacts forever, whereas
    the windowed max converges to 1 from above for badly approximable
    alpha.  Records the chain of running maxima as witnesses.  Rational
    alpha is reported with the degenerate flag (an exact hit
    ||n alpha|| = 0 anywhere on the horizon).
    """
    if n_max < 2:
        raise ValueError("n_max must be >= 2")
    n_min = max(2, isqrt(n_max))
    eta_hat = float("-inf")
    chain: list[tuple[int, float, float]] = []
    for n in range(1, n_max + 1):
        dist, _ = nearest_int_dist(alpha, n)
        if dist == 0.0:
            return TypeEstimate(math.inf, chain, n_max, degenerate=True)
        if n < n_min:
            continue
        eta_n = math.log(1.0 / (2.0 * dist)) / math.log(n)
        if eta_n > eta_hat:
            eta_hat = eta_n
            chain.append((n, dist, n ** eta_n * dist))
    return TypeEstimate(eta_hat, chain, n_max)


# ---------------------------------------------------------------------------
# epsilon profile and Khinchine r_psi


@dataclass
class EpsProfile:
    """Pointwise profile eps(n) = max_k ||n alpha_k|| for n = 1..n_max."""

    values: list[float]
    diagnostic: Optional[list[float]] = None  # n^eta (log n)^eta' eps(n)

    def __getitem__(self, n: int) -> float:
        return self.values[n - 1]


def eps_profile(alphas: Sequence[AlphaSpec], n_max: int,
                eta: Optional[float] = None,
                eta_prime: Optional[float] = None) -> EpsProfile:
    if not alphas:
        raise ValueError("need at least one alpha")
    values = []
    for n in range(1, n_max + 1):
        values.append(max(nearest_int_dist(a, n)[0] for a in alphas))
    diag = None
    if eta is not None:
        ep = eta_prime if eta_prime is not None else 0.0
        diag = [n ** eta * (math.log(n) ** ep if n > 1 else 1.0) * v
                for n, v in enumerate(values, start=1)]
    return EpsProfile(values, diag)


@dataclass
class KhinchinePsi:
    """Positive weight function psi(n) for the Khinchine functional."""

    fn: Callable[[int], float]
    non_increasing: bool = False
    description: str = ""

    def __call__(self, n: int) -> float:
        v = self.fn(n)
        if v <= 0:
            raise ValueError(f"psi({n}) = {v} must be positive")
        return v

    def check_monotone(self, n_max: int) -> bool:
        return all(self(n + 1) <= self(n) for n in range(1, n_max))


def khinchine_r(alpha: AlphaSpec, psi: KhinchinePsi,
                n_max: int) -> tuple[float, int]:
    """Partial infimum of ||n alpha|| / psi(n) over 1 <= n <= n_max.

    Returns (value, argmin); monotone non-increasing in n_max.
    """
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    best, arg = math.inf, 0
    for n in range(1, n_max + 1):
        dist, _ = nearest_int_dist(alpha, n)
        v = dist / psi(n)
        if v < best:
            best, arg = v, n
        if best == 0.0:
            break
    return best, arg
