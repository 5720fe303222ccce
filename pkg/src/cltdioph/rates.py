"""Experiment harness: Kolmogorov-distance sweeps, rate regressions,
the averaged-over-alpha bound, and the equidistribution comparison.

All distances are computed exactly from the discrete support; the only
estimated quantities are the regression coefficients.
"""

from __future__ import annotations

import csv
import json
import math
import time
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np

from .dioph import AlphaSpec
from .distkit import DiscreteDist, _binom_weights, kolmogorov_distance, \
    moments, product_bernoulli, zn_dist
from .edgeworth import EdgeworthComparison, EdgeworthParams, NormalComparison
from .errors import TooFewPoints


@dataclass(frozen=True)
class SweepRow:
    n: int
    delta_phi: float
    delta_phi3: Optional[float]
    argmax: float
    p_zero: float  # mass of the atom at 0, a distance lower bound via /2
    seconds: float

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class SweepResult:
    base: str
    rows: tuple[SweepRow, ...]
    sigma2: float
    alpha3: float
    beta4: float

    def __post_init__(self):
        ns = [r.n for r in self.rows]
        if any(b <= a for a, b in zip(ns, ns[1:])):
            raise ValueError("n values must be strictly increasing")
        for r in self.rows:
            if not 0.0 < r.delta_phi <= 1.0:
                raise ValueError(f"delta out of (0, 1] at n={r.n}")

    def to_dict(self) -> dict:
        return {"base": self.base, "sigma2": self.sigma2,
                "alpha3": self.alpha3, "beta4": self.beta4,
                "rows": [r.to_dict() for r in self.rows]}

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["n", "delta_phi", "delta_phi3", "argmax", "seconds"])
            for r in self.rows:
                w.writerow([r.n, f"{r.delta_phi:.17g}",
                            "" if r.delta_phi3 is None
                            else f"{r.delta_phi3:.17g}",
                            f"{r.argmax:.17g}", f"{r.seconds:.3f}"])


@dataclass(frozen=True)
class RateFit:
    exponent: float
    logpow: float
    r2: float
    window: tuple[int, int]
    constrained_exponent: Optional[float] = None
    constrained_logpow: Optional[float] = None

    def to_dict(self) -> dict:
        return asdict(self)


def delta_sweep(base: DiscreteDist, n_list, base_label: str = "",
                include_phi3: Optional[bool] = None) -> SweepResult:
    """Exact Kolmogorov distances of Z_n to the normal CDF (and to the
    skewness-corrected CDF for asymmetric bases) over the given n values."""
    m = moments(base)
    sigma = math.sqrt(m.sigma2)
    if include_phi3 is None:
        include_phi3 = abs(m.alpha3) > 1e-12
    normal = NormalComparison()
    rows = []
    for n in n_list:
        n = int(n)
        start = time.perf_counter()
        z = zn_dist(base, n)
        res = kolmogorov_distance(z, normal)
        d3 = None
        if include_phi3:
            params = EdgeworthParams(m.alpha3, sigma, n, m.beta4)
            d3 = kolmogorov_distance(z, EdgeworthComparison(params)).delta
        at_zero = np.abs(z.positions) < 1e-15
        p_zero = float(np.sum(z.weights[at_zero]))
        rows.append(SweepRow(n=n, delta_phi=res.delta, delta_phi3=d3,
                             argmax=res.argmax, p_zero=p_zero,
                             seconds=time.perf_counter() - start))
    return SweepResult(base=base_label or repr(base), rows=tuple(rows),
                       sigma2=m.sigma2, alpha3=m.alpha3, beta4=m.beta4)


def _fit(ns, deltas, eta_hint: Optional[float]) -> RateFit:
    if len(ns) < 5:
        raise TooFewPoints(f"rate fit needs >= 5 points, got {len(ns)}")
    ln = np.log(np.asarray(ns, dtype=float))
    y = np.log(np.asarray(deltas, dtype=float))
    design = np.column_stack([np.ones_like(ln), ln, np.log(ln)])
    coef, *_ = np.linalg.lstsq(design, y, rcond=None)
    resid = y - design @ coef
    ss_tot = float(np.sum((y - np.mean(y)) ** 2))
    r2 = 1.0 - float(np.sum(resid ** 2)) / ss_tot if ss_tot > 0 else 1.0
    c_exp = c_logpow = None
    if eta_hint is not None:
        if eta_hint <= 0:
            raise ValueError("eta_hint must be positive")
        c_exp = -0.5 - 0.5 / eta_hint
        pinned = y - c_exp * ln
        qdesign = np.column_stack([np.ones_like(ln), np.log(ln)])
        qcoef, *_ = np.linalg.lstsq(qdesign, pinned, rcond=None)
        c_logpow = float(qcoef[1])
    return RateFit(exponent=float(coef[1]), logpow=float(coef[2]), r2=r2,
                   window=(int(min(ns)), int(max(ns))),
                   constrained_exponent=c_exp, constrained_logpow=c_logpow)


def rate_fit(sweep: SweepResult, eta_hint: Optional[float] = None,
             target: str = "phi") -> RateFit:
    if target == "phi":
        deltas = [r.delta_phi for r in sweep.rows]
    elif target == "phi3":
        deltas = [r.delta_phi3 for r in sweep.rows]
        if any(d is None for d in deltas):
            raise ValueError("sweep has no corrected-CDF column")
    else:
        raise ValueError(f"unknown target {target!r}")
    return _fit([r.n for r in sweep.rows], deltas, eta_hint)


def avg_delta(n: int, grid_size: int) -> tuple[float, float]:
    """Midpoint-grid average of Delta_n(alpha) over alpha in (0, 1).

    Each alpha is the rational midpoint (2i+1)/(2 grid_size); the base is
    the four-atom sum of a unit Bernoulli and an alpha-scaled one. The
    returned ratio is average * n / log(n+1).
    """
    if grid_size < 1:
        raise ValueError("grid_size must be >= 1")
    normal = NormalComparison()
    w = np.array(_binom_weights(n))
    idx = np.arange(-n, n + 1, 2, dtype=np.int64)
    weights_grid = np.multiply.outer(w, w).ravel()
    total = 0.0
    for i in range(grid_size):
        total += _rational_grid_delta(2 * i + 1, 2 * grid_size, n,
                                      idx, weights_grid, normal)
    average = total / grid_size
    return average, average * n / math.log(n + 1.0)


def _rational_grid_delta(num: int, den: int, n: int, idx, weights_grid,
                         normal) -> float:
    """Delta_n for the base with atoms +/-1 +/- num/den.

    Atom positions live on the lattice Z/den, so collisions are merged by
    exact integer key before building the distribution.
    """
    keys = np.add.outer(idx * den, idx * num).ravel()
    order = np.argsort(keys, kind="stable")
    keys = keys[order]
    weights = weights_grid[order]
    uniq, start = np.unique(keys, return_index=True)
    merged = np.add.reduceat(weights, start)
    sigma2 = 1.0 + (num / den) ** 2
    positions = uniq / den / math.sqrt(sigma2 * n)
    z = DiscreteDist(positions, merged, _trusted=True)
    return kolmogorov_distance(z, normal).delta


def star_discrepancy(alpha: AlphaSpec, n: int) -> float:
    """sup over (0,1) of |empirical CDF of {k alpha}, k=1..n, minus x|.

    Uses the sorted-points formula; fractional parts come from a certified
    dyadic approximation with error under n 2^-64.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    frac = alpha.approx(64)
    num, den = frac.numerator, frac.denominator
    pts = sorted((k * num % den) / den for k in range(1, n + 1))
    best = 0.0
    for i, x in enumerate(pts, start=1):
        best = max(best, i / n - x, x - (i - 1) / n)
    return best


@dataclass(frozen=True)
class ComparisonReport:
    alpha: str
    delta_fit: RateFit
    dstar_fit: RateFit
    delta_rows: tuple[tuple[int, float], ...]
    dstar_rows: tuple[tuple[int, float], ...]

    def to_dict(self) -> dict:
        return {"alpha": self.alpha,
                "delta_fit": self.delta_fit.to_dict(),
                "dstar_fit": self.dstar_fit.to_dict(),
                "delta_rows": list(map(list, self.delta_rows)),
                "dstar_rows": list(map(list, self.dstar_rows))}


def _fit_simple(ns, deltas) -> RateFit:
    """Plain log-log slope with no log-power regressor.

    Used for the discrepancy pipeline: its values fluctuate with the
    continued-fraction phase of n, and a joint (log n, log log n) fit is
    too ill conditioned there to report a meaningful exponent.
    """
    if len(ns) < 5:
        raise TooFewPoints(f"rate fit needs >= 5 points, got {len(ns)}")
    ln = np.log(np.asarray(ns, dtype=float))
    y = np.log(np.asarray(deltas, dtype=float))
    design = np.column_stack([np.ones_like(ln), ln])
    coef, *_ = np.linalg.lstsq(design, y, rcond=None)
    resid = y - design @ coef
    ss_tot = float(np.sum((y - np.mean(y)) ** 2))
    r2 = 1.0 - float(np.sum(resid ** 2)) / ss_tot if ss_tot > 0 else 1.0
    return RateFit(exponent=float(coef[1]), logpow=0.0, r2=r2,
                   window=(int(min(ns)), int(max(ns))))


def compare_16_vs_17(alpha: AlphaSpec, n_list_delta,
                     n_list_dstar=None) -> ComparisonReport:
    """Side-by-side rate fits for the CLT distance and the star
    discrepancy of the orbit of alpha; for badly approximable alpha both
    targets are 1/n."""
    if n_list_dstar is None:
        n_list_dstar = n_list_delta
    base = product_bernoulli([alpha])
    sweep = delta_sweep(base, n_list_delta, base_label=f"b1*b_{alpha}")
    delta_rows = tuple((r.n, r.delta_phi) for r in sweep.rows)
    dstar_rows = tuple((int(n), star_discrepancy(alpha, int(n)))
                       for n in n_list_dstar)
    return ComparisonReport(
        alpha=str(alpha),
        delta_fit=rate_fit(sweep),
        dstar_fit=_fit_simple([n for n, _ in dstar_rows],
                              [d for _, d in dstar_rows]),
        delta_rows=delta_rows,
        dstar_rows=dstar_rows,
    )


def write_dstar_csv(path, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["n", "dstar"])
        for n, d in rows:
            w.writerow([n, f"{d:.17g}"])


def write_fit_json(path, fit: RateFit) -> None:
    with open(path, "w") as fh:
        json.dump(fit.to_dict(), fh, indent=1)
        fh.write("\n")
