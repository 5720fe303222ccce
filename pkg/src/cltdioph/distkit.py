"""Finitely supported distributions and exact Kolmogorov distances.

A DiscreteDist is an immutable sorted atom/weight table.  Distributions
built from symmetric +/-1 factors coupled by irrational coefficients carry
a lattice tag (integer coordinates against the coefficient vector
(1, alpha_1, ..., alpha_m)); the tag guarantees collision-free merging and
unlocks the product-of-binomials fast path for Z_n.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple, Optional, Sequence

import numpy as np
from scipy.special import ndtr

from .dioph import AlphaSpec
from .errors import PrecisionExhausted, SupportOverflow

#: default atom-count ceiling for convolutions (desk-scale memory cap)
ATOM_CAP = 30_000_000

_MASS_TOL = 2.0 ** -45
_MERGE_TOL = 1e-12


@dataclass(frozen=True)
class LatticeTag:
    """Integer coordinates over the coefficient vector (1, alpha_1..alpha_m)."""

    alphas: tuple[AlphaSpec, ...]
    coords: np.ndarray  # shape (n_atoms, m + 1), int64
    scale: float = 1.0  # position = (coords @ (1, alphas)) * scale

    @property
    def m(self) -> int:
        return len(self.alphas)

    def compatible(self, other: "LatticeTag") -> bool:
        return (self.scale == other.scale
                and len(self.alphas) == len(other.alphas)
                and all(a.text == b.text for a, b in zip(self.alphas, other.alphas)))


class DiscreteDist:
    """Sorted finitely supported probability measure."""

    def __init__(self, positions: np.ndarray, weights: np.ndarray,
                 lattice: Optional[LatticeTag] = None, _trusted: bool = False):
        positions = np.asarray(positions, dtype=np.float64)
        weights = np.asarray(weights, dtype=np.float64)
        if positions.ndim != 1 or positions.shape != weights.shape:
            raise ValueError("positions and weights must be matching 1-d arrays")
        if positions.size == 0:
            raise ValueError("distribution needs at least one atom")
        if np.any(weights == 0.0):
            # drop atoms whose weight underflowed to an exact zero
            keep = weights > 0.0
            positions, weights = positions[keep], weights[keep]
            if lattice is not None:
                lattice = LatticeTag(lattice.alphas, lattice.coords[keep],
                                     lattice.scale)
        if not _trusted:
            order = np.argsort(positions, kind="stable")
            positions, weights = positions[order], weights[order]
            if lattice is not None:
                lattice = LatticeTag(lattice.alphas, lattice.coords[order],
                                     lattice.scale)
            positions, weights, lattice = _merge_atoms(positions, weights, lattice)
        if np.any(weights <= 0):
            raise ValueError("weights must be positive")
        total = float(np.sum(weights, dtype=np.float128))
        if abs(total - 1.0) > _MASS_TOL:
            raise ValueError(f"weights sum to {total}, not 1")
        self.positions = positions
        self.weights = weights
        self.lattice = lattice
        self.positions.setflags(write=False)
        self.weights.setflags(write=False)
        self._cum = np.asarray(np.cumsum(weights.astype(np.float128)),
                               dtype=np.float64)

    def __len__(self) -> int:
        return self.positions.size

    # -- CDF queries --------------------------------------------------------

    def cdf(self, x: float) -> float:
        """P{X <= x} (right-continuous)."""
        i = np.searchsorted(self.positions, x, side="right")
        return float(self._cum[i - 1]) if i > 0 else 0.0

    def cdf_left(self, x: float) -> float:
        """P{X < x} (left limit of the CDF)."""
        i = np.searchsorted(self.positions, x, side="left")
        return float(self._cum[i - 1]) if i > 0 else 0.0

    def serialize_csv(self, path) -> None:
        """CSV dump: position,weight[,coords...] with 17 significant digits."""
        with open(path, "w") as fh:
            if self.lattice is not None:
                m = self.lattice.m
                cols = ",".join(f"c{j}" for j in range(m + 1))
                fh.write(f"position,weight,{cols}\n")
                for x, w, row in zip(self.positions, self.weights,
                                     self.lattice.coords):
                    coords = ",".join(str(int(v)) for v in row)
                    fh.write(f"{x:.17g},{w:.17g},{coords}\n")
            else:
                fh.write("position,weight\n")
                for x, w in zip(self.positions, self.weights):
                    fh.write(f"{x:.17g},{w:.17g}\n")


def _merge_atoms(positions, weights, lattice):
    """Merge coincident atoms after sorting.

    Lattice-tagged atoms merge only when their coordinate tuples match;
    float positions merge when they agree within _MERGE_TOL relative.  A
    near-collision of distinct lattice tuples cannot be ordered reliably in
    doubles and raises PrecisionExhausted.
    """
    if positions.size <= 1:
        return positions, weights, lattice
    scale = max(1.0, float(np.max(np.abs(positions))))
    close = np.diff(positions) <= _MERGE_TOL * scale
    if not np.any(close):
        return positions, weights, lattice
    if lattice is not None:
        coords = lattice.coords
        same = np.all(coords[1:] == coords[:-1], axis=1)
        if np.any(close & ~same):
            raise PrecisionExhausted(
                "distinct lattice atoms collide at double precision")
        group_break = ~(close & same)
    else:
        group_break = ~close
    idx = np.concatenate(([0], np.nonzero(group_break)[0] + 1))
    merged_w = np.add.reduceat(weights, idx)
    merged_x = positions[idx]
    new_lattice = None
    if lattice is not None:
        new_lattice = LatticeTag(lattice.alphas, lattice.coords[idx], lattice.scale)
    return merged_x, merged_w, new_lattice


# ---------------------------------------------------------------------------
# constructors


def delta(position: float = 0.0) -> DiscreteDist:
    return DiscreteDist(np.array([position]), np.array([1.0]))


def bernoulli_pm(scale) -> DiscreteDist:
    """Symmetric two-point distribution on {-scale, +scale}.

    ``scale`` may be a float or an AlphaSpec (evaluated at oracle
    precision); the sign of the scale is irrelevant.
    """
    s = abs(scale.to_float() if isinstance(scale, AlphaSpec) else float(scale))
    if s == 0.0:
        raise ValueError("degenerate scale 0")
    return DiscreteDist(np.array([-s, s]), np.array([0.5, 0.5]))


def product_bernoulli(alphas: Sequence[AlphaSpec]) -> DiscreteDist:
    """B_1 * B_{alpha_1} * ... * B_{alpha_m} with a lattice tag."""
    alphas = tuple(alphas)
    vals = np.array([1.0] + [a.to_float() for a in alphas])
    m = len(alphas)
    grids = np.meshgrid(*([np.array([-1, 1], dtype=np.int64)] * (m + 1)),
                        indexing="ij")
    coords = np.stack([g.ravel() for g in grids], axis=1)
    positions = coords @ vals
    weights = np.full(coords.shape[0], 0.5 ** (m + 1))
    tag = LatticeTag(alphas, coords)
    return DiscreteDist(positions, weights, lattice=tag)


def mixture_bernoulli(weights: Sequence[float],
                      alphas: Sequence[AlphaSpec]) -> DiscreteDist:
    """p_0 B_1 + sum_k p_k B_{alpha_k} with a lattice tag over (1, alphas)."""
    alphas = tuple(alphas)
    if len(weights) != len(alphas) + 1:
        raise ValueError("need one weight per component (leading B_1 included)")
    if any(p <= 0 for p in weights) or abs(sum(weights) - 1.0) > _MASS_TOL:
        raise ValueError("mixture weights must be positive and sum to 1")
    vals = np.array([1.0] + [a.to_float() for a in alphas])
    m = len(alphas)
    coords = []
    w = []
    for k, p in enumerate(weights):
        for sgn in (-1, 1):
            row = np.zeros(m + 1, dtype=np.int64)
            row[k] = sgn
            coords.append(row)
            w.append(p / 2.0)
    coords = np.array(coords, dtype=np.int64)
    positions = coords @ vals
    tag = LatticeTag(alphas, coords)
    return DiscreteDist(positions, np.array(w), lattice=tag)


def mixture(components: Sequence[tuple[float, DiscreteDist]]) -> DiscreteDist:
    """Weighted union of distributions (weights positive, summing to 1)."""
    if not components:
        raise ValueError("empty mixture")
    ws = [w for w, _ in components]
    if any(w <= 0 for w in ws) or abs(sum(ws) - 1.0) > _MASS_TOL:
        raise ValueError(f"mixture weights must be positive and sum to 1, got {ws}")
    positions = np.concatenate([d.positions for _, d in components])
    weights = np.concatenate([w * d.weights for w, d in components])
    tags = [d.lattice for _, d in components]
    lattice = None
    if all(t is not None for t in tags) and all(tags[0].compatible(t) for t in tags):
        lattice = LatticeTag(tags[0].alphas,
                             np.concatenate([t.coords for t in tags]),
                             tags[0].scale)
    return DiscreteDist(positions, weights, lattice=lattice)


# ---------------------------------------------------------------------------
# convolution and normalized sums


def convolve(d1: DiscreteDist, d2: DiscreteDist,
             atom_cap: int = ATOM_CAP) -> DiscreteDist:
    """Distribution of X1 + X2 for independent X1 ~ d1, X2 ~ d2."""
    k = len(d1) * len(d2)
    if k > atom_cap:
        raise SupportOverflow(f"convolution support {k} exceeds cap {atom_cap}")
    positions = np.add.outer(d1.positions, d2.positions).ravel()
    weights = np.multiply.outer(d1.weights, d2.weights).ravel()
    lattice = None
    if (d1.lattice is not None and d2.lattice is not None
            and d1.lattice.compatible(d2.lattice)):
        c1, c2 = d1.lattice.coords, d2.lattice.coords
        coords = (c1[:, None, :] + c2[None, :, :]).reshape(k, c1.shape[1])
        lattice = LatticeTag(d1.lattice.alphas, coords, d1.lattice.scale)
    if lattice is not None:
        # exact merge on integer tuples, then order by position
        positions, weights, lattice = _merge_lattice_exact(positions, weights,
                                                           lattice)
        return DiscreteDist(positions, weights, lattice=lattice)
    return DiscreteDist(positions, weights)


def _merge_lattice_exact(positions, weights, lattice):
    coords = lattice.coords
    keys = np.ascontiguousarray(coords).view(
        np.dtype((np.void, coords.dtype.itemsize * coords.shape[1])))
    _, idx, inv = np.unique(keys.ravel(), return_index=True, return_inverse=True)
    merged_w = np.zeros(idx.size)
    np.add.at(merged_w, inv, weights)
    merged_x = positions[idx]
    merged_c = coords[idx]
    order = np.argsort(merged_x, kind="stable")
    return (merged_x[order], merged_w[order],
            LatticeTag(lattice.alphas, merged_c[order], lattice.scale))


def _binom_weights(n: int) -> np.ndarray:
    """P{S = -n + 2k}, k = 0..n, for a sum of n +/-1 coin flips.

    Each weight is the correctly rounded double of the exact rational
    C(n,k)/2^n, so the total mass error stays at one ulp regardless of n
    (far tighter than log-space evaluation).
    """
    denom = 1 << n
    return np.array([float(Fraction(math.comb(n, k), denom))
                     for k in range(n + 1)])


def _is_product_tag(tag: LatticeTag) -> bool:
    """True when every atom is a full sign vector (product-of-Bernoullis base)."""
    return bool(np.all(np.abs(tag.coords) == 1))


def zn_dist(base: DiscreteDist, n: int, atom_cap: int = ATOM_CAP) -> DiscreteDist:
    """Distribution of Z_n = (X_1 + ... + X_n) / (sigma sqrt(n)).

    Product-of-Bernoullis bases (lattice tag with full +/-1 coordinate
    vectors) use the exact product-of-binomials fast path; everything else
    goes through iterated convolution by binary powering.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    mom = moments(base, n)
    if mom.sigma2 <= 0:
        raise ValueError("base distribution is degenerate")
    scale = 1.0 / (math.sqrt(mom.sigma2) * math.sqrt(n))

    tag = base.lattice
    if tag is not None and _is_product_tag(tag) and len(base) == 2 ** (tag.m + 1):
        return _zn_product(tag.alphas, n, scale, atom_cap)

    # binary powering on the raw sum, rescale once at the end
    result: Optional[DiscreteDist] = None
    power = base
    k = n
    while k:
        if k & 1:
            result = power if result is None else convolve(result, power, atom_cap)
        k >>= 1
        if k:
            power = convolve(power, power, atom_cap)
    assert result is not None
    lattice = None
    if result.lattice is not None:
        lattice = LatticeTag(result.lattice.alphas, result.lattice.coords,
                             result.lattice.scale * scale)
    return DiscreteDist(result.positions * scale, result.weights,
                        lattice=lattice, _trusted=True)


def _zn_product(alphas: tuple[AlphaSpec, ...], n: int, scale: float,
                atom_cap: int) -> DiscreteDist:
    """Exact Z_n for B_1 * B_alpha_1 * ... * B_alpha_m via binomial marginals."""
    m = len(alphas)
    if (n + 1) ** (m + 1) > atom_cap:
        raise SupportOverflow(
            f"Z_n support (n+1)^{m + 1} = {(n + 1) ** (m + 1)} exceeds cap {atom_cap}")
    vals = [1.0] + [a.to_float() for a in alphas]
    support = np.arange(-n, n + 1, 2, dtype=np.int64)
    wb = _binom_weights(n)
    coords_grids = np.meshgrid(*([support] * (m + 1)), indexing="ij")
    coords = np.stack([g.ravel() for g in coords_grids], axis=1)
    weights = np.ones(1)
    for _ in range(m + 1):
        weights = np.multiply.outer(weights, wb)
    weights = weights.ravel()
    positions = (coords @ np.array(vals)) * scale
    tag = LatticeTag(alphas, coords, scale)
    return DiscreteDist(positions, weights, lattice=tag)


def zn_dist_exact(alphas: Sequence[AlphaSpec], n: int) -> dict[tuple[int, ...], Fraction]:
    """Exact big-rational Z_n weights for a product-of-Bernoullis base.

    Keyed by integer coordinate tuples; intended as a test oracle
    (n <= 64).
    """
    if n > 64:
        raise ValueError("exact mode is capped at n = 64")
    m = len(alphas)
    support = list(range(-n, n + 1, 2))
    binom = [Fraction(math.comb(n, (n + i) // 2), 2 ** n) for i in support]
    out: dict[tuple[int, ...], Fraction] = {}

    def rec(prefix: tuple[int, ...], w: Fraction, depth: int):
        if depth == m + 1:
            out[prefix] = out.get(prefix, Fraction(0)) + w
            return
        for i, wi in zip(support, binom):
            rec(prefix + (i,), w * wi, depth + 1)

    rec((), Fraction(1), 0)
    return out


def cdf(d: DiscreteDist, x: float) -> float:
    return d.cdf(x)


def cdf_left(d: DiscreteDist, x: float) -> float:
    return d.cdf_left(x)


# ---------------------------------------------------------------------------
# moments


class Moments(NamedTuple):
    mean: float
    sigma2: float   # variance
    alpha3: float   # E X^3
    beta3: float    # E |X|^3
    beta4: float    # E X^4
    lyapunov3: float  # L_3 = beta3 / sigma^3 / sqrt(n)
    lyapunov4: float  # L_4 = beta4 / sigma^4 / n


def moments(d: DiscreteDist, n: int = 1) -> Moments:
    x, w = d.positions, d.weights
    mean = math.fsum(w * x)
    sigma2 = math.fsum(w * (x - mean) ** 2)
    alpha3 = math.fsum(w * x ** 3)
    beta3 = math.fsum(w * np.abs(x) ** 3)
    beta4 = math.fsum(w * x ** 4)
    sigma = math.sqrt(sigma2) if sigma2 > 0 else 0.0
    l3 = beta3 / sigma ** 3 / math.sqrt(n) if sigma > 0 else math.inf
    l4 = beta4 / sigma ** 4 / n if sigma > 0 else math.inf
    return Moments(mean, sigma2, alpha3, beta3, beta4, l3, l4)


# ---------------------------------------------------------------------------
# Kolmogorov distance


class KolmogorovResult(NamedTuple):
    delta: float
    argmax: float
    side: str  # "left" or "right"


def kolmogorov_distance(d: DiscreteDist, G) -> KolmogorovResult:
    """sup_x |F(x) - G(x)| for the step CDF F of d and a continuous G.

    The sup is attained either one-sided at an atom or at a stationary
    point of G inside a gap of the support (G's monotone tails cannot beat
    the boundary atoms, which are included two-sided).
    """
    x = d.positions
    cum = d._cum
    gx = np.asarray(G(x), dtype=np.float64)
    right = np.abs(cum - gx)                       # F(x_k) vs G(x_k)
    left = np.abs(np.concatenate(([0.0], cum[:-1])) - gx)  # F(x_k-) vs G(x_k)
    i_r = int(np.argmax(right))
    i_l = int(np.argmax(left))
    best = KolmogorovResult(float(right[i_r]), float(x[i_r]), "right")
    if left[i_l] > best.delta:
        best = KolmogorovResult(float(left[i_l]), float(x[i_l]), "left")
    for s in getattr(G, "stationary_points", lambda: [])():
        idx = int(np.searchsorted(x, s, side="right"))
        f_val = float(cum[idx - 1]) if idx > 0 else 0.0
        v = abs(f_val - float(G(s)))
        if v > best.delta:
            best = KolmogorovResult(v, float(s), "right")
    return best
