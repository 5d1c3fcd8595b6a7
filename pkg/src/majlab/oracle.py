"""Exact neighbour-profile probabilities and their Gaussian local-limit
approximations.

A vertex ``v`` whose neighbourhood inside the leading parts has size
``n_of_v`` sees a uniformly random ``n_of_v``-subset of those parts, so its
profile ``(s_1..s_k0)`` is multivariate hypergeometric.  For large sizes this is
evaluated through log-gamma; small instances use exact rationals and can be
certified against brute-force enumeration.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import numpy as np
from scipy.special import gammaln

EXACT_MAX_N = 64
ENUMERATE_MAX_N = 20


class SizeLimitError(ValueError):
    pass


@dataclass(frozen=True)
class NeighborProfile:
    s: tuple
    n_of_v: int
    part_sizes: tuple

    def __post_init__(self):
        s = tuple(int(x) for x in self.s)
        sizes = tuple(int(x) for x in self.part_sizes)
        object.__setattr__(self, "s", s)
        object.__setattr__(self, "part_sizes", sizes)
        if len(s) != len(sizes):
            raise ValueError("s and part_sizes must have the same length")
        if any(x < 0 for x in sizes):
            raise ValueError("part sizes must be non-negative")
        if any(not 0 <= si <= ni for si, ni in zip(s, sizes)):
            raise ValueError("need 0 <= s_i <= part_sizes[i]")
        if sum(s) != self.n_of_v:
            raise ValueError("sum(s) must equal n_of_v")

    @property
    def n_v_star(self) -> int:
        return sum(self.part_sizes)


def _log_comb(n, k):
    return gammaln(np.add(n, 1.0)) - gammaln(np.add(k, 1.0)) - gammaln(np.subtract(n, k) + 1.0)


def profile_prob_exact(p: NeighborProfile):
    """``prod_i C(n_i, s_i) / C(n_v*, n_of_v)``.

    Returns a ``Fraction`` when ``n_v_star <= 64`` and a float otherwise.
    """
    if p.n_v_star <= EXACT_MAX_N:
        num = math.prod(math.comb(ni, si) for ni, si in zip(p.part_sizes, p.s))
        return Fraction(num, math.comb(p.n_v_star, p.n_of_v))
    logp = sum(float(_log_comb(ni, si)) for ni, si in zip(p.part_sizes, p.s))
    logp -= float(_log_comb(p.n_v_star, p.n_of_v))
    return math.exp(logp)


@lru_cache(maxsize=4096)
def _enumerated_histogram(part_sizes: tuple, n_of_v: int):
    labels = [i for i, size in enumerate(part_sizes) for _ in range(size)]
    hist: dict = {}
    total = 0
    for subset in itertools.combinations(range(len(labels)), n_of_v):
        key = [0] * len(part_sizes)
        for u in subset:
            key[labels[u]] += 1
        key = tuple(key)
        hist[key] = hist.get(key, 0) + 1
        total += 1
    return hist, total


def profile_prob_enumerate(p: NeighborProfile) -> Fraction:
    """Probability by listing every ``n_of_v``-subset of the ``n_v_star`` vertices."""
    if p.n_v_star > ENUMERATE_MAX_N:
        raise SizeLimitError(f"enumeration limited to n_v_star <= {ENUMERATE_MAX_N}")
    hist, total = _enumerated_histogram(p.part_sizes, p.n_of_v)
    return Fraction(hist.get(p.s, 0), total)


def admissible_profiles(part_sizes: Sequence[int], n_of_v: int):
    """All ``s`` with ``0 <= s_i <= part_sizes[i]`` and ``sum(s) == n_of_v``."""
    part_sizes = tuple(part_sizes)

    def rec(i, remaining):
        if i == len(part_sizes) - 1:
            if remaining <= part_sizes[i]:
                yield (remaining,)
            return
        rest = sum(part_sizes[i + 1 :])
        for si in range(max(0, remaining - rest), min(part_sizes[i], remaining) + 1):
            for tail in rec(i + 1, remaining - si):
                yield (si,) + tail

    if not part_sizes:
        return
    yield from rec(0, n_of_v)


# --- Gaussian approximation ------------------------------------------------


@dataclass(frozen=True)
class LltParams:
    k0: int
    ratio: float
    x: tuple = ()

    def __post_init__(self):
        if self.k0 < 2:
            raise ValueError("need at least two leading parts")
        if not 0 <= self.ratio < 1:
            raise ValueError("ratio n*(v)/n_v* must lie in [0, 1)")
        x = tuple(float(v) for v in self.x) or (0.0,) * (self.k0 - 1)
        if len(x) != self.k0 - 1:
            raise ValueError("x must have k0 - 1 components")
        object.__setattr__(self, "x", x)


def sigma_matrix(params: LltParams) -> np.ndarray:
    """``(k0 / (1 - r)) * (I + J)`` of size ``(k0-1) x (k0-1)``."""
    m = params.k0 - 1
    return params.k0 / (1.0 - params.ratio) * (np.eye(m) + np.ones((m, m)))


def sigma_det(params: LltParams) -> float:
    """Closed form ``k0**k0 / (1 - r)**(k0 - 1)``."""
    return params.k0**params.k0 / (1.0 - params.ratio) ** (params.k0 - 1)


def _quad(params: LltParams) -> float:
    x = np.asarray(params.x)
    return float(x @ sigma_matrix(params) @ x)


def llt_density(params: LltParams) -> float:
    """``(|Sigma| / 2 pi) ** ((k0-1)/2) * exp(-x' Sigma x / 2)``, normalisation as published."""
    d = params.k0 - 1
    return (sigma_det(params) / (2 * math.pi)) ** (d / 2) * math.exp(-0.5 * _quad(params))


def llt_density_standard(params: LltParams) -> float:
    """Same quadratic form with the usual ``|Sigma|**0.5 / (2 pi)**((k0-1)/2)`` factor."""
    d = params.k0 - 1
    return math.sqrt(sigma_det(params)) / (2 * math.pi) ** (d / 2) * math.exp(-0.5 * _quad(params))


@dataclass
class LltRow:
    delta: tuple
    s: tuple
    exact: float
    approx: float
    approx_standard: float

    @property
    def rel_err(self) -> float:
        return abs(self.approx - self.exact) / self.exact

    @property
    def rel_err_standard(self) -> float:
        return abs(self.approx_standard - self.exact) / self.exact


@dataclass
class LltTable:
    n_v_star: int
    n_of_v: int
    part_sizes: tuple
    centre: tuple
    rows: list = field(default_factory=list)

    @property
    def k0(self) -> int:
        return len(self.part_sizes)

    def max_rel_err(self, standard: bool = False) -> float:
        return max(r.rel_err_standard if standard else r.rel_err for r in self.rows)

    def row_at(self, delta: Sequence[int]) -> LltRow:
        delta = tuple(delta)
        for r in self.rows:
            if r.delta == delta:
                return r
        raise KeyError(delta)

    @property
    def normalization(self) -> str:
        """Which normalisation tracks the exact probabilities over the table."""
        if self.k0 == 2:
            return "identical (k0 = 2)"
        published, std = self.max_rel_err(), self.max_rel_err(standard=True)
        return "standard" if std < published else "published"

    def to_csv(self) -> str:
        lines = ["delta_vec,exact,approx,rel_err"]
        for r in self.rows:
            dv = ";".join(str(d) for d in r.delta)
            lines.append(f"{dv},{r.exact!r},{r.approx!r},{r.rel_err!r}")
        return "\n".join(lines) + "\n"


def llt_centre(n_of_v: int, part_sizes: Sequence[int]) -> tuple:
    """``m_i = ceil(n_of_v * p_i)`` for ``i < k0`` and ``m_k0`` the remainder."""
    n_v_star = sum(part_sizes)
    m = [-(-n_of_v * ni // n_v_star) for ni in part_sizes[:-1]]
    m.append(n_of_v - sum(m))
    return tuple(m)


def llt_compare(n_v_star: int, n_of_v: int, part_sizes: Sequence[int], window: int) -> LltTable:
    """Exact vs. Gaussian probability for every profile ``m + delta``, ``|delta_i| <= window``."""
    part_sizes = tuple(int(x) for x in part_sizes)
    k0 = len(part_sizes)
    if k0 < 2:
        raise ValueError("need at least two leading parts")
    if sum(part_sizes) != n_v_star or any(x <= 0 for x in part_sizes):
        raise ValueError("part sizes must be positive and sum to n_v_star")
    if not 0 < n_of_v < n_v_star:
        raise ValueError("need 0 < n_of_v < n_v_star")
    if window < 0:
        raise ValueError("window must be non-negative")
    if window > math.log(n_v_star) * math.sqrt(n_of_v):
        raise ValueError("window exceeds ln(n) * sqrt(n_of_v)")
    centre = llt_centre(n_of_v, part_sizes)
    ratio = n_of_v / n_v_star
    scale = n_of_v ** ((k0 - 1) / 2)
    table = LltTable(n_v_star, n_of_v, part_sizes, centre)
    for delta in itertools.product(range(-window, window + 1), repeat=k0 - 1):
        s = [m + d for m, d in zip(centre, delta)]
        s.append(n_of_v - sum(s))
        if any(not 0 <= si <= ni for si, ni in zip(s, part_sizes)):
            continue
        exact = float(profile_prob_exact(NeighborProfile(tuple(s), n_of_v, part_sizes)))
        params = LltParams(k0, ratio, tuple(d / math.sqrt(n_of_v) for d in delta))
        table.rows.append(
            LltRow(tuple(delta), tuple(s), exact, llt_density(params) / scale, llt_density_standard(params) / scale)
        )
    return table


# --- binomial helpers ----------------------------------------------------------


def binom_logpmf(k, n: int, q: float) -> np.ndarray:
    k = np.asarray(k, dtype=np.float64)
    if q <= 0.0:
        return np.where(k == 0, 0.0, -np.inf)
    if q >= 1.0:
        return np.where(k == n, 0.0, -np.inf)
    return _log_comb(n, k) + k * math.log(q) + (n - k) * math.log1p(-q)


def tie_prob_exact(n_i: int, n_j: int, p: float) -> float:
    """``P(Bin(n_i, p) == Bin(n_j, p))`` for independent binomials."""
    if n_i < 0 or n_j < 0:
        raise ValueError("part sizes must be non-negative")
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must lie in [0, 1]")
    s = np.arange(min(n_i, n_j) + 1)
    terms = np.exp(binom_logpmf(s, n_i, p) + binom_logpmf(s, n_j, p))
    return float(min(1.0, terms.sum()))


@dataclass(frozen=True)
class BinomialLltCheck:
    n: int
    q: float
    deviation: float
    sigma2: float

    @property
    def constant(self) -> float:
        """``deviation * sigma**2``, the implied constant in the O(1/sigma**2) bound."""
        return self.deviation * self.sigma2


def binomial_llt_check(n: int, q: float) -> BinomialLltCheck:
    """Largest gap between the Bin(n, q) pmf and its Gaussian approximation."""
    if not 0 < q < 1:
        raise ValueError("q must lie strictly between 0 and 1")
    sigma2 = n * q * (1 - q)
    # one lattice point either side of the support covers the sup over all of Z
    k = np.arange(-1, n + 2)
    pmf = np.zeros(k.size)
    pmf[1:-1] = np.exp(binom_logpmf(k[1:-1], n, q))
    gauss = np.exp(-((k - n * q) ** 2) / (2 * sigma2)) / math.sqrt(2 * math.pi * sigma2)
    dev = float(np.max(np.abs(pmf - gauss)))
    return BinomialLltCheck(n, q, dev, sigma2)
