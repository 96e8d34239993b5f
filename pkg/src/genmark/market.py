"""Finite scenario markets and per-portfolio return statistics.

A market is a finite probability space: ``m`` scenarios with probabilities
and, for each of ``n`` assets, the return realized in each scenario. A
portfolio's return is the weighted sum of asset returns, which is again a
discrete random variable. Everything here is computed exactly from that
discrete distribution; there is no density and no estimation.

The cumulative distribution function follows the strict convention
``F(t) = P(s < t)``, so it is a left-continuous step function.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

from .errors import DegenerateDistribution, ValidationError

MERGE_TOL = 1e-12
VAR_EPS = 1e-12
PROB_SUM_TOL = 1e-9


@dataclass(frozen=True)
class ScenarioMarket:
    probabilities: np.ndarray  # shape (m,)
    returns: np.ndarray  # shape (n, m); returns[i, j] is asset i in scenario j

    @property
    def asset_count(self) -> int:
        return self.returns.shape[0]

    @property
    def scenario_count(self) -> int:
        return self.returns.shape[1]

    @property
    def mu(self) -> np.ndarray:
        """Expected return of each asset."""
        return self.returns @ self.probabilities

    def affine(self, scale: float, shift: float) -> "ScenarioMarket":
        """Market with every return mapped to ``scale * r + shift``."""
        return build_market(self.probabilities, scale * self.returns + shift)


def build_market(probabilities: Sequence[float], returns) -> ScenarioMarket:
    """Validate inputs and return a market with probabilities renormalized to sum 1."""
    p = np.asarray(probabilities, dtype=float)
    if p.ndim != 1 or p.size == 0:
        raise ValidationError("probabilities must be a non-empty vector")
    try:
        r = np.array(returns, dtype=float)
    except ValueError as exc:  # ragged nested lists
        raise ValidationError(f"returns matrix is ragged: {exc}") from None
    if r.ndim != 2 or r.shape[0] == 0:
        raise ValidationError("returns must be a non-empty n x m matrix")
    if r.shape[1] != p.size:
        raise ValidationError(
            f"returns has {r.shape[1]} scenario columns but {p.size} probabilities given"
        )
    if not (np.all(np.isfinite(p)) and np.all(np.isfinite(r))):
        raise ValidationError("probabilities and returns must be finite")
    if np.any(p < 0):
        raise ValidationError("probabilities must be nonnegative")
    total = float(p.sum())
    if abs(total - 1.0) > PROB_SUM_TOL:
        raise ValidationError(f"probabilities sum to {total!r}, expected 1")
    p = p / total
    p.setflags(write=False)
    r.setflags(write=False)
    return ScenarioMarket(p, r)


@dataclass(frozen=True)
class Ball:
    """Closed ball in the hyperplane sum(x) = 1 (bounded short sales)."""

    center: tuple[float, ...]
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", tuple(float(c) for c in self.center))
        if abs(math.fsum(self.center) - 1.0) > 1e-12:
            raise ValidationError("ball center must lie on the hyperplane sum(x) = 1")
        if not self.radius > 0:
            raise ValidationError("ball radius must be positive")


SIMPLEX = "simplex"
DomainKind = Union[str, Ball]


@dataclass(frozen=True)
class Portfolio:
    weights: tuple[float, ...]
    domain: DomainKind = SIMPLEX

    def __post_init__(self):
        w = tuple(float(v) for v in self.weights)
        object.__setattr__(self, "weights", w)
        if not w:
            raise ValidationError("portfolio needs at least one weight")
        if not all(math.isfinite(v) for v in w):
            raise ValidationError("portfolio weights must be finite")
        if abs(math.fsum(w) - 1.0) > 1e-9:
            raise ValidationError(f"weights sum to {math.fsum(w)!r}, expected 1")
        if self.domain == SIMPLEX:
            if min(w) < -1e-12:
                raise ValidationError("simplex portfolio has a negative weight")
        elif isinstance(self.domain, Ball):
            if len(self.domain.center) != len(w):
                raise ValidationError("ball center and weights differ in length")
            dist = math.dist(w, self.domain.center)
            if dist > self.domain.radius + 1e-12:
                raise ValidationError(
                    f"portfolio lies {dist!r} from ball center, radius {self.domain.radius!r}"
                )
        else:
            raise ValidationError(f"unknown portfolio domain {self.domain!r}")

    @property
    def array(self) -> np.ndarray:
        return np.array(self.weights)

    def __len__(self):
        return len(self.weights)


def as_portfolio(x) -> Portfolio:
    return x if isinstance(x, Portfolio) else Portfolio(tuple(x))


@dataclass(frozen=True)
class DiscreteDistribution:
    support: np.ndarray
    masses: np.ndarray = field(repr=False)

    @classmethod
    def from_outcomes(cls, values, probs, tol: float = MERGE_TOL) -> "DiscreteDistribution":
        """Build from raw outcomes, dropping zero mass and merging values within ``tol``.

        Sorted neighbours closer than ``tol`` are merged. A merged atom sits at
        the mass-weighted mean of its members, so the distribution mean is
        preserved.
        """
        values = np.asarray(values, dtype=float)
        probs = np.asarray(probs, dtype=float)
        keep = probs > 0
        values, probs = values[keep], probs[keep]
        if values.size == 0:
            raise ValidationError("distribution has no positive-mass outcome")
        order = np.argsort(values, kind="stable")
        values, probs = values[order], probs[order]
        # chain of neighbours closer than tol collapses into one atom
        starts = np.flatnonzero(np.concatenate([[True], np.diff(values) > tol]))
        w = np.add.reduceat(probs, starts)
        s = np.add.reduceat(probs * values, starts) / w
        w = w / w.sum()
        s.setflags(write=False)
        w.setflags(write=False)
        return cls(s, w)

    def __post_init__(self):
        s, w = self.support, self.masses
        if s.shape != w.shape or s.ndim != 1 or s.size == 0:
            raise ValidationError("support and masses must be equal-length vectors")
        if np.any(np.diff(s) <= 0):
            raise ValidationError("support must be strictly increasing")
        if np.any(w <= 0) or abs(float(w.sum()) - 1.0) > 1e-12:
            raise ValidationError("masses must be positive and sum to 1")

    @property
    def mean(self) -> float:
        return float(self.masses @ self.support)

    def same_as(self, other: "DiscreteDistribution", tol: float = MERGE_TOL) -> bool:
        return (
            self.support.shape == other.support.shape
            and bool(np.all(np.abs(self.support - other.support) <= tol))
            and bool(np.all(np.abs(self.masses - other.masses) <= tol))
        )


def _weights(market: ScenarioMarket, x) -> np.ndarray:
    w = np.asarray(x.weights if isinstance(x, Portfolio) else x, dtype=float)
    if w.shape != (market.asset_count,):
        raise ValidationError(
            f"portfolio has {w.size} weights, market has {market.asset_count} assets"
        )
    return w


def scenario_returns(market: ScenarioMarket, x) -> np.ndarray:
    """Portfolio return realized in each scenario."""
    return _weights(market, x) @ market.returns


def return_distribution(market: ScenarioMarket, x) -> DiscreteDistribution:
    return DiscreteDistribution.from_outcomes(scenario_returns(market, x), market.probabilities)


def expected_return(market: ScenarioMarket, x) -> float:
    return float(_weights(market, x) @ market.mu)


def _central_moment(dist: DiscreteDistribution, ell: int) -> float:
    return float(dist.masses @ (dist.support - dist.mean) ** ell)


def central_moment(market: ScenarioMarket, x, ell: int) -> float:
    if ell < 2:
        raise ValidationError(f"central moment order must be >= 2, got {ell}")
    return _central_moment(return_distribution(market, x), ell)


def variance(market: ScenarioMarket, x) -> float:
    return central_moment(market, x, 2)


def dist_skewness(dist: DiscreteDistribution, var_eps: float = VAR_EPS) -> float:
    var = _central_moment(dist, 2)
    if var < var_eps:
        raise DegenerateDistribution("skewness undefined (zero variance)")
    return _central_moment(dist, 3) / var**1.5


def dist_excess_kurtosis(dist: DiscreteDistribution, var_eps: float = VAR_EPS) -> float:
    var = _central_moment(dist, 2)
    if var < var_eps:
        raise DegenerateDistribution("excess kurtosis undefined (zero variance)")
    return _central_moment(dist, 4) / var**2 - 3.0


def skewness(market: ScenarioMarket, x, var_eps: float = VAR_EPS) -> float:
    return dist_skewness(return_distribution(market, x), var_eps)


def excess_kurtosis(market: ScenarioMarket, x, var_eps: float = VAR_EPS) -> float:
    return dist_excess_kurtosis(return_distribution(market, x), var_eps)


def cdf_value(dist: DiscreteDistribution, t: float) -> float:
    """P(s < t)."""
    return float(dist.masses[dist.support < t].sum())


def cdf_right_limit(dist: DiscreteDistribution, t: float) -> float:
    """P(s <= t), the limit of the CDF from the right at t."""
    return float(dist.masses[dist.support <= t].sum())


def sd_curve(dist: DiscreteDistribution, ell: int, ts) -> np.ndarray:
    """Vectorized D^(ell) at each t in ``ts``.

    For ell >= 2 this is sum_k mass_k * max(t - s_k, 0)^(ell-1) / (ell-1)!,
    the closed form of the iterated integral of the CDF.
    """
    if ell < 1:
        raise ValidationError(f"stochastic dominance order must be >= 1, got {ell}")
    ts = np.asarray(ts, dtype=float)
    gaps = ts[..., None] - dist.support
    if ell == 1:
        return (gaps > 0).astype(float) @ dist.masses
    power = np.maximum(gaps, 0.0) ** (ell - 1)
    return power @ dist.masses / math.factorial(ell - 1)


def sd_integral(dist: DiscreteDistribution, ell: int, t: float) -> float:
    return float(sd_curve(dist, ell, np.array([t]))[0])


class SDVerdict(str, enum.Enum):
    Y_STRICT = "y_dominates_strictly"
    Y_WEAK = "y_dominates"
    X_STRICT = "x_dominates_strictly"
    X_WEAK = "x_dominates"
    EQUAL = "equal"
    INCOMPARABLE = "incomparable"


def _tail_checks(dist_x, dist_y, ell, t0, span, samples):
    """Differences D_x - D_y beyond the last breakpoint, plus the sign at infinity.

    Past t0 both curves are single polynomials in tau = t - t0; the
    difference's highest nonzero coefficient fixes its limiting sign.
    """
    L = ell - 1
    d = np.concatenate([t0 - dist_x.support, t0 - dist_y.support])
    w = np.concatenate([dist_x.masses, -dist_y.masses])
    coeffs = [math.comb(L, j) * float(w @ d ** (L - j)) / math.factorial(L) for j in range(L + 1)]
    taus = span * 2.0 ** np.arange(samples)
    values = sd_curve(dist_x, ell, t0 + taus) - sd_curve(dist_y, ell, t0 + taus)
    return values, coeffs


def sd_compare(
    dist_x: DiscreteDistribution,
    dist_y: DiscreteDistribution,
    ell: int,
    samples_per_interval: int = 16,
    tol: float = 1e-12,
) -> SDVerdict:
    """Compare D^(ell) curves of two distributions over the whole real line.

    Orders 1 and 2 are exact: the curves are step or piecewise-linear with
    breakpoints in the union support. From order 3 the curves are piecewise
    polynomials and each interval is sampled at ``samples_per_interval``
    interior points, which is an approximation.

    Differences within ``tol`` count as ties. "equal" means every tested
    difference is a tie; the weak verdicts report near-ties whose raw
    differences all share one sign.
    """
    if ell < 1:
        raise ValidationError(f"stochastic dominance order must be >= 1, got {ell}")
    points = np.union1d(dist_x.support, dist_y.support)
    if ell == 1:
        g = np.array(
            [cdf_value(dist_x, t) - cdf_value(dist_y, t) for t in points]
            + [cdf_right_limit(dist_x, t) - cdf_right_limit(dist_y, t) for t in points]
        )
    elif ell == 2:
        g = sd_curve(dist_x, 2, points) - sd_curve(dist_y, 2, points)
    else:
        ts = [points]
        if points.size > 1 and samples_per_interval > 0:
            frac = np.arange(1, samples_per_interval + 1) / (samples_per_interval + 1)
            a, b = points[:-1], points[1:]
            ts.append((a[:, None] + (b - a)[:, None] * frac).ravel())
        ts = np.concatenate(ts)
        g = sd_curve(dist_x, ell, ts) - sd_curve(dist_y, ell, ts)
        span = float(points[-1] - points[0]) or 1.0
        tail, coeffs = _tail_checks(dist_x, dist_y, ell, points[-1], span, max(samples_per_interval, 1))
        lead = next((c for c in reversed(coeffs) if abs(c) > tol), 0.0)
        g = np.concatenate([g, tail, [lead]])

    y_ok = bool(np.all(g >= -tol))
    x_ok = bool(np.all(g <= tol))
    if y_ok and x_ok:
        if np.all(g == 0):
            return SDVerdict.EQUAL
        if np.all(g >= 0):
            return SDVerdict.Y_WEAK
        if np.all(g <= 0):
            return SDVerdict.X_WEAK
        return SDVerdict.EQUAL
    if y_ok:
        return SDVerdict.Y_STRICT
    if x_ok:
        return SDVerdict.X_STRICT
    return SDVerdict.INCOMPARABLE
