"""Finite candidate sets for the portfolio domains, and preset objective families.

Two domains are supported: the simplex of long-only portfolios and a closed
ball in the hyperplane ``sum(x) = 1``, which admits bounded short positions.
Both are discretized either by a regular lattice or by seeded sampling.
"""

from __future__ import annotations

import itertools
import logging
import math
import re
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import market as mk
from . import preorder as po
from .errors import CapOverflow, SamplingError, ValidationError

log = logging.getLogger(__name__)

DEFAULT_CAP = 10**7


@dataclass(frozen=True)
class DomainSpec:
    kind: str  # "simplex" or "ball"
    n: int
    center: Optional[tuple[float, ...]] = None
    radius: Optional[float] = None
    grid: Optional[int] = None
    samples: Optional[int] = None
    seed: int = 0

    def __post_init__(self):
        if self.n < 1:
            raise ValidationError("domain dimension n must be >= 1")
        if self.kind == "ball":
            if self.center is None or self.radius is None:
                raise ValidationError("ball domain needs a center and a radius")
            object.__setattr__(self, "center", tuple(float(c) for c in self.center))
            if len(self.center) != self.n:
                raise ValidationError("ball center length differs from n")
            mk.Ball(self.center, self.radius)  # validates hyperplane and radius
        elif self.kind != "simplex":
            raise ValidationError(f"unknown domain kind {self.kind!r}")
        if (self.grid is None) == (self.samples is None):
            raise ValidationError("give exactly one of a grid resolution or a sample count")

    @property
    def ball(self) -> Optional[mk.Ball]:
        return mk.Ball(self.center, self.radius) if self.kind == "ball" else None


def _compositions(n: int, total: int):
    # descending lexicographic order in the first coordinate
    if n == 1:
        yield (total,)
        return
    for k in range(total, -1, -1):
        for rest in _compositions(n - 1, total - k):
            yield (k,) + rest


def simplex_grid(n: int, N: int, cap: int = DEFAULT_CAP) -> list[mk.Portfolio]:
    """All portfolios with weights k_i / N, k_i >= 0 integers summing to N."""
    if n < 1 or N < 1:
        raise ValidationError("simplex_grid needs n >= 1 and N >= 1")
    count = math.comb(N + n - 1, n - 1)
    if count > cap:
        raise CapOverflow(f"simplex grid would have {count} points (cap {cap})")
    return [mk.Portfolio(tuple(k / N for k in ks)) for ks in _compositions(n, N)]


def hyperplane_basis(n: int) -> np.ndarray:
    """Orthonormal basis (rows) of {d : sum(d) = 0}, by Gram-Schmidt over e_i - e_n."""
    basis: list[np.ndarray] = []
    for i in range(n - 1):
        v = np.zeros(n)
        v[i], v[n - 1] = 1.0, -1.0
        for b in basis:
            v = v - (v @ b) * b
        basis.append(v / np.linalg.norm(v))
    return np.array(basis).reshape(n - 1, n)


def ball_grid(spec: DomainSpec, N: Optional[int] = None, cap: int = DEFAULT_CAP) -> list[mk.Portfolio]:
    """Lattice points center + r * sum_j (k_j / N) b_j that fall inside the ball.

    Lattice coordinates k run over [-N, N]^(n-1) in lexicographic order.
    """
    if spec.kind != "ball":
        raise ValidationError("ball_grid needs a ball domain")
    N = N if N is not None else spec.grid
    if N is None or N < 1:
        raise ValidationError("ball_grid needs N >= 1")
    ball = spec.ball
    center = np.array(spec.center)
    if spec.n == 1 or spec.radius <= mk.MERGE_TOL:
        return [mk.Portfolio(spec.center, ball)]
    d = spec.n - 1
    count = (2 * N + 1) ** d
    if count > cap:
        raise CapOverflow(f"ball lattice would scan {count} points (cap {cap})")
    basis = hyperplane_basis(spec.n)
    out = []
    for ks in itertools.product(range(-N, N + 1), repeat=d):
        coords = np.array(ks, dtype=float) / N
        if coords @ coords > 1.0 + 1e-12:
            continue
        x = center + spec.radius * (coords @ basis)
        out.append(mk.Portfolio(tuple(x), ball))
    return out


def random_sample(
    spec: DomainSpec,
    count: Optional[int] = None,
    seed: Optional[int] = None,
    max_attempts: int = 1000,
) -> list[mk.Portfolio]:
    """Seeded random portfolios.

    Simplex points are uniform (normalized unit-rate exponentials). Ball
    points are uniform in the hyperplane disc by rejection from the cube;
    ``max_attempts`` bounds the draws per accepted point.
    """
    count = count if count is not None else spec.samples
    seed = seed if seed is not None else spec.seed
    if count is None or count < 1:
        raise ValidationError("random_sample needs count >= 1")
    rng = np.random.default_rng(seed)
    if spec.kind == "simplex":
        e = rng.exponential(1.0, size=(count, spec.n))
        w = e / e.sum(axis=1, keepdims=True)
        return [mk.Portfolio(tuple(row)) for row in w]

    ball = spec.ball
    if spec.n == 1:
        return [mk.Portfolio(spec.center, ball)] * count
    d = spec.n - 1
    basis = hyperplane_basis(spec.n)
    center = np.array(spec.center)
    out: list[mk.Portfolio] = []
    attempts = 0
    limit = max_attempts * count
    while len(out) < count:
        if attempts >= limit:
            raise SamplingError(f"rejection sampling accepted {len(out)}/{count} after {attempts} draws")
        z = rng.uniform(-1.0, 1.0, size=d)
        attempts += 1
        if z @ z <= 1.0:
            out.append(mk.Portfolio(tuple(center + spec.radius * (z @ basis)), ball))
    return out


def candidates(spec: DomainSpec, cap: int = DEFAULT_CAP) -> list[mk.Portfolio]:
    if spec.samples is not None:
        return random_sample(spec)
    if spec.kind == "simplex":
        return simplex_grid(spec.n, spec.grid, cap)
    return ball_grid(spec, cap=cap)


def sd_threshold_grid(market: mk.ScenarioMarket, portfolios: Sequence) -> np.ndarray:
    """Finite set of thresholds on which every candidate's D-curve can change.

    Union of all support points, midpoints between consecutive ones, and one
    point beyond each end.
    """
    pts = np.unique(np.concatenate([mk.return_distribution(market, x).support for x in portfolios]))
    mids = (pts[:-1] + pts[1:]) / 2
    pad = max(float(pts[-1] - pts[0]), 1.0)
    return np.unique(np.concatenate([pts, mids, [pts[0] - pad, pts[-1] + pad]]))


PRESETS = ("utility", "markowitz", "skew", "kurt", "skew-kurt", "sd-<l>", "markowitz-sd-<l>")
_SD_PRESET = re.compile(r"^(markowitz-)?sd-(\d+)$")


def preset_families(name: str, sd_ell: Optional[int] = None, degenerate_policy: str = po.TREAT_AS_ZERO):
    """(u specs, v specs, sd order or None) for a named preset.

    SD presets return no SDCurve specs yet; those depend on the candidate set.
    """
    E = po.maximize(po.Kind.EXPECTED_RETURN)
    V = po.minimize(po.Kind.VARIANCE)
    S2 = po.minimize(po.Kind.SKEW_SQUARED, degenerate_policy=degenerate_policy)
    K2 = po.minimize(po.Kind.KURT_SQUARED, degenerate_policy=degenerate_policy)
    fixed = {
        "utility": ([E], []),
        "markowitz": ([E], [V]),
        "skew": ([E], [V, S2]),
        "kurt": ([E], [V, K2]),
        "skew-kurt": ([E], [V, S2, K2]),
    }
    if name in fixed:
        u, v = fixed[name]
        return u, v, None
    if name in ("sd", "markowitz-sd"):
        if sd_ell is None:
            raise ValidationError(f"preset {name!r} needs an order (sd.ell)")
        name = f"{name}-{sd_ell}"
    m = _SD_PRESET.match(name)
    if not m:
        raise ValidationError(f"unknown preset {name!r}; known: {', '.join(PRESETS)}")
    ell = int(m.group(2))
    if ell < 1:
        raise ValidationError("stochastic dominance order must be >= 1")
    if m.group(1):
        return [E], [V], ell
    return [], [], ell


@dataclass(frozen=True)
class ObjectiveConfig:
    """Either a preset name or an explicit ordered list of objective entries.

    Entries are mappings with keys ``kind``, ``direction`` and optionally
    ``ell``, ``t``, ``p``, ``degenerate_policy``. An SDCurve entry without
    ``t`` is expanded over the candidate threshold grid.
    """

    preset: Optional[str] = None
    objectives: Optional[tuple[dict, ...]] = None
    epsilon: float = 1e-9
    sd_ell: Optional[int] = None
    degenerate_policy: str = po.TREAT_AS_ZERO

    def __post_init__(self):
        if (self.preset is None) == (self.objectives is None):
            raise ValidationError("give exactly one of a preset or an explicit objective list")


def _entry_specs(entry: dict, thresholds) -> list[po.ObjectiveSpec]:
    entry = dict(entry)
    kind = po.Kind(entry.pop("kind"))
    direction = entry.pop("direction", po.MINIMIZE if kind is po.Kind.SD_CURVE else None)
    if direction is None:
        raise ValidationError(f"objective {kind.value} needs a direction")
    if kind is po.Kind.SD_CURVE and entry.get("t") is None:
        if thresholds is None:
            raise ValidationError("SDCurve without t needs candidates to build the threshold grid")
        entry.pop("t", None)
        return [po.ObjectiveSpec(kind, direction, t=float(t), **entry) for t in thresholds()]
    return [po.ObjectiveSpec(kind, direction, **entry)]


def build_preorder(
    config,
    market: mk.ScenarioMarket,
    candidates: Optional[Sequence] = None,
) -> po.PreorderInstance:
    """Bind an objective configuration (or bare preset name) to a market."""
    if isinstance(config, str):
        config = ObjectiveConfig(preset=config)

    def thresholds():
        if not candidates:
            return None
        return sd_threshold_grid(market, candidates)

    if config.preset is not None:
        u, v, ell = preset_families(config.preset, config.sd_ell, config.degenerate_policy)
        if ell is not None:
            ts = thresholds()
            if ts is None:
                raise ValidationError("stochastic dominance presets need candidates")
            v = list(v) + [po.minimize(po.Kind.SD_CURVE, ell=ell, t=float(t)) for t in ts]
        return po.PreorderInstance(tuple(u), tuple(v), market=market, epsilon=config.epsilon)

    u, v = [], []
    for entry in config.objectives:
        for spec in _entry_specs(entry, thresholds if candidates else None):
            (u if spec.direction == po.MAXIMIZE else v).append(spec)
    return po.PreorderInstance(tuple(u), tuple(v), market=market, epsilon=config.epsilon)
