"""The preorder R(u, v) induced by two families of objectives.

``x R y`` holds when every maximized objective is no larger at x than at y
and every minimized objective is no smaller at x than at y. Its symmetric
part is an equivalence, its asymmetric part F is strict improvement.

Internally each element is mapped to a *signed* vector: maximized values as
they are, minimized values negated. Then ``x R y`` is ``s(x) <= s(y)`` in
every coordinate, up to the comparison tolerance ``epsilon``.
"""

from __future__ import annotations

import enum
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable, Optional, Sequence

import numpy as np

from . import market as mk
from .errors import DegenerateDistribution, GenmarkError, NotAChain, ValidationError

log = logging.getLogger(__name__)

MAXIMIZE = "maximize"
MINIMIZE = "minimize"
ERROR = "error"
TREAT_AS_ZERO = "treat_as_zero"


class Kind(str, enum.Enum):
    EXPECTED_RETURN = "ExpectedReturn"
    VARIANCE = "Variance"
    CENTRAL_MOMENT = "CentralMoment"
    SKEW_SQUARED = "SkewSquared"
    KURT_SQUARED = "KurtSquared"
    SD_CURVE = "SDCurve"
    KERNEL_COLUMN = "KernelColumn"
    KERNEL_ROW = "KernelRow"
    CUSTOM = "Custom"


_MARKET_KINDS = {
    Kind.EXPECTED_RETURN,
    Kind.VARIANCE,
    Kind.CENTRAL_MOMENT,
    Kind.SKEW_SQUARED,
    Kind.KURT_SQUARED,
    Kind.SD_CURVE,
}


@dataclass(frozen=True)
class ObjectiveSpec:
    kind: Kind
    direction: str
    ell: Optional[int] = None
    t: Optional[float] = None
    p: Optional[int] = None
    label: Optional[str] = None
    func: Optional[Callable[[Any], float]] = field(default=None, compare=False, repr=False)
    degenerate_policy: str = TREAT_AS_ZERO

    def __post_init__(self):
        object.__setattr__(self, "kind", Kind(self.kind))
        if self.direction not in (MAXIMIZE, MINIMIZE):
            raise ValidationError(f"direction must be maximize or minimize, got {self.direction!r}")
        if self.degenerate_policy not in (ERROR, TREAT_AS_ZERO):
            raise ValidationError(f"unknown degenerate policy {self.degenerate_policy!r}")
        if self.kind is Kind.CENTRAL_MOMENT and (self.ell is None or self.ell < 2):
            raise ValidationError("CentralMoment needs ell >= 2")
        if self.kind is Kind.SD_CURVE:
            if self.ell is None or self.ell < 1:
                raise ValidationError("SDCurve needs ell >= 1")
            if self.t is None:
                raise ValidationError("SDCurve needs a threshold t")
            if self.direction != MINIMIZE:
                raise ValidationError("SDCurve objectives are always minimized")
        if self.kind in (Kind.KERNEL_COLUMN, Kind.KERNEL_ROW) and self.p is None:
            raise ValidationError(f"{self.kind.value} needs an index p")
        if self.kind is Kind.CUSTOM and self.func is None:
            raise ValidationError("Custom objective needs a callable")

    @property
    def name(self) -> str:
        if self.label:
            return self.label
        return {
            Kind.EXPECTED_RETURN: lambda: "mean",
            Kind.VARIANCE: lambda: "variance",
            Kind.CENTRAL_MOMENT: lambda: f"moment{self.ell}",
            Kind.SKEW_SQUARED: lambda: "skew_sq",
            Kind.KURT_SQUARED: lambda: "kurt_sq",
            Kind.SD_CURVE: lambda: f"D{self.ell}({self.t!r})",
            Kind.KERNEL_COLUMN: lambda: f"f(x,{self.p})",
            Kind.KERNEL_ROW: lambda: f"f({self.p},x)",
            Kind.CUSTOM: lambda: "custom",
        }[self.kind]()


def maximize(kind, **kw) -> ObjectiveSpec:
    return ObjectiveSpec(kind, MAXIMIZE, **kw)


def minimize(kind, **kw) -> ObjectiveSpec:
    return ObjectiveSpec(kind, MINIMIZE, **kw)


@dataclass(frozen=True)
class PreorderInstance:
    u_family: tuple[ObjectiveSpec, ...]
    v_family: tuple[ObjectiveSpec, ...]
    market: Optional[mk.ScenarioMarket] = None
    kernel: Optional[np.ndarray] = None
    epsilon: float = 1e-9
    var_eps: float = mk.VAR_EPS
    # objective vectors by element; objectives are pure so this is safe to share
    _memo: dict = field(default_factory=dict, init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "u_family", tuple(self.u_family))
        object.__setattr__(self, "v_family", tuple(self.v_family))
        if not self.u_family and not self.v_family:
            raise ValidationError("at least one objective family must be non-empty")
        if self.epsilon < 0:
            raise ValidationError("epsilon must be nonnegative")
        for spec in self.u_family:
            if spec.direction != MAXIMIZE:
                raise ValidationError(f"{spec.name} in the maximized family is marked {spec.direction}")
        for spec in self.v_family:
            if spec.direction != MINIMIZE:
                raise ValidationError(f"{spec.name} in the minimized family is marked {spec.direction}")
        for spec in self.objectives:
            if spec.kind in _MARKET_KINDS and self.market is None:
                raise ValidationError(f"{spec.name} needs a bound market")
            if spec.kind in (Kind.KERNEL_COLUMN, Kind.KERNEL_ROW):
                if self.kernel is None:
                    raise ValidationError(f"{spec.name} needs a kernel matrix")
                if not 0 <= spec.p < self.kernel.shape[0]:
                    raise ValidationError(f"kernel index {spec.p} out of range")

    @property
    def objectives(self) -> tuple[ObjectiveSpec, ...]:
        return self.u_family + self.v_family

    @property
    def labels(self) -> list[str]:
        return [spec.name for spec in self.objectives]

    @property
    def signs(self) -> np.ndarray:
        return np.array([1.0] * len(self.u_family) + [-1.0] * len(self.v_family))


def _standardized(spec: ObjectiveSpec, fn, dist, var_eps) -> float:
    try:
        return fn(dist, var_eps) ** 2
    except DegenerateDistribution:
        if spec.degenerate_policy == ERROR:
            raise
        log.debug("%s on a zero-variance return treated as 0", spec.name)
        return 0.0


def evaluate(preorder: PreorderInstance, x) -> np.ndarray:
    """Objective values at x: maximized family first, then minimized family.

    Results for hashable elements are cached on the instance and returned
    read-only.
    """
    try:
        hit = preorder._memo.get(x)
    except TypeError:
        return _evaluate(preorder, x)
    if hit is None:
        hit = _evaluate(preorder, x)
        hit.setflags(write=False)
        preorder._memo[x] = hit
    return hit


def _evaluate(preorder: PreorderInstance, x) -> np.ndarray:
    dist = None
    if any(spec.kind in _MARKET_KINDS for spec in preorder.objectives):
        x = mk.as_portfolio(x)
        dist = mk.return_distribution(preorder.market, x)
    out = np.empty(len(preorder.objectives))
    sd_groups: dict[int, list[int]] = {}
    for i, spec in enumerate(preorder.objectives):
        kind = spec.kind
        if kind is Kind.EXPECTED_RETURN:
            out[i] = mk.expected_return(preorder.market, x)
        elif kind is Kind.VARIANCE:
            out[i] = mk._central_moment(dist, 2)
        elif kind is Kind.CENTRAL_MOMENT:
            out[i] = mk._central_moment(dist, spec.ell)
        elif kind is Kind.SKEW_SQUARED:
            out[i] = _standardized(spec, mk.dist_skewness, dist, preorder.var_eps)
        elif kind is Kind.KURT_SQUARED:
            out[i] = _standardized(spec, mk.dist_excess_kurtosis, dist, preorder.var_eps)
        elif kind is Kind.SD_CURVE:
            sd_groups.setdefault(spec.ell, []).append(i)
        elif kind is Kind.KERNEL_COLUMN:
            out[i] = preorder.kernel[x, spec.p]
        elif kind is Kind.KERNEL_ROW:
            out[i] = preorder.kernel[spec.p, x]
        else:
            out[i] = float(spec.func(x))
    for ell, idx in sd_groups.items():
        ts = np.array([preorder.objectives[i].t for i in idx])
        out[idx] = mk.sd_curve(dist, ell, ts)
    return out


def objective_matrix(preorder: PreorderInstance, elements: Sequence, workers: int = 1) -> np.ndarray:
    """Objective values for every element, one row each. Row order never depends on ``workers``."""
    if workers > 1 and len(elements) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(lambda e: evaluate(preorder, e), elements))
    else:
        rows = [evaluate(preorder, e) for e in elements]
    return np.array(rows).reshape(len(elements), len(preorder.objectives))


class Relation(str, enum.Enum):
    EQUIVALENT = "EquivalentE"
    X_BELOW_Y = "XBelowYStrict"
    Y_BELOW_X = "YBelowXStrict"
    INCOMPARABLE = "Incomparable"


@dataclass(frozen=True)
class DominanceVerdict:
    relation: Relation
    witness: Optional[int] = None


def classify(sx: np.ndarray, sy: np.ndarray, eps: float) -> DominanceVerdict:
    """Verdict for two signed objective vectors."""
    x_r_y = bool(np.all(sx <= sy + eps))
    y_r_x = bool(np.all(sy <= sx + eps))
    differs = np.flatnonzero(np.abs(sx - sy) > eps)
    witness = int(differs[0]) if differs.size else None
    if x_r_y and y_r_x:
        return DominanceVerdict(Relation.EQUIVALENT)
    if x_r_y:
        return DominanceVerdict(Relation.X_BELOW_Y, witness)
    if y_r_x:
        return DominanceVerdict(Relation.Y_BELOW_X, witness)
    return DominanceVerdict(Relation.INCOMPARABLE, witness)


def signed(preorder: PreorderInstance, values: np.ndarray) -> np.ndarray:
    return values * preorder.signs


def relate(preorder: PreorderInstance, x, y) -> DominanceVerdict:
    sx = signed(preorder, evaluate(preorder, x))
    sy = signed(preorder, evaluate(preorder, y))
    return classify(sx, sy, preorder.epsilon)


def strict_dominators(S: np.ndarray, i: int, eps: float) -> np.ndarray:
    """Indices j with i F j, given the signed objective matrix S."""
    weakly_above = np.all(S >= S[i] - eps, axis=1)
    somewhere_better = np.any(S > S[i] + eps, axis=1)
    return np.flatnonzero(weakly_above & somewhere_better)


def _lex_best(S: np.ndarray, indices) -> int:
    # largest signed vector in lexicographic order, lowest index on ties
    return max(indices, key=lambda j: (tuple(S[j]), -j))


def _ascend(S: np.ndarray, start: int, eps: float) -> list[int]:
    path = [start]
    seen = {start}
    while True:
        doms = [j for j in strict_dominators(S, path[-1], eps) if j not in seen]
        if not doms:
            return path
        nxt = _lex_best(S, doms)
        path.append(nxt)
        seen.add(nxt)


def _key(e):
    if isinstance(e, mk.Portfolio):
        return e.weights
    if isinstance(e, (list, tuple, np.ndarray)):
        return tuple(float(v) for v in e)
    return e


def _index_of(x, candidates: Sequence) -> int:
    key = _key(x)
    for i, c in enumerate(candidates):
        if _key(c) == key:
            return i
    raise ValidationError("element is not among the candidates")


def is_maximal(preorder: PreorderInstance, x, candidates: Sequence) -> bool:
    sx = signed(preorder, evaluate(preorder, x))
    S = signed(preorder, objective_matrix(preorder, candidates))
    S = np.vstack([sx, S])
    return strict_dominators(S, 0, preorder.epsilon).size == 0


def is_markowitz_efficient(preorder: PreorderInstance, x, candidates: Sequence) -> bool:
    """Classical efficiency, evaluated literally as a constrained max and min.

    x is efficient when its mean is the largest among candidates whose
    risk is no larger, and its risk is the smallest among candidates whose
    mean is no smaller.
    """
    if len(preorder.u_family) != 1 or len(preorder.v_family) != 1:
        raise ValidationError("Markowitz efficiency needs exactly one maximized and one minimized objective")
    eps = preorder.epsilon
    ux, vx = evaluate(preorder, x)
    vals = objective_matrix(preorder, candidates)
    u, v = vals[:, 0], vals[:, 1]
    best_mean = max([ux] + list(u[v <= vx + eps]))
    least_risk = min([vx] + list(v[u >= ux - eps]))
    return ux >= best_mean - eps and vx <= least_risk + eps


@dataclass(frozen=True)
class FrontierResult:
    maximal_indices: tuple[int, ...]
    dominator_map: dict[int, int]
    values: np.ndarray = field(repr=False)
    labels: tuple[str, ...] = ()

    @property
    def maximal_flags(self) -> list[bool]:
        flags = [False] * self.values.shape[0]
        for i in self.maximal_indices:
            flags[i] = True
        return flags


def maximal_set(preorder: PreorderInstance, candidates: Sequence, workers: int = 1) -> FrontierResult:
    """R-maximal candidates, and for every other candidate a maximal strict dominator."""
    if len(candidates) == 0:
        raise ValidationError("candidate list is empty")
    eps = preorder.epsilon
    values = objective_matrix(preorder, candidates, workers)
    S = signed(preorder, values)
    doms = [strict_dominators(S, i, eps) for i in range(len(candidates))]
    maximal = tuple(i for i, d in enumerate(doms) if d.size == 0)
    is_max = np.zeros(len(candidates), dtype=bool)
    is_max[list(maximal)] = True
    dominator_map = {}
    for i, d in enumerate(doms):
        if d.size == 0:
            continue
        top = [j for j in d if is_max[j]]
        dominator_map[i] = _lex_best(S, top) if top else _ascend(S, i, eps)[-1]
    return FrontierResult(maximal, dominator_map, values, tuple(preorder.labels))


def ascend_to_maximal(preorder: PreorderInstance, x, candidates: Sequence):
    """Follow strict improvements from x until no candidate improves on the current one.

    Returns ``(maximal, path)``; path starts at x.
    """
    S = signed(preorder, objective_matrix(preorder, candidates))
    path = _ascend(S, _index_of(x, candidates), preorder.epsilon)
    return candidates[path[-1]], [candidates[i] for i in path]


def ascend_all(preorder: PreorderInstance, candidates: Sequence, workers: int = 1) -> list[list[int]]:
    """Index paths of ``ascend_to_maximal`` for every candidate, sharing one evaluation pass."""
    S = signed(preorder, objective_matrix(preorder, candidates, workers))
    return [_ascend(S, i, preorder.epsilon) for i in range(len(candidates))]


def _r_matrix(S: np.ndarray, eps: float) -> np.ndarray:
    # R[i, j] is i R j
    return np.all(S[None, :, :] >= S[:, None, :] - eps, axis=2)


def verify_chain(preorder: PreorderInstance, subset: Sequence) -> bool:
    S = signed(preorder, objective_matrix(preorder, subset))
    R = _r_matrix(S, preorder.epsilon)
    return bool(np.all(R | R.T))


@dataclass(frozen=True)
class UpperRecord:
    """A maximized objective on the chain: its sup and where it is attained."""

    label: str
    sup: float
    attained: frozenset[int]
    below: frozenset[int]
    attained_in_candidates: Optional[frozenset[int]] = None


@dataclass(frozen=True)
class LowerRecord:
    """A minimized objective on the chain: its inf and where it is attained."""

    label: str
    inf: float
    attained: frozenset[int]
    above: frozenset[int]
    attained_in_candidates: Optional[frozenset[int]] = None


@dataclass(frozen=True)
class PairRecord:
    u: Optional[int]  # None stands for a constant objective
    v: Optional[int]
    intersection: frozenset[int]
    lemma_i: bool


@dataclass(frozen=True)
class ChainReport:
    chain: tuple[int, ...]
    u_records: tuple[UpperRecord, ...]
    v_records: tuple[LowerRecord, ...]
    pairs: tuple[PairRecord, ...]
    lemma_ii: dict[tuple[int, int], bool]
    nesting_order: tuple[int, ...]
    corollary_holds: bool
    upper_bound: int

    @property
    def lemma_i_holds(self) -> bool:
        return all(p.lemma_i for p in self.pairs)

    @property
    def lemma_ii_holds(self) -> bool:
        return all(self.lemma_ii.values())

    @property
    def ok(self) -> bool:
        return self.lemma_i_holds and self.lemma_ii_holds and self.corollary_holds

    def as_dict(self) -> dict:
        def names(s):
            return sorted(s) if s is not None else None

        return {
            "chain": list(self.chain),
            "maximized": [
                {"objective": r.label, "sup": r.sup, "attained": names(r.attained),
                 "below": names(r.below), "attained_in_candidates": names(r.attained_in_candidates)}
                for r in self.u_records
            ],
            "minimized": [
                {"objective": r.label, "inf": r.inf, "attained": names(r.attained),
                 "above": names(r.above), "attained_in_candidates": names(r.attained_in_candidates)}
                for r in self.v_records
            ],
            "pairs": [
                {"u": p.u, "v": p.v, "intersection": names(p.intersection), "nested": p.lemma_i}
                for p in self.pairs
            ],
            "pair_intersections_nested": {f"{a},{b}": ok for (a, b), ok in self.lemma_ii.items()},
            "nesting_order": list(self.nesting_order),
            "lemma_i_holds": self.lemma_i_holds,
            "lemma_ii_holds": self.lemma_ii_holds,
            "corollary_holds": self.corollary_holds,
            "upper_bound": self.upper_bound,
        }


def _nested(a: frozenset, b: frozenset) -> bool:
    return a <= b or b <= a


def chain_report(preorder: PreorderInstance, chain: Sequence, candidates: Optional[Sequence] = None) -> ChainReport:
    """Sup/inf statistics of every objective over a finite chain, with the nesting checks.

    Every maximized objective is paired with every minimized one; a missing
    family is padded with a constant objective, whose extremal set is the
    whole chain. When ``candidates`` is given, the sets where the chain's
    sup/inf are attained over all candidates are reported too.
    """
    if not chain:
        raise ValidationError("chain is empty")
    eps = preorder.epsilon
    values = objective_matrix(preorder, chain)
    S = signed(preorder, values)
    R = _r_matrix(S, eps)
    if not np.all(R | R.T):
        raise NotAChain("the given elements are not pairwise comparable")
    everything = frozenset(range(len(chain)))
    nu = len(preorder.u_family)
    cand_values = objective_matrix(preorder, candidates) if candidates is not None else None

    u_records = []
    for a, spec in enumerate(preorder.u_family):
        col = values[:, a]
        top = float(col.max())
        attained = frozenset(np.flatnonzero(col >= top - eps).tolist())
        star = None
        if cand_values is not None:
            star = frozenset(np.flatnonzero(np.abs(cand_values[:, a] - top) <= eps).tolist())
        u_records.append(UpperRecord(spec.name, top, attained, everything - attained, star))
    v_records = []
    for b, spec in enumerate(preorder.v_family):
        col = values[:, nu + b]
        low = float(col.min())
        attained = frozenset(np.flatnonzero(col <= low + eps).tolist())
        star = None
        if cand_values is not None:
            star = frozenset(np.flatnonzero(np.abs(cand_values[:, nu + b] - low) <= eps).tolist())
        v_records.append(LowerRecord(spec.name, low, attained, everything - attained, star))

    u_ids = list(range(len(u_records))) or [None]
    v_ids = list(range(len(v_records))) or [None]
    sides = []
    pairs = []
    for a in u_ids:
        for b in v_ids:
            big_c = u_records[a].attained if a is not None else everything
            small_c = v_records[b].attained if b is not None else everything
            sides.append((small_c, big_c))
            pairs.append(PairRecord(a, b, small_c & big_c, _nested(small_c, big_c)))

    lemma_ii = {
        (i, j): _nested(pairs[i].intersection, pairs[j].intersection)
        for i in range(len(pairs))
        for j in range(i + 1, len(pairs))
    }
    nesting_order = tuple(sorted(range(len(pairs)), key=lambda i: len(pairs[i].intersection)))

    corollary = True
    running = everything
    seen_sets = []
    for (small_c, big_c), pair in zip(sides, pairs):
        running = running & pair.intersection
        seen_sets.extend([small_c, big_c])
        corollary = corollary and any(running == s for s in seen_sets)

    tops = [b for b in range(len(chain)) if np.all(R[:, b])]
    if not tops:
        raise GenmarkError("chain has no greatest element within tolerance")
    return ChainReport(
        tuple(range(len(chain))),
        tuple(u_records),
        tuple(v_records),
        tuple(pairs),
        lemma_ii,
        nesting_order,
        corollary,
        tops[0],
    )


def chain_upper_bound(preorder: PreorderInstance, chain: Sequence):
    """Greatest element of a finite chain (lowest index among equivalent ones)."""
    if not chain:
        raise ValidationError("chain is empty")
    S = signed(preorder, objective_matrix(preorder, chain))
    R = _r_matrix(S, preorder.epsilon)
    if not np.all(R | R.T):
        raise NotAChain("the given elements are not pairwise comparable")
    tops = [b for b in range(len(chain)) if np.all(R[:, b])]
    if not tops:
        raise GenmarkError("chain has no greatest element within tolerance")
    return chain[tops[0]]
