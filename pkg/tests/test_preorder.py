import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import genmark as gm
from genmark import domain as dm
from genmark import preorder as po
from oracles import brute_maximal, random_chain

R = po.Relation


@pytest.fixture
def markowitz_M1(M1):
    return dm.build_preorder("markowitz", M1)


def test_evaluate(M0):
    mkw = dm.build_preorder("markowitz", M0)
    assert gm.evaluate(mkw, (0.5, 0.5)).tolist() == [1.5, 1.0]
    util = dm.build_preorder("utility", M0)
    assert gm.evaluate(util, (1, 0)).tolist() == [1.0]
    skew = dm.build_preorder("skew", M0)
    assert gm.evaluate(skew, (1, 0)).tolist() == [1.0, 0.0, 0.0]


def test_evaluate_degenerate_error_policy(M0):
    pre = gm.PreorderInstance(
        (po.maximize(po.Kind.EXPECTED_RETURN),),
        (po.minimize(po.Kind.SKEW_SQUARED, degenerate_policy=po.ERROR),),
        market=M0,
    )
    with pytest.raises(gm.DegenerateDistribution):
        gm.evaluate(pre, (1, 0))


def test_relate_examples(M0, M1, markowitz_M1):
    mkw0 = dm.build_preorder("markowitz", M0)
    v = gm.relate(mkw0, (1, 0), (0, 1))
    assert v.relation is R.INCOMPARABLE and v.witness == 0
    assert gm.relate(mkw0, (0.3, 0.7), (0.3, 0.7)).relation is R.EQUIVALENT
    v = gm.relate(markowitz_M1, (0, 0, 1), (1, 0, 0))
    assert v.relation is R.X_BELOW_Y and v.witness == 1
    assert gm.relate(markowitz_M1, (1, 0, 0), (0, 0, 1)).relation is R.Y_BELOW_X


def test_objective_spec_validation():
    with pytest.raises(gm.ValidationError):
        po.ObjectiveSpec(po.Kind.SD_CURVE, po.MAXIMIZE, ell=2, t=0.0)
    with pytest.raises(gm.ValidationError):
        po.minimize(po.Kind.CENTRAL_MOMENT, ell=1)
    with pytest.raises(gm.ValidationError):
        po.minimize(po.Kind.SD_CURVE, ell=0, t=0.0)
    with pytest.raises(gm.ValidationError):
        gm.PreorderInstance((), ())
    with pytest.raises(gm.ValidationError):
        gm.PreorderInstance((po.minimize(po.Kind.VARIANCE),), ())
    with pytest.raises(gm.ValidationError):
        gm.PreorderInstance((po.maximize(po.Kind.EXPECTED_RETURN),), ())


def test_is_maximal_and_efficient(M1, markowitz_M1):
    verts = dm.simplex_grid(3, 1)
    assert not gm.is_maximal(markowitz_M1, (0, 0, 1), verts)
    assert gm.is_maximal(markowitz_M1, (0, 1, 0), dm.simplex_grid(3, 10))
    assert gm.is_maximal(markowitz_M1, (0, 0, 1), [gm.Portfolio((0, 0, 1))])
    assert gm.is_markowitz_efficient(markowitz_M1, (1, 0, 0), verts)
    assert not gm.is_markowitz_efficient(markowitz_M1, (0, 0, 1), verts)
    assert gm.is_markowitz_efficient(markowitz_M1, (0, 0, 1), [gm.Portfolio((0, 0, 1))])
    with pytest.raises(gm.ValidationError):
        gm.is_markowitz_efficient(dm.build_preorder("skew", M1), (1, 0, 0), verts)


def test_maximal_set_vertices(markowitz_M1):
    verts = dm.simplex_grid(3, 1)
    assert [v.weights for v in verts] == [(1, 0, 0), (0, 1, 0), (0, 0, 1)]
    res = gm.maximal_set(markowitz_M1, verts)
    assert res.maximal_indices == (0, 1)
    assert res.dominator_map == {2: 0}


def test_maximal_set_all_equivalent(M0):
    pre = dm.build_preorder("markowitz", M0)
    same = [gm.Portfolio((1, 0))] * 4
    assert gm.maximal_set(pre, same).maximal_indices == (0, 1, 2, 3)
    with pytest.raises(gm.ValidationError):
        gm.maximal_set(pre, [])


def test_maximal_set_M0_line(M0):
    pre = dm.build_preorder("markowitz", M0)
    res = gm.maximal_set(pre, dm.simplex_grid(2, 10))
    assert res.maximal_indices == tuple(range(11))
    assert res.dominator_map == {}


def test_ascend(markowitz_M1):
    verts = dm.simplex_grid(3, 1)
    m, path = gm.ascend_to_maximal(markowitz_M1, (0, 0, 1), verts)
    assert m.weights == (1, 0, 0) and len(path) == 2
    m, path = gm.ascend_to_maximal(markowitz_M1, (0, 1, 0), verts)
    assert path == [m] and m.weights == (0, 1, 0)
    chain = [gm.Portfolio(w) for w in [(0, 0, 1), (0.5, 0, 0.5), (1, 0, 0)]]
    m, path = gm.ascend_to_maximal(markowitz_M1, (0, 0, 1), chain)
    assert m.weights == (1, 0, 0)
    with pytest.raises(gm.ValidationError):
        gm.ascend_to_maximal(markowitz_M1, (0.2, 0.2, 0.6), verts)


def test_verify_chain(M0, markowitz_M1):
    chain = [gm.Portfolio(w) for w in [(0, 0, 1), (0.5, 0, 0.5), (1, 0, 0)]]
    assert gm.verify_chain(markowitz_M1, chain)
    assert not gm.verify_chain(dm.build_preorder("markowitz", M0), [gm.Portfolio((1, 0)), gm.Portfolio((0, 1))])
    assert gm.verify_chain(markowitz_M1, chain[:1])


def test_chain_report_M1(markowitz_M1):
    chain = [gm.Portfolio(w) for w in [(0, 0, 1), (0.5, 0, 0.5), (1, 0, 0)]]
    rep = gm.chain_report(markowitz_M1, chain)
    (u,) = rep.u_records
    (v,) = rep.v_records
    assert u.sup == 1.0 and v.inf == 0.0
    assert u.attained == {0, 1, 2} and u.below == set()
    assert v.attained == {2} and v.above == {0, 1}
    assert rep.pairs[0].intersection == {2}
    assert rep.ok and rep.upper_bound == 2
    assert gm.chain_upper_bound(markowitz_M1, chain).weights == (1, 0, 0)


def test_chain_report_with_candidates(markowitz_M1):
    chain = [gm.Portfolio(w) for w in [(0, 0, 1), (1, 0, 0)]]
    grid = dm.simplex_grid(3, 2)
    rep = gm.chain_report(markowitz_M1, chain, candidates=grid)
    # mean 1 on the grid: x2 = 0; variance 0: 2 x2 + x3 = 0
    assert {grid[i].weights for i in rep.u_records[0].attained_in_candidates} == {
        (1, 0, 0), (0.5, 0, 0.5), (0, 0, 1)}
    assert {grid[i].weights for i in rep.v_records[0].attained_in_candidates} == {(1, 0, 0)}


def test_chain_report_constant_and_two_element(M0):
    const = gm.PreorderInstance(
        (po.ObjectiveSpec(po.Kind.CUSTOM, po.MAXIMIZE, func=lambda x: 1.0),),
        (po.ObjectiveSpec(po.Kind.CUSTOM, po.MINIMIZE, func=lambda x: 2.0),),
    )
    rep = gm.chain_report(const, [0, 1, 2])
    assert rep.u_records[0].attained == rep.v_records[0].attained == {0, 1, 2}
    assert rep.corollary_holds and rep.ok

    vals = {0: (0.0, 5.0), 1: (1.0, 3.0)}
    two = gm.PreorderInstance(
        (po.ObjectiveSpec(po.Kind.CUSTOM, po.MAXIMIZE, func=lambda x: vals[x][0]),),
        (po.ObjectiveSpec(po.Kind.CUSTOM, po.MINIMIZE, func=lambda x: vals[x][1]),),
    )
    rep = gm.chain_report(two, [0, 1])
    assert rep.u_records[0].attained == rep.v_records[0].attained == {1}


def test_chain_errors(M0):
    pre = dm.build_preorder("markowitz", M0)
    pair = [gm.Portfolio((1, 0)), gm.Portfolio((0, 1))]
    with pytest.raises(gm.NotAChain):
        gm.chain_report(pre, pair)
    with pytest.raises(gm.NotAChain):
        gm.chain_upper_bound(pre, pair)


def test_chain_upper_bound_tie_break(M0):
    pre = dm.build_preorder("markowitz", M0)
    a, b = gm.Portfolio((1, 0)), gm.Portfolio((1.0, 0.0))
    assert gm.chain_upper_bound(pre, [a, b]) is a
    assert gm.chain_upper_bound(pre, [a]) is a


# -- properties on random instances -----------------------------------------


def _custom_instance(values: np.ndarray, n_max: int, eps: float):
    u = tuple(
        po.ObjectiveSpec(po.Kind.CUSTOM, po.MAXIMIZE, func=lambda x, c=c: values[x, c]) for c in range(n_max)
    )
    v = tuple(
        po.ObjectiveSpec(po.Kind.CUSTOM, po.MINIMIZE, func=lambda x, c=c: values[x, c])
        for c in range(n_max, values.shape[1])
    )
    return gm.PreorderInstance(u, v, epsilon=eps)


@given(st.integers(0, 10_000))
@settings(max_examples=60, deadline=None)
def test_reflexive_transitive_exact(seed):
    rng = np.random.default_rng(seed)
    values = rng.integers(0, 3, size=(8, 3)).astype(float)
    pre = _custom_instance(values, 1, 0.0)
    rel = {(i, j): gm.relate(pre, i, j).relation for i in range(8) for j in range(8)}

    def r(i, j):
        return rel[i, j] in (R.EQUIVALENT, R.X_BELOW_Y)

    for i in range(8):
        assert rel[i, i] is R.EQUIVALENT
    for i, j, k in itertools.product(range(8), repeat=3):
        if r(i, j) and r(j, k):
            assert r(i, k)


@given(st.integers(0, 10_000))
@settings(max_examples=60, deadline=None)
def test_transitive_with_tolerance_on_separated_gaps(seed):
    rng = np.random.default_rng(seed)
    eps = 1e-3
    # values on a lattice of spacing 3 eps, so every nonzero gap exceeds 2 eps
    values = rng.integers(0, 4, size=(8, 3)) * 3 * eps + rng.uniform(-eps / 4, eps / 4, size=(8, 3))
    pre = _custom_instance(values, 2, eps)

    def r(i, j):
        return gm.relate(pre, i, j).relation in (R.EQUIVALENT, R.X_BELOW_Y)

    for i, j, k in itertools.product(range(8), repeat=3):
        if r(i, j) and r(j, k):
            assert r(i, k)


MIRROR = {R.EQUIVALENT: R.EQUIVALENT, R.X_BELOW_Y: R.Y_BELOW_X, R.Y_BELOW_X: R.X_BELOW_Y, R.INCOMPARABLE: R.INCOMPARABLE}


@given(st.integers(0, 10_000))
@settings(max_examples=50, deadline=None)
def test_mirror_verdicts(seed):
    rng = np.random.default_rng(seed)
    market = gm.build_market(np.full(4, 0.25), rng.normal(size=(3, 4)))
    pre = dm.build_preorder("skew-kurt", market)
    cands = dm.random_sample(dm.DomainSpec("simplex", 3, samples=6), seed=seed)
    for x, y in itertools.product(cands, repeat=2):
        assert gm.relate(pre, y, x).relation is MIRROR[gm.relate(pre, x, y).relation]


def _brute(pre, cands):
    return brute_maximal(lambda x, y: gm.relate(pre, x, y).relation.value, cands)


@pytest.mark.parametrize("preset", ["markowitz", "skew", "kurt", "skew-kurt", "utility", "sd-1", "sd-2", "markowitz-sd-3"])
def test_maximal_set_matches_oracle(preset):
    rng = np.random.default_rng(hash(preset) % 2**32)
    for trial in range(4):
        n, m = int(rng.integers(1, 5)), int(rng.integers(1, 7))
        market = gm.build_market(rng.dirichlet(np.ones(m)), rng.normal(size=(n, m)).round(2))
        cands = dm.random_sample(dm.DomainSpec("simplex", n, samples=30), seed=trial)
        cands += dm.simplex_grid(n, 2)
        pre = dm.build_preorder(preset, market, cands)
        res = gm.maximal_set(pre, cands)
        assert list(res.maximal_indices) == _brute(pre, cands)
        for i, j in res.dominator_map.items():
            assert j in res.maximal_indices
            assert gm.relate(pre, cands[i], cands[j]).relation is R.X_BELOW_Y


def test_maximal_set_independent_of_workers(M1):
    cands = dm.simplex_grid(3, 12)
    pre = dm.build_preorder("skew-kurt", M1)
    a = gm.maximal_set(pre, cands, workers=1)
    b = gm.maximal_set(pre, cands, workers=4)
    assert a.maximal_indices == b.maximal_indices and a.dominator_map == b.dominator_map
    assert np.array_equal(a.values, b.values)


def test_maximal_set_permutation_invariant():
    rng = np.random.default_rng(8)
    market = gm.build_market(np.full(5, 0.2), rng.normal(size=(3, 5)))
    cands = dm.simplex_grid(3, 6)
    pre = dm.build_preorder("skew", market)
    base = gm.maximal_set(pre, cands)
    base_max = {cands[i].weights for i in base.maximal_indices}
    for _ in range(5):
        perm = [cands[i] for i in rng.permutation(len(cands))]
        res = gm.maximal_set(pre, perm)
        assert {perm[i].weights for i in res.maximal_indices} == base_max
        canon = sorted(perm, key=lambda x: x.weights)
        res_c = gm.maximal_set(pre, canon)
        canon_base = gm.maximal_set(pre, sorted(cands, key=lambda x: x.weights))
        assert res_c.maximal_indices == canon_base.maximal_indices
        assert res_c.dominator_map == canon_base.dominator_map


def test_markowitz_equivalence_random():
    rng = np.random.default_rng(21)
    for _ in range(20):
        n, m = int(rng.integers(2, 5)), int(rng.integers(2, 7))
        market = gm.build_market(rng.dirichlet(np.ones(m)), rng.normal(size=(n, m)))
        cands = dm.simplex_grid(n, 4)
        pre = dm.build_preorder("markowitz", market)
        for x in cands:
            assert gm.is_markowitz_efficient(pre, x, cands) == gm.is_maximal(pre, x, cands)


def test_ascent_properties():
    rng = np.random.default_rng(4)
    market = gm.build_market(np.full(4, 0.25), rng.normal(size=(3, 4)))
    cands = dm.simplex_grid(3, 8)
    pre = dm.build_preorder("kurt", market)
    for x in cands:
        m, path = gm.ascend_to_maximal(pre, x, cands)
        assert path[0] == x and path[-1] == m and len(path) <= len(cands)
        for a, b in zip(path, path[1:]):
            assert gm.relate(pre, a, b).relation is R.X_BELOW_Y
        assert gm.is_maximal(pre, m, cands)
        assert m == x or gm.relate(pre, x, m).relation in (R.EQUIVALENT, R.X_BELOW_Y)


def test_affine_transform_keeps_markowitz_frontier():
    rng = np.random.default_rng(9)
    market = gm.build_market(np.full(5, 0.2), rng.normal(size=(3, 5)))
    cands = dm.simplex_grid(3, 10)
    base = gm.maximal_set(dm.build_preorder("markowitz", market), cands).maximal_indices
    for a, b in [(2.0, 0.0), (0.5, -1.0), (3.0, 0.1)]:
        moved = gm.maximal_set(dm.build_preorder("markowitz", market.affine(a, b)), cands).maximal_indices
        assert moved == base


def test_chain_lemmas_random():
    rng = np.random.default_rng(13)
    for trial in range(100):
        n, m = int(rng.integers(2, 5)), int(rng.integers(2, 7))
        market = gm.build_market(rng.dirichlet(np.ones(m)), rng.normal(size=(n, m)))
        preset = ["markowitz", "skew", "kurt", "skew-kurt", "utility"][trial % 5]
        pre = dm.build_preorder(preset, market)
        cands = dm.random_sample(dm.DomainSpec("simplex", n, samples=40), seed=trial)
        chain = random_chain(lambda x, y: gm.relate(pre, x, y).relation.value, cands, rng)
        rep = gm.chain_report(pre, chain)
        assert rep.lemma_i_holds and rep.lemma_ii_holds and rep.corollary_holds
        top = chain[rep.upper_bound]
        for y in chain:
            assert gm.relate(pre, y, top).relation in (R.EQUIVALENT, R.X_BELOW_Y)
