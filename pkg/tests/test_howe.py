import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from howekit import EMPTY, Context, Var, enumerate_terms, parse_signature, parse_term
from howekit.bisim import Relation, SubstPool
from howekit.howe import (
    BisimOracle,
    RelationOracle,
    SyntacticOracle,
    Universe,
    compose,
    composition_check,
    congruence_check,
    congruence_sweep,
    containment_check,
    fixpoint_check,
    hetero_substitution_check,
    howe_closure,
    howe_step,
    plug,
    positions,
    reflexivity_check,
    relational_transitive_closure,
    simulation_check,
    symmetry_check,
    transitive_closure,
)
from howekit.instances import CBN

P1 = Context.of({"p": 1})


def term(dsig, text, ctx=EMPTY):
    return parse_term(dsig, text, "p", ctx)


@pytest.fixture(scope="module")
def small(cbn):
    """Universe of size 4 with one free variable, closed under the depth-3 oracle."""
    U = Universe.build(cbn, 4, 1)
    return howe_closure(cbn, U, BisimOracle(cbn, 3, 8, SubstPool.build(cbn, 3)))


@pytest.fixture(scope="module")
def full(cbn):
    U = Universe.build(cbn, 5, 2)
    return howe_closure(cbn, U, BisimOracle(cbn, 3, 8, SubstPool.build(cbn, 3)))


# -- universes


def test_universe_is_subterm_closed(cbn):
    U = Universe.build(cbn, 4, 1)
    assert U.has(term(cbn, "lam(x. x)"), "p", EMPTY)
    # the body of a closed lambda lives one binder deeper
    assert U.has(Var("p", 1), "p", P1)
    assert U.size() == sum(len(ts) for ts in U.buckets.values())
    for (s, c), ts in U.buckets.items():
        for t in ts:
            if c == EMPTY:
                assert t.closed


def test_universe_contains_enumeration(cbn):
    U = Universe.build(cbn, 4, 2)
    for k in range(3):
        ctx = Context.of({"p": k})
        for t in enumerate_terms(cbn.binding, "p", ctx, 4):
            assert (t, "p", ctx) in U


# -- closure


def test_syntactic_oracle_gives_diagonal(cbn):
    U = Universe.build(cbn, 4, 1)
    res = howe_closure(cbn, U, SyntacticOracle())
    assert res.relation == U.diagonal()


def test_basic_properties(small):
    H, U = small.relation, small.universe
    assert reflexivity_check(H, U).ok
    assert containment_check(small.base, H).ok
    assert composition_check(H, small.base).ok
    assert congruence_check(H, U).ok
    assert fixpoint_check(small).ok
    assert small.sizes[-1] == len(H)


def test_beta_expanded_identity_is_related(cbn, full):
    res = full
    assert res.relation.contains(term(cbn, "I"), term(cbn, "lam(x. app(lam(y. y), x))"), "p", EMPTY)
    # the open step behind it
    assert res.relation.contains(Var("p", 1), term(cbn, "app(lam(y. y), var 1)", P1), "p", P1)


def test_diagonal_base_satisfies_composition(small):
    assert composition_check(small.relation, small.universe.diagonal()).ok


@pytest.mark.parametrize("seed", range(5))
def test_dropping_a_pair_is_detected(small, seed):
    H = small.relation.copy()
    rng = random.Random(seed)
    s, c, a, b = rng.choice(sorted(H, key=repr))
    H.discard(a, b, s, c)
    found = not (
        composition_check(H, small.base).ok
        and congruence_check(H, small.universe).ok
        and howe_step(H, small.universe, small.base_succ) == H
    )
    assert found


def test_closure_monotone_in_base(cbn):
    U = Universe.build(cbn, 4, 1)
    diag = howe_closure(cbn, U, SyntacticOracle()).relation
    bis = howe_closure(cbn, U, BisimOracle(cbn, 3, 8, SubstPool.build(cbn, 3)))
    assert diag <= bis.relation
    # and a relation oracle between them
    some = Relation.of([(term(cbn, "I"), term(cbn, "lam(x. app(lam(y. y), x))"))])
    mid = howe_closure(cbn, U, RelationOracle(some, reflexive=True)).relation
    assert diag <= mid <= howe_closure(cbn, U, RelationOracle(bis.base, reflexive=True)).relation


def test_bisim_oracle_is_reflexive_and_symmetric(small):
    assert symmetry_check(small.base).ok
    assert reflexivity_check(small.base, small.universe).ok


# -- heterogeneous substitution


def test_hetero_substitution_sweep(small):
    rep = hetero_substitution_check(small.relation, small.universe, samples=100, seed=0)
    assert rep.ok and rep.checked == 100


def test_variable_for_variable_is_reflexive(small):
    H = small.relation
    for t in small.universe.buckets[("p", P1)]:
        # x := x keeps the term, and t H t by reflexivity
        assert H.contains(t, t, "p", P1)


def test_oracle_pair_chain(cbn, full):
    """e1 B e1' and e2 H e2' gives e1[x:=e2] H e1'[x:=e2'] via e1[x:=e2']."""
    from howekit.syntax import substitute_top

    H, B = full.relation, full.base
    e1, e1p = Var("p", 1), term(cbn, "app(lam(y. y), var 1)", P1)
    assert B.contains(e1, e1p, "p", P1)
    e2 = e2p = term(cbn, "I")
    left, right = substitute_top(e1, {("p", 1): e2}), substitute_top(e1p, {("p", 1): e2p})
    assert H.contains(left, right, "p", EMPTY)


# -- transitive closures and symmetry


def test_transitive_closure_examples(cbn):
    a, b, c = (term(cbn, x) for x in ("I", "lam(x. lam(y. x))", "lam(x. lam(y. y))"))
    R = Relation.of([(a, b), (b, c)])
    closed = transitive_closure(R)
    assert closed.contains(a, c, "p") and len(closed) == 3
    assert transitive_closure(closed) == closed
    assert relational_transitive_closure(R) == closed
    assert compose(R, R) == Relation.of([(a, c)])


def test_symmetry_examples(cbn):
    a, b = term(cbn, "I"), term(cbn, "Omega")
    assert symmetry_check(Relation.of([(a, a), (b, b)])).ok
    rep = symmetry_check(Relation.of([(a, b)]))
    assert rep.violations == [("p", EMPTY, b, a)]


@settings(max_examples=50, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 7), st.integers(0, 7)), max_size=20))
def test_closures_agree_and_are_idempotent(edges):
    from howekit.instances import load_instance

    cbn = load_instance("cbn")
    names = enumerate_terms(cbn.binding, "p", EMPTY, 5)[:8]
    R = Relation.of([(names[i], names[j]) for i, j in edges])
    T = transitive_closure(R)
    assert T == relational_transitive_closure(R)
    assert transitive_closure(T) == T
    assert R <= T
    assert compose(T, T) <= T


def test_closure_of_howe_relation_is_symmetric(small):
    closure = relational_transitive_closure(small.relation)
    assert symmetry_check(closure).ok


# -- simulation


def test_simulation_on_small_universe(cbn, small):
    rep = simulation_check(cbn, small.relation, 8, SubstPool.build(cbn, 3), small.universe)
    assert rep.ok
    assert rep.checked > 0


def test_simulation_flags_broken_relation(cbn):
    stuck = parse_signature(CBN.replace("label", "op z : () -> p\nlabel", 1))
    U = Universe.build(stuck, 3, 0)
    R = U.diagonal()
    R.add(term(stuck, "I"), term(stuck, "z"), "p", EMPTY)
    rep = simulation_check(stuck, R, 8, SubstPool.build(stuck, 2), U)
    assert not rep.ok


# -- contexts and the sweep


def test_positions_and_plug(cbn):
    t = term(cbn, "app(I, lam(x. x))")
    assert positions(t, "p") == [(), (0,), (0, 0), (1,), (1, 0)]
    hole = term(cbn, "Omega")
    assert plug(t, (1,), hole) == term(cbn, "app(I, Omega)")
    assert plug(t, (), hole) == hole


def test_sweep_is_deterministic(cbn):
    pool = SubstPool.build(cbn, 2)
    a = congruence_sweep(cbn, 2, 6, pool, n_samples=20, seed=3, term_size=4, context_size=4)
    b = congruence_sweep(cbn, 2, 6, pool, n_samples=20, seed=3, term_size=4, context_size=4)
    assert a.to_json() | {"seconds": 0} == b.to_json() | {"seconds": 0}
    assert a.samples == 20 and a.holds + a.inconclusive + len(a.counterexamples) == 20


def test_sweep_finds_no_counterexample_small(cbn):
    rep = congruence_sweep(cbn, 2, 6, SubstPool.build(cbn, 2), n_samples=40, seed=0, term_size=4, context_size=4)
    assert rep.counterexamples == []
