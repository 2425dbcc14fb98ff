import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from howekit import (
    EMPTY,
    Coerce,
    Context,
    MetaApp,
    MetaVar,
    OpApp,
    StructuralError,
    Substitution,
    Var,
    coerce,
    enumerate_terms,
    instantiate,
    parse_term,
    rename,
    substitute,
)
from howekit.syntax import check, coerce_to, shift, sort_of, substitute_top, well_formed
from laws import multi_sorted_laws, single_sorted_laws
from oracles import count_lambda

P1 = Context.of({"p": 1})
P2 = Context.of({"p": 2})


def term(dsig, text, ctx=EMPTY, sort="p"):
    return parse_term(dsig, text, sort, ctx)


def test_context_arithmetic():
    c = Context.of({"p": 1}) + Context.of({"v": 2, "p": 1})
    assert c["p"] == 2 and c["v"] == 2 and c["q"] == 0
    assert Context.of({"p": 1}) <= c
    assert not c <= Context.of({"p": 2})
    assert len(c) == 4
    assert str(c) == "2 p + 2 v"
    assert Context.of({"p": 0}) == EMPTY


def test_var_must_be_positive():
    with pytest.raises(StructuralError):
        Var("p", 0)


def test_free_variables_and_size(cbn):
    t = term(cbn, "lam(x. app(x, var 2))", P2)
    assert t.fv == (("p", 2),)
    assert t.size == 4
    assert term(cbn, "Omega").closed


# -- substitution


def test_unit_on_single_variable(cbn):
    I = term(cbn, "I")
    assert substitute(Var("p", 1), Substitution.closing(P1, {("p", 1): I})) == I


def test_metavariable_arguments_are_substituted(cbn):
    k = MetaVar("k", P1)
    a = term(cbn, "app(I, I)")
    out = substitute(MetaApp(k, (Var("p", 1),)), Substitution.closing(P1, {("p", 1): a}))
    assert out == MetaApp(k, (a,))


def test_substitution_under_binder_avoids_capture(cbn):
    t = term(cbn, "lam(x. app(x, var 1))", P1)
    out = substitute(t, Substitution.closing(P1, {("p", 1): term(cbn, "lam(y. y)")}))
    assert out == term(cbn, "lam(x. app(x, lam(y. y)))")


def test_open_image_is_shifted_under_binder(cbn):
    t = term(cbn, "lam(x. var 1)", P1)
    sigma = Substitution(P1, {("p", 1): Var("p", 1)}, P1)
    assert substitute(t, sigma) == t
    sigma2 = Substitution(P1, {("p", 1): Var("p", 2)}, P2)
    assert substitute(t, sigma2) == term(cbn, "lam(x. var 2)", P2)


def test_substitute_top_keeps_other_variables(cbn):
    t = term(cbn, "app(var 1, var 2)", P2)
    I = term(cbn, "I")
    assert substitute_top(t, {("p", 1): I}) == term(cbn, "app(I, var 1)", P1)
    assert substitute_top(t, {("p", 2): I}) == term(cbn, "app(var 1, I)", P1)


def test_partial_substitution_rejected(cbn):
    with pytest.raises(StructuralError):
        Substitution(P2, {("p", 1): Var("p", 1)})


def test_substitution_laws_exhaustive_small(cbn):
    rep = single_sorted_laws(cbn, term_size=4, pool_size=3)
    assert rep.violations == []
    assert rep.checked["associativity"] > 1000


def test_substitution_laws_with_choice(nondet):
    rep = single_sorted_laws(nondet, term_size=4, pool_size=2)
    assert rep.violations == []


def test_substitution_laws_multi_sorted(cbv):
    rep = multi_sorted_laws(cbv, term_size=5, pool_size=3)
    assert rep.violations == []
    assert rep.checked["associativity"] > 0


def test_naive_program_substitution_only_at_coerced_occurrences(cbv):
    omega = term(cbv, "Omega")
    V1 = Context.of({"v": 1})
    closing = Substitution.closing(V1, {("v", 1): omega})
    app_x = term(cbv, "app(var 1@v, var 1@v)", V1)
    assert substitute(app_x, closing) == OpApp(cbv.binding.op("app"), "p", (omega, omega))
    # a bare value occurrence cannot take a program
    with pytest.raises(StructuralError):
        substitute(Var("v", 1), closing)


# -- renaming


def test_rename_examples(cbn):
    assert rename(Var("p", 1), {("p", 1): 2}) == Var("p", 2)
    t = term(cbn, "lam(x. app(var 1, var 2))", P2)
    assert rename(t, {("p", 1): 1, ("p", 2): 2}) == t


def test_rename_composes(cbn):
    rng = random.Random(0)
    terms = enumerate_terms(cbn.binding, "p", P2, 5)
    sample = rng.sample(terms, 30)
    swap = {("p", 1): 2, ("p", 2): 1}
    into3 = {("p", 1): 3, ("p", 2): 1}
    composite = {v: into3[("p", swap[v])] for v in swap}
    for t in sample:
        assert rename(rename(t, swap), into3) == rename(t, composite)


def test_shift_is_renaming(cbn):
    for t in enumerate_terms(cbn.binding, "p", P2, 4):
        assert shift(t, P1) == rename(t, {("p", 1): 2, ("p", 2): 3})


# -- metavariables


def test_projection_metavariable(cbn):
    k = MetaVar("k", P1)
    e = term(cbn, "app(I, I)")
    assert instantiate(MetaApp(k, (e,)), {k: Var("p", 1)}) == e


def test_premise_instantiation_by_hand(cbn):
    k3, k2 = MetaVar("k3", P1), MetaVar("k2")
    env = {k3: Var("p", 1), k2: term(cbn, "lam(y. y)")}
    assert instantiate(MetaApp(k3, (k2.generic(),)), env) == term(cbn, "lam(y. y)")


def test_nested_instantiation_order_irrelevant(cbn):
    rng = random.Random(0)
    k, k2 = MetaVar("k", P1), MetaVar("k2")
    pattern = MetaApp(k, (MetaApp(k2, ()),))
    bodies = enumerate_terms(cbn.binding, "p", P1, 4)
    closed = enumerate_terms(cbn.binding, "p", EMPTY, 4)
    for _ in range(20):
        env = {k: rng.choice(bodies), k2: rng.choice(closed)}
        inner_first = instantiate(MetaApp(k, (env[k2],)), {k: env[k]})
        assert instantiate(pattern, env) == inner_first


def test_instantiate_commutes_with_substitution(cbn):
    rng = random.Random(1)
    k = MetaVar("k", P1)
    pattern = term(cbn, "app(?k(var 1), var 1)", P1)
    bodies = enumerate_terms(cbn.binding, "p", P1, 4)
    closed = enumerate_terms(cbn.binding, "p", EMPTY, 3)
    for _ in range(30):
        env = {k: rng.choice(bodies)}
        sigma = Substitution.closing(P1, {("p", 1): rng.choice(closed)})
        left = substitute(instantiate(pattern, env), sigma)
        right = instantiate(substitute(pattern, sigma), env)
        assert left == right


def test_missing_metavariable(cbn):
    with pytest.raises(StructuralError):
        instantiate(MetaVar("k").generic(), {})


# -- coercion


def test_coerce_value_variable_wraps(cbv):
    x = Var("v", 1)
    assert coerce(x, cbv.binding.sort_table) == Coerce(x, "p")


def test_coerce_flips_value_annotation(cbv):
    lam_v = term(cbv, "lam(x. x)", sort="v")
    out = coerce(lam_v, cbv.binding.sort_table)
    assert isinstance(out, OpApp) and out.sort == "p" and out.args == lam_v.args


def test_coerce_idempotent_on_values(cbv):
    for ctx in (EMPTY, Context.of({"v": 1})):
        for t in enumerate_terms(cbv.binding, "v", ctx, 4):
            once = coerce_to(t, "p")
            assert coerce_to(once, "p") == once
            assert sort_of(once) == "p"


def test_coerce_needs_declaration(cbv):
    with pytest.raises(StructuralError):
        coerce(term(cbv, "Omega"), cbv.binding.sort_table, "v")


# -- well-formedness and enumeration


def test_check_rejects_out_of_scope(cbn):
    assert well_formed(cbn.binding, Var("p", 1), "p", P1)
    assert not well_formed(cbn.binding, Var("p", 2), "p", P1)
    with pytest.raises(StructuralError):
        check(cbn.binding, Var("p", 1), "p", EMPTY)


def test_enumerate_examples(cbn):
    assert enumerate_terms(cbn.binding, "p", EMPTY, 2) == [term(cbn, "I")]
    assert enumerate_terms(cbn.binding, "p", EMPTY, 0) == []


@pytest.mark.parametrize("free", [0, 1, 2])
def test_enumeration_counts_match_formula(cbn, nondet, free):
    ctx = Context.of({"p": free})
    for size in range(1, 7):
        want = sum(count_lambda(i, free) for i in range(1, size + 1))
        assert len(enumerate_terms(cbn.binding, "p", ctx, size)) == want
        want_amb = sum(count_lambda(i, free, amb=True) for i in range(1, size + 1))
        assert len(enumerate_terms(nondet.binding, "p", ctx, size)) == want_amb


def test_enumeration_order_and_well_formedness(cbv):
    ctx = Context.of({"v": 1})
    for sort in ("p", "v"):
        ts = enumerate_terms(cbv.binding, sort, ctx, 5)
        assert len(set(ts)) == len(ts)
        assert [t.size for t in ts] == sorted(t.size for t in ts)
        for t in ts:
            check(cbv.binding, t, sort, ctx)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 5), st.integers(1, 6))
def test_enumeration_monotone(free, size):
    from howekit.instances import load_instance

    sig = load_instance("cbn").binding
    ctx = Context.of({"p": free % 3})
    small = set(enumerate_terms(sig, "p", ctx, size - 1)) if size > 1 else set()
    assert small <= set(enumerate_terms(sig, "p", ctx, size))
