import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from howekit import (
    EMPTY,
    Context,
    MetaVar,
    Premise,
    RigidRule,
    StructuralError,
    canonical_rules,
    expand_schematic,
    parse_signature,
    parse_term,
    rigidify,
    validate_rigid,
    validate_signature,
)
from howekit.instances import naive_cbn_howe, rigid_cbn
from howekit.rules import NON_META_TARGET, UNINTRODUCED, UndeclaredName, howe_labels, validate_howe_rule

VALUE_OPS = """\
sort p
sort v
coerce v -> p
binding p

op lam : (p[1 p]) -> v value 0 1 d-=(1)
op pair : (v, v) -> v value 2 0 d-=()
op unit : () -> v value 0 0 d-=()
op app : (p, p) -> p
op fst : (p) -> p
"""


def rule(dsig, name):
    return next(r for r in dsig.all_rules if r.name == name)


def test_builtin_cbn_table(cbn):
    rep = validate_signature(cbn)
    assert rep.ok
    assert rep.table == {("lam", "eval"): 1, ("app", "eval"): 1}


def test_beta_rule_is_rigid(cbn):
    assert validate_rigid(rule(cbn, "app_eval"), cbn) == []


def test_naive_howe_rule_rejected():
    d = naive_cbn_howe()
    rep = validate_signature(d)
    assert not rep.ok
    [diag] = rep.diagnostics
    assert diag.rule == "app_eval" and diag.clause == NON_META_TARGET


def test_unintroduced_metavariable(cbn):
    ev = cbn.label("eval")
    good = rule(cbn, "app_eval")
    p1, p2 = good.premises
    k9 = MetaVar("k9")
    bad_source = parse_term(cbn, "?k9", "p")
    bad = RigidRule("bad", good.source, (p1, Premise(bad_source, ev, p2.target)), ev, good.target)
    diags = validate_rigid(bad, cbn.replace(rules=(bad,)))
    assert [d.clause for d in diags] == [UNINTRODUCED]
    assert k9.name in diags[0].message


def test_undeclared_label_raises(cbn):
    other = parse_signature(VALUE_OPS + "label go : p@0 -> p@0\nrule r: fst(?k) gives go ?k\n")
    with pytest.raises(UndeclaredName):
        validate_rigid(other.rules[0], cbn)


def test_empty_rule_set(cbn):
    rep = validate_signature(cbn.replace(rules=()))
    assert rep.ok and rep.table == {}


# -- schematic expansion


def test_reflexivity_expands_per_constructor(nondet):
    refl = next(r for r in nondet.schematic if r.name == "refl")
    out = expand_schematic(refl, nondet.binding)
    assert [r.name for r in out] == ["refl_lam", "refl_app", "refl_amb"]
    for r in out:
        assert r.target == r.source and r.premises == ()
    assert [r.source.op.name for r in out] == ["lam", "app", "amb"]


def test_transitivity_expansion_puts_head_in_first_premise(nondet):
    trans = next(r for r in nondet.schematic if r.name == "trans")
    out = expand_schematic(trans, nondet.binding)
    assert len(out) == 3
    for r in out:
        assert r.premises[0].source == r.source
        assert validate_rigid(r, nondet) == []


def test_single_constructor_gives_one_rule():
    d = parse_signature("sort p\nbinding p\nop z : () -> p\nlabel tau : p@0 -> p@0\nschematic refl: ?E gives tau ?E\n")
    assert [r.name for r in expand_schematic(d.schematic[0], d.binding)] == ["refl_z"]


def test_nondet_rule_count(nondet):
    rep = validate_signature(nondet)
    assert rep.ok
    assert len(nondet.rules) == 6
    assert len(nondet.all_rules) == 6 + 3 * 3
    assert rep.table[("amb", "tau")] == 4


# -- canonical rules and rigidification


def test_canonical_rules_for_lambda(cbn_howe):
    rules = canonical_rules(cbn_howe.binding)
    assert [r.name for r in rules] == ["lam_eval", "neg_lam_1"]
    ev, neg = rules
    assert ev.premises == () and ev.source.sort == "p" and ev.target.sort == "v"
    assert neg.premises == () and neg.label.target_ctx == Context.of({"p": 1})


def test_canonical_rules_for_pairing_and_constants():
    d = parse_signature(VALUE_OPS)
    names = [r.name for r in canonical_rules(d.binding)]
    assert names == ["lam_eval", "neg_lam_1", "pair_eval", "pos_pair_1", "pos_pair_2", "unit_eval"]
    pair_eval = next(r for r in canonical_rules(d.binding) if r.name == "pair_eval")
    assert len(pair_eval.premises) == 2
    unit_eval = next(r for r in canonical_rules(d.binding) if r.name == "unit_eval")
    assert unit_eval.premises == ()


def test_observation_labels():
    d = parse_signature(VALUE_OPS)
    labels = {lab.name: lab for lab in howe_labels(d.binding)}
    assert set(labels) == {"eval", "neg_lam_1", "pos_pair_1", "pos_pair_2"}
    assert (labels["eval"].source_sort, labels["eval"].target_sort) == ("p", "v")
    assert labels["neg_lam_1"].target_ctx == Context.of({"p": 1})
    assert labels["neg_lam_1"].target_sort == "p"
    assert (labels["pos_pair_1"].source_sort, labels["pos_pair_1"].target_sort) == ("v", "v")
    assert labels["pos_pair_1"].source_ctx == EMPTY


def test_rigidify_cbn_howe():
    d = rigid_cbn()
    assert validate_signature(d).ok
    app = rule(d, "app_eval")
    assert [p.label.name for p in app.premises] == ["eval", "neg_lam_1", "eval"]
    assert len([r for r in d.rules if r.head[0].name == "lam"]) == 2


def test_rigidify_passes_fresh_premises_through(cbn_howe):
    d = parse_signature(VALUE_OPS + "howe fst_id: fst(?k1) with ?k1 ==> ?w gives ?w\n")
    res = rigidify(d.howe_rules, d.binding)
    [r] = [r for r in res.signature.rules if r.name == "fst_id"]
    assert len(r.premises) == 1 and r.premises[0].label.name == "eval"
    assert res.mapping["fst_id"] == ["fst_id"]


def test_nullary_pattern_warns():
    d = parse_signature(VALUE_OPS + "howe fst_unit: fst(?k1) with ?k1 ==> unit, ?k1 ==> ?w gives ?w\n")
    res = rigidify(d.howe_rules, d.binding)
    assert len(res.warnings) == 1 and "unit" in res.warnings[0]
    assert validate_signature(res.signature).ok


def test_rigidify_rejects_bad_howe_rule():
    d = parse_signature(VALUE_OPS + "howe bad: fst(?k1) with ?k1 ==> unit gives ?k1\n")
    assert validate_howe_rule(d.howe_rules[0], d.binding)
    with pytest.raises(StructuralError):
        rigidify(d.howe_rules, d.binding)


# -- random Howe rules


@st.composite
def howe_rule_text(draw):
    head, closed = draw(st.sampled_from([("app(?k1, ?k2)", ["?k1", "?k2"]), ("fst(?k1)", ["?k1"])]))
    closed = list(closed)
    opened: list[str] = []
    fresh_values: list[str] = []
    premises = []
    n = draw(st.integers(1, 4))
    for i in range(n):
        if opened and draw(st.booleans()):
            source = f"{draw(st.sampled_from(opened))}({draw(st.sampled_from(closed))})"
        else:
            source = draw(st.sampled_from(closed))
        shape = draw(st.sampled_from(["fresh", "lam", "pair", "unit"]))
        if i == n - 1 and not fresh_values:
            shape = "fresh"
        if shape == "fresh":
            target = f"?w{i}"
            fresh_values.append(target)
            closed.append(target)
        elif shape == "lam":
            target = f"lam(x. ?f{i}(x))"
            opened.append(f"?f{i}")
        elif shape == "pair":
            target = f"pair(?a{i}, ?b{i})"
            closed += [f"?a{i}", f"?b{i}"]
        else:
            target = "unit"
        premises.append(f"{source} ==> {target}")
    tail = draw(st.sampled_from(fresh_values))
    return f"howe r: {head} with {', '.join(premises)} gives {tail}\n"


@settings(max_examples=150, deadline=None)
@given(howe_rule_text())
def test_rigidify_output_always_rigid(text):
    d = parse_signature(VALUE_OPS + text)
    assert validate_howe_rule(d.howe_rules[0], d.binding) == []
    res = rigidify(d.howe_rules, d.binding)
    rep = validate_signature(res.signature)
    assert rep.ok, rep.diagnostics
