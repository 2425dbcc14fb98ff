import re

import pytest

from howekit import Var, parse_term, transitions, validate_signature
from howekit.instances import catalog, instance_info, load_instance, rigid_cbn, term

NAMES = ["cbn", "cbv", "nondet", "cbn-howe"]


def test_catalog_lists_four_instances():
    assert [name for name, _ in catalog()] == NAMES


@pytest.mark.parametrize("name", NAMES)
def test_every_instance_validates(name):
    assert validate_signature(load_instance(name)).ok


def test_summaries_carry_counts():
    for name, summary in catalog():
        d = load_instance(name)
        ops, rules = re.search(r"(\d+) operators, \d+ labels, (\d+) rules", summary).groups()
        assert int(ops) == len(d.binding.operators)
        assert int(rules) == len(d.all_rules) + len(d.howe_rules)


def test_unknown_instance():
    with pytest.raises(KeyError, match="cbn"):
        load_instance("pcf")


def test_cbn_shape():
    d = load_instance("cbn")
    assert d.binding.sorts == ("p",)
    assert [o.name for o in d.binding.operators] == ["lam", "app"]
    [ev] = d.labels
    assert (ev.source_ctx["p"], ev.target_ctx["p"]) == (0, 1)
    assert transitions(d, term("cbn", "lam(x. x)"), "eval", 1).targets == (Var("p", 1),)


def test_cbv_shape():
    d = load_instance("cbv")
    assert set(d.binding.sorts) == {"p", "v"}
    assert instance_info("cbv").values_only
    [ev] = d.labels
    assert ev.target_ctx["v"] == 1 and ev.target_ctx["p"] == 0
    app = next(r for r in d.rules if r.name == "app_eval")
    assert len(app.premises) == 3


def test_nondet_shape():
    d = load_instance("nondet")
    assert [o.name for o in d.binding.operators] == ["lam", "app", "amb"]
    assert sorted(lab.name for lab in d.labels) == ["lam", "tau"]
    assert instance_info("nondet").oracle
    # six plain rules plus reflexivity, transitivity and the tau-then-lambda rule
    assert len(d.rules) + len(d.schematic) == 9


def test_cbn_howe_shape():
    d = load_instance("cbn-howe")
    lam = d.binding.op("lam")
    assert lam.kind == "value" and lam.result_sort == "v"
    assert d.binding.op("app").kind == "plain"
    assert [r.name for r in d.howe_rules] == ["app_eval"]
    assert validate_signature(rigid_cbn()).ok


def test_term_helper_defaults_to_program_sort():
    assert term("cbv", "Omega") == parse_term(load_instance("cbv"), "Omega", "p")
