from pathlib import Path

import pytest

from howekit import EMPTY, Context, ParseError, Var, enumerate_terms, parse_signature, parse_term, show_signature, show_term
from howekit.instances import CBN, CBV, corpus_files, load_instance
from howekit.surface import parse_context, tokenize

CORPUS = Path(__file__).resolve().parents[1] / "corpus"


@pytest.mark.parametrize("name", sorted(corpus_files()))
def test_corpus_files_match_printer(name):
    assert (CORPUS / name).read_text() == corpus_files()[name]


@pytest.mark.parametrize("name", sorted(corpus_files()))
def test_print_parse_identity_on_corpus(name):
    text = (CORPUS / name).read_text()
    assert show_signature(parse_signature(text, name)) == text


def test_instance_texts_are_already_normal():
    assert show_signature(parse_signature(CBN)) == CBN
    assert show_signature(parse_signature(CBV)) == CBV


@pytest.mark.parametrize("name", ["cbn", "cbv", "nondet", "cbn-howe"])
def test_term_round_trip(name):
    d = load_instance(name)
    ctxs = ["0", "1", "2"] if d.binding.single_sorted() else ["0", "1 v", "1 p + 1 v"]
    for text in ctxs:
        ctx = parse_context(text, d)
        for sort in d.binding.sorts:
            for t in enumerate_terms(d.binding, sort, ctx, 5):
                assert parse_term(d, show_term(t, d, sort), sort, ctx) == t


def test_binder_names_and_shadowing(cbn):
    a = parse_term(cbn, "lam(x. lam(x. x))", "p")
    b = parse_term(cbn, "lam(x. lam(y. y))", "p")
    assert a == b
    assert show_term(a, cbn, "p") == "lam(x. lam(y. y))"


def test_free_variable_syntax(cbn):
    t = parse_term(cbn, "app(var 1, var 2)", "p", Context.of({"p": 2}))
    assert t.args == (Var("p", 1), Var("p", 2))
    assert show_term(t, cbn, "p") == "app(var 1, var 2)"


def test_defines_expand(cbn):
    I = parse_term(cbn, "I", "p")
    assert I == parse_term(cbn, "lam(z. z)", "p")
    assert show_term(parse_term(cbn, "app(I, Omega)", "p"), cbn, "p").startswith("app(lam(x. x), app(")


def test_value_annotation(cbv):
    t = parse_term(cbv, "lam@v(x. x)", "v")
    assert t.sort == "v"
    assert parse_term(cbv, "lam@p(x. x)", "p").sort == "p"
    assert show_term(t, cbv, "p") == "lam@v(x. x)"


@pytest.mark.parametrize(
    "text,line,column",
    [
        ("app(lam(x. x)", 1, 14),
        ("lam(x. y)", 1, 8),
        ("foo(x)", 1, 1),
        ("var 3", 1, 1),
    ],
)
def test_term_errors_are_located(cbn, text, line, column):
    with pytest.raises(ParseError) as e:
        parse_term(cbn, text, "p", Context.of({"p": 2}))
    assert (e.value.line, e.value.column) == (line, column)


def test_signature_errors_are_located():
    bad = "sort p\nbinding p\nop lam : (p[1]) -> p\nlabel eval : p@0 -> p@1\nrule r: lam(x. ?k(x)) gives nope ?k(var 1)\n"
    with pytest.raises(ParseError) as e:
        parse_signature(bad)
    assert e.value.line == 5


def test_continuation_lines():
    text = CBN.replace(" with ?k1 =eval=> ?k3(var 1),", "\n  with ?k1 =eval=> ?k3(var 1),")
    assert parse_signature(text).rules == parse_signature(CBN).rules


def test_contexts(cbv, cbn):
    assert parse_context("2", cbn) == Context.of({"p": 2})
    assert parse_context("1 p + 2 v", cbv) == Context.of({"p": 1, "v": 2})
    assert parse_context("0", cbv) == EMPTY
    with pytest.raises(ParseError):
        parse_context("1 q", cbv)


def test_tokenizer_positions():
    toks = tokenize("app(x,\n  ?k)")
    assert [(t.text, t.line, t.column) for t in toks][-3:] == [("?", 2, 3), ("k", 2, 4), (")", 2, 5)]
