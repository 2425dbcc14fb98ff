"""Built-in signatures: call-by-name, call-by-value and erratic-choice
lambda calculi, and call-by-name in Howe's format."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from .rules import DynamicSignature, rigidify, validate_signature
from .surface import parse_signature, parse_term, show_signature
from .syntax import Term

CBN = """\
sort p
binding p

op lam : (p[1]) -> p
op app : (p, p) -> p

label eval : p@0 -> p@1

define I = lam(x. x)
define Omega = app(lam(x. app(x, x)), lam(x. app(x, x)))

rule lam_eval: lam(x. ?k(x)) gives eval ?k(var 1)
rule app_eval: app(?k1, ?k2) with ?k1 =eval=> ?k3(var 1), ?k3(?k2) =eval=> ?k4(var 1) gives eval ?k4(var 1)
"""

# The evaluated body keeps one value variable; the bound variable of the
# function is replaced by the value the argument evaluates to.
CBV = """\
sort p
sort v
coerce v -> p
binding v

op lam : (p[1 v]) -> v value 0 1 d-=(1)
op app : (p, p) -> p

label eval : p@0 -> p@1 v

define I = lam(x. x)
define Omega = app(lam(x. app(x, x)), lam(x. app(x, x)))

rule lam_eval: lam(x. ?k(x)) gives eval ?k(var 1)
rule app_eval: app(?k1, ?k2) with ?k1 =eval=> ?k3(var 1), ?k2 =eval=> ?k4(var 1), ?k3(lam(x. ?k4(x))) =eval=> ?k5(var 1) gives eval ?k5(var 1)
"""

NONDET = """\
sort p
binding p

op lam : (p[1]) -> p
op app : (p, p) -> p
op amb : (p) -> p

label lam : p@0 -> p@1
label tau : p@0 -> p@0

define I = lam(x. x)
define Omega = app(lam(x. app(x, x)), lam(x. app(x, x)))

rule amb_left: amb(?k) gives tau ?k
rule amb_omega: amb(?k) gives tau Omega
rule lam_val: lam(x. ?k(x)) gives lam ?k(var 1)
rule app_lam: app(?k1, ?k2) with ?k1 =lam=> ?k3(var 1), ?k3(?k2) =lam=> ?k4(var 1) gives lam ?k4(var 1)
rule app_tau: app(?k1, ?k2) with ?k1 =lam=> ?k3(var 1), ?k3(?k2) =tau=> ?k4 gives tau ?k4
rule app_cong: app(?k1, ?k2) with ?k1 =tau=> ?k3 gives tau app(?k3, ?k2)

schematic refl: ?E gives tau ?E
schematic trans: ?E with ?E =tau=> ?k1, ?k1 =tau=> ?k2 gives tau ?k2
schematic tau_lam: ?E with ?E =tau=> ?k1, ?k1 =lam=> ?k2(var 1) gives lam ?k2(var 1)
"""

CBN_HOWE = """\
sort p
sort v
coerce v -> p
binding p

op lam : (p[1 p]) -> v value 0 1 d-=(1)
op app : (p, p) -> p

define I = lam(x. x)
define Omega = app(lam(x. app(x, x)), lam(x. app(x, x)))

howe app_eval: app(?k1, ?k2) with ?k1 ==> lam(x. ?k3(x)), ?k3(?k2) ==> ?k4 gives ?k4
"""

# Howe's application rule written directly as a labelled rule: the first
# premise matches its result against a pattern, which the format check
# rejects.
CBN_HOWE_NAIVE = """\
sort p
sort v
coerce v -> p
binding p

op lam : (p[1 p]) -> v value 0 1 d-=(1)
op app : (p, p) -> p

label eval : p@0 -> v@0

rule lam_eval: lam(x. ?k(x)) gives eval lam(x. ?k(x))
rule app_eval: app(?k1, ?k2) with ?k1 =eval=> lam(x. ?k3(x)), ?k3(?k2) =eval=> ?k4 gives eval ?k4
"""


@dataclass(frozen=True)
class InstanceInfo:
    name: str
    text: str
    description: str
    values_only: bool = False
    oracle: bool = False


_INSTANCES = {
    "cbn": InstanceInfo("cbn", CBN, "call-by-name lambda calculus"),
    "cbv": InstanceInfo("cbv", CBV, "call-by-value lambda calculus", values_only=True),
    "nondet": InstanceInfo(
        "nondet", NONDET, "lambda calculus with erratic choice", oracle=True
    ),
    "cbn-howe": InstanceInfo("cbn-howe", CBN_HOWE, "call-by-name in Howe's format"),
}

_cache: dict[str, DynamicSignature] = {}


def load_instance(name: str) -> DynamicSignature:
    if name not in _INSTANCES:
        raise KeyError(f"unknown instance {name!r}; choose from {', '.join(_INSTANCES)}")
    if name not in _cache:
        _cache[name] = parse_signature(_INSTANCES[name].text, name)
    return _cache[name]


def instance_info(name: str) -> InstanceInfo:
    return _INSTANCES[name]


def naive_cbn_howe() -> DynamicSignature:
    return parse_signature(CBN_HOWE_NAIVE, "cbn-howe-naive")


def rigid_cbn() -> DynamicSignature:
    """cbn-howe compiled to rigid rules."""
    d = load_instance("cbn-howe")
    res = rigidify(d.howe_rules, d.binding, "cbn-howe-rigid")
    return res.signature.replace(defines=d.defines)


def term(name: str, text: str, sort: str | None = None) -> Term:
    d = load_instance(name)
    if sort is None:
        sort = d.labels[0].source_sort if d.labels else "p"
    return parse_term(d, text, sort)


def catalog() -> list[tuple[str, str]]:
    out = []
    for name, info in _INSTANCES.items():
        d = load_instance(name)
        report = validate_signature(d)
        n_rules = len(d.all_rules) + len(d.howe_rules)
        summary = (
            f"{info.description}: {len(d.binding.operators)} operators, "
            f"{len(d.labels)} labels, {n_rules} rules"
            + ("" if report.ok else " (invalid)")
        )
        out.append((name, summary))
    return out


def corpus_files() -> dict[str, str]:
    """File name to printed text for every shipped signature."""
    files = {f"{n}.sig": show_signature(load_instance(n)) for n in _INSTANCES}
    files["cbn-howe-naive.sig"] = show_signature(naive_cbn_howe())
    files["cbn-howe-rigid.sig"] = show_signature(rigid_cbn())
    return files


def write_corpus(directory: str | Path) -> list[Path]:
    out = []
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    for name, text in corpus_files().items():
        p = d / name
        p.write_text(text)
        out.append(p)
    return out
