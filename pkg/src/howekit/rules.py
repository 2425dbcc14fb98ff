"""Labelled big-step rules, their format check, and the Howe-format compiler."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .syntax import (
    EMPTY,
    VALUE,
    BindingSignature,
    Coerce,
    Context,
    MetaApp,
    MetaVar,
    OpApp,
    Operator,
    StructuralError,
    Term,
    Var,
    check,
    instantiate,
    metavariables,
    sort_of,
)


class UndeclaredName(StructuralError):
    """A rule mentions an operator or label that the signature lacks."""


@dataclass(frozen=True)
class Label:
    name: str
    source_sort: str
    source_ctx: Context
    target_sort: str
    target_ctx: Context


@dataclass(frozen=True)
class Premise:
    """``source =label=> target``. Rigid premises have a target that is a
    fresh metavariable applied to its own parameters."""

    source: Term
    label: Label
    target: Term

    @property
    def fresh(self) -> MetaVar:
        if not isinstance(self.target, MetaApp):
            raise StructuralError("premise target is a pattern, not a fresh metavariable")
        return self.target.meta


@dataclass(frozen=True)
class RigidRule:
    """A labelled rule ``source =label=> target`` with a premise chain.

    The conclusion source should be a generic head pattern
    ``o(?k1(..), ..., ?kn(..))``; :func:`validate_rigid` checks this.
    """

    name: str
    source: Term
    premises: tuple[Premise, ...]
    label: Label
    target: Term

    @property
    def head(self) -> tuple[Operator, str]:
        if not isinstance(self.source, OpApp):
            raise StructuralError(f"rule {self.name}: conclusion source has no head operator")
        return self.source.op, self.source.sort

    @property
    def head_args(self) -> tuple[MetaVar, ...]:
        assert isinstance(self.source, OpApp)
        return tuple(a.meta for a in self.source.args)  # type: ignore[union-attr]


@dataclass(frozen=True)
class SchematicRule(RigidRule):
    """Same shape, but the conclusion source is a bare metavariable that
    stands for any constructor of the label's source sort."""

    @property
    def wildcard(self) -> MetaVar:
        if not isinstance(self.source, MetaApp):
            raise StructuralError(f"rule {self.name}: schematic position must be the conclusion source")
        return self.source.meta


@dataclass(frozen=True)
class HoweRule:
    """Evaluation rule in Howe's format. Premise targets are either a fresh
    closed value metavariable or a value-operation pattern."""

    name: str
    source: Term
    premises: tuple[tuple[Term, Term], ...]
    tail: MetaVar

    @property
    def head(self) -> Operator:
        assert isinstance(self.source, OpApp)
        return self.source.op


@dataclass(frozen=True)
class DynamicSignature:
    binding: BindingSignature
    labels: tuple[Label, ...] = ()
    rules: tuple[RigidRule, ...] = ()
    schematic: tuple[SchematicRule, ...] = ()
    howe_rules: tuple[HoweRule, ...] = ()
    defines: tuple[tuple[str, str], ...] = ()
    name: str = ""
    _dispatch: dict = field(init=False, repr=False, compare=False, hash=False)
    _expanded: tuple = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self) -> None:
        names = [lab.name for lab in self.labels]
        if len(set(names)) != len(names):
            raise StructuralError(f"duplicate label names in {names}")
        expanded: list[RigidRule] = []
        for rule in self.schematic:
            expanded.extend(expand_schematic(rule, self.binding))
        object.__setattr__(self, "_expanded", tuple(expanded))
        dispatch: dict[tuple[str, str, str], list[RigidRule]] = {}
        for rule in self.all_rules:
            if isinstance(rule.source, OpApp):
                key = (rule.source.op.name, rule.source.sort, rule.label.name)
                dispatch.setdefault(key, []).append(rule)
        object.__setattr__(self, "_dispatch", {k: tuple(v) for k, v in dispatch.items()})

    @property
    def expanded_rules(self) -> tuple[RigidRule, ...]:
        return self._expanded

    @property
    def all_rules(self) -> tuple[RigidRule, ...]:
        return self.rules + self._expanded

    def label(self, name: str) -> Label:
        for lab in self.labels:
            if lab.name == name:
                return lab
        raise UndeclaredName(f"unknown label {name!r}")

    def has_label(self, name: str) -> bool:
        return any(lab.name == name for lab in self.labels)

    def rules_for(self, t: Term, label: Label) -> tuple[RigidRule, ...]:
        if not isinstance(t, OpApp):
            return ()
        return self._dispatch.get((t.op.name, t.sort, label.name), ())

    def define(self, name: str) -> str:
        for n, text in self.defines:
            if n == name:
                return text
        raise KeyError(name)

    def state_labels(self, sort: str) -> tuple[Label, ...]:
        """Labels observable on closed states of ``sort``."""
        return tuple(lab for lab in self.labels if lab.source_sort == sort and not lab.source_ctx)

    def replace(self, **changes) -> DynamicSignature:
        fields = dict(
            binding=self.binding,
            labels=self.labels,
            rules=self.rules,
            schematic=self.schematic,
            howe_rules=self.howe_rules,
            defines=self.defines,
            name=self.name,
        )
        fields.update(changes)
        return DynamicSignature(**fields)


# ---------------------------------------------------------------------------
# Diagnostics and the rigid-format check


@dataclass(frozen=True)
class Diagnostic:
    rule: str
    clause: str
    message: str

    def __str__(self) -> str:
        return f"{self.rule}: {self.message}"


NOT_GENERIC = "conclusion source not a generic head pattern"
BARE_SOURCE = "conclusion source is a bare metavariable"
UNINTRODUCED = "premise source mentions metavariable not yet introduced"
NON_META_TARGET = "non-metavariable target pattern"
REBOUND = "fresh metavariable re-bound"
TARGET_SCOPE = "conclusion target mentions metavariable not introduced"
ILL_SORTED = "ill-sorted term"
DISPATCH = "head sort differs from label source sort"


def _is_generic_meta(t: Term, params: Context, sort: str) -> bool:
    return (
        isinstance(t, MetaApp)
        and t.meta.params == params
        and t.meta.sort == sort
        and t == t.meta.generic()
    )


def _names_declared(rule: RigidRule, dsig: DynamicSignature) -> None:
    sig = dsig.binding

    def ops(t: Term) -> Iterable[Operator]:
        match t:
            case OpApp(op=o, args=args):
                yield o
                for a in args:
                    yield from ops(a)
            case MetaApp(args=args):
                for a in args:
                    yield from ops(a)
            case Coerce(term=inner):
                yield from ops(inner)

    terms = [rule.source, rule.target]
    for p in rule.premises:
        terms += [p.source, p.target]
    for t in terms:
        for o in ops(t):
            if not sig.has_op(o.name) or sig.op(o.name) != o:
                raise UndeclaredName(f"rule {rule.name}: undeclared operator {o.name!r}")
    for lab in [rule.label] + [p.label for p in rule.premises]:
        if not dsig.has_label(lab.name) or dsig.label(lab.name) != lab:
            raise UndeclaredName(f"rule {rule.name}: undeclared label {lab.name!r}")


def validate_rigid(rule: RigidRule, dsig: DynamicSignature) -> list[Diagnostic]:
    """Empty list iff ``rule`` has the rigid (cellular) shape.

    Raises :class:`UndeclaredName` for unknown operators or labels.
    """
    _names_declared(rule, dsig)
    sig = dsig.binding
    out: list[Diagnostic] = []

    def diag(clause: str, message: str | None = None) -> None:
        out.append(Diagnostic(rule.name, clause, message or clause))

    def sorted_ok(t: Term, sort: str, ctx: Context, where: str) -> None:
        try:
            check(sig, t, sort, ctx)
        except StructuralError as exc:
            diag(ILL_SORTED, f"{where}: {exc}")

    lab = rule.label
    known: set[MetaVar] = set()
    src = rule.source
    if isinstance(src, MetaApp):
        diag(BARE_SOURCE, f"{BARE_SOURCE}; declare it as a schematic rule")
        known.add(src.meta)
    elif not isinstance(src, OpApp):
        diag(NOT_GENERIC)
        known |= metavariables(src)
    else:
        generic = True
        for a, spec in zip(src.args, src.specs()):
            if not _is_generic_meta(a, lab.source_ctx + spec.binds, spec.sort):
                generic = False
        heads = [a.meta for a in src.args if isinstance(a, MetaApp)]
        if len(set(heads)) != len(heads):
            generic = False
        if not generic:
            diag(NOT_GENERIC)
        if src.sort != lab.source_sort:
            diag(DISPATCH, f"{DISPATCH}: {src.op.name}@{src.sort} vs {lab.name} from {lab.source_sort}")
        sorted_ok(src, lab.source_sort, lab.source_ctx, "conclusion source")
        known |= metavariables(src)

    for n, p in enumerate(rule.premises, 1):
        stray = metavariables(p.source) - known
        if stray:
            names = ", ".join(sorted("?" + k.name for k in stray))
            diag(UNINTRODUCED, f"premise {n}: {UNINTRODUCED} ({names})")
        sorted_ok(p.source, p.label.source_sort, p.label.source_ctx, f"premise {n} source")
        if _is_generic_meta(p.target, p.label.target_ctx, p.label.target_sort):
            k = p.target.meta  # type: ignore[union-attr]
            if k in known or any(k.name == j.name for j in known):
                diag(REBOUND, f"premise {n}: {REBOUND} (?{k.name})")
            known.add(k)
        else:
            diag(
                NON_META_TARGET,
                f"premise {n}: {NON_META_TARGET}: premise target pattern is not a bare "
                "fresh metavariable; rigidify this rule",
            )
            known |= metavariables(p.target)

    stray = metavariables(rule.target) - known
    if stray:
        names = ", ".join(sorted("?" + k.name for k in stray))
        diag(TARGET_SCOPE, f"{TARGET_SCOPE} ({names})")
    sorted_ok(rule.target, lab.target_sort, lab.target_ctx, "conclusion target")
    return out


@dataclass
class SignatureReport:
    ok: bool
    diagnostics: list[Diagnostic]
    table: dict[tuple[str, str], int]

    def table_text(self) -> list[str]:
        return [f"({head},{lab}): {n}" for (head, lab), n in self.table.items()]


def validate_howe_rule(rule: HoweRule, sig: BindingSignature) -> list[Diagnostic]:
    out: list[Diagnostic] = []

    def diag(clause: str, message: str) -> None:
        out.append(Diagnostic(rule.name, clause, message))

    src = rule.source
    if not isinstance(src, OpApp) or src.op.kind == VALUE or src.sort != "p":
        diag(NOT_GENERIC, "head must be a program operation applied to metavariables")
        return out
    known: set[MetaVar] = set()
    for a, spec in zip(src.args, src.specs()):
        if not _is_generic_meta(a, spec.binds, spec.sort):
            diag(NOT_GENERIC, NOT_GENERIC)
        known |= metavariables(a)
    for n, (source, target) in enumerate(rule.premises, 1):
        stray = metavariables(source) - known
        if stray:
            diag(UNINTRODUCED, f"premise {n}: {UNINTRODUCED}")
        try:
            check(sig, source, "p", EMPTY)
        except StructuralError as exc:
            diag(ILL_SORTED, f"premise {n} source: {exc}")
        fresh = _howe_pattern_metas(target, sig)
        if fresh is None:
            diag(NON_META_TARGET, f"premise {n}: target must be a value metavariable or a value-operation pattern")
            continue
        if any(k in known for k in fresh):
            diag(REBOUND, f"premise {n}: {REBOUND}")
        known |= set(fresh)
    if rule.tail not in known or rule.tail.sort != "v" or rule.tail.params:
        diag(TARGET_SCOPE, "tail must be a closed value metavariable introduced by a premise")
    return out


def _howe_pattern_metas(target: Term, sig: BindingSignature) -> tuple[MetaVar, ...] | None:
    """Fresh metavariables bound by a Howe premise target, or None if the
    target has neither allowed form."""
    if isinstance(target, MetaApp):
        k = target.meta
        if k.sort == "v" and not k.params and not target.args:
            return (k,)
        return None
    if isinstance(target, OpApp) and target.op.kind == VALUE and target.sort == "v":
        metas = []
        for a, spec in zip(target.args, target.specs()):
            if not _is_generic_meta(a, spec.binds, spec.sort):
                return None
            metas.append(a.meta)  # type: ignore[union-attr]
        if len(set(metas)) != len(metas):
            return None
        return tuple(metas)
    return None


def validate_signature(dsig: DynamicSignature) -> SignatureReport:
    """Check every rule's shape and tabulate rules per (head, label)."""
    diags: list[Diagnostic] = []
    counts = Counter(r.name for r in dsig.all_rules)
    dup = sorted(n for n, c in counts.items() if c > 1)
    if dup:
        raise StructuralError(f"duplicate rule names: {', '.join(dup)}")
    table: dict[tuple[str, str], int] = {}
    for rule in dsig.all_rules:
        diags.extend(validate_rigid(rule, dsig))
        if isinstance(rule.source, OpApp):
            head = rule.source.op.name
            if rule.source.op.kind == VALUE:
                head = f"{head}@{rule.source.sort}"
            key = (head, rule.label.name)
            table[key] = table.get(key, 0) + 1
    for hr in dsig.howe_rules:
        diags.extend(validate_howe_rule(hr, dsig.binding))
    return SignatureReport(not diags, diags, table)


# ---------------------------------------------------------------------------
# Schematic expansion


def _fresh_name(base: str, taken: set[str]) -> str:
    if base not in taken:
        return base
    n = 1
    while f"{base}{n}" in taken:
        n += 1
    return f"{base}{n}"


def _rule_metas(rule: RigidRule) -> set[MetaVar]:
    terms = [rule.source, rule.target] + [t for p in rule.premises for t in (p.source, p.target)]
    return {k for t in terms for k in metavariables(t)}


def _rule_metanames(rule: RigidRule) -> set[str]:
    return {k.name for k in _rule_metas(rule)}


def generic_head(o: Operator, sort: str, ctx: Context, names: Sequence[str]) -> OpApp:
    specs = o.arg_specs(sort)
    args = tuple(MetaVar(n, ctx + sp.binds, sp.sort).generic() for n, sp in zip(names, specs))
    return OpApp(o, sort, args)


def expand_schematic(rule: SchematicRule, sig: BindingSignature) -> list[RigidRule]:
    """One rigid rule per constructor of the wildcard's sort."""
    if not isinstance(rule.source, MetaApp) or rule.source != rule.source.meta.generic():
        raise StructuralError(
            f"rule {rule.name}: only a bare conclusion source may be schematic"
        )
    wild = rule.source.meta
    lab = rule.label
    taken = _rule_metanames(rule)
    out: list[RigidRule] = []
    for o, ann in sig.constructors(lab.source_sort):
        names: list[str] = []
        for i in range(len(o.arg_specs(ann))):
            n = _fresh_name(f"{wild.name}{i + 1}", taken | set(names))
            names.append(n)
        head = generic_head(o, ann, lab.source_ctx, names)
        env: dict[MetaVar, Term] = {k: k.generic() for k in _rule_metas(rule)}
        env[wild] = head
        premises = tuple(
            Premise(instantiate(p.source, env), p.label, instantiate(p.target, env))
            for p in rule.premises
        )
        suffix = o.name if ann == o.result_sort else f"{o.name}_{ann}"
        out.append(
            RigidRule(f"{rule.name}_{suffix}", head, premises, lab, instantiate(rule.target, env))
        )
    return out


# ---------------------------------------------------------------------------
# Howe format: labels, canonical rules, rigidification


EVAL = "eval"


def pos_label_name(o: Operator, i: int) -> str:
    return f"pos_{o.name}_{i}"


def neg_label_name(o: Operator, j: int) -> str:
    return f"neg_{o.name}_{j}"


def howe_labels(sig: BindingSignature) -> tuple[Label, ...]:
    """Evaluation plus one observation per active and passive argument."""
    labels = [Label(EVAL, "p", EMPTY, "v", EMPTY)]
    for o in sig.operators:
        if o.kind != VALUE:
            continue
        for i in range(1, o.active + 1):
            labels.append(Label(pos_label_name(o, i), "v", EMPTY, "v", EMPTY))
        for j, spec in enumerate(o.args[o.active :], 1):
            labels.append(Label(neg_label_name(o, j), "v", EMPTY, "p", spec.binds))
    return tuple(labels)


def canonical_rules(sig: BindingSignature, labels: Sequence[Label] | None = None) -> list[RigidRule]:
    """Evaluation of value operations to values, plus the projections
    observing each argument of a value."""
    by_name = {lab.name: lab for lab in (labels or howe_labels(sig))}
    ev = by_name[EVAL]
    out: list[RigidRule] = []
    for o in sig.operators:
        if o.kind != VALUE:
            continue
        act = [f"k{i}" for i in range(1, o.active + 1)]
        pas = [f"f{j}" for j in range(1, o.passive + 1)]
        head_p = generic_head(o, "p", EMPTY, act + pas)
        vals = [MetaVar(f"w{i}", EMPTY, "v") for i in range(1, o.active + 1)]
        premises = tuple(
            Premise(head_p.args[i], ev, vals[i].generic()) for i in range(o.active)
        )
        target = OpApp(o, "v", tuple(v.generic() for v in vals) + head_p.args[o.active :])
        out.append(RigidRule(f"{o.name}_{EVAL}", head_p, premises, ev, target))
        head_v = generic_head(o, "v", EMPTY, act + pas)
        for i in range(1, o.active + 1):
            lab = by_name[pos_label_name(o, i)]
            out.append(RigidRule(lab.name, head_v, (), lab, head_v.args[i - 1]))
        for j in range(1, o.passive + 1):
            lab = by_name[neg_label_name(o, j)]
            out.append(RigidRule(lab.name, head_v, (), lab, head_v.args[o.active + j - 1]))
    return out


@dataclass
class RigidifyResult:
    signature: DynamicSignature
    mapping: dict[str, list[str]]
    warnings: list[str]

    def mapping_json(self) -> dict:
        return {"rules": self.mapping, "warnings": self.warnings}


def rigidify(howe_rules: Sequence[HoweRule], sig: BindingSignature, name: str = "") -> RigidifyResult:
    """Compile Howe-format rules to rigid rules over the observation labels.

    A premise ``e ==> o(a1..; b1..)`` becomes ``e =eval=> ?k`` followed by
    ``?k =pos_o_i=> ?ai`` for each active and ``?k =neg_o_j=> ?bj`` for each
    passive argument, in that order.
    """
    diags = [d for r in howe_rules for d in validate_howe_rule(r, sig)]
    if diags:
        raise StructuralError("; ".join(map(str, diags)))
    labels = howe_labels(sig)
    by_name = {lab.name: lab for lab in labels}
    ev = by_name[EVAL]
    rules: list[RigidRule] = []
    mapping: dict[str, list[str]] = {}
    warnings: list[str] = []
    for hr in howe_rules:
        taken = {k.name for t in [hr.source, *[x for p in hr.premises for x in p]] for k in metavariables(t)}
        premises: list[Premise] = []
        for source, target in hr.premises:
            if isinstance(target, MetaApp):
                premises.append(Premise(source, ev, target))
                continue
            assert isinstance(target, OpApp)
            o = target.op
            k = MetaVar(_fresh_name("w", taken), EMPTY, "v")
            taken.add(k.name)
            premises.append(Premise(source, ev, k.generic()))
            for i, a in enumerate(target.args[: o.active], 1):
                premises.append(Premise(k.generic(), by_name[pos_label_name(o, i)], a))
            for j, a in enumerate(target.args[o.active :], 1):
                premises.append(Premise(k.generic(), by_name[neg_label_name(o, j)], a))
            if not target.args:
                warnings.append(
                    f"{hr.name}: pattern {o.name} has no arguments; its head is not "
                    "observable after rigidification"
                )
        rules.append(RigidRule(hr.name, hr.source, tuple(premises), ev, hr.tail.generic()))
        mapping[hr.name] = [hr.name]
    canon = canonical_rules(sig, labels)
    mapping["(canonical)"] = [r.name for r in canon]
    dsig = DynamicSignature(sig, labels, tuple(canon) + tuple(rules), name=name)
    return RigidifyResult(dsig, mapping, warnings)
