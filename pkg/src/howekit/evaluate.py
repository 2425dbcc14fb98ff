"""Bounded big-step derivation search.

Fuel is the maximum derivation height: an axiom has height 1 and a rule
with premises has height one more than its tallest premise derivation.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

from .rules import DynamicSignature, HoweRule, Label, RigidRule
from .syntax import (
    EMPTY,
    VALUE,
    BindingSignature,
    MetaApp,
    MetaVar,
    OpApp,
    StructuralError,
    Term,
    check,
    instantiate,
    substitute_top,
)


@dataclass(frozen=True)
class TransitionSet:
    targets: tuple[Term, ...]
    fuel_exhausted: bool

    def __contains__(self, t: Term) -> bool:
        return t in self.targets

    def __len__(self) -> int:
        return len(self.targets)

    def __iter__(self) -> Iterator[Term]:
        return iter(self.targets)

    @property
    def complete(self) -> bool:
        return not self.fuel_exhausted


@dataclass(frozen=True)
class Derivation:
    rule: str
    label: Label
    source: Term
    target: Term
    premises: tuple[Derivation, ...] = ()

    @property
    def height(self) -> int:
        return 1 + max((p.height for p in self.premises), default=0)

    def recheck(self, dsig: DynamicSignature) -> bool:
        """Rebuild the conclusion from the rule and the premise trees."""
        rule = next((r for r in dsig.all_rules if r.name == self.rule), None)
        if rule is None or rule.label != self.label:
            return False
        env = match_head(rule, self.source)
        if env is None or len(rule.premises) != len(self.premises):
            return False
        for prem, sub in zip(rule.premises, self.premises):
            if sub.label != prem.label or sub.source != instantiate(prem.source, env):
                return False
            if not sub.recheck(dsig):
                return False
            env[prem.fresh] = sub.target
        return instantiate(rule.target, env) == self.target

    def to_json(self, dsig: DynamicSignature | None = None) -> dict:
        from .surface import show_term

        return {
            "rule": self.rule,
            "label": self.label.name,
            "source": show_term(self.source, dsig, self.label.source_sort),
            "target": show_term(self.target, dsig, self.label.target_sort),
            "premises": [p.to_json(dsig) for p in self.premises],
        }

    def render(self, dsig: DynamicSignature | None = None, indent: int = 0) -> str:
        from .surface import show_term

        src = show_term(self.source, dsig, self.label.source_sort)
        tgt = show_term(self.target, dsig, self.label.target_sort)
        lines = [f"{'  ' * indent}{src} ={self.label.name}=> {tgt}   [{self.rule}]"]
        lines += [p.render(dsig, indent + 1) for p in self.premises]
        return "\n".join(lines)


def match_head(rule: RigidRule, t: Term) -> dict[MetaVar, Term] | None:
    src = rule.source
    if not isinstance(src, OpApp) or not isinstance(t, OpApp):
        return None
    if src.op != t.op or src.sort != t.sort:
        return None
    return dict(zip(rule.head_args, t.args))


class Evaluator:
    """An evaluation session over one dynamic signature, with memo tables."""

    def __init__(self, dsig: DynamicSignature):
        self.dsig = dsig
        self._memo: dict[tuple[Term, str, int], TransitionSet] = {}
        # (term, label) -> (least height known complete, result)
        self._complete: dict[tuple[Term, str], tuple[int, TransitionSet]] = {}
        self._deriv: dict[tuple[Term, str, int], tuple[dict[Term, Derivation], bool]] = {}

    def _check_input(self, t: Term, label: Label, fuel: int) -> None:
        if fuel < 0:
            raise ValueError("fuel must be non-negative")
        if not self.dsig.has_label(label.name) or self.dsig.label(label.name) != label:
            raise StructuralError(f"label {label.name} is not declared in this signature")
        check(self.dsig.binding, t, label.source_sort, label.source_ctx)

    def transitions(self, t: Term, label: Label | str, fuel: int) -> TransitionSet:
        if isinstance(label, str):
            label = self.dsig.label(label)
        self._check_input(t, label, fuel)
        return self._trans(t, label, fuel)

    def _trans(self, t: Term, label: Label, h: int) -> TransitionSet:
        key = (t, label.name)
        hit = self._complete.get(key)
        if hit is not None and h >= hit[0]:
            return hit[1]
        mkey = (t, label.name, h)
        got = self._memo.get(mkey)
        if got is not None:
            return got
        rules = self.dsig.rules_for(t, label)
        if not rules:
            result = TransitionSet((), False)
            self._complete[key] = (0, result)
            return result
        if h == 0:
            result = TransitionSet((), True)
            self._memo[mkey] = result
            return result
        seen: dict[Term, None] = {}
        exhausted = False
        for rule in rules:
            env = match_head(rule, t)
            assert env is not None
            envs = [env]
            for prem in rule.premises:
                step: list[dict] = []
                for e in envs:
                    res = self._trans(instantiate(prem.source, e), prem.label, h - 1)
                    exhausted |= res.fuel_exhausted
                    for u in res.targets:
                        step.append({**e, prem.fresh: u})
                envs = step
                if not envs:
                    break
            for e in envs:
                seen.setdefault(instantiate(rule.target, e), None)
        result = TransitionSet(tuple(seen), exhausted)
        if not exhausted:
            old = self._complete.get(key)
            if old is None or h < old[0]:
                self._complete[key] = (h, result)
        self._memo[mkey] = result
        return result

    def derivations(self, t: Term, label: Label | str, fuel: int) -> list[Derivation]:
        """One derivation per target, the first found in rule order."""
        if isinstance(label, str):
            label = self.dsig.label(label)
        self._check_input(t, label, fuel)
        found, _ = self._derive(t, label, fuel)
        return list(found.values())

    def _derive(self, t: Term, label: Label, h: int) -> tuple[dict[Term, Derivation], bool]:
        key = (t, label.name, h)
        got = self._deriv.get(key)
        if got is not None:
            return got
        rules = self.dsig.rules_for(t, label)
        found: dict[Term, Derivation] = {}
        exhausted = False
        if rules and h == 0:
            exhausted = True
        elif rules:
            for rule in rules:
                env = match_head(rule, t)
                assert env is not None
                branches: list[tuple[dict, tuple[Derivation, ...]]] = [(env, ())]
                for prem in rule.premises:
                    step = []
                    for e, subs in branches:
                        res, ex = self._derive(instantiate(prem.source, e), prem.label, h - 1)
                        exhausted |= ex
                        for u, d in res.items():
                            step.append(({**e, prem.fresh: u}, subs + (d,)))
                    branches = step
                for e, subs in branches:
                    u = instantiate(rule.target, e)
                    if u not in found:
                        found[u] = Derivation(rule.name, label, t, u, subs)
        self._deriv[key] = (found, exhausted)
        return found, exhausted


def transitions(dsig: DynamicSignature, t: Term, label: Label | str, fuel: int) -> TransitionSet:
    """Targets of derivations of ``t`` with height at most ``fuel``."""
    return Evaluator(dsig).transitions(t, label, fuel)


def derivation_trace(dsig: DynamicSignature, t: Term, label: Label | str, fuel: int) -> list[Derivation]:
    return Evaluator(dsig).derivations(t, label, fuel)


# ---------------------------------------------------------------------------
# Direct evaluator for Howe-format rules


class HoweEvaluator:
    """Evaluates closed programs under Howe-format rules by matching premise
    targets against value patterns, with canonical evaluation for value
    operations. Fuel counts derivation height like :class:`Evaluator`."""

    def __init__(self, sig: BindingSignature, rules: Sequence[HoweRule]):
        self.sig = sig
        self.by_head: dict[str, list[HoweRule]] = {}
        for r in rules:
            self.by_head.setdefault(r.head.name, []).append(r)
        self._memo: dict[tuple[Term, int], TransitionSet] = {}

    def evaluate(self, t: Term, fuel: int) -> TransitionSet:
        check(self.sig, t, "p", EMPTY)
        return self._eval(t, fuel)

    def _eval(self, t: Term, h: int) -> TransitionSet:
        key = (t, h)
        got = self._memo.get(key)
        if got is not None:
            return got
        if not isinstance(t, OpApp):
            return TransitionSet((), False)
        o = t.op
        if o.kind == VALUE:
            rules: list = ["canonical"]
        else:
            rules = self.by_head.get(o.name, [])
        if not rules:
            return TransitionSet((), False)
        if h == 0:
            return TransitionSet((), True)
        out: dict[Term, None] = {}
        exhausted = False
        if o.kind == VALUE:
            pools = []
            for a in t.args[: o.active]:
                res = self._eval(a, h - 1)
                exhausted |= res.fuel_exhausted
                pools.append(res.targets)
            for vals in itertools.product(*pools):
                out.setdefault(OpApp(o, "v", tuple(vals) + t.args[o.active :]), None)
        else:
            for rule in rules:
                envs: list[dict[MetaVar, Term]] = [
                    {a.meta: x for a, x in zip(rule.source.args, t.args)}  # type: ignore[union-attr]
                ]
                for source, pattern in rule.premises:
                    step = []
                    for env in envs:
                        res = self._eval(instantiate(source, env), h - 1)
                        exhausted |= res.fuel_exhausted
                        for w in res.targets:
                            bound = _match_value(pattern, w)
                            if bound is not None:
                                step.append({**env, **bound})
                    envs = step
                for env in envs:
                    out.setdefault(env[rule.tail], None)
        result = TransitionSet(tuple(out), exhausted)
        self._memo[key] = result
        return result


def _match_value(pattern: Term, w: Term) -> dict[MetaVar, Term] | None:
    if isinstance(pattern, MetaApp):
        return {pattern.meta: w}
    assert isinstance(pattern, OpApp)
    if not isinstance(w, OpApp) or w.op != pattern.op or w.sort != "v":
        return None
    return {a.meta: x for a, x in zip(pattern.args, w.args)}  # type: ignore[union-attr]


# ---------------------------------------------------------------------------
# Small-step reference semantics for erratic choice


@dataclass(frozen=True)
class Reach:
    terms: frozenset[Term]
    saturated: bool
    steps: dict


class _Erratic:
    def __init__(self, dsig: DynamicSignature, omega: Term):
        sig = dsig.binding
        try:
            self.lam, self.app, self.amb = sig.op("lam"), sig.op("app"), sig.op("amb")
        except StructuralError:
            raise StructuralError("the small-step oracle needs lam, app and amb") from None
        if len(sig.sorts) != 1 or [len(o.args) for o in (self.lam, self.app, self.amb)] != [1, 2, 1]:
            raise StructuralError("the small-step oracle needs the erratic-choice signature")
        self.omega = omega

    def step(self, t: Term) -> Iterable[Term]:
        if not isinstance(t, OpApp):
            return
        if t.op == self.amb:
            yield t.args[0]
            yield self.omega
        elif t.op == self.app:
            f, a = t.args
            if isinstance(f, OpApp) and f.op == self.lam:
                yield substitute_top(f.args[0], {("p", 1): a})
            for f2 in self.step(f):
                yield OpApp(self.app, t.sort, (f2, a))


def small_step_reach(dsig: DynamicSignature, t: Term, bound: int, omega: Term | None = None) -> Reach:
    """Terms reachable from ``t`` in at most ``bound`` reduction steps.

    ``saturated`` is true when the search ran out of new terms before the
    bound, so the set is the full reduct set.
    """
    if omega is None:
        from .surface import parse_term

        omega = parse_term(dsig, "Omega", "p")
    sem = _Erratic(dsig, omega)
    check(dsig.binding, t, "p", EMPTY)
    dist = {t: 0}
    frontier = deque([t])
    saturated = True
    while frontier:
        u = frontier.popleft()
        d = dist[u]
        for w in sem.step(u):
            if w in dist:
                continue
            if d == bound:
                saturated = False
                continue
            dist[w] = d + 1
            frontier.append(w)
    return Reach(frozenset(dist), saturated, dist)


def small_step_oracle(dsig: DynamicSignature, t: Term, bound: int) -> frozenset[Term]:
    return small_step_reach(dsig, t, bound).terms


@dataclass
class AgreementReport:
    """Comparison of the labelled rules against small-step reduction."""

    terms: int = 0
    mismatches: list[tuple[str, Term, Term]] = field(default_factory=list)
    frontier: int = 0

    @property
    def ok(self) -> bool:
        return not self.mismatches


def small_step_agreement(
    dsig: DynamicSignature, terms: Iterable[Term], fuel: int = 8, bound: int = 8
) -> AgreementReport:
    """Check ``t =tau=> u`` against ``t`` reducing to ``u`` and ``t =lam=> b``
    against ``t`` reducing to ``lam(b)``, on closed terms.

    A big-step target missing from an unsaturated reduct set, or a reduct
    missed while the big-step search ran out of fuel, lies on the frontier
    one of the two bounds does not cover and is counted, not reported.
    """
    ev = Evaluator(dsig)
    tau, lam = dsig.label("tau"), dsig.label("lam")
    lam_op = dsig.binding.op("lam")
    rep = AgreementReport()
    for t in terms:
        rep.terms += 1
        reach = small_step_reach(dsig, t, bound)
        T, L = ev.transitions(t, tau, fuel), ev.transitions(t, lam, fuel)
        lam_reducts = {u.args[0] for u in reach.terms if isinstance(u, OpApp) and u.op == lam_op}
        for kind, big, small in (("tau", T, reach.terms), ("lam", L, lam_reducts)):
            for u in big.targets:
                if u not in small:
                    if reach.saturated:
                        rep.mismatches.append((f"{kind}-unreachable", t, u))
                    else:
                        rep.frontier += 1
            for u in small:
                if u not in big.targets:
                    if big.complete:
                        rep.mismatches.append((f"{kind}-underivable", t, u))
                    else:
                        rep.frontier += 1
    return rep


__all__ = [
    "AgreementReport",
    "Derivation",
    "Evaluator",
    "HoweEvaluator",
    "Reach",
    "TransitionSet",
    "derivation_trace",
    "small_step_agreement",
    "small_step_oracle",
    "small_step_reach",
    "transitions",
]
