"""Bounded, pool-instantiated bisimulation checks.

Bisimilarity is only semi-decidable, so every check here is cut off by a
depth (how many transition rounds are matched), a fuel (derivation height
for each transition set) and a substitution pool (the finite stand-in for
"all closing substitutions"). Answers are three-valued.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

from .evaluate import Evaluator, HoweEvaluator, TransitionSet
from .rules import DynamicSignature, HoweRule, Label
from .syntax import (
    EMPTY,
    VALUE,
    BindingSignature,
    Context,
    OpApp,
    StructuralError,
    Substitution,
    Term,
    coerce_to,
    enumerate_terms,
    sort_of,
    substitute,
)

HOLDS, FAILS, INCONCLUSIVE = "holds", "fails", "inconclusive"


# ---------------------------------------------------------------------------
# Substitution pools


@dataclass
class SubstPool:
    """Closed terms used to fill the free variables of transition targets,
    per variable sort."""

    slots: dict[str, tuple[Term, ...]]
    max_size: int
    values_only: bool
    extras: tuple[Term, ...] = ()

    @classmethod
    def build(
        cls,
        sig: BindingSignature | DynamicSignature,
        max_size: int = 5,
        values_only: bool = False,
        extras: Iterable[Term] = (),
    ) -> SubstPool:
        """With ``values_only`` a slot takes closed terms of the least sorts
        below it (coerced up); otherwise it takes closed terms of the
        greatest sort above it, which for a value slot is the naive
        program-for-value substitution."""
        if isinstance(sig, DynamicSignature):
            sig = sig.binding
        table = sig.sort_table
        extras = tuple(extras)
        slots: dict[str, tuple[Term, ...]] = {}
        for s in sig.sorts:
            if values_only:
                bottoms = [m for m in (s,) + table.subsorts(s) if not table.subsorts(m)]
                terms = [coerce_to(t, s) for m in bottoms for t in enumerate_terms(sig, m, EMPTY, max_size)]
                extra = [coerce_to(t, s) for t in extras if sort_of(t) in bottoms]
            else:
                tops = [m for m in (s,) + table.supersorts(s) if not table.supersorts(m)]
                terms = [t for m in tops for t in enumerate_terms(sig, m, EMPTY, max_size)]
                extra = [t for t in extras if sort_of(t) in tops or sort_of(t) == s]
            seen = dict.fromkeys(terms + extra)
            slots[s] = tuple(seen)
        return cls(slots, max_size, values_only, extras)

    def closings(self, ctx: Context) -> Iterator[Substitution]:
        variables = ctx.variables()
        choices = [self.slots.get(s, ()) for s, _ in variables]
        for combo in itertools.product(*choices):
            yield Substitution(ctx, dict(zip(variables, combo)), EMPTY)

    def count(self, ctx: Context) -> int:
        n = 1
        for s, _ in ctx.variables():
            n *= len(self.slots.get(s, ()))
        return n

    def describe(self) -> dict:
        return {
            "max_size": self.max_size,
            "values_only": self.values_only,
            "sizes": {s: len(ts) for s, ts in self.slots.items()},
            "extras": [str(t) for t in self.extras],
        }


# ---------------------------------------------------------------------------
# Verdicts


@dataclass(frozen=True)
class Witness:
    """Why ``left`` and ``right`` are not (known to be) related: the
    transition ``source =label=> target`` on ``side`` has no partner among
    ``candidates`` on the other side. Each candidate carries the closing
    that separated it and the nested reason."""

    left: Term
    right: Term
    depth: int
    label: Label
    side: str
    target: Term
    candidates: tuple[tuple[Term, Substitution | None, Verdict | None], ...]
    partner_exhausted: bool

    def to_json(self, dsig: DynamicSignature | None = None) -> dict:
        from .surface import show_term

        def sub(s: Substitution | None):
            if s is None:
                return None
            return {f"{sort}{i}": show_term(t, dsig, sort) for (sort, i), t in s.items()}

        lab = self.label
        return {
            "left": show_term(self.left, dsig, lab.source_sort),
            "right": show_term(self.right, dsig, lab.source_sort),
            "depth": self.depth,
            "label": lab.name,
            "side": self.side,
            "target": show_term(self.target, dsig, lab.target_sort),
            "partner_exhausted": self.partner_exhausted,
            "candidates": [
                {
                    "candidate": show_term(c, dsig, lab.target_sort),
                    "closing": sub(s),
                    "reason": v.to_json(dsig) if v is not None else None,
                }
                for c, s, v in self.candidates
            ],
        }

    def closings(self) -> Iterator[Substitution]:
        """All closings mentioned anywhere in the witness tree."""
        for _, s, v in self.candidates:
            if s is not None:
                yield s
            if v is not None and v.witness is not None:
                yield from v.witness.closings()


@dataclass(frozen=True)
class Verdict:
    status: str
    witness: Witness | None = None

    @property
    def holds(self) -> bool:
        return self.status == HOLDS

    @property
    def fails(self) -> bool:
        return self.status == FAILS

    @property
    def inconclusive(self) -> bool:
        return self.status == INCONCLUSIVE

    def to_json(self, dsig: DynamicSignature | None = None) -> dict:
        out: dict = {"status": self.status}
        if self.witness is not None:
            out["witness"] = self.witness.to_json(dsig)
        return out


_HOLDS = Verdict(HOLDS)


# ---------------------------------------------------------------------------
# Relations


class Relation:
    """Finite relation indexed by (sort, context)."""

    def __init__(self) -> None:
        self._data: dict[tuple[str, Context], set[tuple[Term, Term]]] = {}

    @classmethod
    def of(cls, pairs: Iterable[tuple[Term, Term]], sort: str | None = None, ctx: Context = EMPTY) -> Relation:
        r = cls()
        for a, b in pairs:
            r.add(a, b, sort, ctx)
        return r

    def add(self, a: Term, b: Term, sort: str | None = None, ctx: Context = EMPTY) -> bool:
        if sort_of(a) != sort_of(b):
            raise StructuralError("related terms must share a sort")
        s = sort or sort_of(a)
        bucket = self._data.setdefault((s, ctx), set())
        if (a, b) in bucket:
            return False
        bucket.add((a, b))
        return True

    def discard(self, a: Term, b: Term, sort: str | None = None, ctx: Context = EMPTY) -> None:
        self._data.get((sort or sort_of(a), ctx), set()).discard((a, b))

    def contains(self, a: Term, b: Term, sort: str | None = None, ctx: Context = EMPTY) -> bool:
        return (a, b) in self._data.get((sort or sort_of(a), ctx), ())

    def __contains__(self, pair: tuple[Term, Term]) -> bool:
        return self.contains(*pair)

    def pairs(self, sort: str, ctx: Context = EMPTY) -> set[tuple[Term, Term]]:
        return self._data.get((sort, ctx), set())

    def indices(self) -> list[tuple[str, Context]]:
        return [k for k, v in self._data.items() if v]

    def __iter__(self) -> Iterator[tuple[str, Context, Term, Term]]:
        for (s, c), bucket in self._data.items():
            for a, b in bucket:
                yield s, c, a, b

    def __len__(self) -> int:
        return sum(len(v) for v in self._data.values())

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Relation):
            return NotImplemented
        keys = set(self.indices()) | set(other.indices())
        return all(self.pairs(*k) == other.pairs(*k) for k in keys)

    def __le__(self, other: Relation) -> bool:
        return all(self.pairs(*k) <= other.pairs(*k) for k in self.indices())

    def copy(self) -> Relation:
        r = Relation()
        r._data = {k: set(v) for k, v in self._data.items()}
        return r

    def __repr__(self) -> str:
        return f"Relation({len(self)} pairs in {len(self.indices())} buckets)"


# ---------------------------------------------------------------------------
# Bounded bisimilarity, recursive route


class BisimChecker:
    """Session for bounded bisimilarity with shared evaluation and memo."""

    def __init__(self, dsig: DynamicSignature, fuel: int, pool: SubstPool):
        self.dsig = dsig
        self.fuel = fuel
        self.pool = pool
        self.ev = Evaluator(dsig)
        self._memo: dict[tuple[Term, Term, int], Verdict] = {}
        self._sig_ids: dict[tuple, int] = {}
        self._sigs: dict[tuple[Term, int], int] = {}
        self._closings: dict[Context, list[Substitution]] = {}

    def closings(self, ctx: Context) -> list[Substitution]:
        got = self._closings.get(ctx)
        if got is None:
            got = list(self.pool.closings(ctx))
            self._closings[ctx] = got
        return got

    def steps(self, t: Term, label: Label) -> TransitionSet:
        return self.ev._trans(t, label, self.fuel)

    def check(self, t1: Term, t2: Term, depth: int) -> Verdict:
        s1, s2 = sort_of(t1), sort_of(t2)
        if s1 != s2:
            raise StructuralError(f"cannot compare terms of sorts {s1} and {s2}")
        if not (t1.closed and t2.closed):
            raise StructuralError("bounded bisimilarity compares closed terms")
        return self._check(t1, t2, depth)

    def _check(self, t1: Term, t2: Term, depth: int) -> Verdict:
        if depth <= 0 or t1 == t2:
            return _HOLDS
        key = (t1, t2, depth)
        got = self._memo.get(key)
        if got is not None:
            return got
        result = _HOLDS
        for label in self.dsig.state_labels(sort_of(t1)):
            T1, T2 = self.steps(t1, label), self.steps(t2, label)
            for side, A, B in (("left", T1, T2), ("right", T2, T1)):
                for u in A.targets:
                    v = self._match(t1, t2, depth, label, side, u, B)
                    if v.fails:
                        self._memo[key] = v
                        return v
                    if v.inconclusive and result.holds:
                        result = v
        self._memo[key] = result
        return result

    def _match(self, t1, t2, depth, label, side, u, B: TransitionSet) -> Verdict:
        cands = []
        any_open = B.fuel_exhausted
        for u2 in B.targets:
            worst: tuple[Substitution | None, Verdict | None] = (None, None)
            for sigma in self.closings(label.target_ctx):
                a, b = substitute(u, sigma), substitute(u2, sigma)
                if side == "right":
                    a, b = b, a
                v = self._check(a, b, depth - 1)
                if not v.holds:
                    if worst[1] is None or (v.fails and not worst[1].fails):
                        worst = (sigma, v)
                    if v.fails:
                        break
            if worst[1] is None:
                return _HOLDS
            if worst[1].inconclusive:
                any_open = True
            cands.append((u2, worst[0], worst[1]))
        w = Witness(t1, t2, depth, label, side, u, tuple(cands), B.fuel_exhausted)
        return Verdict(INCONCLUSIVE if any_open else FAILS, w)

    # -- fast route: depth-indexed signatures ------------------------------

    def signature(self, t: Term, depth: int) -> int:
        """An id such that equal ids at ``depth`` mean bounded bisimilarity
        holds. Only defined for holds versus not-holds; it does not
        separate fails from inconclusive."""
        if depth <= 0:
            return 0
        key = (t, depth)
        got = self._sigs.get(key)
        if got is not None:
            return got
        parts = []
        for label in self.dsig.state_labels(sort_of(t)):
            T = self.steps(t, label)
            vecs = frozenset(
                tuple(self.signature(substitute(u, s), depth - 1) for s in self.closings(label.target_ctx))
                for u in T.targets
            )
            parts.append((label.name, vecs))
        shape = (sort_of(t), depth, tuple(parts))
        sid = self._sig_ids.setdefault(shape, len(self._sig_ids) + 1)
        self._sigs[key] = sid
        return sid

    def open_signature(self, t: Term, ctx: Context, depth: int) -> tuple[int, ...]:
        return tuple(self.signature(substitute(t, s), depth) for s in self.closings(ctx))


def bounded_bisim(
    dsig: DynamicSignature,
    t1: Term,
    t2: Term,
    depth: int,
    fuel: int,
    pool: SubstPool,
    checker: BisimChecker | None = None,
) -> Verdict:
    """Three-valued bounded bisimilarity of two closed terms."""
    if depth < 0 or fuel < 0:
        raise ValueError("depth and fuel must be non-negative")
    c = checker or BisimChecker(dsig, fuel, pool)
    return c.check(t1, t2, depth)


def replay(checker: BisimChecker, verdict: Verdict) -> bool:
    """Re-derive a failure witness from scratch: the transition exists,
    the partner side is complete, every partner candidate is listed and
    each is separated by its recorded closing."""
    if verdict.holds:
        return True
    w = verdict.witness
    if w is None:
        return False
    fresh = Evaluator(checker.dsig)
    src, other = (w.left, w.right) if w.side == "left" else (w.right, w.left)
    A = fresh.transitions(src, w.label, checker.fuel)
    B = fresh.transitions(other, w.label, checker.fuel)
    if w.target not in A.targets:
        return False
    if verdict.fails and B.fuel_exhausted:
        return False
    if set(B.targets) != {c for c, _, _ in w.candidates}:
        return False
    for cand, sigma, sub in w.candidates:
        if sigma is None or sub is None:
            return False
        a, b = substitute(w.target, sigma), substitute(cand, sigma)
        if w.side == "right":
            a, b = b, a
        if sub.witness is None or (sub.witness.left, sub.witness.right) != (a, b):
            return False
        if not replay(checker, sub):
            return False
        again = BisimChecker(checker.dsig, checker.fuel, checker.pool).check(a, b, w.depth - 1)
        if again.status != sub.status:
            return False
    return True


# ---------------------------------------------------------------------------
# Candidate relations


@dataclass
class RelationReport:
    pairs_checked: int
    violations: list[dict] = field(default_factory=list)
    inconclusive: list[dict] = field(default_factory=list)

    @property
    def is_bisimulation(self) -> bool:
        return not self.violations and not self.inconclusive

    @property
    def status(self) -> str:
        if self.violations:
            return FAILS
        if self.inconclusive:
            return INCONCLUSIVE
        return HOLDS

    def to_json(self) -> dict:
        return {
            "status": self.status,
            "pairs_checked": self.pairs_checked,
            "violations": self.violations,
            "inconclusive": self.inconclusive,
        }


def check_relation(
    dsig: DynamicSignature,
    R: Relation | Iterable[tuple[Term, Term]],
    fuel: int,
    pool: SubstPool,
    symmetric: bool = True,
) -> RelationReport:
    """Is ``R`` (up to identity pairs) a bisimulation on closed terms?

    Every transition of a left component must be matched by one of the
    right component whose pool-instantiated targets are again related;
    with ``symmetric`` the same is required from right to left.
    """
    if not isinstance(R, Relation):
        R = Relation.of(R)
    from .surface import show_term

    ev = Evaluator(dsig)
    report = RelationReport(0)

    def related(a: Term, b: Term, sort: str) -> bool:
        return a == b or R.contains(a, b, sort, EMPTY)  # type: ignore[union-attr]

    for sort, ctx, a, b in R:
        if ctx:
            raise StructuralError("check_relation expects closed terms")
        report.pairs_checked += 1
        for label in dsig.state_labels(sort):
            Ta = ev.transitions(a, label, fuel)
            Tb = ev.transitions(b, label, fuel)
            sides = [("left", Ta, Tb)] + ([("right", Tb, Ta)] if symmetric else [])
            for side, A, B in sides:
                for u in A.targets:
                    ok = False
                    bad = []
                    for u2 in B.targets:
                        miss = None
                        for sigma in pool.closings(label.target_ctx):
                            x, y = substitute(u, sigma), substitute(u2, sigma)
                            if side == "right":
                                x, y = y, x
                            if not related(x, y, label.target_sort):
                                miss = sigma
                                break
                        if miss is None:
                            ok = True
                            break
                        bad.append(
                            {
                                "candidate": show_term(u2, dsig, label.target_sort),
                                "closing": {f"{s}{i}": show_term(t, dsig, s) for (s, i), t in miss.items()},
                            }
                        )
                    if ok:
                        continue
                    entry = {
                        "left": show_term(a, dsig, sort),
                        "right": show_term(b, dsig, sort),
                        "label": label.name,
                        "side": side,
                        "target": show_term(u, dsig, label.target_sort),
                        "candidates": bad,
                    }
                    (report.inconclusive if B.fuel_exhausted else report.violations).append(entry)
    return report


def open_extension_check(
    dsig: DynamicSignature,
    R_closed: Relation | None,
    e1: Term,
    e2: Term,
    ctx: Context,
    pool: SubstPool,
    depth: int = 3,
    fuel: int = 8,
    checker: BisimChecker | None = None,
) -> Verdict:
    """Relate two open terms by relating all their pool closings, either by
    membership in ``R_closed`` or, when it is None, by bounded bisimilarity."""
    if sort_of(e1) != sort_of(e2):
        raise StructuralError("open terms of different sorts")
    c = checker or BisimChecker(dsig, fuel, pool)
    result = _HOLDS
    for sigma in pool.closings(ctx):
        a, b = substitute(e1, sigma), substitute(e2, sigma)
        if R_closed is not None:
            v = _HOLDS if a == b or R_closed.contains(a, b) else Verdict(FAILS)
        else:
            v = c.check(a, b, depth)
        if not v.holds:
            lab = Label("closing", sort_of(e1), ctx, sort_of(e1), EMPTY)
            w = Witness(e1, e2, depth, lab, "left", a, ((b, sigma, v),), False)
            v = Verdict(v.status, w)
            if v.fails:
                return v
            if result.holds:
                result = v
    return result


def stratified_bisimilarity(
    dsig: DynamicSignature,
    terms: Sequence[Term],
    depth: int,
    fuel: int,
    pool: SubstPool,
    checker: BisimChecker | None = None,
) -> Relation:
    """All pairs of ``terms`` (closed, one sort) on which bounded
    bisimilarity holds, computed by grouping equal signatures."""
    c = checker or BisimChecker(dsig, fuel, pool)
    groups: dict[tuple[str, int], list[Term]] = {}
    for t in terms:
        groups.setdefault((sort_of(t), c.signature(t, depth)), []).append(t)
    R = Relation()
    for (sort, _), members in groups.items():
        for a in members:
            for b in members:
                R.add(a, b, sort)
    return R


# ---------------------------------------------------------------------------
# Applicative bisimilarity for Howe-format rules


class HoweBisim:
    """Applicative bisimilarity read directly off Howe-format rules:
    programs are related when their values are, and two values are related
    when they have the same head value operation, related active arguments,
    and passive arguments related under every pool closing.

    Depth counts like the labelled check on the rigidified signature: one
    unit from programs to values and one from values to their arguments.
    """

    def __init__(self, sig: BindingSignature, rules: Sequence[HoweRule], fuel: int, pool: SubstPool):
        self.sig = sig
        self.fuel = fuel
        self.pool = pool
        self.ev = HoweEvaluator(sig, rules)
        self._memo: dict[tuple[Term, Term, int], str] = {}

    def check(self, t1: Term, t2: Term, depth: int) -> str:
        if depth <= 0 or t1 == t2:
            return HOLDS
        key = (t1, t2, depth)
        if key in self._memo:
            return self._memo[key]
        if sort_of(t1) == "p":
            res = self._programs(t1, t2, depth)
        else:
            res = self._values(t1, t2, depth)
        self._memo[key] = res
        return res

    def _programs(self, t1: Term, t2: Term, depth: int) -> str:
        T1, T2 = self.ev._eval(t1, self.fuel), self.ev._eval(t2, self.fuel)
        out = HOLDS
        for A, B, flip in ((T1, T2, False), (T2, T1, True)):
            for w in A.targets:
                best = FAILS
                for w2 in B.targets:
                    r = self.check(w2, w, depth - 1) if flip else self.check(w, w2, depth - 1)
                    if r == HOLDS:
                        best = HOLDS
                        break
                    if r == INCONCLUSIVE:
                        best = INCONCLUSIVE
                if best == FAILS and B.fuel_exhausted:
                    best = INCONCLUSIVE
                if best == FAILS:
                    return FAILS
                if best == INCONCLUSIVE:
                    out = INCONCLUSIVE
        return out

    def _values(self, w1: Term, w2: Term, depth: int) -> str:
        assert isinstance(w1, OpApp) and isinstance(w2, OpApp)
        if w1.op != w2.op:
            return FAILS
        o = w1.op
        assert o.kind == VALUE
        out = HOLDS
        for a, b, spec in zip(w1.args, w2.args, w1.specs()):
            for sigma in self.pool.closings(spec.binds):
                r = self.check(substitute(a, sigma), substitute(b, sigma), depth - 1)
                if r == FAILS:
                    return FAILS
                if r == INCONCLUSIVE:
                    out = INCONCLUSIVE
        return out


__all__ = [
    "FAILS",
    "HOLDS",
    "INCONCLUSIVE",
    "BisimChecker",
    "HoweBisim",
    "Relation",
    "RelationReport",
    "SubstPool",
    "Verdict",
    "Witness",
    "bounded_bisim",
    "check_relation",
    "open_extension_check",
    "replay",
    "stratified_bisimilarity",
]
