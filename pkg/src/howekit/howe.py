"""Howe closure over a finite term universe, and the property sweeps that
go with it: composition, congruence, substitution, symmetry of the
transitive closure, simulation, and a sampled congruence test for
bounded bisimilarity."""

from __future__ import annotations

import itertools
import random
import time
from dataclasses import dataclass, field
from typing import Sequence

from .bisim import BisimChecker, Relation, SubstPool
from .rules import DynamicSignature
from .syntax import (
    EMPTY,
    BindingSignature,
    Coerce,
    Context,
    MetaApp,
    OpApp,
    Term,
    Var,
    enumerate_terms,
    sort_of,
    substitute,
    substitute_top,
    subterms,
)

Index = tuple[str, Context]


# ---------------------------------------------------------------------------
# Universes


def _contexts(sorts: Sequence[str], bound: int) -> list[Context]:
    return [Context.of(dict(zip(sorts, counts))) for counts in itertools.product(range(bound + 1), repeat=len(sorts))]


def _children(t: Term) -> list[tuple[Term, str, Context]]:
    """Immediate subterms with their sort and the binders above them."""
    out = []
    match t:
        case OpApp():
            for a, spec in zip(t.args, t.specs()):
                out.append((a, spec.sort, spec.binds))
        case Coerce(term=inner):
            out.append((inner, sort_of(inner), EMPTY))
        case MetaApp():
            raise TypeError("universes hold object terms only")
    return out


def _head(t: Term) -> tuple:
    match t:
        case OpApp(op=o, sort=s):
            return ("op", o.name, s)
        case Coerce(term=inner, sort=s):
            return ("coerce", sort_of(inner), s)
        case Var(sort=s, index=i):
            return ("var", s, i)
    raise TypeError(f"unexpected term {t!r}")


@dataclass
class Universe:
    """Finite, subterm-closed sets of terms per (sort, context)."""

    buckets: dict[Index, tuple[Term, ...]]
    max_size: int
    ctx_bound: int

    @classmethod
    def build(
        cls,
        sig: BindingSignature | DynamicSignature,
        max_size: int = 5,
        ctx_bound: int = 2,
        sorts: Sequence[str] | None = None,
    ) -> Universe:
        """All terms up to ``max_size`` in every context with at most
        ``ctx_bound`` variables per sort, closed under subterms."""
        if isinstance(sig, DynamicSignature):
            sig = sig.binding
        sorts = list(sorts or sig.sorts)
        found: dict[Index, dict[Term, None]] = {}
        todo: list[tuple[Term, Index]] = []
        for ctx in _contexts(sig.sorts, ctx_bound):
            for s in sorts:
                for t in enumerate_terms(sig, s, ctx, max_size):
                    todo.append((t, (s, ctx)))
        while todo:
            t, idx = todo.pop()
            bucket = found.setdefault(idx, {})
            if t in bucket:
                continue
            bucket[t] = None
            for a, s, binds in _children(t):
                todo.append((a, (s, idx[1] + binds)))
        ordered = {
            idx: tuple(sorted(ts, key=lambda t: (t.size, repr(t))))
            for idx, ts in sorted(found.items(), key=lambda kv: (kv[0][0], kv[0][1].counts))
        }
        return cls(ordered, max_size, ctx_bound)

    def __contains__(self, item: tuple[Term, str, Context]) -> bool:
        t, s, c = item
        return t in self._sets().get((s, c), ())

    def _sets(self) -> dict[Index, frozenset[Term]]:
        cached = self.__dict__.get("_set_cache")
        if cached is None:
            cached = {k: frozenset(v) for k, v in self.buckets.items()}
            self.__dict__["_set_cache"] = cached
        return cached

    def has(self, t: Term, sort: str, ctx: Context) -> bool:
        return t in self._sets().get((sort, ctx), ())

    def size(self) -> int:
        return sum(len(v) for v in self.buckets.values())

    def indices(self) -> list[Index]:
        return list(self.buckets)

    def diagonal(self) -> Relation:
        R = Relation()
        for (s, c), ts in self.buckets.items():
            for t in ts:
                R.add(t, t, s, c)
        return R


# ---------------------------------------------------------------------------
# Base relations


class BaseOracle:
    """A relation on the open terms of a universe."""

    name = "custom"

    def related(self, a: Term, b: Term, sort: str, ctx: Context) -> bool:
        raise NotImplementedError

    def successors(self, U: Universe) -> dict[Index, dict[Term, tuple[Term, ...]]]:
        out: dict[Index, dict[Term, tuple[Term, ...]]] = {}
        for (s, c), ts in U.buckets.items():
            out[(s, c)] = {a: tuple(b for b in ts if self.related(a, b, s, c)) for a in ts}
        return out


class SyntacticOracle(BaseOracle):
    name = "syntactic"

    def related(self, a, b, sort, ctx) -> bool:
        return a == b

    def successors(self, U):
        return {idx: {t: (t,) for t in ts} for idx, ts in U.buckets.items()}


class RelationOracle(BaseOracle):
    name = "relation"

    def __init__(self, R: Relation, reflexive: bool = False):
        self.R = R
        self.reflexive = reflexive

    def related(self, a, b, sort, ctx) -> bool:
        return (self.reflexive and a == b) or self.R.contains(a, b, sort, ctx)


class BisimOracle(BaseOracle):
    """Open extension of bounded bisimilarity: two open terms are related
    when all their pool closings are bounded-bisimilar."""

    name = "bisim"

    def __init__(self, dsig: DynamicSignature, depth: int, fuel: int, pool: SubstPool):
        self.dsig = dsig
        self.depth = depth
        self.checker = BisimChecker(dsig, fuel, pool)

    def key(self, t: Term, ctx: Context) -> tuple[int, ...]:
        return self.checker.open_signature(t, ctx, self.depth)

    def related(self, a, b, sort, ctx) -> bool:
        return self.key(a, ctx) == self.key(b, ctx)

    def successors(self, U):
        out = {}
        for (s, c), ts in U.buckets.items():
            if s not in {lab.source_sort for lab in self.dsig.labels} and not self._observable(s):
                # no transitions observe this sort: every pair is related
                out[(s, c)] = {t: ts for t in ts}
                continue
            groups: dict[tuple, list[Term]] = {}
            for t in ts:
                groups.setdefault(self.key(t, c), []).append(t)
            out[(s, c)] = {t: tuple(groups[self.key(t, c)]) for t in ts}
        return out

    def _observable(self, sort: str) -> bool:
        table = self.dsig.binding.sort_table
        states = {lab.source_sort for lab in self.dsig.labels}
        return any(table.can_coerce(sort, s) for s in states)


def materialise(succ: dict[Index, dict[Term, tuple[Term, ...]]]) -> Relation:
    R = Relation()
    for (s, c), m in succ.items():
        for a, bs in m.items():
            for b in bs:
                R.add(a, b, s, c)
    return R


# ---------------------------------------------------------------------------
# Howe closure


@dataclass
class HoweResult:
    relation: Relation
    iterations: int
    sizes: list[int]
    base: Relation
    base_succ: dict[Index, dict[Term, tuple[Term, ...]]] = field(repr=False)
    universe: Universe = field(repr=False)
    seconds: float = 0.0

    def to_json(self) -> dict:
        return {
            "iterations": self.iterations,
            "sizes": self.sizes,
            "size": len(self.relation),
            "base_size": len(self.base),
            "universe_size": self.universe.size(),
            "seconds": round(self.seconds, 3),
        }


def _by_head(U: Universe) -> dict[Index, dict[tuple, list[Term]]]:
    out: dict[Index, dict[tuple, list[Term]]] = {}
    for idx, ts in U.buckets.items():
        groups: dict[tuple, list[Term]] = {}
        for t in ts:
            groups.setdefault(_head(t), []).append(t)
        out[idx] = groups
    return out


def howe_step(
    H: Relation,
    U: Universe,
    base_succ: dict[Index, dict[Term, tuple[Term, ...]]],
    heads: dict[Index, dict[tuple, list[Term]]] | None = None,
) -> Relation:
    """One application of the generating rules: ``x H e`` when ``x B e``,
    and ``o(e1..en) H e`` when some ``o(e1'..en')`` in the universe has
    ``ei H ei'`` argument-wise and ``o(e1'..en') B e``."""
    heads = heads or _by_head(U)
    out = Relation()
    for (s, c), ts in U.buckets.items():
        succ = base_succ[(s, c)]
        for e in ts:
            if isinstance(e, Var):
                for e2 in succ[e]:
                    out.add(e, e2, s, c)
                continue
            kids = _children(e)
            for t in heads[(s, c)][_head(e)]:
                ok = all(
                    H.contains(a, b, ks, c + binds)
                    for (a, ks, binds), (b, _, _) in zip(kids, _children(t))
                )
                if ok:
                    for e2 in succ[t]:
                        out.add(e, e2, s, c)
    return out


def howe_closure(
    dsig: DynamicSignature | None, U: Universe, B: BaseOracle, max_iterations: int = 1000
) -> HoweResult:
    """Least fixpoint of :func:`howe_step` inside ``U``, by saturation."""
    start = time.perf_counter()
    succ = B.successors(U)
    heads = _by_head(U)
    H = Relation()
    sizes = []
    for n in range(1, max_iterations + 1):
        nxt = howe_step(H, U, succ, heads)
        sizes.append(len(nxt))
        if nxt == H:
            return HoweResult(H, n, sizes, materialise(succ), succ, U, time.perf_counter() - start)
        H = nxt
    raise RuntimeError("Howe closure did not converge")


# ---------------------------------------------------------------------------
# Exact checks on the finite universe


@dataclass
class CheckReport:
    name: str
    checked: int = 0
    violations: list = field(default_factory=list)
    inconclusive: int = 0
    skipped: int = 0
    notes: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_json(self, limit: int = 20) -> dict:
        return {
            "check": self.name,
            "ok": self.ok,
            "checked": self.checked,
            "violations": len(self.violations),
            "examples": [[str(x) for x in v] for v in self.violations[:limit]],
            "inconclusive": self.inconclusive,
            "skipped": self.skipped,
            **self.notes,
        }


def reflexivity_check(H: Relation, U: Universe) -> CheckReport:
    rep = CheckReport("reflexivity")
    for (s, c), ts in U.buckets.items():
        for t in ts:
            rep.checked += 1
            if not H.contains(t, t, s, c):
                rep.violations.append((s, c, t))
    return rep


def containment_check(inner: Relation, outer: Relation, name: str = "containment") -> CheckReport:
    rep = CheckReport(name)
    for s, c, a, b in inner:
        rep.checked += 1
        if not outer.contains(a, b, s, c):
            rep.violations.append((s, c, a, b))
    return rep


def composition_check(H: Relation, B: Relation) -> CheckReport:
    """``H ; B`` is contained in ``H``."""
    rep = CheckReport("composition")
    succ: dict[Index, dict[Term, list[Term]]] = {}
    for s, c, a, b in B:
        succ.setdefault((s, c), {}).setdefault(a, []).append(b)
    for s, c, a, b in H:
        for d in succ.get((s, c), {}).get(b, ()):
            rep.checked += 1
            if not H.contains(a, d, s, c):
                rep.violations.append((s, c, a, b, d))
    return rep


def congruence_check(H: Relation, U: Universe) -> CheckReport:
    """Same-head terms with argument-wise related arguments are related."""
    rep = CheckReport("operator-congruence")
    for (s, c), groups in _by_head(U).items():
        for head, ts in groups.items():
            if head[0] == "var":
                continue
            for a in ts:
                ka = _children(a)
                for b in ts:
                    kb = _children(b)
                    if all(H.contains(x, y, ks, c + binds) for (x, ks, binds), (y, _, _) in zip(ka, kb)):
                        rep.checked += 1
                        if not H.contains(a, b, s, c):
                            rep.violations.append((s, c, a, b))
    return rep


def fixpoint_check(result: HoweResult) -> CheckReport:
    rep = CheckReport("fixpoint")
    again = howe_step(result.relation, result.universe, result.base_succ)
    rep.checked = len(again)
    if again != result.relation:
        for s, c, a, b in again:
            if not result.relation.contains(a, b, s, c):
                rep.violations.append((s, c, a, b))
    return rep


def hetero_substitution_check(
    H: Relation, U: Universe, samples: int = 100, seed: int = 0, max_draws: int | None = None
) -> CheckReport:
    """Sample ``e1 H e1'`` over a context with a variable ``x`` and
    ``e2 H e2'`` without it, and check ``e1[x:=e2] H e1'[x:=e2']`` when
    both sides stay inside the universe."""
    rng = random.Random(seed)
    rep = CheckReport("hetero-substitution")
    options = []
    for s, c in H.indices():
        for xs in c.sorts():
            smaller = Context(tuple((k, n - (k == xs)) for k, n in c.counts))
            if H.pairs(xs, smaller):
                options.append(((s, c), xs, smaller))
    options.sort(key=lambda o: (o[0][0], o[0][1].counts, o[1]))
    if not options:
        return rep
    pools = {o[0]: sorted(H.pairs(*o[0]), key=repr) for o in options}
    inner = {(o[1], o[2]): sorted(H.pairs(o[1], o[2]), key=repr) for o in options}
    draws = 0
    limit = max_draws or samples * 50
    while rep.checked < samples and draws < limit:
        draws += 1
        (s, c), xs, smaller = rng.choice(options)
        e1, e1p = rng.choice(pools[(s, c)])
        e2, e2p = rng.choice(inner[(xs, smaller)])
        left = substitute_top(e1, {(xs, 1): e2})
        right = substitute_top(e1p, {(xs, 1): e2p})
        if not (U.has(left, s, smaller) and U.has(right, s, smaller)):
            rep.skipped += 1
            continue
        rep.checked += 1
        if not H.contains(left, right, s, smaller):
            rep.violations.append((s, smaller, e1, e1p, e2, e2p))
    return rep


# ---------------------------------------------------------------------------
# Transitive closures and symmetry


def _successor_map(R: Relation) -> dict[Index, dict[Term, set[Term]]]:
    out: dict[Index, dict[Term, set[Term]]] = {}
    for s, c, a, b in R:
        out.setdefault((s, c), {}).setdefault(a, set()).add(b)
    return out


def transitive_closure(R: Relation) -> Relation:
    """Reachability by depth-first search from every element."""
    out = Relation()
    for (s, c), succ in _successor_map(R).items():
        for a in succ:
            seen: set[Term] = set()
            stack = list(succ[a])
            while stack:
                b = stack.pop()
                if b in seen:
                    continue
                seen.add(b)
                stack.extend(succ.get(b, ()))
            for b in seen:
                out.add(a, b, s, c)
    return out


def compose(R: Relation, S: Relation) -> Relation:
    out = Relation()
    succ = _successor_map(S)
    for s, c, a, b in R:
        for d in succ.get((s, c), {}).get(b, ()):
            out.add(a, d, s, c)
    return out


def relational_transitive_closure(R: Relation) -> Relation:
    """Union of the iterated composites R, R;R, R;R;R, ... until no new
    pair appears."""
    total = R.copy()
    power = R.copy()
    while True:
        power = compose(power, R)
        grew = False
        for s, c, a, b in power:
            grew |= total.add(a, b, s, c)
        if not grew:
            return total


def symmetry_check(R: Relation) -> CheckReport:
    rep = CheckReport("symmetry")
    for s, c, a, b in R:
        rep.checked += 1
        if not R.contains(b, a, s, c):
            rep.violations.append((s, c, b, a))
    return rep


# ---------------------------------------------------------------------------
# Simulation


def simulation_check(
    dsig: DynamicSignature,
    H: Relation,
    fuel: int,
    pool: SubstPool,
    U: Universe | None = None,
) -> CheckReport:
    """Every transition of the left side of a closed pair in ``H`` is
    matched on the right with pool-instantiated targets again in ``H``.

    Target pairs that leave the universe cannot be judged; a transition
    whose candidates are all unjudgeable or beyond the fuel counts as
    inconclusive, and only a transition whose candidates are all definitely
    unrelated (with complete partner set) is a violation.
    """
    checker = BisimChecker(dsig, fuel, pool)
    rep = CheckReport("simulation")
    unknown_pairs = 0
    for s, c, a, b in H:
        if c:
            continue
        for label in dsig.state_labels(s):
            A, B = checker.steps(a, label), checker.steps(b, label)
            closings = checker.closings(label.target_ctx)
            for u in A.targets:
                rep.checked += 1
                status = "bad"
                for u2 in B.targets:
                    cand = "ok"
                    for sigma in closings:
                        x, y = substitute(u, sigma), substitute(u2, sigma)
                        if x == y or H.contains(x, y, label.target_sort, EMPTY):
                            continue
                        if U is not None and U.has(x, label.target_sort, EMPTY) and U.has(y, label.target_sort, EMPTY):
                            cand = "bad"
                            break
                        cand = "unknown"
                        unknown_pairs += 1
                    if cand == "ok":
                        status = "ok"
                        break
                    if cand == "unknown":
                        status = "unknown"
                if status == "bad" and B.fuel_exhausted:
                    status = "unknown"
                if status == "bad":
                    rep.violations.append((s, a, b, label.name, u))
                elif status == "unknown":
                    rep.inconclusive += 1
    rep.notes["unjudged_target_pairs"] = unknown_pairs
    return rep


# ---------------------------------------------------------------------------
# Congruence sweep


def positions(t: Term, sort: str) -> list[tuple[int, ...]]:
    """Paths to the subterms of ``t`` that have ``sort``."""
    out = []

    def walk(u: Term, path: tuple[int, ...]) -> None:
        if sort_of(u) == sort:
            out.append(path)
        for i, (a, _) in enumerate(subterms(u)):
            walk(a, path + (i,))

    walk(t, ())
    return out


def plug(t: Term, path: Sequence[int], filler: Term) -> Term:
    """Replace the subterm at ``path`` by the closed term ``filler``."""
    if not path:
        return filler
    i, rest = path[0], path[1:]
    match t:
        case OpApp(op=o, sort=s, args=args):
            new = list(args)
            new[i] = plug(args[i], rest, filler)
            return OpApp(o, s, tuple(new))
        case Coerce(term=inner, sort=s):
            return Coerce(plug(inner, rest, filler), s)
    raise ValueError(f"no position {tuple(path)}")


@dataclass
class SweepReport:
    samples: int = 0
    holds: int = 0
    counterexamples: list[dict] = field(default_factory=list)
    inconclusive: int = 0
    related_pairs: int = 0
    params: dict = field(default_factory=dict)
    seconds: float = 0.0

    def to_json(self) -> dict:
        return {
            "params": self.params,
            "samples": self.samples,
            "related_pairs_available": self.related_pairs,
            "holds": self.holds,
            "inconclusive": self.inconclusive,
            "counterexamples": self.counterexamples,
            "seconds": round(self.seconds, 3),
        }


def congruence_sweep(
    dsig: DynamicSignature,
    depth: int = 3,
    fuel: int = 8,
    pool: SubstPool | None = None,
    n_samples: int = 200,
    seed: int = 0,
    depth_after: int | None = None,
    term_size: int = 5,
    context_size: int = 5,
    sort: str | None = None,
) -> SweepReport:
    """Plug pairs related at ``depth`` into random one-hole contexts and
    check the results at ``depth_after`` (default ``depth``)."""
    from .surface import show_term

    start = time.perf_counter()
    if sort is None:
        sort = dsig.labels[0].source_sort
    if pool is None:
        pool = SubstPool.build(dsig)
    after = depth if depth_after is None else depth_after
    checker = BisimChecker(dsig, fuel, pool)
    terms = enumerate_terms(dsig.binding, sort, EMPTY, term_size)
    classes: dict[int, list[Term]] = {}
    for t in terms:
        classes.setdefault(checker.signature(t, depth), []).append(t)
    pairs = [(a, b) for cls in classes.values() for a in cls for b in cls if a != b]
    contexts = enumerate_terms(dsig.binding, sort, EMPTY, context_size)
    holes = [(c, p) for c in contexts for p in positions(c, sort)]
    rep = SweepReport(
        related_pairs=len(pairs),
        params={
            "depth": depth,
            "depth_after": after,
            "fuel": fuel,
            "pool": pool.describe(),
            "samples": n_samples,
            "seed": seed,
            "term_size": term_size,
            "context_size": context_size,
        },
    )
    if not pairs:
        rep.seconds = time.perf_counter() - start
        return rep
    rng = random.Random(seed)
    for _ in range(n_samples):
        t1, t2 = rng.choice(pairs)
        c, path = rng.choice(holes)
        a, b = plug(c, path, t1), plug(c, path, t2)
        v = checker.check(a, b, after)
        rep.samples += 1
        if v.holds:
            rep.holds += 1
        elif v.inconclusive:
            rep.inconclusive += 1
        else:
            rep.counterexamples.append(
                {
                    "t1": show_term(t1, dsig, sort),
                    "t2": show_term(t2, dsig, sort),
                    "context": show_term(c, dsig, sort),
                    "hole": list(path),
                    "witness": v.to_json(dsig),
                }
            )
    rep.seconds = time.perf_counter() - start
    return rep


def default_howe_suite(
    dsig: DynamicSignature,
    size: int = 5,
    ctx_bound: int = 2,
    depth: int = 3,
    fuel: int = 8,
    pool_size: int = 3,
    sim_pool_size: int = 4,
    values_only: bool = False,
    checks: str = "all",
    samples: int = 100,
    seed: int = 0,
) -> dict:
    """Run the closure and its checks; returns a JSON-ready report."""
    pool = SubstPool.build(dsig, pool_size, values_only)
    sorts = sorted({lab.source_sort for lab in dsig.labels}) or None
    U = Universe.build(dsig, size, ctx_bound, sorts)
    B = BisimOracle(dsig, depth, fuel, pool)
    res = howe_closure(dsig, U, B)
    H = res.relation
    reports = [
        reflexivity_check(H, U),
        containment_check(res.base, H, "base-contained"),
        composition_check(H, res.base),
        congruence_check(H, U),
        fixpoint_check(res),
    ]
    if checks == "all":
        closure = relational_transitive_closure(H)
        rep = symmetry_check(closure)
        rep.notes["agrees_with_transitive_closure"] = closure == transitive_closure(H)
        reports.append(rep)
        reports.append(hetero_substitution_check(H, U, samples, seed))
        reports.append(simulation_check(dsig, H, fuel, SubstPool.build(dsig, sim_pool_size, values_only), U))
    return {
        "closure": res.to_json(),
        "params": {
            "size": size,
            "ctx_bound": ctx_bound,
            "depth": depth,
            "fuel": fuel,
            "pool": pool.describe(),
            "checks": checks,
            "seed": seed,
        },
        "checks": [r.to_json() for r in reports],
    }


__all__ = [
    "BaseOracle",
    "BisimOracle",
    "CheckReport",
    "HoweResult",
    "RelationOracle",
    "SweepReport",
    "SyntacticOracle",
    "Universe",
    "composition_check",
    "congruence_check",
    "congruence_sweep",
    "containment_check",
    "default_howe_suite",
    "fixpoint_check",
    "hetero_substitution_check",
    "howe_closure",
    "howe_step",
    "materialise",
    "plug",
    "positions",
    "reflexivity_check",
    "relational_transitive_closure",
    "simulation_check",
    "symmetry_check",
    "transitive_closure",
]

