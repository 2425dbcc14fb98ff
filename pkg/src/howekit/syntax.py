"""Multi-sorted scoped terms over a binding signature.

Variables are per-sort de Bruijn indices, 1-based, with index 1 the most
recently bound variable of that sort. Closed terms are therefore invariant
under weakening, which the evaluator relies on heavily.

Metavariables are applied to an explicit argument list, one argument per
parameter variable, listed outermost-first within each sort and sorts in
alphabetical order (see :meth:`Context.variables`).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Iterator, Mapping


class StructuralError(Exception):
    """Raised on sort, context or arity mismatches."""


# ---------------------------------------------------------------------------
# Sorts and contexts


@dataclass(frozen=True)
class SortTable:
    sorts: tuple[str, ...]
    coercions: frozenset[tuple[str, str]] = frozenset()

    def __post_init__(self) -> None:
        if len(set(self.sorts)) != len(self.sorts):
            raise StructuralError(f"duplicate sort in {self.sorts}")
        for sub, sup in self.coercions:
            if sub not in self.sorts or sup not in self.sorts:
                raise StructuralError(f"coercion {sub} -> {sup} uses an undeclared sort")
            if sub == sup:
                raise StructuralError(f"reflexive coercion {sub} -> {sup}")
        # every sort must be below itself only through the reflexive case
        for s in self.sorts:
            if s in self._above(s):
                raise StructuralError(f"coercion cycle through sort {s}")

    def _above(self, sort: str) -> frozenset[str]:
        seen: set[str] = set()
        todo = [sup for sub, sup in self.coercions if sub == sort]
        while todo:
            s = todo.pop()
            if s not in seen:
                seen.add(s)
                todo.extend(sup for sub, sup in self.coercions if sub == s)
        return frozenset(seen)

    def can_coerce(self, sub: str, sup: str) -> bool:
        return sup in self._above(sub)

    def supersorts(self, sort: str) -> tuple[str, ...]:
        above = self._above(sort)
        return tuple(s for s in self.sorts if s in above)

    def subsorts(self, sort: str) -> tuple[str, ...]:
        return tuple(s for s in self.sorts if sort in self._above(s))


@dataclass(frozen=True)
class Context:
    """Number of free variables per sort. Zero entries are dropped."""

    counts: tuple[tuple[str, int], ...] = ()

    def __post_init__(self) -> None:
        norm = tuple(sorted((s, n) for s, n in self.counts if n))
        if any(n < 0 for _, n in norm):
            raise StructuralError(f"negative variable count in {self.counts}")
        object.__setattr__(self, "counts", norm)

    @classmethod
    def of(cls, mapping: Mapping[str, int] | None = None, **kw: int) -> Context:
        items = dict(mapping or {})
        items.update(kw)
        return cls(tuple(items.items()))

    def __getitem__(self, sort: str) -> int:
        for s, n in self.counts:
            if s == sort:
                return n
        return 0

    def __add__(self, other: Context) -> Context:
        merged = dict(self.counts)
        for s, n in other.counts:
            merged[s] = merged.get(s, 0) + n
        return Context(tuple(merged.items()))

    def extend(self, sort: str, k: int) -> Context:
        return self + Context(((sort, k),))

    def __le__(self, other: Context) -> bool:
        return all(n <= other[s] for s, n in self.counts)

    def __len__(self) -> int:
        return sum(n for _, n in self.counts)

    def __bool__(self) -> bool:
        return bool(self.counts)

    def sorts(self) -> tuple[str, ...]:
        return tuple(s for s, _ in self.counts)

    def variables(self) -> list[tuple[str, int]]:
        """Variables in canonical order: sorts alphabetically, outermost first."""
        return [(s, i) for s, n in self.counts for i in range(n, 0, -1)]

    def __str__(self) -> str:
        if not self.counts:
            return "0"
        return " + ".join(f"{n} {s}" for s, n in self.counts)


EMPTY = Context()


# ---------------------------------------------------------------------------
# Signatures


@dataclass(frozen=True)
class ArgSpec:
    sort: str
    binds: Context = EMPTY


PLAIN, VALUE, PROGRAM = "plain", "value", "program"


@dataclass(frozen=True)
class Operator:
    """An operator. Value operators carry ``active`` leading arguments whose
    sort follows the annotation at the use site; the remaining (passive)
    arguments are listed in ``args`` with their own sorts and binders."""

    name: str
    result_sort: str
    args: tuple[ArgSpec, ...] = ()
    kind: str = PLAIN
    active: int = 0

    def __post_init__(self) -> None:
        if self.kind not in (PLAIN, VALUE, PROGRAM):
            raise StructuralError(f"unknown operator kind {self.kind!r}")
        if self.kind != VALUE and self.active:
            raise StructuralError(f"{self.name}: only value operators have active arguments")
        for spec in self.args[: self.active]:
            if spec.binds:
                raise StructuralError(f"{self.name}: active arguments cannot bind variables")

    @property
    def passive(self) -> int:
        return len(self.args) - self.active

    @property
    def passive_depths(self) -> tuple[int, ...]:
        return tuple(len(a.binds) for a in self.args[self.active :])

    def arg_specs(self, annotation: str) -> tuple[ArgSpec, ...]:
        if self.kind != VALUE or not self.active:
            return self.args
        lead = tuple(ArgSpec(annotation) for _ in range(self.active))
        return lead + self.args[self.active :]

    def __repr__(self) -> str:
        return f"Operator({self.name})"


@dataclass(frozen=True)
class BindingSignature:
    sort_table: SortTable
    binding_sort: str
    operators: tuple[Operator, ...]

    def __post_init__(self) -> None:
        if self.binding_sort not in self.sort_table.sorts:
            raise StructuralError(f"binding sort {self.binding_sort} is not declared")
        names = [o.name for o in self.operators]
        if len(set(names)) != len(names):
            raise StructuralError(f"duplicate operator names in {names}")
        for o in self.operators:
            for spec in o.args:
                if spec.sort not in self.sort_table.sorts:
                    raise StructuralError(f"{o.name}: argument sort {spec.sort} undeclared")
                for s in spec.binds.sorts():
                    if s not in self.sort_table.sorts:
                        raise StructuralError(f"{o.name}: binds undeclared sort {s}")

    @property
    def sorts(self) -> tuple[str, ...]:
        return self.sort_table.sorts

    def op(self, name: str) -> Operator:
        for o in self.operators:
            if o.name == name:
                return o
        raise StructuralError(f"unknown operator {name!r}")

    def has_op(self, name: str) -> bool:
        return any(o.name == name for o in self.operators)

    def annotations(self, o: Operator) -> tuple[str, ...]:
        """Result sorts at which ``o`` may be applied."""
        if o.kind == VALUE:
            return (o.result_sort,) + self.sort_table.supersorts(o.result_sort)
        return (o.result_sort,)

    def constructors(self, sort: str) -> list[tuple[Operator, str]]:
        return [(o, sort) for o in self.operators if sort in self.annotations(o)]

    def single_sorted(self) -> bool:
        return len(self.sorts) == 1


# ---------------------------------------------------------------------------
# Terms


@dataclass(frozen=True)
class MetaVar:
    name: str
    params: Context = EMPTY
    sort: str = "p"

    def generic(self) -> MetaApp:
        """``k`` applied to its own parameters."""
        return MetaApp(self, tuple(Var(s, i) for s, i in self.params.variables()))

    def __str__(self) -> str:
        return f"?{self.name}"


def _fv_merge(parts: Iterable[tuple[tuple[str, int], ...]]) -> tuple[tuple[str, int], ...]:
    out: dict[str, int] = {}
    for part in parts:
        for s, n in part:
            if n > out.get(s, 0):
                out[s] = n
    return tuple(sorted(out.items()))


def _fv_unbind(fv: tuple[tuple[str, int], ...], binds: Context) -> tuple[tuple[str, int], ...]:
    if not binds:
        return fv
    return tuple((s, n - binds[s]) for s, n in fv if n - binds[s] > 0)


class Term:
    """Base class. ``fv`` records, per sort, the largest free de Bruijn index."""

    __slots__ = ()
    fv: tuple[tuple[str, int], ...]
    size: int

    @property
    def closed(self) -> bool:
        return not self.fv

    def __str__(self) -> str:
        from .surface import show_term

        return show_term(self)


@dataclass(frozen=True, eq=True)
class Var(Term):
    sort: str
    index: int
    fv: tuple = field(init=False, repr=False, compare=False)
    size: int = field(init=False, repr=False, compare=False)
    _hash: int = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if self.index < 1:
            raise StructuralError(f"variable index must be >= 1, got {self.index}")
        object.__setattr__(self, "fv", ((self.sort, self.index),))
        object.__setattr__(self, "size", 1)
        object.__setattr__(self, "_hash", hash(("V", self.sort, self.index)))

    def __hash__(self) -> int:
        return self._hash


@dataclass(frozen=True, eq=True)
class MetaApp(Term):
    meta: MetaVar
    args: tuple[Term, ...] = ()
    fv: tuple = field(init=False, repr=False, compare=False)
    size: int = field(init=False, repr=False, compare=False)
    _hash: int = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "fv", _fv_merge(a.fv for a in self.args))
        object.__setattr__(self, "size", 1 + sum(a.size for a in self.args))
        object.__setattr__(self, "_hash", hash(("M", self.meta, self.args)))

    def __hash__(self) -> int:
        return self._hash


@dataclass(frozen=True, eq=True)
class OpApp(Term):
    op: Operator
    sort: str
    args: tuple[Term, ...] = ()
    fv: tuple = field(init=False, repr=False, compare=False)
    size: int = field(init=False, repr=False, compare=False)
    _hash: int = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        specs = self.op.arg_specs(self.sort)
        if len(specs) != len(self.args):
            raise StructuralError(
                f"{self.op.name} expects {len(specs)} arguments, got {len(self.args)}"
            )
        object.__setattr__(
            self, "fv", _fv_merge(_fv_unbind(a.fv, sp.binds) for a, sp in zip(self.args, specs))
        )
        object.__setattr__(self, "size", 1 + sum(a.size for a in self.args))
        object.__setattr__(self, "_hash", hash(("O", self.op.name, self.sort, self.args)))

    def __hash__(self) -> int:
        return self._hash

    @property
    def name(self) -> str:
        return self.op.name

    def specs(self) -> tuple[ArgSpec, ...]:
        return self.op.arg_specs(self.sort)


@dataclass(frozen=True, eq=True)
class Coerce(Term):
    term: Term
    sort: str
    fv: tuple = field(init=False, repr=False, compare=False)
    size: int = field(init=False, repr=False, compare=False)
    _hash: int = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if isinstance(self.term, Coerce):
            raise StructuralError("nested coercion; use coerce_to to normalise")
        if isinstance(self.term, OpApp) and self.term.op.kind == VALUE:
            raise StructuralError("coercion of a value operation must flip its annotation")
        object.__setattr__(self, "fv", self.term.fv)
        object.__setattr__(self, "size", 1 + self.term.size)
        object.__setattr__(self, "_hash", hash(("C", self.term, self.sort)))

    def __hash__(self) -> int:
        return self._hash


def sort_of(t: Term) -> str:
    match t:
        case Var(sort=s) | OpApp(sort=s) | Coerce(sort=s):
            return s
        case MetaApp(meta=k):
            return k.sort
    raise TypeError(f"not a term: {t!r}")


def metavariables(t: Term) -> set[MetaVar]:
    out: set[MetaVar] = set()

    def walk(u: Term) -> None:
        match u:
            case MetaApp(meta=k, args=args):
                out.add(k)
                for a in args:
                    walk(a)
            case OpApp(args=args):
                for a in args:
                    walk(a)
            case Coerce(term=inner):
                walk(inner)

    walk(t)
    return out


def subterms(t: Term) -> Iterator[tuple[Term, Context]]:
    """Immediate subterms with the binders they sit under."""
    match t:
        case OpApp(args=args):
            for a, spec in zip(args, t.specs()):
                yield a, spec.binds
        case MetaApp(args=args):
            for a in args:
                yield a, EMPTY
        case Coerce(term=inner):
            yield inner, EMPTY


# ---------------------------------------------------------------------------
# Coercion


def coerce_to(t: Term, sort: str) -> Term:
    """Normalising coercion: value operations flip their annotation,
    other terms are wrapped once. No declaration check (see :func:`coerce`)."""
    if sort_of(t) == sort:
        return t
    match t:
        case OpApp(op=o, args=args) if o.kind == VALUE:
            return OpApp(o, sort, args)
        case Coerce(term=inner):
            return coerce_to(inner, sort)
    return Coerce(t, sort)


def coerce(t: Term, table: SortTable, sort: str = "p") -> Term:
    src = sort_of(t)
    if src != sort and not table.can_coerce(src, sort):
        raise StructuralError(f"no coercion declared from {src} to {sort}")
    return coerce_to(t, sort)


# ---------------------------------------------------------------------------
# Substitution, shifting, renaming


@dataclass(frozen=True)
class Substitution:
    """Maps every variable ``(sort, index)`` of ``source`` to a term.

    An assignment may have a strict supersort of its slot (e.g. a program
    for a value variable); it is then only legal at coerced occurrences.
    That is the naive program substitution, kept for discrimination tests.
    """

    source: Context
    assignments: Mapping[tuple[str, int], Term] = field(hash=False)
    target: Context | None = None

    def __post_init__(self) -> None:
        missing = [v for v in self.source.variables() if v not in self.assignments]
        if missing:
            raise StructuralError(f"substitution not total: missing {missing}")

    @classmethod
    def identity(cls, ctx: Context) -> Substitution:
        return cls(ctx, {v: Var(*v) for v in ctx.variables()}, ctx)

    @classmethod
    def closing(cls, ctx: Context, values: Mapping[tuple[str, int], Term]) -> Substitution:
        return cls(ctx, dict(values), EMPTY)

    def __getitem__(self, key: tuple[str, int]) -> Term:
        return self.assignments[key]

    def then(self, other: Substitution) -> Substitution:
        """``self[other]``: apply ``self`` first, then ``other``."""
        return Substitution(
            self.source,
            {v: substitute(t, other) for v, t in self.assignments.items()},
            other.target,
        )

    def items(self) -> list[tuple[tuple[str, int], Term]]:
        return [(v, self.assignments[v]) for v in self.source.variables()]


def shift(t: Term, by: Context, cutoff: Context = EMPTY) -> Term:
    """Weaken ``t`` by ``by`` fresh innermost variables per sort."""
    if not t.fv or not by:
        return t
    if all(n <= cutoff[s] for s, n in t.fv):
        return t
    match t:
        case Var(sort=s, index=i):
            return Var(s, i + by[s]) if i > cutoff[s] else t
        case OpApp(op=o, sort=s, args=args):
            return OpApp(
                o, s, tuple(shift(a, by, cutoff + sp.binds) for a, sp in zip(args, t.specs()))
            )
        case MetaApp(meta=k, args=args):
            return MetaApp(k, tuple(shift(a, by, cutoff) for a in args))
        case Coerce(term=inner, sort=s):
            return Coerce(shift(inner, by, cutoff), s)
    raise TypeError(f"not a term: {t!r}")


def _lift(assign: Mapping[tuple[str, int], Term], binds: Context) -> dict[tuple[str, int], Term]:
    """The substitution under a binder: fresh variables map to themselves,
    the rest are weakened."""
    out: dict[tuple[str, int], Term] = {}
    for (s, i), u in assign.items():
        out[(s, i + binds[s])] = shift(u, binds)
    for s, n in binds.counts:
        for j in range(1, n + 1):
            out[(s, j)] = Var(s, j)
    return out


def _subst(t: Term, assign: Mapping[tuple[str, int], Term]) -> Term:
    match t:
        case Var(sort=s, index=i):
            try:
                return assign[(s, i)]
            except KeyError:
                raise StructuralError(f"substitution undefined on variable {s}{i}") from None
        case OpApp(op=o, sort=s, args=args):
            new = []
            for a, sp in zip(args, t.specs()):
                if not a.fv:
                    new.append(a)
                elif sp.binds:
                    new.append(_subst(a, _lift(assign, sp.binds)))
                else:
                    new.append(_subst(a, assign))
            return OpApp(o, s, tuple(new))
        case MetaApp(meta=k, args=args):
            return MetaApp(k, tuple(a if not a.fv else _subst(a, assign) for a in args))
        case Coerce(term=inner, sort=s):
            image = _subst(inner, assign)
            return coerce_to(image, s)
    raise TypeError(f"not a term: {t!r}")


def _check_slot_sorts(t: Term, assign: Mapping[tuple[str, int], Term]) -> None:
    # a supersorted image may only replace coerced occurrences
    loose = {v for v, u in assign.items() if sort_of(u) != v[0]}
    if not loose:
        return

    def walk(u: Term, depth: Context) -> None:
        match u:
            case Var(sort=s, index=i):
                if i > depth[s] and (s, i - depth[s]) in loose:
                    raise StructuralError(
                        f"variable {s}{i - depth[s]} occurs at its own sort but is "
                        f"assigned a term of sort {sort_of(assign[(s, i - depth[s])])}"
                    )
            case Coerce(term=Var()):
                return
            case _:
                for a, b in subterms(u):
                    walk(a, depth + b)

    walk(t, EMPTY)


def substitute(t: Term, sigma: Substitution) -> Term:
    """Capture-avoiding simultaneous substitution."""
    _check_slot_sorts(t, sigma.assignments)
    if not t.fv:
        return t
    return _subst(t, sigma.assignments)


def substitute_top(t: Term, images: Mapping[tuple[str, int], Term]) -> Term:
    """Substitute for some free variables, keeping the others (renumbered
    below the removed ones). ``images`` live in the outer context."""
    if not t.fv:
        return t
    assign: dict[tuple[str, int], Term] = {}
    for s, n in t.fv:
        removed = sorted(i for (ss, i) in images if ss == s)
        for i in range(1, n + 1):
            if (s, i) in images:
                assign[(s, i)] = images[(s, i)]
            else:
                below = sum(1 for r in removed if r < i)
                assign[(s, i)] = Var(s, i - below)
    _check_slot_sorts(t, assign)
    return _subst(t, assign)


def rename(t: Term, rho: Mapping[tuple[str, int], int]) -> Term:
    """Rename free variables: ``(sort, i)`` becomes ``(sort, rho[(sort, i)])``."""

    def go(u: Term, depth: Context) -> Term:
        if all(n <= depth[s] for s, n in u.fv):
            return u
        match u:
            case Var(sort=s, index=i):
                if i <= depth[s]:
                    return u
                try:
                    return Var(s, rho[(s, i - depth[s])] + depth[s])
                except KeyError:
                    raise StructuralError(f"renaming undefined on variable {s}{i - depth[s]}") from None
            case OpApp(op=o, sort=s, args=args):
                return OpApp(o, s, tuple(go(a, depth + sp.binds) for a, sp in zip(args, u.specs())))
            case MetaApp(meta=k, args=args):
                return MetaApp(k, tuple(go(a, depth) for a in args))
            case Coerce(term=inner, sort=s):
                return Coerce(go(inner, depth), s)
        raise TypeError(f"not a term: {u!r}")

    return go(t, EMPTY)


# ---------------------------------------------------------------------------
# Metavariable instantiation


class MissingMetavariable(StructuralError):
    def __init__(self, meta: MetaVar):
        super().__init__(f"no instantiation for metavariable ?{meta.name}")
        self.meta = meta


MetaEnv = Mapping[MetaVar, Term]


def instantiate(t: Term, env: MetaEnv) -> Term:
    """Replace each ``?k(args)`` by ``env[k]`` with its parameters
    substituted by the instantiated arguments. ``env[k]`` lives in the
    parameter context of ``k``."""
    match t:
        case Var():
            return t
        case MetaApp(meta=k, args=args):
            try:
                body = env[k]
            except KeyError:
                raise MissingMetavariable(k) from None
            new_args = [instantiate(a, env) for a in args]
            if not body.fv:
                return body
            assign = dict(zip(k.params.variables(), new_args))
            return _subst(body, assign)
        case OpApp(op=o, sort=s, args=args):
            return OpApp(o, s, tuple(instantiate(a, env) for a in args))
        case Coerce(term=inner, sort=s):
            return coerce_to(instantiate(inner, env), s)
    raise TypeError(f"not a term: {t!r}")


# ---------------------------------------------------------------------------
# Well-formedness


def check(sig: BindingSignature, t: Term, sort: str, ctx: Context) -> None:
    """Raise :class:`StructuralError` unless ``t`` has ``sort`` in ``ctx``."""

    def go(u: Term, s: str, c: Context, path: str) -> None:
        match u:
            case Var(sort=vs, index=i):
                if vs != s:
                    raise StructuralError(f"{path}: variable of sort {vs} where {s} expected")
                if i > c[vs]:
                    raise StructuralError(f"{path}: variable {vs}{i} out of scope in context {c}")
            case Coerce(term=inner, sort=cs):
                if cs != s:
                    raise StructuralError(f"{path}: coercion to {cs} where {s} expected")
                inner_sort = sort_of(inner)
                if not sig.sort_table.can_coerce(inner_sort, cs):
                    raise StructuralError(f"{path}: no coercion {inner_sort} -> {cs}")
                go(inner, inner_sort, c, path + ".coerce")
            case MetaApp(meta=k, args=args):
                if k.sort != s:
                    raise StructuralError(f"{path}: ?{k.name} has sort {k.sort}, expected {s}")
                params = k.params.variables()
                if len(params) != len(args):
                    raise StructuralError(
                        f"{path}: ?{k.name} takes {len(params)} arguments, got {len(args)}"
                    )
                for n, ((ps, _), a) in enumerate(zip(params, args)):
                    go(a, ps, c, f"{path}.?{k.name}[{n}]")
            case OpApp(op=o, sort=os, args=args):
                if not sig.has_op(o.name) or sig.op(o.name) != o:
                    raise StructuralError(f"{path}: operator {o.name} not in signature")
                if os != s:
                    raise StructuralError(f"{path}: {o.name}@{os} where sort {s} expected")
                if os not in sig.annotations(o):
                    raise StructuralError(f"{path}: {o.name} cannot be annotated {os}")
                for n, (a, spec) in enumerate(zip(args, u.specs())):
                    go(a, spec.sort, c + spec.binds, f"{path}.{o.name}[{n}]")
            case _:
                raise StructuralError(f"{path}: not a term: {u!r}")

    go(t, sort, ctx, "term")


def well_formed(sig: BindingSignature, t: Term, sort: str, ctx: Context) -> bool:
    try:
        check(sig, t, sort, ctx)
    except StructuralError:
        return False
    return True


# ---------------------------------------------------------------------------
# Enumeration


def _compositions(total: int, parts: int) -> Iterator[tuple[int, ...]]:
    """Ordered ways of writing ``total`` as ``parts`` positive integers."""
    if parts == 0:
        if total == 0:
            yield ()
        return
    for cut in itertools.combinations(range(1, total), parts - 1):
        bounds = (0,) + cut + (total,)
        yield tuple(b - a for a, b in zip(bounds, bounds[1:]))


class Enumerator:
    """Exhaustive, duplicate-free, deterministic term enumeration by size.

    Order: by size, then variables (by index), operators in declaration
    order, then coercions; arguments vary in lexicographic order.
    """

    def __init__(self, sig: BindingSignature):
        self.sig = sig
        self._exact = lru_cache(maxsize=None)(self._exact_uncached)

    def exact(self, sort: str, ctx: Context, size: int) -> tuple[Term, ...]:
        return self._exact(sort, ctx, size)

    def _exact_uncached(self, sort: str, ctx: Context, size: int) -> tuple[Term, ...]:
        out: list[Term] = []
        if size <= 0:
            return ()
        if size == 1:
            out.extend(Var(sort, i) for i in range(1, ctx[sort] + 1))
        for o, ann in self.sig.constructors(sort):
            specs = o.arg_specs(ann)
            if not specs:
                if size == 1:
                    out.append(OpApp(o, ann, ()))
                continue
            for split in _compositions(size - 1, len(specs)):
                pools = [self.exact(sp.sort, ctx + sp.binds, n) for sp, n in zip(specs, split)]
                if any(not p for p in pools):
                    continue
                for args in itertools.product(*pools):
                    out.append(OpApp(o, ann, args))
        for sub in self.sig.sort_table.subsorts(sort):
            for t in self.exact(sub, ctx, size - 1):
                if isinstance(t, Coerce) or (isinstance(t, OpApp) and t.op.kind == VALUE):
                    continue
                out.append(Coerce(t, sort))
        return tuple(out)

    def upto(self, sort: str, ctx: Context, max_size: int) -> list[Term]:
        out: list[Term] = []
        for n in range(1, max_size + 1):
            out.extend(self.exact(sort, ctx, n))
        return out


_enumerators: dict[int, tuple[BindingSignature, Enumerator]] = {}


def enumerator(sig: BindingSignature) -> Enumerator:
    hit = _enumerators.get(id(sig))
    if hit is None or hit[0] is not sig:
        hit = (sig, Enumerator(sig))
        _enumerators[id(sig)] = hit
    return hit[1]


def enumerate_terms(sig: BindingSignature, sort: str, ctx: Context, max_size: int) -> list[Term]:
    """All well-formed terms of ``sort`` in ``ctx`` with at most ``max_size`` nodes."""
    return enumerator(sig).upto(sort, ctx, max_size)
