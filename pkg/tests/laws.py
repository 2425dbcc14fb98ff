"""Exhaustive substitution-law sweep shared by the syntax tests and the
acceptance suite."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from howekit import EMPTY, Context, Substitution, enumerate_terms, substitute
from howekit.syntax import OpApp, coerce_to
from oracles import subst_by_names, t_shift, to_tuple


@dataclass
class LawReport:
    checked: dict[str, int] = field(default_factory=dict)
    violations: list[tuple] = field(default_factory=list)

    def tick(self, law: str) -> None:
        self.checked[law] = self.checked.get(law, 0) + 1


def _substitutions(source: Context, target: Context, pool: dict[str, list]) -> list[Substitution]:
    slots = source.variables()
    return [
        Substitution(source, dict(zip(slots, images)), target)
        for images in itertools.product(*(pool[s] for s, _ in slots))
    ]


def single_sorted_laws(dsig, term_size: int = 5, pool_size: int = 3) -> LawReport:
    """Unit, associativity, agreement with named substitution and the
    binder law, for every term in contexts of up to two variables."""
    sig = dsig.binding
    rep = LawReport()
    one, two = Context.of({"p": 1}), Context.of({"p": 2})
    images_1 = {"p": enumerate_terms(sig, "p", one, pool_size)}
    closed = {"p": enumerate_terms(sig, "p", EMPTY, pool_size)}
    lam = sig.op("lam")
    for ctx in (one, two):
        sigmas = _substitutions(ctx, one, images_1)
        gammas = _substitutions(one, EMPTY, closed)
        for t in enumerate_terms(sig, "p", ctx, term_size):
            rep.tick("unit")
            if substitute(t, Substitution.identity(ctx)) != t:
                rep.violations.append(("unit", t))
            for sigma in sigmas:
                once = substitute(t, sigma)
                rep.tick("named")
                images = [to_tuple(sigma[("p", i)]) for i in range(1, len(ctx) + 1)]
                if to_tuple(once) != subst_by_names(to_tuple(t), len(ctx), images, 1):
                    rep.violations.append(("named", t, sigma))
                rep.tick("binder")
                # lam(t) lives one variable shorter; its substitution drops
                # the first slot and is lifted back over the binder
                lifted = {1: ("v", 1), **{i + 1: t_shift(im, 1) for i, im in enumerate(images[1:], 1)}}
                body = to_tuple(substitute(t, _from_tuples(sig, lifted, ctx, two)))
                if to_tuple(substitute(OpApp(lam, "p", (t,)), _drop_first(sigma))) != ("lam", body):
                    rep.violations.append(("binder", t, sigma))
                for gamma in gammas:
                    rep.tick("associativity")
                    if substitute(once, gamma) != substitute(t, sigma.then(gamma)):
                        rep.violations.append(("associativity", t, sigma, gamma))
    return rep


def _drop_first(sigma: Substitution) -> Substitution:
    """``sigma`` seen from under one binder: the term ``lam(t)`` lives in a
    context one shorter than ``t``."""
    src = Context.of({"p": len(sigma.source) - 1})
    return Substitution(src, {("p", i): sigma[("p", i + 1)] for i in range(1, len(src) + 1)}, sigma.target)


def _from_tuples(sig, images: dict[int, tuple], source: Context, target: Context) -> Substitution:
    from howekit import Var

    def build(t):
        if t[0] == "v":
            return Var("p", t[1])
        return OpApp(sig.op(t[0]), "p", tuple(build(a) for a in t[1:]))

    return Substitution(source, {("p", i): build(images[i]) for i in range(1, len(source) + 1)}, target)


def multi_sorted_laws(dsig, term_size: int = 5, pool_size: int = 3) -> LawReport:
    """Unit and associativity with value images for value variables."""
    sig = dsig.binding
    rep = LawReport()
    one_v = Context.of({"v": 1})
    values_1 = {"v": enumerate_terms(sig, "v", one_v, pool_size)}
    closed_v = {"v": enumerate_terms(sig, "v", EMPTY, pool_size)}
    for ctx in (one_v, Context.of({"v": 2})):
        sigmas = _substitutions(ctx, one_v, values_1)
        gammas = _substitutions(one_v, EMPTY, closed_v)
        for sort in ("p", "v"):
            for t in enumerate_terms(sig, sort, ctx, term_size):
                rep.tick("unit")
                if substitute(t, Substitution.identity(ctx)) != t:
                    rep.violations.append(("unit", t))
                for sigma in sigmas:
                    once = substitute(t, sigma)
                    for gamma in gammas:
                        rep.tick("associativity")
                        if substitute(once, gamma) != substitute(t, sigma.then(gamma)):
                            rep.violations.append(("associativity", t, sigma, gamma))
                rep.tick("coerce")
                if coerce_to(coerce_to(t, "p"), "p") != coerce_to(t, "p"):
                    rep.violations.append(("coerce", t))
    return rep
