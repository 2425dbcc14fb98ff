"""Call-by-name lambda calculus: evaluation, derivations and bounded
bisimilarity.

    python demos/call_by_name.py
"""

from howekit import EMPTY, Context, Var, enumerate_terms, parse_term, show_term
from howekit.bisim import BisimChecker, SubstPool, open_extension_check
from howekit.evaluate import derivation_trace, transitions
from howekit.instances import load_instance

cbn = load_instance("cbn")


def p(text, ctx=EMPTY):
    return parse_term(cbn, text, "p", ctx)


# Evaluation relates a closed term to the body of the lambda it reaches.
# Targets live one variable deeper, so the identity's result is `var 1`.
for text, fuel in [("lam(x. x)", 1), ("app(lam(x. x), lam(y. y))", 1), ("app(lam(x. x), lam(y. y))", 3), ("Omega", 10)]:
    res = transitions(cbn, p(text), "eval", fuel)
    flag = "complete" if res.complete else "fuel exhausted"
    print(f"{text:32} fuel {fuel:2}: {[show_term(u, cbn) for u in res.targets]} ({flag})")

[d] = derivation_trace(cbn, p("app(I, app(I, I))"), "eval", 4)
print("\nderivation of app(I, app(I, I)):")
print(d.render(cbn))

# Bisimilarity is checked up to a depth, with a fuel bound for every
# evaluation and a finite pool of closed terms for the variables that
# evaluation exposes.
checker = BisimChecker(cbn, fuel=8, pool=SubstPool.build(cbn, 3))
pairs = [
    ("I", "lam(x. app(I, x))"),
    ("lam(x. lam(y. x))", "lam(x. lam(y. y))"),
    ("I", "Omega"),
]
print()
for a, b in pairs:
    v = checker.check(p(a), p(b), 3)
    print(f"{a} ~ {b}: {v.status}")

# Every closed term in this calculus converges to a lambda or diverges, so
# a bounded check can only say "holds" or "inconclusive" here.  The
# depth-3 equivalence classes of small terms:
terms = enumerate_terms(cbn.binding, "p", EMPTY, 5)
classes = {}
for t in terms:
    classes.setdefault(checker.signature(t, 3), []).append(show_term(t, cbn))
print(f"\n{len(terms)} closed terms up to size 5, depth-3 classes of sizes {sorted(map(len, classes.values()))}")
# with only lambdas in the pool nothing ever diverges, so nothing is told apart
wider = BisimChecker(cbn, fuel=8, pool=SubstPool.build(cbn, 4))
sizes = {}
for t in terms:
    sizes[wider.signature(t, 3)] = sizes.get(wider.signature(t, 3), 0) + 1
print(f"with self-application in the pool: classes of sizes {sorted(sizes.values())}")

# Open terms are compared under every closing substitution from the pool.
one = Context.of({"p": 1})
v = open_extension_check(cbn, None, Var("p", 1), p("app(I, var 1)", one), one, SubstPool.build(cbn, 3))
print(f"\nx ~ app(I, x) under all closings: {v.status}")
