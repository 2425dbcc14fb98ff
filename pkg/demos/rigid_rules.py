"""Rules with pattern targets must be compiled to rigid form before the
checker accepts them; the compiled system gives the same equivalence.

    python demos/rigid_rules.py
"""

from howekit import EMPTY, enumerate_terms, parse_term, show_signature, show_term, validate_signature
from howekit.bisim import BisimChecker, SubstPool
from howekit.instances import load_instance, naive_cbn_howe, rigid_cbn

naive = validate_signature(naive_cbn_howe())
print("naive app rule:", "ok" if naive.ok else "rejected")
for d in naive.diagnostics:
    print("  ", d)

rig = rigid_cbn()
print("\ncompiled signature:\n")
print(show_signature(rig))
print("valid:", validate_signature(rig).ok)

# one cbn evaluation is an eval step plus an application step here
cbn = load_instance("cbn")
plain = BisimChecker(cbn, 8, SubstPool.build(cbn, 3))
rigid = BisimChecker(rig, 8, SubstPool.build(rig, 3))
terms = enumerate_terms(cbn.binding, "p", EMPTY, 5)
moved = {t: parse_term(rig, show_term(t, cbn), "p") for t in terms}
differ = sum(
    plain.check(a, b, 3).status != rigid.check(moved[a], moved[b], 6).status for a in terms for b in terms
)
print(f"\n{len(terms) ** 2} pairs compared at depth 3 vs 6: {differ} disagreements")
