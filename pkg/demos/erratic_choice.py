"""Erratic choice: set-valued evaluation, may-divergence, and agreement
of the big-step rules with a small-step reduction oracle.

    python demos/erratic_choice.py
"""

from howekit import EMPTY, enumerate_terms, parse_term, show_term
from howekit.bisim import SubstPool, bounded_bisim
from howekit.evaluate import small_step_agreement, small_step_reach, transitions
from howekit.instances import load_instance

nd = load_instance("nondet")


def p(text):
    return parse_term(nd, text, "p")


# amb(e) may become e or Omega; tau steps are reflexive and transitive, so
# the search never finishes and only reports what it found within fuel.
res = transitions(nd, p("amb(I)"), "tau", 4)
print("amb(I) =tau=>", sorted(show_term(u, nd) for u in res.targets))
res = transitions(nd, p("amb(I)"), "lam", 4)
print("amb(I) =lam=>", [show_term(u, nd) for u in res.targets])

reach = small_step_reach(nd, p("amb(app(I, I))"), 3)
print("small steps from amb(app(I, I)):", sorted(show_term(u, nd) for u in reach.terms))

# I cannot diverge, amb(I) can: they are told apart at depth 2.
v = bounded_bisim(nd, p("amb(I)"), p("I"), 2, 6, SubstPool.build(nd, 3))
print("\namb(I) ~ I at depth 2:", v.status)

terms = enumerate_terms(nd.binding, "p", EMPTY, 5)
rep = small_step_agreement(nd, terms, fuel=8, bound=8)
print(f"\nbig-step vs small-step on {rep.terms} terms: {len(rep.mismatches)} mismatches, {rep.frontier} undecided")
