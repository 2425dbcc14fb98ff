"""Call-by-value: which terms may be substituted for a variable changes
which terms are bisimilar.

    python demos/values_and_programs.py
"""

from howekit import parse_term, show_term
from howekit.bisim import BisimChecker, SubstPool
from howekit.instances import load_instance

cbv = load_instance("cbv")
left = parse_term(cbv, "lam(x. I)", "p")
right = parse_term(cbv, "lam(x. app(lam(y. I), x))", "p")
omega = parse_term(cbv, "Omega", "p")

# Arguments are evaluated before the call, so Omega as an argument diverges.
values = SubstPool.build(cbv, 5, values_only=True)
programs = SubstPool.build(cbv, 5, values_only=False, extras=[omega])
print("value pool:  ", values.describe())
print("program pool:", programs.describe())

for name, pool in [("values only", values), ("programs", programs)]:
    checker = BisimChecker(cbv, 8, pool)
    v = checker.check(left, right, 4)
    print(f"\n{name}: {show_term(left, cbv, 'p')} ~ {show_term(right, cbv, 'p')} is {v.status}")
    if v.witness is not None:
        for sigma in v.witness.closings():
            print("  closing:", {f"{s}{i}": show_term(u, cbv, s) for (s, i), u in sigma.items()})
        w = v.witness.to_json(cbv)
        print(f"  unmatched {w['label']} move of the {w['side']} side at {show_term(v.witness.left, cbv, 'p')}")
