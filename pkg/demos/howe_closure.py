"""Howe's closure of bounded bisimilarity on a finite universe of terms,
and the properties it should have.

    python demos/howe_closure.py
"""

from howekit import EMPTY, Context, Var, parse_term
from howekit.bisim import SubstPool
from howekit.howe import (
    BisimOracle,
    Universe,
    composition_check,
    congruence_check,
    congruence_sweep,
    howe_closure,
    relational_transitive_closure,
    simulation_check,
    symmetry_check,
)
from howekit.instances import load_instance

cbn = load_instance("cbn")
U = Universe.build(cbn, max_size=5, ctx_bound=1)
B = BisimOracle(cbn, depth=3, fuel=8, pool=SubstPool.build(cbn, 3))
res = howe_closure(cbn, U, B)
print(f"universe: {U.size()} terms; oracle: {len(res.base)} pairs")
print(f"closure: {len(res.relation)} pairs after {res.iterations} rounds {res.sizes}")

x = Var("p", 1)
beta = parse_term(cbn, "app(I, var 1)", "p", Context.of({"p": 1}))
print("x H app(I, x):", res.relation.contains(x, beta, "p", Context.of({"p": 1})))
print("I H lam(x. app(I, x)):", res.relation.contains(
    parse_term(cbn, "I", "p"), parse_term(cbn, "lam(x. app(I, x))", "p"), "p", EMPTY))

for rep in (
    composition_check(res.relation, res.base),
    congruence_check(res.relation, U),
    symmetry_check(relational_transitive_closure(res.relation)),
    simulation_check(cbn, res.relation, 8, SubstPool.build(cbn, 3), U),
):
    print(f"{rep.name:20} checked {rep.checked:6}  violations {len(rep.violations)}  inconclusive {rep.inconclusive}")

# The consequence: bisimilar terms stay bisimilar inside any context.
sweep = congruence_sweep(cbn, depth=3, fuel=8, n_samples=100, seed=0)
print(f"\ncongruence sweep: {sweep.holds} hold, {sweep.inconclusive} inconclusive, "
      f"{len(sweep.counterexamples)} counterexamples")
