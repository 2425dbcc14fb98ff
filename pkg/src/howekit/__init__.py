"""Bounded semantics checks for big-step rule systems with binding."""

from .syntax import (
    EMPTY,
    ArgSpec,
    BindingSignature,
    Coerce,
    Context,
    MetaApp,
    MetaVar,
    OpApp,
    Operator,
    SortTable,
    StructuralError,
    Substitution,
    Term,
    Var,
    coerce,
    enumerate_terms,
    instantiate,
    rename,
    substitute,
)
from .rules import (
    DynamicSignature,
    HoweRule,
    Label,
    Premise,
    RigidRule,
    SchematicRule,
    canonical_rules,
    expand_schematic,
    rigidify,
    validate_rigid,
    validate_signature,
)
from .surface import ParseError, load_signature, parse_context, parse_signature, parse_term, show_signature, show_term
from .evaluate import Evaluator, TransitionSet, derivation_trace, small_step_agreement, transitions
from .bisim import BisimChecker, Relation, SubstPool, Verdict, bounded_bisim, check_relation
from .howe import Universe, congruence_sweep, howe_closure

__all__ = [
    "ArgSpec",
    "BindingSignature",
    "BisimChecker",
    "Coerce",
    "Context",
    "DynamicSignature",
    "EMPTY",
    "Evaluator",
    "HoweRule",
    "Label",
    "MetaApp",
    "MetaVar",
    "OpApp",
    "Operator",
    "ParseError",
    "Premise",
    "Relation",
    "RigidRule",
    "SchematicRule",
    "SortTable",
    "StructuralError",
    "SubstPool",
    "Substitution",
    "Term",
    "TransitionSet",
    "Universe",
    "Var",
    "Verdict",
    "bounded_bisim",
    "canonical_rules",
    "check_relation",
    "coerce",
    "congruence_sweep",
    "derivation_trace",
    "enumerate_terms",
    "expand_schematic",
    "howe_closure",
    "instantiate",
    "load_signature",
    "parse_context",
    "parse_signature",
    "parse_term",
    "rename",
    "rigidify",
    "show_signature",
    "show_term",
    "small_step_agreement",
    "substitute",
    "transitions",
    "validate_rigid",
    "validate_signature",
]
