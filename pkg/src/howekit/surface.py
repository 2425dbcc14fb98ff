"""Concrete syntax for terms and signature files.

Terms::

    var 2          free variable (relative to the enclosing context)
    var 1@v        free variable of a named sort
    x              bound variable
    lam(x. app(x, x))
    lam@v(x. x)    explicit annotation of a value operation
    ?k(x, var 1)   metavariable application; bare ?k is the generic one

Parsing is sort-directed: coercions and value-operation annotations are
inferred from the expected sort, and the printer leaves out whatever the
parser can infer.

Signature files hold one declaration per line (indented lines continue the
previous one, ``#`` starts a comment)::

    sort p
    coerce v -> p
    binding p
    op lam : (p[1]) -> p
    label eval : p@0 -> p@1
    define I = lam(x. x)
    rule app_eval: app(?k1, ?k2) with ?k1 =eval=> ?k3, ?k3(?k2) =eval=> ?k4 gives eval ?k4
    schematic refl: ?E gives tau ?E
    howe app_eval: app(?k1, ?k2) with ?k1 ==> lam(x. ?k3(x)), ?k3(?k2) ==> ?k4 gives ?k4
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Sequence

from .rules import DynamicSignature, HoweRule, Label, Premise, RigidRule, SchematicRule
from .syntax import (
    EMPTY,
    VALUE,
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
    Term,
    Var,
    coerce_to,
    sort_of,
)


class ParseError(Exception):
    def __init__(self, message: str, line: int = 1, column: int = 1):
        super().__init__(f"{line}:{column}: {message}")
        self.message = message
        self.line = line
        self.column = column


_TOKEN = re.compile(
    r"\s*(?:(?P<name>[A-Za-z_][A-Za-z0-9_']*)|(?P<int>\d+)|(?P<punct>==>|=>|->|[()\[\],.?@:=+-]))"
)


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    column: int


def tokenize(text: str, line: int = 1, column: int = 1) -> list[Token]:
    """Split ``text`` into tokens; positions are relative to ``line`` and
    ``column``, which locate the first character."""
    out: list[Token] = []
    pos = 0

    def where(i: int) -> tuple[int, int]:
        nl = text.count("\n", 0, i)
        if not nl:
            return line, column + i
        return line + nl, i - text.rindex("\n", 0, i)

    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            stripped = len(text[pos:]) - len(text[pos:].lstrip())
            raise ParseError(f"unexpected character {text[pos + stripped]!r}", *where(pos + stripped))
        kind = m.lastgroup or "punct"
        out.append(Token(kind, m.group(kind), *where(m.start(kind))))
        pos = m.end()
    return out


# ---------------------------------------------------------------------------
# Term parsing


_KEYWORDS = {"var", "with", "gives"}


class _Reader:
    def __init__(self, tokens: Sequence[Token], end: tuple[int, int] = (1, 1)):
        self.tokens = list(tokens)
        self.pos = 0
        self.end = end

    def peek(self, ahead: int = 0) -> Token | None:
        i = self.pos + ahead
        return self.tokens[i] if i < len(self.tokens) else None

    def at(self, text: str, ahead: int = 0) -> bool:
        tok = self.peek(ahead)
        return tok is not None and tok.text == text

    def error(self, message: str, tok: Token | None = None) -> ParseError:
        tok = tok or self.peek()
        if tok is None:
            return ParseError(message, *self.end)
        return ParseError(message, tok.line, tok.column)

    def next(self, what: str = "token") -> Token:
        tok = self.peek()
        if tok is None:
            raise self.error(f"expected {what}, found end of input")
        self.pos += 1
        return tok

    def expect(self, text: str) -> Token:
        tok = self.peek()
        if tok is None or tok.text != text:
            found = "end of input" if tok is None else repr(tok.text)
            raise self.error(f"expected {text!r}, found {found}")
        self.pos += 1
        return tok

    def name(self, what: str = "name") -> str:
        tok = self.next(what)
        if tok.kind != "name":
            raise self.error(f"expected {what}, found {tok.text!r}", tok)
        return tok.text

    def integer(self) -> int:
        tok = self.next("number")
        if tok.kind != "int":
            raise self.error(f"expected a number, found {tok.text!r}", tok)
        return int(tok.text)

    def done(self) -> bool:
        return self.pos >= len(self.tokens)


class TermParser:
    """Parses terms against a signature. ``metas`` is shared across the
    terms of one rule; unknown metavariables are introduced on first use
    with the context of their position as parameters."""

    def __init__(
        self,
        sig: BindingSignature,
        defines: Sequence[tuple[str, str]] = (),
        metas: dict[str, MetaVar] | None = None,
    ):
        self.sig = sig
        self.defines = dict(defines)
        self.metas = metas if metas is not None else {}
        self._expanding: set[str] = set()

    def parse(self, text_or_tokens, sort: str | None, ctx: Context = EMPTY) -> Term:
        if isinstance(text_or_tokens, str):
            tokens = tokenize(text_or_tokens)
            end = (1, len(text_or_tokens) + 1)
        else:
            tokens = list(text_or_tokens)
            end = (tokens[-1].line, tokens[-1].column + len(tokens[-1].text)) if tokens else (1, 1)
        r = _Reader(tokens, end)
        if r.done():
            raise r.error("empty term")
        t = self._term(r, sort, ctx, [])
        if not r.done():
            raise r.error(f"unexpected {r.peek().text!r} after term")  # type: ignore[union-attr]
        return t

    def _fit(self, r: _Reader, t: Term, sort: str | None, tok: Token) -> Term:
        have = sort_of(t)
        if sort is None or have == sort:
            return t
        if not self.sig.sort_table.can_coerce(have, sort):
            raise r.error(f"term of sort {have} where sort {sort} is expected", tok)
        return coerce_to(t, sort)

    def _term(self, r: _Reader, sort: str | None, base: Context, bound: list[tuple[str, str]]) -> Term:
        tok = r.next("term")
        if tok.kind == "name" and tok.text == "var":
            n = r.integer()
            if r.at("@"):
                r.next()
                vsort = r.name("sort")
                if vsort not in self.sig.sorts:
                    raise r.error(f"unknown sort {vsort!r}")
            elif sort is not None:
                vsort = sort
            elif self.sig.single_sorted():
                vsort = self.sig.sorts[0]
            else:
                raise r.error("free variable needs a sort annotation here", tok)
            if n < 1 or n > base[vsort]:
                raise r.error(f"free variable var {n} out of scope in context {base}", tok)
            depth = sum(1 for _, s in bound if s == vsort)
            return self._fit(r, Var(vsort, n + depth), sort, tok)
        if tok.text == "?":
            return self._meta(r, sort, base, bound, tok)
        if tok.kind != "name":
            raise r.error(f"unexpected {tok.text!r}", tok)
        name = tok.text
        if name in ("with", "gives"):
            raise r.error(f"unexpected keyword {name!r}", tok)
        # bound variables shadow operators and abbreviations
        for i in range(len(bound) - 1, -1, -1):
            if bound[i][0] == name:
                vsort = bound[i][1]
                index = sum(1 for _, s in bound[i:] if s == vsort)
                return self._fit(r, Var(vsort, index), sort, tok)
        if self.sig.has_op(name):
            return self._op(r, self.sig.op(name), sort, base, bound, tok)
        if name in self.defines:
            if name in self._expanding:
                raise r.error(f"recursive abbreviation {name!r}", tok)
            self._expanding.add(name)
            try:
                inner = TermParser(self.sig, tuple(self.defines.items()))
                inner._expanding = self._expanding
                try:
                    return inner.parse(self.defines[name], sort, EMPTY)
                except ParseError as exc:
                    raise r.error(f"in abbreviation {name}: {exc.message}", tok) from None
            finally:
                self._expanding.discard(name)
        raise r.error(f"unknown name {name!r}", tok)

    def _op(self, r, o: Operator, sort, base, bound, tok) -> Term:
        ann = None
        if r.at("@"):
            r.next()
            ann = r.name("sort")
            if ann not in self.sig.annotations(o):
                raise r.error(f"{o.name} cannot be annotated {ann}")
        if ann is None:
            if o.kind == VALUE and sort is not None and sort in self.sig.annotations(o):
                ann = sort
            else:
                ann = o.result_sort
        specs = o.arg_specs(ann)
        args: list[Term] = []
        if specs:
            r.expect("(")
            for n, spec in enumerate(specs):
                if n:
                    r.expect(",")
                args.append(self._arg(r, spec, base, bound))
            r.expect(")")
        elif r.at("("):
            r.next()
            r.expect(")")
        return self._fit(r, OpApp(o, ann, tuple(args)), sort, tok)

    def _arg(self, r: _Reader, spec: ArgSpec, base, bound) -> Term:
        names: list[str] = []
        if spec.binds:
            want = spec.binds.variables()
            for _ in want:
                names.append(r.name("binder name"))
            r.expect(".")
        elif r.peek() is not None and r.peek(1) is not None and r.peek(1).text == "." and r.peek().kind == "name":  # type: ignore[union-attr]
            raise r.error("this argument does not bind variables")
        if len(set(names)) != len(names):
            raise r.error(f"repeated binder name in {names}")
        inner = bound + [(n, s) for n, (s, _) in zip(names, spec.binds.variables())]
        return self._term(r, spec.sort, base, inner)

    def _meta(self, r, sort, base, bound, tok) -> Term:
        name = r.name("metavariable name")
        here = base + Context.of({s: sum(1 for _, bs in bound if bs == s) for s in {bs for _, bs in bound}})
        k = self.metas.get(name)
        if r.at("("):
            r.next()
            raw: list[Term] = []
            params = k.params.variables() if k else here.variables()
            while not r.at(")"):
                if raw:
                    r.expect(",")
                psort = params[len(raw)][0] if params and len(raw) < len(params) else None
                raw.append(self._term(r, psort, base, bound))
            r.expect(")")
            if k is None:
                counts: dict[str, int] = {}
                for a in raw:
                    s = sort_of(a)
                    counts[s] = counts.get(s, 0) + 1
                k = MetaVar(name, Context.of(counts), sort or "p")
                if [s for s, _ in k.params.variables()] != [sort_of(a) for a in raw]:
                    raise r.error(f"arguments of ?{name} must be grouped by sort in alphabetical order", tok)
                self.metas[name] = k
            if len(raw) != len(k.params.variables()):
                raise r.error(f"?{name} takes {len(k.params)} arguments, got {len(raw)}", tok)
            t: Term = MetaApp(k, tuple(raw))
        else:
            if k is None:
                k = MetaVar(name, here, sort or "p")
                self.metas[name] = k
            if not k.params <= here:
                raise r.error(f"?{name} has parameters {k.params}, not all in scope", tok)
            t = k.generic()
        return self._fit(r, t, sort, tok)


def parse_term(
    sig: BindingSignature | DynamicSignature,
    text: str,
    sort: str | None = None,
    ctx: Context = EMPTY,
) -> Term:
    """Parse ``text`` as a term of ``sort`` in ``ctx``."""
    if isinstance(sig, DynamicSignature):
        parser = TermParser(sig.binding, sig.defines)
    else:
        parser = TermParser(sig)
    return parser.parse(text, sort, ctx)


# ---------------------------------------------------------------------------
# Term printing


_BINDER_NAMES = ("x", "y", "z", "u", "w")


def _binder_name(depth: int, avoid: set[str]) -> str:
    n = depth
    while True:
        base = _BINDER_NAMES[n % len(_BINDER_NAMES)]
        round_ = n // len(_BINDER_NAMES)
        name = base if round_ == 0 else f"{base}{round_}"
        if name not in avoid:
            return name
        n += len(_BINDER_NAMES)


def _op_names(t: Term, acc: set[str]) -> set[str]:
    match t:
        case OpApp(op=o, args=args):
            acc.add(o.name)
            for a in args:
                _op_names(a, acc)
        case MetaApp(args=args):
            for a in args:
                _op_names(a, acc)
        case Coerce(term=inner):
            _op_names(inner, acc)
    return acc


def _uses_sorts(t: Term, acc: set[str]) -> set[str]:
    acc.add(sort_of(t))
    match t:
        case OpApp(args=args) | MetaApp(args=args):
            for a in args:
                _uses_sorts(a, acc)
        case Coerce(term=inner):
            _uses_sorts(inner, acc)
    return acc


def show_term(
    t: Term,
    sig: BindingSignature | DynamicSignature | None = None,
    sort: str | None = None,
    avoid: Sequence[str] = (),
) -> str:
    """Print ``t`` so that parsing it back at ``sort`` gives ``t``."""
    defines: tuple = ()
    if isinstance(sig, DynamicSignature):
        defines = sig.defines
        sig = sig.binding
    taken = set(avoid) | _KEYWORDS | {n for n, _ in defines}
    if sig is not None:
        taken |= {o.name for o in sig.operators}
        multi = not sig.single_sorted()
        single = sig.sorts[0] if not multi else None
    else:
        taken |= _op_names(t, set())
        multi = _uses_sorts(t, set()) != {"p"}
        single = None if multi else "p"

    def go(u: Term, expected: str | None, bound: list[tuple[str, str]]) -> str:
        match u:
            case Var(sort=s, index=i):
                depth = [name for name, bs in bound if bs == s]
                if i <= len(depth):
                    return depth[-i]
                n = i - len(depth)
                if s == expected or (expected is None and s == single):
                    return f"var {n}"
                return f"var {n}@{s}"
            case Coerce(term=inner, sort=s):
                return go(inner, s, bound)
            case MetaApp(meta=k, args=args):
                if not args:
                    return f"?{k.name}"
                params = k.params.variables()
                inner = ", ".join(go(a, ps, bound) for a, (ps, _) in zip(args, params))
                return f"?{k.name}({inner})"
            case OpApp(op=o, sort=s, args=args):
                head = o.name
                if o.kind == VALUE:
                    default = expected if expected is not None else o.result_sort
                    if s != default:
                        head += f"@{s}"
                if not args:
                    return head
                parts = []
                for a, spec in zip(args, u.specs()):
                    names = []
                    inner_bound = list(bound)
                    for vs, _ in spec.binds.variables():
                        nm = _binder_name(len(inner_bound), taken)
                        names.append(nm)
                        inner_bound.append((nm, vs))
                    body = go(a, spec.sort, inner_bound)
                    parts.append(f"{' '.join(names)}. {body}" if names else body)
                return f"{head}({', '.join(parts)})"
        raise TypeError(f"not a term: {u!r}")

    return go(t, sort, [])


# ---------------------------------------------------------------------------
# Signature files


def _ctx_text(ctx: Context, sig: BindingSignature) -> str:
    if sig.single_sorted():
        return str(len(ctx))
    return str(ctx)


def _read_ctx(r: _Reader, sorts: Sequence[str], binding: str | None) -> Context:
    n = r.integer()
    tok = r.peek()
    if tok is not None and tok.kind == "name" and tok.text in sorts:
        counts: dict[str, int] = {}
        s = r.name()
        counts[s] = counts.get(s, 0) + n
        while r.at("+"):
            r.next()
            m = r.integer()
            s = r.name("sort")
            if s not in sorts:
                raise r.error(f"unknown sort {s!r}")
            counts[s] = counts.get(s, 0) + m
        return Context.of(counts)
    if n == 0:
        return EMPTY
    if binding is None:
        if len(sorts) != 1:
            raise r.error("bare variable count needs a single sort or a binding sort")
        binding = sorts[0]
    return Context.of({binding: n})


def parse_context(text: str, sig: BindingSignature | DynamicSignature) -> Context:
    """Read a context written ``2`` (binding sort) or ``1 p + 2 v``."""
    if isinstance(sig, DynamicSignature):
        sig = sig.binding
    toks = tokenize(text)
    r = _Reader(toks)
    ctx = _read_ctx(r, list(sig.sorts), sig.binding_sort)
    if r.peek() is not None:
        raise r.error(f"unexpected {r.peek().text!r} after context")
    return ctx


def _split_top(tokens: Sequence[Token], seps: set[str]) -> list[tuple[Token | None, list[Token]]]:
    """Split at depth-0 separators; each part carries the separator before it."""
    parts: list[tuple[Token | None, list[Token]]] = [(None, [])]
    depth = 0
    for tok in tokens:
        if tok.text == "(":
            depth += 1
        elif tok.text == ")":
            depth -= 1
        if depth == 0 and tok.text in seps and (tok.kind == "name" or tok.kind == "punct"):
            parts.append((tok, []))
        else:
            parts[-1][1].append(tok)
    return parts


def _split_arrow(tokens: list[Token], arrow_label: bool) -> tuple[list[Token], str | None, list[Token], Token] | None:
    """Split a premise at ``=LABEL=>`` (or ``==>`` for Howe premises)."""
    depth = 0
    for i, tok in enumerate(tokens):
        if tok.text == "(":
            depth += 1
        elif tok.text == ")":
            depth -= 1
        elif depth == 0:
            if arrow_label and tok.text == "=" and i + 2 < len(tokens) and tokens[i + 2].text == "=>":
                return tokens[:i], tokens[i + 1].text, tokens[i + 3 :], tok
            if not arrow_label and tok.text == "==>":
                return tokens[:i], None, tokens[i + 1 :], tok
    return None


class SignatureBuilder:
    def __init__(self) -> None:
        self.sorts: list[str] = []
        self.coercions: list[tuple[str, str]] = []
        self.binding: str | None = None
        self.ops: list[Operator] = []
        self.labels: list[Label] = []
        self.defines: list[tuple[str, str]] = []
        self.rules: list[RigidRule] = []
        self.schematic: list[SchematicRule] = []
        self.howe: list[HoweRule] = []
        self._sig: BindingSignature | None = None

    def signature(self, r: _Reader) -> BindingSignature:
        if self._sig is None:
            if not self.sorts:
                raise r.error("no sorts declared")
            try:
                table = SortTable(tuple(self.sorts), frozenset(self.coercions))
                self._sig = BindingSignature(table, self.binding or self.sorts[0], tuple(self.ops))
            except StructuralError as exc:
                raise r.error(str(exc)) from None
        return self._sig

    def _frozen_check(self, r: _Reader, what: str) -> None:
        if self._sig is not None:
            raise r.error(f"{what} must come before labels, abbreviations and rules")

    def line(self, tokens: list[Token]) -> None:
        r = _Reader(tokens, (tokens[-1].line, tokens[-1].column + len(tokens[-1].text)))
        kw = r.name("declaration keyword")
        handler = getattr(self, f"_decl_{kw}", None)
        if handler is None:
            raise r.error(f"unknown declaration {kw!r}", tokens[0])
        handler(r)

    def _decl_sort(self, r: _Reader) -> None:
        self._frozen_check(r, "sorts")
        name = r.name("sort name")
        if name in self.sorts:
            raise r.error(f"sort {name!r} declared twice")
        self.sorts.append(name)
        self._end(r)

    def _decl_coerce(self, r: _Reader) -> None:
        self._frozen_check(r, "coercions")
        a = self._sort(r)
        r.expect("->")
        b = self._sort(r)
        self.coercions.append((a, b))
        self._end(r)

    def _decl_binding(self, r: _Reader) -> None:
        self._frozen_check(r, "the binding sort")
        self.binding = self._sort(r)
        self._end(r)

    def _decl_op(self, r: _Reader) -> None:
        self._frozen_check(r, "operators")
        name = r.name("operator name")
        if name in _KEYWORDS:
            raise r.error(f"{name!r} is reserved")
        if any(o.name == name for o in self.ops):
            raise r.error(f"operator {name!r} declared twice")
        r.expect(":")
        r.expect("(")
        specs: list[ArgSpec] = []
        while not r.at(")"):
            if specs:
                r.expect(",")
            s = self._sort(r)
            binds = EMPTY
            if r.at("["):
                r.next()
                binds = _read_ctx(r, self.sorts, self.binding)
                r.expect("]")
            specs.append(ArgSpec(s, binds))
        r.expect(")")
        r.expect("->")
        result = self._sort(r)
        kind, active = "plain", 0
        if r.at("value"):
            r.next()
            kind = VALUE
            active = r.integer()
            passive = r.integer()
            for text in ("d", "-", "=", "("):
                r.expect(text)
            depths: list[int] = []
            while not r.at(")"):
                if depths:
                    r.expect(",")
                depths.append(r.integer())
            r.expect(")")
            if active + passive != len(specs):
                raise r.error(f"{name}: {active} + {passive} arguments declared, {len(specs)} listed")
            binding = self.binding or self.sorts[0]
            for sp in specs[:active]:
                if sp.sort != result or sp.binds:
                    raise r.error(f"{name}: active arguments must have sort {result} and bind nothing")
            want = [ArgSpec("p", Context.of({binding: d})) for d in depths]
            if list(specs[active:]) != want:
                raise r.error(f"{name}: passive arguments do not match d-=({', '.join(map(str, depths))})")
        try:
            self.ops.append(Operator(name, result, tuple(specs), kind, active))
        except StructuralError as exc:
            raise r.error(str(exc)) from None
        self._end(r)

    def _decl_label(self, r: _Reader) -> None:
        sig = self.signature(r)
        name = r.name("label name")
        if any(lab.name == name for lab in self.labels):
            raise r.error(f"label {name!r} declared twice")
        r.expect(":")
        s1 = self._sort(r)
        r.expect("@")
        c1 = _read_ctx(r, self.sorts, sig.binding_sort)
        r.expect("->")
        s2 = self._sort(r)
        r.expect("@")
        c2 = _read_ctx(r, self.sorts, sig.binding_sort)
        self.labels.append(Label(name, s1, c1, s2, c2))
        self._end(r)

    def _decl_define(self, r: _Reader) -> None:
        sig = self.signature(r)
        name = r.name("abbreviation name")
        if name in _KEYWORDS or sig.has_op(name) or name in dict(self.defines):
            raise r.error(f"abbreviation {name!r} clashes with an existing name")
        r.expect("=")
        body = r.tokens[r.pos :]
        if not body:
            raise r.error("empty abbreviation")
        t = TermParser(sig, self.defines).parse(body, None, EMPTY)
        self.defines.append((name, show_term(t, sig, None)))

    def _label(self, r: _Reader, tok: Token) -> Label:
        for lab in self.labels:
            if lab.name == tok.text:
                return lab
        raise r.error(f"undeclared label {tok.text!r}", tok)

    def _rule_parts(self, r: _Reader):
        name = r.name("rule name")
        r.expect(":")
        rest = r.tokens[r.pos :]
        parts = _split_top(rest, {"with", "gives", ","})
        head = parts[0][1]
        if not head:
            raise r.error("missing conclusion source")
        premises = []
        tail = None
        state = "head"
        for sep, toks in parts[1:]:
            assert sep is not None
            if sep.text == "with" and state == "head":
                state = "premises"
                premises.append((sep, toks))
            elif sep.text == "," and state == "premises":
                premises.append((sep, toks))
            elif sep.text == "gives" and state in ("head", "premises"):
                state = "gives"
                tail = (sep, toks)
            else:
                raise r.error(f"unexpected {sep.text!r}", sep)
        if tail is None:
            raise r.error("missing 'gives'")
        return name, head, premises, tail

    def _decl_rule(self, r: _Reader, schematic: bool = False) -> None:
        sig = self.signature(r)
        name, head, premises, (gives, tail) = self._rule_parts(r)
        if not tail:
            raise r.error("missing label after 'gives'", gives)
        label = self._label(r, tail[0])
        if len(tail) < 2:
            raise r.error("missing conclusion target", tail[0])
        parser = TermParser(sig, self.defines, {})
        try:
            source = parser.parse(head, label.source_sort, label.source_ctx)
            prem: list[Premise] = []
            for sep, toks in premises:
                split = _split_arrow(toks, True)
                if split is None:
                    raise r.error("premise needs the form SOURCE =LABEL=> TARGET", toks[0] if toks else sep)
                src, lname, tgt, arrow = split
                plab = self._label(r, Token("name", lname or "", arrow.line, arrow.column + 1))
                if not src or not tgt:
                    raise r.error("incomplete premise", arrow)
                s = parser.parse(src, plab.source_sort, plab.source_ctx)
                t = parser.parse(tgt, plab.target_sort, plab.target_ctx)
                prem.append(Premise(s, plab, t))
            target = parser.parse(tail[1:], label.target_sort, label.target_ctx)
        except StructuralError as exc:
            raise r.error(str(exc)) from None
        cls = SchematicRule if schematic else RigidRule
        if any(x.name == name for x in self.rules + self.schematic):
            raise r.error(f"rule {name!r} declared twice")
        rule = cls(name, source, tuple(prem), label, target)
        (self.schematic if schematic else self.rules).append(rule)  # type: ignore[arg-type]

    def _decl_schematic(self, r: _Reader) -> None:
        self._decl_rule(r, schematic=True)

    def _decl_howe(self, r: _Reader) -> None:
        sig = self.signature(r)
        name, head, premises, (gives, tail) = self._rule_parts(r)
        parser = TermParser(sig, self.defines, {})
        try:
            source = parser.parse(head, "p", EMPTY)
            prem = []
            for sep, toks in premises:
                split = _split_arrow(toks, False)
                if split is None:
                    raise r.error("Howe premise needs the form SOURCE ==> PATTERN", toks[0] if toks else sep)
                src, _, tgt, arrow = split
                if not src or not tgt:
                    raise r.error("incomplete premise", arrow)
                prem.append((parser.parse(src, "p", EMPTY), parser.parse(tgt, "v", EMPTY)))
            if len(tail) != 2 or tail[0].text != "?":
                raise r.error("a Howe rule ends with 'gives ?k'", gives)
            k = parser.metas.get(tail[1].text)
            if k is None:
                raise r.error(f"tail ?{tail[1].text} is not introduced by a premise", tail[1])
        except StructuralError as exc:
            raise r.error(str(exc)) from None
        if any(x.name == name for x in self.howe):
            raise r.error(f"rule {name!r} declared twice")
        self.howe.append(HoweRule(name, source, tuple(prem), k))

    def _sort(self, r: _Reader) -> str:
        tok = r.peek()
        s = r.name("sort")
        if s not in self.sorts:
            raise r.error(f"unknown sort {s!r}", tok)
        return s

    @staticmethod
    def _end(r: _Reader) -> None:
        if not r.done():
            raise r.error(f"unexpected {r.peek().text!r}")  # type: ignore[union-attr]

    def build(self, name: str) -> DynamicSignature:
        r = _Reader([], (1, 1))
        sig = self.signature(r)
        try:
            return DynamicSignature(
                sig,
                tuple(self.labels),
                tuple(self.rules),
                tuple(self.schematic),
                tuple(self.howe),
                tuple(self.defines),
                name,
            )
        except StructuralError as exc:
            raise ParseError(str(exc)) from None


def _logical_lines(text: str) -> list[list[Token]]:
    lines: list[list[Token]] = []
    for n, raw in enumerate(text.splitlines(), 1):
        code = raw.split("#", 1)[0]
        if not code.strip():
            continue
        toks = tokenize(code, n)
        if raw[:1].isspace() and lines:
            lines[-1].extend(toks)
        else:
            lines.append(toks)
    return lines


def parse_signature(text: str, name: str = "") -> DynamicSignature:
    """Parse a signature file. Raises :class:`ParseError` with a location."""
    b = SignatureBuilder()
    for toks in _logical_lines(text):
        b.line(toks)
    return b.build(name)


def _spec_text(spec: ArgSpec, sig: BindingSignature) -> str:
    if not spec.binds:
        return spec.sort
    return f"{spec.sort}[{_ctx_text(spec.binds, sig)}]"


def show_operator(o: Operator, sig: BindingSignature) -> str:
    args = ", ".join(_spec_text(sp, sig) for sp in o.args)
    line = f"op {o.name} : ({args}) -> {o.result_sort}"
    if o.kind == VALUE:
        depths = ", ".join(str(d) for d in o.passive_depths)
        line += f" value {o.active} {o.passive} d-=({depths})"
    return line


def show_label(lab: Label, sig: BindingSignature) -> str:
    return (
        f"label {lab.name} : {lab.source_sort}@{_ctx_text(lab.source_ctx, sig)} -> "
        f"{lab.target_sort}@{_ctx_text(lab.target_ctx, sig)}"
    )


def show_rule(rule: RigidRule, dsig: DynamicSignature) -> str:
    kw = "schematic" if isinstance(rule, SchematicRule) else "rule"
    lab = rule.label
    line = f"{kw} {rule.name}: {show_term(rule.source, dsig, lab.source_sort)}"
    prem = [
        f"{show_term(p.source, dsig, p.label.source_sort)} ={p.label.name}=> "
        f"{show_term(p.target, dsig, p.label.target_sort)}"
        for p in rule.premises
    ]
    if prem:
        line += " with " + ", ".join(prem)
    return line + f" gives {lab.name} {show_term(rule.target, dsig, lab.target_sort)}"


def show_howe_rule(rule: HoweRule, dsig: DynamicSignature) -> str:
    line = f"howe {rule.name}: {show_term(rule.source, dsig, 'p')}"
    prem = [f"{show_term(s, dsig, 'p')} ==> {show_term(t, dsig, 'v')}" for s, t in rule.premises]
    if prem:
        line += " with " + ", ".join(prem)
    return line + f" gives ?{rule.tail.name}"


def show_signature(dsig: DynamicSignature) -> str:
    sig = dsig.binding
    groups: list[list[str]] = [
        [f"sort {s}" for s in sig.sorts]
        + [f"coerce {a} -> {b}" for a, b in sorted(sig.sort_table.coercions)]
        + [f"binding {sig.binding_sort}"],
        [show_operator(o, sig) for o in sig.operators],
        [show_label(lab, sig) for lab in dsig.labels],
        [f"define {n} = {text}" for n, text in dsig.defines],
        [show_rule(r, dsig) for r in dsig.rules],
        [show_rule(r, dsig) for r in dsig.schematic],
        [show_howe_rule(r, dsig) for r in dsig.howe_rules],
    ]
    return "\n\n".join("\n".join(g) for g in groups if g) + "\n"


def load_signature(path) -> DynamicSignature:
    from pathlib import Path

    p = Path(path)
    return parse_signature(p.read_text(), p.stem)
