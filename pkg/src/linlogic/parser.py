"""Concrete syntax: a recursive-descent parser and a canonical printer.

Grammar (whitespace insensitive)::

    formula  := sum
    sum      := product (("+" | "-") product)*
    product  := [rational "*"] atom | "-" atom
    atom     := rational | "d(" term "," term ")" | NAME "(" term ("," term)* ")"
              | ("sup" | "inf") NAME "." atom | "(" formula ")"
    term     := NAME | NAME "(" term ("," term)* ")"
    rational := ["-"] digits ["/" digits] | decimal

``a - b`` reads as ``a + -1 * b`` and ``-atom`` as ``-1 * atom``.
"""

from __future__ import annotations

import re
from fractions import Fraction

from .syntax import (
    METRIC, Add, Apply, Condition, Const, ConstSym, Dist, Inf, Rel, Scale,
    Signature, Sup, Var,
)

KEYWORDS = ("sup", "inf")

_TOKEN = re.compile(
    r"\s*(?:(?P<num>\d+(?:\.\d+)?)|(?P<name>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<op><=|>=|[-+*/().,=;]|≤|≥))"
)


class ParseError(ValueError):
    """A syntax or resolution error.

    ``kind`` is one of lexical, syntax, unknown-symbol, arity, rebound.
    """

    def __init__(self, kind, message, position):
        super().__init__(f"{kind} at {position}: {message}")
        self.kind = kind
        self.position = position


def tokenize(text):
    tokens = []
    pos = 0
    while True:
        while pos < len(text) and text[pos].isspace():
            pos += 1
        if pos >= len(text):
            break
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ParseError("lexical", f"unexpected character {text[pos]!r}", pos)
        start = m.start(m.lastgroup)
        tokens.append((m.lastgroup, m.group(m.lastgroup), start))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text, sig: Signature, variables=None):
        self.tokens = tokenize(text)
        self.i = 0
        self.sig = sig
        self.variables = None if variables is None else set(variables)
        self.bound = []

    # -- token helpers
    def peek(self, k=0):
        return self.tokens[min(self.i + k, len(self.tokens) - 1)]

    def at(self, value, k=0):
        kind, text, _ = self.peek(k)
        return kind == "op" and text == value

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value):
        kind, text, pos = self.take()
        if kind != "op" or text != value:
            shown = text or "end of input"
            raise ParseError("syntax", f"expected {value!r}, found {shown!r}", pos)

    def fail(self, msg):
        raise ParseError("syntax", msg, self.peek()[2])

    # -- grammar
    def parse_formula(self):
        left = self.product()
        while self.at("+") or self.at("-"):
            op = self.take()[1]
            right = self.product()
            if op == "-":
                right = Scale(Fraction(-1), right)
            left = Add(left, right)
        return left

    def rational(self):
        neg = False
        if self.at("-"):
            self.take()
            neg = True
        kind, text, pos = self.take()
        if kind != "num":
            raise ParseError("syntax", "expected a number", pos)
        value = Fraction(text)
        if self.at("/") and "." not in text:
            self.take()
            kind, den, pos = self.take()
            if kind != "num" or "." in den:
                raise ParseError("syntax", "expected a denominator", pos)
            if int(den) == 0:
                raise ParseError("syntax", "zero denominator", pos)
            value = value / int(den)
        return -value if neg else value

    def starts_rational(self):
        if self.peek()[0] == "num":
            return True
        return self.at("-") and self.peek(1)[0] == "num"

    def product(self):
        if self.starts_rational():
            save = self.i
            r = self.rational()
            if self.at("*"):
                self.take()
                return Scale(r, self.atom())
            self.i = save
            return self.atom()
        if self.at("-"):
            self.take()
            return Scale(Fraction(-1), self.atom())
        return self.atom()

    def atom(self):
        kind, text, pos = self.peek()
        if self.starts_rational():
            return Const(self.rational())
        if self.at("("):
            self.take()
            inner = self.parse_formula()
            self.expect(")")
            return inner
        if kind != "name":
            self.fail(f"unexpected {text or 'end of input'!r}")
        if text in KEYWORDS:
            self.take()
            vkind, var, vpos = self.take()
            if vkind != "name" or var in KEYWORDS:
                raise ParseError("syntax", "expected a variable after quantifier", vpos)
            if var in self.bound:
                raise ParseError("rebound", f"variable {var} rebound inside its own scope", vpos)
            if self.sig.kind(var) is not None or var == METRIC:
                raise ParseError("rebound", f"{var} is a signature symbol, not a variable", vpos)
            self.expect(".")
            self.bound.append(var)
            body = self.atom()
            self.bound.pop()
            return (Sup if text == "sup" else Inf)(var, body)
        self.take()
        if not self.at("("):
            raise ParseError("syntax", f"expected '(' after {text}", self.peek()[2])
        self.take()
        if text == METRIC:
            t1 = self.term()
            self.expect(",")
            t2 = self.term()
            self.expect(")")
            return Dist(t1, t2)
        if self.sig.kind(text) != "relation":
            raise ParseError("unknown-symbol", f"{text} is not a declared relation", pos)
        args = self.term_args()
        arity = self.sig.relation(text).arity
        if len(args) != arity:
            raise ParseError("arity", f"{text} expects {arity} arguments, got {len(args)}", pos)
        return Rel(text, tuple(args))

    def term_args(self):
        args = [self.term()]
        while self.at(","):
            self.take()
            args.append(self.term())
        self.expect(")")
        return args

    def term(self):
        kind, text, pos = self.take()
        if kind != "name" or text in KEYWORDS or text == METRIC:
            raise ParseError("syntax", f"expected a term, found {text or 'end of input'!r}", pos)
        if self.at("("):
            self.take()
            if self.sig.kind(text) != "function":
                raise ParseError("unknown-symbol", f"{text} is not a declared function", pos)
            args = self.term_args()
            arity = self.sig.function(text).arity
            if len(args) != arity:
                raise ParseError("arity", f"{text} expects {arity} arguments, got {len(args)}", pos)
            return Apply(text, tuple(args))
        if text in self.bound or (self.variables is not None and text in self.variables):
            return Var(text)
        kind = self.sig.kind(text)
        if kind == "constant":
            return ConstSym(text)
        if kind is not None:
            raise ParseError("syntax", f"{kind} {text} used without arguments", pos)
        if self.variables is not None:
            raise ParseError("unknown-symbol", f"unknown name {text}", pos)
        return Var(text)

    def finish(self):
        kind, text, pos = self.peek()
        if kind != "end":
            raise ParseError("syntax", f"unexpected trailing {text!r}", pos)


def parse_formula(text: str, sig: Signature, variables=None):
    """Parse text into a formula tree.

    With ``variables`` given, only those names (and bound ones) may occur as
    variables; otherwise any undeclared bare name is a free variable.
    """
    p = _Parser(text, sig, variables)
    phi = p.parse_formula()
    p.finish()
    return phi


_REL_SPLIT = re.compile(r"<=|>=|≤|≥|=")


def parse_condition(text: str, sig: Signature, variables=None) -> Condition:
    """Parse ``phi <= psi``, ``phi >= psi`` or ``phi = psi``."""
    m = list(_REL_SPLIT.finditer(text))
    if len(m) != 1:
        raise ParseError("syntax", "a condition needs exactly one of <=, >=, =", 0)
    m = m[0]
    left = parse_formula(text[:m.start()], sig, variables)
    try:
        right = parse_formula(text[m.end():], sig, variables)
    except ParseError as e:
        raise ParseError(e.kind, str(e).split(": ", 1)[-1], e.position + m.end()) from None
    op = m.group()
    if op in (">=", "≥"):
        return Condition(right, "<=", left)
    return Condition(left, "=" if op == "=" else "<=", right)


def parse_conditions(text: str, sig: Signature, variables=None) -> list:
    """Semicolon-separated conditions; empty text is the empty set."""
    return [parse_condition(part, sig, variables) for part in text.split(";") if part.strip()]


# ----------------------------------------------------------------- printing

def format_rational(r) -> str:
    r = Fraction(r)
    return str(r.numerator) if r.denominator == 1 else f"{r.numerator}/{r.denominator}"


def print_term(t) -> str:
    if isinstance(t, (Var, ConstSym)):
        return t.name
    return f"{t.func}({', '.join(print_term(a) for a in t.args)})"


def print_formula(phi) -> str:
    """Canonical text; ``parse_formula(print_formula(phi))`` rebuilds phi."""
    if isinstance(phi, Add):
        right = print_formula(phi.right)
        if isinstance(phi.right, Add):
            right = f"({right})"
        return f"{print_formula(phi.left)} + {right}"
    if isinstance(phi, Scale):
        return f"{format_rational(phi.factor)} * {_atom(phi.body)}"
    return _atom(phi)


def _atom(phi) -> str:
    if isinstance(phi, Const):
        return format_rational(phi.value)
    if isinstance(phi, Dist):
        return f"d({print_term(phi.left)}, {print_term(phi.right)})"
    if isinstance(phi, Rel):
        return f"{phi.name}({', '.join(print_term(a) for a in phi.args)})"
    if isinstance(phi, (Sup, Inf)):
        q = "sup" if isinstance(phi, Sup) else "inf"
        return f"{q} {phi.var} . {_atom(phi.body)}"
    return f"({print_formula(phi)})"


def print_condition(c: Condition) -> str:
    return f"{print_formula(c.left)} {c.relation} {print_formula(c.right)}"
