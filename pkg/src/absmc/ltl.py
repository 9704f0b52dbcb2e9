"""LTL formulas over linear atomic propositions.

An atomic proposition compares a linear combination of state variables
(optionally wrapped in an absolute value) against a constant threshold.
Propositions may be declared by name (``name := <linexpr> <cmp> <const>``)
or written inline in formulas, e.g. ``G(abs(theta) <= pi/2)``.

Operators, loosest to tightest: ``->``  ``||``  ``&&``  ``U``/``R``
(right-associative), unary ``! X F G``.  ``pi`` is a constant literal and
constant expressions may use ``*`` and ``/``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

from .errors import LtlSyntaxError, UnknownProposition
from .grid import Box
from .intervals import iabs


class Tri(enum.Enum):
    """Three-valued proposition label on a box of concrete states."""

    TRUE = "definitely-true"
    FALSE = "definitely-false"
    UNKNOWN = "unknown"


_CMP = {
    "<": lambda v, t: v < t,
    "<=": lambda v, t: v <= t,
    ">": lambda v, t: v > t,
    ">=": lambda v, t: v >= t,
}


@dataclass(frozen=True)
class AtomicProposition:
    """``(abs of) sum_i coeffs[i]*s[i] + constant  <cmp>  threshold``.

    The name is display-only and ignored by equality, so a declared
    proposition and the identical inline one are the same atom.
    """

    coeffs: tuple
    constant: float
    absolute: bool
    cmp: str
    threshold: float
    name: str = field(default="", compare=False)

    def eval_point(self, s) -> bool:
        v = sum(c * x for c, x in zip(self.coeffs, s)) + self.constant
        if self.absolute:
            v = abs(v)
        return _CMP[self.cmp](v, self.threshold)

    def eval_box(self, box: Box) -> Tri:
        lo = hi = self.constant
        for c, l, u in zip(self.coeffs, box.lower, box.upper):
            if c >= 0:
                lo += c * l
                hi += c * u
            else:
                lo += c * u
                hi += c * l
        if self.absolute:
            lo, hi = iabs((lo, hi))
        t = self.threshold
        if self.cmp == "<":
            return Tri.TRUE if hi < t else (Tri.FALSE if lo >= t
                                            else Tri.UNKNOWN)
        if self.cmp == "<=":
            return Tri.TRUE if hi <= t else (Tri.FALSE if lo > t
                                             else Tri.UNKNOWN)
        if self.cmp == ">":
            return Tri.TRUE if lo > t else (Tri.FALSE if hi <= t
                                            else Tri.UNKNOWN)
        return Tri.TRUE if lo >= t else (Tri.FALSE if hi < t
                                         else Tri.UNKNOWN)

    def expression_text(self, var_names) -> str:
        terms = []
        for c, name in zip(self.coeffs, var_names):
            if c == 0:
                continue
            if c == 1:
                terms.append(f"+ {name}")
            elif c == -1:
                terms.append(f"- {name}")
            elif c < 0:
                terms.append(f"- {-c!r}*{name}")
            else:
                terms.append(f"+ {c!r}*{name}")
        if self.constant != 0 or not terms:
            sign = "-" if self.constant < 0 else "+"
            terms.append(f"{sign} {abs(self.constant)!r}")
        text = " ".join(terms).lstrip("+ ")
        if text.startswith("- "):
            text = "-" + text[2:]
        if self.absolute:
            text = f"abs({text})"
        return f"{text} {self.cmp} {self.threshold!r}"


# ------------------------------------------------------------------ AST nodes

@dataclass(frozen=True)
class Formula:
    pass


@dataclass(frozen=True)
class TrueConst(Formula):
    pass


@dataclass(frozen=True)
class FalseConst(Formula):
    pass


@dataclass(frozen=True)
class Atom(Formula):
    prop: AtomicProposition


@dataclass(frozen=True)
class Not(Formula):
    sub: Formula


@dataclass(frozen=True)
class And(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Or(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Implies(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Next(Formula):
    sub: Formula


@dataclass(frozen=True)
class Finally_(Formula):
    sub: Formula


@dataclass(frozen=True)
class Globally(Formula):
    sub: Formula


@dataclass(frozen=True)
class Until(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Release(Formula):
    left: Formula
    right: Formula


TT = TrueConst()
FF = FalseConst()


def atoms_of(f: Formula) -> set:
    """All atomic propositions referenced by a formula."""
    if isinstance(f, Atom):
        return {f.prop}
    out = set()
    for attr in ("sub", "left", "right"):
        child = getattr(f, attr, None)
        if child is not None:
            out |= atoms_of(child)
    return out


def negate(f: Formula) -> Formula:
    return f.sub if isinstance(f, Not) else Not(f)


def nnf(f: Formula) -> Formula:
    """Negation normal form with F/G rewritten into U/R."""
    if isinstance(f, (TrueConst, FalseConst, Atom)):
        return f
    if isinstance(f, And):
        return And(nnf(f.left), nnf(f.right))
    if isinstance(f, Or):
        return Or(nnf(f.left), nnf(f.right))
    if isinstance(f, Implies):
        return Or(nnf(Not(f.left)), nnf(f.right))
    if isinstance(f, Next):
        return Next(nnf(f.sub))
    if isinstance(f, Finally_):
        return Until(TT, nnf(f.sub))
    if isinstance(f, Globally):
        return Release(FF, nnf(f.sub))
    if isinstance(f, Until):
        return Until(nnf(f.left), nnf(f.right))
    if isinstance(f, Release):
        return Release(nnf(f.left), nnf(f.right))
    # Negation: push inward.
    g = f.sub
    if isinstance(g, TrueConst):
        return FF
    if isinstance(g, FalseConst):
        return TT
    if isinstance(g, Atom):
        return f
    if isinstance(g, Not):
        return nnf(g.sub)
    if isinstance(g, And):
        return Or(nnf(Not(g.left)), nnf(Not(g.right)))
    if isinstance(g, Or):
        return And(nnf(Not(g.left)), nnf(Not(g.right)))
    if isinstance(g, Implies):
        return And(nnf(g.left), nnf(Not(g.right)))
    if isinstance(g, Next):
        return Next(nnf(Not(g.sub)))
    if isinstance(g, Finally_):
        return Release(FF, nnf(Not(g.sub)))
    if isinstance(g, Globally):
        return Until(TT, nnf(Not(g.sub)))
    if isinstance(g, Until):
        return Release(nnf(Not(g.left)), nnf(Not(g.right)))
    if isinstance(g, Release):
        return Until(nnf(Not(g.left)), nnf(Not(g.right)))
    raise TypeError(f"unexpected node {f!r}")


def to_text(f: Formula, var_names) -> str:
    """Concrete syntax; ``parse_ltl(to_text(f)) == f`` structurally."""
    if isinstance(f, TrueConst):
        return "true"
    if isinstance(f, FalseConst):
        return "false"
    if isinstance(f, Atom):
        return f"({f.prop.expression_text(var_names)})"
    if isinstance(f, Not):
        return f"!{to_text(f.sub, var_names)}"
    if isinstance(f, Next):
        return f"X {to_text(f.sub, var_names)}"
    if isinstance(f, Finally_):
        return f"F {to_text(f.sub, var_names)}"
    if isinstance(f, Globally):
        return f"G {to_text(f.sub, var_names)}"
    ops = {And: "&&", Or: "||", Implies: "->", Until: "U", Release: "R"}
    op = ops[type(f)]
    return (f"({to_text(f.left, var_names)} {op} "
            f"{to_text(f.right, var_names)})")


# -------------------------------------------------------------------- parsing

_TEMPORAL_BINARY = {"U", "R"}
_UNARY = {"!", "X", "F", "G"}


class _Lexer:
    _PUNCT = ("&&", "||", "->", "<=", ">=", "<", ">", "!", "(", ")",
              "+", "-", "*", "/")

    def __init__(self, text: str):
        self.text = text
        self.pos = 0
        self.tokens = []
        self.positions = []
        self._scan()
        self.i = 0

    def _scan(self):
        t = self.text
        i = 0
        while i < len(t):
            if t[i].isspace():
                i += 1
                continue
            matched = False
            for p in self._PUNCT:
                if t.startswith(p, i):
                    self.tokens.append(p)
                    self.positions.append(i)
                    i += len(p)
                    matched = True
                    break
            if matched:
                continue
            if t[i].isdigit() or (t[i] == "." and i + 1 < len(t)
                                  and t[i + 1].isdigit()):
                j = i + 1
                while j < len(t) and (t[j].isdigit() or t[j] in ".eE"
                                      or (t[j] in "+-" and t[j - 1] in "eE")):
                    j += 1
                self.tokens.append(t[i:j])
                self.positions.append(i)
                i = j
                continue
            if t[i].isalpha() or t[i] == "_":
                j = i + 1
                while j < len(t) and (t[j].isalnum() or t[j] == "_"):
                    j += 1
                self.tokens.append(t[i:j])
                self.positions.append(i)
                i = j
                continue
            raise LtlSyntaxError(f"unexpected character {t[i]!r}", i)

    def peek(self):
        return self.tokens[self.i] if self.i < len(self.tokens) else None

    def next(self):
        tok = self.peek()
        if tok is None:
            raise LtlSyntaxError("unexpected end of input", len(self.text))
        self.i += 1
        return tok

    def expect(self, tok):
        got = self.peek()
        if got != tok:
            raise LtlSyntaxError(f"expected {tok!r}, got {got!r}",
                                 self.here())
        self.i += 1

    def here(self):
        return (self.positions[self.i] if self.i < len(self.positions)
                else len(self.text))


def _is_number(tok: str) -> bool:
    try:
        float(tok)
        return True
    except ValueError:
        return tok == "pi"


class _Parser:
    def __init__(self, text, var_names, declared):
        self.lex = _Lexer(text)
        self.var_names = tuple(var_names)
        self.declared = dict(declared or {})

    # formula := implies
    def parse(self) -> Formula:
        f = self._implies()
        if self.lex.peek() is not None:
            raise LtlSyntaxError(f"trailing input {self.lex.peek()!r}",
                                 self.lex.here())
        return f

    def _implies(self) -> Formula:
        left = self._or()
        if self.lex.peek() == "->":
            self.lex.next()
            return Implies(left, self._implies())
        return left

    def _or(self) -> Formula:
        f = self._and()
        while self.lex.peek() == "||":
            self.lex.next()
            f = Or(f, self._and())
        return f

    def _and(self) -> Formula:
        f = self._temporal()
        while self.lex.peek() == "&&":
            self.lex.next()
            f = And(f, self._temporal())
        return f

    def _temporal(self) -> Formula:
        left = self._unary()
        tok = self.lex.peek()
        if tok in _TEMPORAL_BINARY:
            self.lex.next()
            right = self._temporal()
            return Until(left, right) if tok == "U" else Release(left, right)
        return left

    def _unary(self) -> Formula:
        tok = self.lex.peek()
        if tok == "!":
            self.lex.next()
            return Not(self._unary())
        if tok == "X":
            self.lex.next()
            return Next(self._unary())
        if tok == "F":
            self.lex.next()
            return Finally_(self._unary())
        if tok == "G":
            self.lex.next()
            return Globally(self._unary())
        return self._primary()

    def _primary(self) -> Formula:
        tok = self.lex.peek()
        if tok == "(":
            mark = self.lex.i
            self.lex.next()
            try:
                f = self._implies()
                self.lex.expect(")")
                return f
            except LtlSyntaxError:
                # Could be a parenthesized linear expression of an atom.
                self.lex.i = mark
                return self._atom()
        if tok == "true":
            self.lex.next()
            return TT
        if tok == "false":
            self.lex.next()
            return FF
        if tok is None:
            raise LtlSyntaxError("unexpected end of input", self.lex.here())
        return self._atom()

    def _atom(self) -> Formula:
        # A bare declared name, unless followed by expression syntax.
        tok = self.lex.peek()
        nxt = (self.lex.tokens[self.lex.i + 1]
               if self.lex.i + 1 < len(self.lex.tokens) else None)
        if (tok not in (None, "abs", "pi", "(") and not _is_number(tok)
                and tok not in ("+", "-")
                and tok not in self.var_names
                and nxt not in ("<", "<=", ">", ">=", "+", "-", "*")):
            self.lex.next()
            if tok in self.declared:
                return Atom(self.declared[tok])
            raise UnknownProposition(f"proposition {tok!r} is not declared "
                                     "and is not a state variable")
        coeffs, constant, absolute = self._linexpr()
        cmp = self.lex.peek()
        if cmp not in _CMP:
            raise LtlSyntaxError(
                f"expected comparator after expression, got {cmp!r}",
                self.lex.here())
        self.lex.next()
        threshold = self._constexpr()
        prop = AtomicProposition(tuple(coeffs), constant, absolute, cmp,
                                 threshold)
        return Atom(prop)

    def _linexpr(self):
        """Returns (coeffs, constant, absolute)."""
        if self.lex.peek() == "abs":
            self.lex.next()
            self.lex.expect("(")
            coeffs, constant = self._linsum()
            self.lex.expect(")")
            return coeffs, constant, True
        if self.lex.peek() == "(":
            self.lex.next()
            coeffs, constant = self._linsum()
            self.lex.expect(")")
            return coeffs, constant, False
        coeffs, constant = self._linsum()
        return coeffs, constant, False

    def _linsum(self):
        coeffs = [0.0] * len(self.var_names)
        constant = 0.0
        sign = 1.0
        first = True
        while True:
            tok = self.lex.peek()
            if tok in ("+", "-"):
                self.lex.next()
                if tok == "-":
                    sign = -sign
                continue
            if tok is None or (not first
                               and tok not in ("+", "-")
                               and not _is_number(tok)
                               and tok != "abs"
                               and tok not in self.var_names):
                break
            c, var = self._term()
            if var is None:
                constant += sign * c
            else:
                coeffs[self.var_names.index(var)] += sign * c
            sign = 1.0
            first = False
            nxt = self.lex.peek()
            if nxt not in ("+", "-"):
                break
        return coeffs, constant

    def _term(self):
        """One additive term: number, pi-expression, var, or coef*var."""
        tok = self.lex.peek()
        if tok in self.var_names:
            self.lex.next()
            return 1.0, tok
        if _is_number(tok):
            value = self._constexpr()
            if self.lex.peek() == "*":
                self.lex.next()
                var = self.lex.next()
                if var not in self.var_names:
                    raise LtlSyntaxError(
                        f"unknown state variable {var!r}", self.lex.here())
                return value, var
            return value, None
        raise LtlSyntaxError(f"unexpected token {tok!r} in expression",
                             self.lex.here())

    def _constexpr(self) -> float:
        tok = self.lex.next()
        sign = 1.0
        while tok in ("+", "-"):
            if tok == "-":
                sign = -sign
            tok = self.lex.next()
        if tok == "pi":
            value = math.pi
        else:
            try:
                value = float(tok)
            except ValueError:
                raise LtlSyntaxError(f"expected a number, got {tok!r}",
                                     self.lex.here()) from None
        while self.lex.peek() in ("*", "/"):
            rhs = (self.lex.tokens[self.lex.i + 1]
                   if self.lex.i + 1 < len(self.lex.tokens) else None)
            if rhs is None or not _is_number(rhs):
                break  # e.g. "2*theta": leave the '*' for the caller
            op = self.lex.next()
            self.lex.next()
            rv = math.pi if rhs == "pi" else float(rhs)
            value = value * rv if op == "*" else value / rv
        return sign * value


def parse_ltl(text: str, var_names, declared=None) -> Formula:
    """Parse a formula over the given state variables; ``declared`` maps
    proposition names to AtomicProposition."""
    return _Parser(text, var_names, declared).parse()


def parse_proposition(name: str, text: str, var_names) -> AtomicProposition:
    """Parse a declared proposition body ``<linexpr> <cmp> <const>``."""
    p = _Parser(text, var_names, {})
    atom = p._atom()
    if p.lex.peek() is not None:
        raise LtlSyntaxError(f"trailing input {p.lex.peek()!r}", p.lex.here())
    if not isinstance(atom, Atom):
        raise LtlSyntaxError(f"{name}: not an atomic proposition")
    prop = atom.prop
    return AtomicProposition(prop.coeffs, prop.constant, prop.absolute,
                             prop.cmp, prop.threshold, name=name)
