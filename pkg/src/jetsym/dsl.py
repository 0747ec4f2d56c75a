"""The expression DSL: tokenizer, parser and bit-exact pretty-printer.

Grammar (fixed):

    expr     := term (('+' | '-') term)*
    term     := unary (('*' | '/') unary)*
    unary    := '-' unary | power
    power    := atom ('^' exponent)?
    exponent := '-'? INT | '(' '-'? INT ')'
    atom     := INT | IDENT | IDENT '(' expr (',' expr)* ')'
              | IDENT '[' INT (',' INT)* ']' '(' expr (',' expr)* ')'
              | '(' expr ')'

Identifiers resolve against the ambient JetSpace: declared base variables and
parameters match literally; ``name_suffix`` identifiers resolve to jet
coordinates when ``name`` is a dependent variable and ``suffix`` decomposes
into independent-variable names (so ``u_xy`` and ``u_yx`` are the same
coordinate); identifiers followed by ``(`` or ``[`` must be declared function
symbols.  ``K1[2](t,y,u)`` denotes the partial derivative of K1 with respect
to its second argument slot.

The printer emits the same grammar and is deterministic; parse-print-parse is
a fixed point.
"""

from __future__ import annotations

import re
from typing import List, Optional, Tuple

import sympy as sp

from .errors import DslSyntaxError, OrderOverflowError, UndeclaredSymbolError
from .expr import AppliedFunction, Expression, atom_for_symbol
from .spaces import Coordinate, JetSpace

_TOKEN_RE = re.compile(
    r"""
    (?P<WS>\s+)
  | (?P<NUM>\d+)
  | (?P<IDENT>[A-Za-z][A-Za-z0-9_]*)
  | (?P<OP>[-+*/^(),\[\]])
    """,
    re.VERBOSE,
)


class _Token:
    __slots__ = ("kind", "text", "pos")

    def __init__(self, kind: str, text: str, pos: int):
        self.kind = kind
        self.text = text
        self.pos = pos

    def __repr__(self):
        return f"{self.kind}({self.text!r}@{self.pos})"


def tokenize(text: str) -> List[_Token]:
    out: List[_Token] = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise DslSyntaxError(f"unexpected character {text[pos]!r}", text, pos)
        kind = m.lastgroup
        if kind != "WS":
            out.append(_Token(kind, m.group(), pos))
        pos = m.end()
    out.append(_Token("EOF", "", len(text)))
    return out


def _decompose_suffix(suffix: str, independents: Tuple[str, ...]) -> Optional[List[int]]:
    """Split a jet suffix into independent-variable indices, longest match first."""
    if suffix == "":
        return []
    for name in sorted(set(independents), key=len, reverse=True):
        if suffix.startswith(name):
            rest = _decompose_suffix(suffix[len(name):], independents)
            if rest is not None:
                return [independents.index(name)] + rest
    return None


class Parser:
    def __init__(self, text: str, space: JetSpace):
        self.text = text
        self.space = space
        self.tokens = tokenize(text)
        self.i = 0

    # -- token helpers ----------------------------------------------------

    def peek(self) -> _Token:
        return self.tokens[self.i]

    def next(self) -> _Token:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, kind: str, text: Optional[str] = None) -> _Token:
        tok = self.peek()
        if tok.kind != kind or (text is not None and tok.text != text):
            want = text or kind
            raise DslSyntaxError(f"expected {want!r}, found {tok.text or 'end of input'!r}",
                                 self.text, tok.pos)
        return self.next()

    def at_op(self, *texts: str) -> bool:
        tok = self.peek()
        return tok.kind == "OP" and tok.text in texts

    # -- grammar ----------------------------------------------------------

    def parse(self) -> Expression:
        e = self.expr()
        tok = self.peek()
        if tok.kind != "EOF":
            raise DslSyntaxError(f"unexpected trailing input {tok.text!r}", self.text, tok.pos)
        return e

    def expr(self) -> Expression:
        e = self.term()
        while self.at_op("+", "-"):
            op = self.next().text
            rhs = self.term()
            e = e + rhs if op == "+" else e - rhs
        return e

    def term(self) -> Expression:
        e = self.unary()
        while self.at_op("*", "/"):
            op = self.next().text
            rhs = self.unary()
            e = e * rhs if op == "*" else e / rhs
        return e

    def unary(self) -> Expression:
        if self.at_op("-"):
            self.next()
            return -self.unary()
        return self.power()

    def power(self) -> Expression:
        base = self.atom()
        if self.at_op("^"):
            self.next()
            n = self.exponent()
            return base ** n
        return base

    def exponent(self) -> int:
        sign = 1
        if self.at_op("("):
            self.next()
            if self.at_op("-"):
                self.next()
                sign = -1
            tok = self.expect("NUM")
            self.expect("OP", ")")
            return sign * int(tok.text)
        if self.at_op("-"):
            self.next()
            sign = -1
        tok = self.expect("NUM")
        return sign * int(tok.text)

    def atom(self) -> Expression:
        tok = self.peek()
        if tok.kind == "NUM":
            self.next()
            return Expression.number(self.space, int(tok.text))
        if self.at_op("("):
            self.next()
            e = self.expr()
            self.expect("OP", ")")
            return e
        if tok.kind == "IDENT":
            self.next()
            if self.at_op("(", "["):
                return self.application(tok)
            return self.resolve_coordinate(tok)
        raise DslSyntaxError(f"expected an expression, found {tok.text or 'end of input'!r}",
                             self.text, tok.pos)

    def application(self, name_tok: _Token) -> Expression:
        name = name_tok.text
        if name not in self.space.functions:
            raise UndeclaredSymbolError(
                f"undeclared function symbol {name!r} "
                f"(at offset {name_tok.pos})"
            )
        slots: List[int] = []
        if self.at_op("["):
            self.next()
            slots.append(int(self.expect("NUM").text))
            while self.at_op(","):
                self.next()
                slots.append(int(self.expect("NUM").text))
            self.expect("OP", "]")
        self.expect("OP", "(")
        args = [self.expr()]
        while self.at_op(","):
            self.next()
            args.append(self.expr())
        self.expect("OP", ")")
        arity = self.space.functions[name]
        if len(args) != arity:
            raise DslSyntaxError(
                f"function {name} expects {arity} argument(s), got {len(args)}",
                self.text, name_tok.pos,
            )
        for s in slots:
            if not 1 <= s <= arity:
                raise DslSyntaxError(
                    f"derivative slot {s} out of range for {name}", self.text, name_tok.pos
                )
        return Expression.apply_function(self.space, name, args, slots)

    def resolve_coordinate(self, tok: _Token) -> Expression:
        name = tok.text
        if self.space.has_coordinate(name):
            return Expression.coordinate(self.space, name)
        if "_" in name:
            base, _, suffix = name.partition("_")
            if base in self.space.dependents:
                idx = _decompose_suffix(suffix, self.space.independents)
                if idx is not None:
                    if len(idx) > self.space.max_order:
                        raise OrderOverflowError(
                            f"jet coordinate {name!r} exceeds max derivative order "
                            f"{self.space.max_order}"
                        )
                    return Expression.coordinate(self.space, self.space.jet(base, idx))
        raise UndeclaredSymbolError(
            f"undeclared symbol {name!r} (at offset {tok.pos})"
        )


def parse_expression(text: str, space: JetSpace) -> Expression:
    """Parse DSL text into a canonical Expression."""
    return Parser(text, space).parse()


# ---------------------------------------------------------------------------
# Printer
# ---------------------------------------------------------------------------

_PREC_ADD = 1
_PREC_MUL = 2
_PREC_NEG = 3
_PREC_POW = 4
_PREC_ATOM = 5


def print_atom(atom: AppliedFunction) -> str:
    slots = f"[{','.join(str(s) for s in atom.slots)}]" if atom.slots else ""
    args = ", ".join(_print(a.sx, _PREC_ADD) for a in atom.args)
    return f"{atom.name}{slots}({args})"


def _sorted_args(args) -> list:
    return sorted(args, key=sp.default_sort_key)


def _print_symbol(sx: sp.Symbol) -> str:
    atom = atom_for_symbol(sx)
    if atom is not None:
        return print_atom(atom)
    return sx.name


def _split_mul(sx: sp.Mul):
    coeff = sp.Integer(1)
    num, den = [], []
    for f in sx.args:
        if isinstance(f, (sp.Integer, sp.Rational)):
            coeff *= f
        elif isinstance(f, sp.Pow) and f.exp.is_Integer and f.exp < 0:
            den.append(sp.Pow(f.base, -f.exp))
        else:
            num.append(f)
    return coeff, _sorted_args(num), _sorted_args(den)


def _print_rational(q: sp.Rational) -> str:
    if q.q == 1:
        return str(q.p)
    return f"{q.p}/{q.q}"


def _print(sx: sp.Expr, parent_prec: int) -> str:
    if isinstance(sx, sp.Symbol):
        return _print_symbol(sx)
    if isinstance(sx, (sp.Integer, sp.Rational)):
        s = _print_rational(sx)
        if sx < 0 and parent_prec > _PREC_ADD:
            return f"({s})"
        return s
    if isinstance(sx, sp.Add):
        parts = []
        for i, a in enumerate(_sorted_args(sx.args)):
            s = _print(a, _PREC_ADD)
            if i == 0:
                parts.append(s)
            elif s.startswith("-"):
                parts.append(" - " + s[1:])
            else:
                parts.append(" + " + s)
        out = "".join(parts)
        return f"({out})" if parent_prec > _PREC_ADD else out
    if isinstance(sx, sp.Mul):
        coeff, num, den = _split_mul(sx)
        sign = ""
        if coeff < 0:
            sign = "-"
            coeff = -coeff
        pieces = []
        if coeff != 1 or not num:
            pieces.append(_print_rational(coeff))
        pieces.extend(_print(f, _PREC_MUL) for f in num)
        out = "*".join(pieces)
        if den:
            if len(den) == 1:
                dstr = _print(den[0], _PREC_POW)
            else:
                dstr = "(" + "*".join(_print(f, _PREC_MUL) for f in den) + ")"
            out = f"{out}/{dstr}"
        out = sign + out
        need = parent_prec > _PREC_MUL or (sign and parent_prec > _PREC_ADD)
        return f"({out})" if need else out
    if isinstance(sx, sp.Pow):
        if not sx.exp.is_Integer:
            raise ValueError(f"cannot print non-integer power {sx}")
        n = int(sx.exp)
        base = _print(sx.base, _PREC_POW + 1)
        if n < 0:
            out = f"1/{base}^{-n}" if n != -1 else f"1/{base}"
            return f"({out})" if parent_prec > _PREC_MUL else out
        return f"{base}^{n}"
    raise ValueError(f"cannot print node {type(sx).__name__}: {sx}")


def print_expression(e: Expression) -> str:
    """Deterministic DSL rendering of the canonical form."""
    return _print(e.sx, _PREC_ADD)


# ---------------------------------------------------------------------------
# Vector-field notation: coefficient terms attached to d/d<name>
# ---------------------------------------------------------------------------


def parse_vector_field(text: str, space: JetSpace, name: str = "Q"):
    """Parse operator notation like ``x*d/dy - y*d/dx + u*d/du``.

    Returns a VectorField; coefficients may be any order-0 DSL expressions.
    """
    from .fields import VectorField

    tokens = tokenize(text)
    xi: dict[str, Expression] = {}
    eta: dict[str, Expression] = {}

    i = 0

    def peek(k=0):
        return tokens[min(i + k, len(tokens) - 1)]

    def is_d_slash_d(k: int) -> bool:
        return (
            tokens[k].kind == "IDENT"
            and tokens[k].text == "d"
            and tokens[k + 1].kind == "OP"
            and tokens[k + 1].text == "/"
            and tokens[k + 2].kind == "IDENT"
            and tokens[k + 2].text.startswith("d")
            and len(tokens[k + 2].text) > 1
        )

    sign = 1
    while peek().kind != "EOF":
        tok = peek()
        if tok.kind == "OP" and tok.text in "+-":
            sign = 1 if tok.text == "+" else -1
            i += 1
            continue
        # scan this term for the d/d marker at depth 0
        depth = 0
        j = i
        dpos = None
        while j < len(tokens) and tokens[j].kind != "EOF":
            tk = tokens[j]
            if tk.kind == "OP" and tk.text == "(":
                depth += 1
            elif tk.kind == "OP" and tk.text == ")":
                depth -= 1
            elif depth == 0 and tk.kind == "OP" and tk.text in "+-" and j > i:
                break
            elif depth == 0 and is_d_slash_d(j):
                dpos = j
                break
            j += 1
        if dpos is None:
            raise DslSyntaxError("operator term lacks a d/d<variable> factor", text, tok.pos)
        var = tokens[dpos + 2].text[1:]
        coeff_src = text[tok.pos: tokens[dpos].pos].rstrip()
        if coeff_src.endswith("*"):
            coeff_src = coeff_src[:-1]
        coeff = (
            Expression.number(space, 1)
            if coeff_src.strip() == ""
            else parse_expression(coeff_src, space)
        )
        if sign < 0:
            coeff = -coeff
        target = xi if var in space.independents else None
        if target is None and var in space.dependents:
            target = eta
        if target is None:
            raise DslSyntaxError(f"d/d{var}: {var!r} is not a declared variable", text, tok.pos)
        target[var] = target.get(var, Expression.zero(space)) + coeff
        i = dpos + 3
        sign = 1
    return VectorField(space, xi=xi, eta=eta, name=name)


def print_vector_field(field) -> str:
    parts = []
    for var in field.space.independents + field.space.dependents:
        comp = field.xi.get(var) if var in field.space.independents else field.eta.get(var)
        if comp is None or comp.is_zero:
            continue
        cs = print_expression(comp)
        if cs == "1":
            term = f"d/d{var}"
        elif cs == "-1":
            term = f"-d/d{var}"
        else:
            if ("+" in cs.strip("-") or " - " in cs) and not (cs.startswith("(") and cs.endswith(")")):
                cs = f"({cs})"
            term = f"{cs}*d/d{var}"
        parts.append(term)
    if not parts:
        return "0"
    out = parts[0]
    for p in parts[1:]:
        out += " - " + p[1:] if p.startswith("-") else " + " + p
    return out
