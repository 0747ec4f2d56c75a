"""Exact symbolic expressions over a jet space.

An Expression is a rational function over Q in the Coordinates of its space
plus opaque AppliedFunction atoms (arbitrary functions such as K1(t,y,u) and
their slot-indexed partial derivatives).  Every Expression is kept in a
canonical cancelled numerator/denominator form, which makes the zero test
decidable for this class: atoms and coordinates are algebraically independent
transcendentals, so an Expression is zero exactly when its canonical
numerator is the zero polynomial.

Atoms are interned: an AppliedFunction is identified by its function symbol,
its slot-derivative multiset and the canonical forms of its arguments, and is
represented inside sympy by a single opaque Symbol.  Derivatives of atoms are
new atoms (slot-indexed), never expanded, so composite arguments such as
phi(t, x^2+y^2) cannot capture names.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Dict, Iterable, Mapping, Optional, Sequence, Tuple, Union

import sympy as sp

from .errors import (
    CyclicRulesError,
    DomainRestrictionError,
    EvalDomainError,
    UnboundSymbolError,
    UndeclaredSymbolError,
)
from .spaces import Coordinate, JetSpace

Number = Union[int, Fraction, sp.Rational]

# ---------------------------------------------------------------------------
# Applied-function atoms
# ---------------------------------------------------------------------------

_ATOM_PREFIX = "ƒ#"  # marks interned atom symbols; never valid in the DSL


@dataclass(frozen=True)
class AppliedFunction:
    """An opaque function application, e.g. K1[2](t, y, u).

    ``slots`` is the sorted multiset of 1-based argument slots the function has
    been differentiated against; K1[2] is the partial derivative of K1 with
    respect to its second argument.
    """

    name: str
    args: Tuple["Expression", ...]
    slots: Tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "slots", tuple(sorted(self.slots)))

    @property
    def arity(self) -> int:
        return len(self.args)

    @property
    def order(self) -> int:
        return max((a.order for a in self.args), default=0)

    def derivative(self, slot: int) -> "AppliedFunction":
        if not 1 <= slot <= self.arity:
            raise UndeclaredSymbolError(f"{self.name} has no argument slot {slot}")
        return AppliedFunction(self.name, self.args, self.slots + (slot,))

    def key(self) -> tuple:
        return (self.name, self.slots, tuple(sp.srepr(a.sx) for a in self.args))

    @property
    def sym(self) -> sp.Symbol:
        return _intern_atom(self)

    def __str__(self) -> str:
        from .dsl import print_atom

        return print_atom(self)


_ATOM_REGISTRY: Dict[tuple, Tuple[sp.Symbol, AppliedFunction]] = {}
_ATOM_BY_SYMBOL: Dict[sp.Symbol, AppliedFunction] = {}


def _intern_atom(atom: AppliedFunction) -> sp.Symbol:
    key = atom.key()
    hit = _ATOM_REGISTRY.get(key)
    if hit is not None:
        return hit[0]
    # Content-derived symbol name: deterministic across runs and registries.
    name = _ATOM_PREFIX + atom.name + "|" + ",".join(map(str, atom.slots)) + "|" + "|".join(key[2])
    sym = sp.Symbol(name)
    _ATOM_REGISTRY[key] = (sym, atom)
    _ATOM_BY_SYMBOL[sym] = atom
    return sym


def atom_for_symbol(sym: sp.Symbol) -> Optional[AppliedFunction]:
    return _ATOM_BY_SYMBOL.get(sym)


def is_atom_symbol(sym: sp.Symbol) -> bool:
    return sym in _ATOM_BY_SYMBOL


# ---------------------------------------------------------------------------
# Expression
# ---------------------------------------------------------------------------


def _canonical(raw: sp.Expr) -> sp.Expr:
    out = sp.cancel(raw)
    if out.has(sp.zoo) or out.has(sp.oo) or out.has(sp.nan):
        raise DomainRestrictionError("expression is undefined (division by zero)")
    return out


class Expression:
    """Canonical rational expression over a JetSpace."""

    __slots__ = ("space", "sx")

    def __init__(self, space: JetSpace, raw: sp.Expr, *, canonical: bool = False):
        self.space = space
        self.sx = raw if canonical else _canonical(sp.sympify(raw))

    # -- constructors ------------------------------------------------------

    @staticmethod
    def number(space: JetSpace, value: Number) -> "Expression":
        if isinstance(value, Fraction):
            value = sp.Rational(value.numerator, value.denominator)
        return Expression(space, sp.sympify(value), canonical=True)

    @staticmethod
    def coordinate(space: JetSpace, coord: Union[Coordinate, str]) -> "Expression":
        if isinstance(coord, str):
            coord = space.coordinate(coord)
        return Expression(space, coord.sym, canonical=True)

    @staticmethod
    def apply_function(
        space: JetSpace, name: str, args: Sequence["Expression"], slots: Sequence[int] = ()
    ) -> "Expression":
        if name not in space.functions:
            raise UndeclaredSymbolError(f"undeclared function symbol {name!r}")
        arity = space.functions[name]
        if len(args) != arity:
            raise UndeclaredSymbolError(
                f"function {name} expects {arity} argument(s), got {len(args)}"
            )
        atom = AppliedFunction(name, tuple(args), tuple(slots))
        return Expression(space, atom.sym, canonical=True)

    @staticmethod
    def zero(space: JetSpace) -> "Expression":
        return Expression.number(space, 0)

    # -- structure ---------------------------------------------------------

    def free_coordinates(self, recursive: bool = True) -> Tuple[Coordinate, ...]:
        """Coordinates appearing in the expression; with ``recursive`` the scan
        descends into atom arguments."""
        seen: dict[str, Coordinate] = {}

        def scan(sx: sp.Expr) -> None:
            for sym in sx.free_symbols:
                atom = atom_for_symbol(sym)
                if atom is not None:
                    if recursive:
                        for a in atom.args:
                            scan(a.sx)
                    continue
                c = self.space.by_symbol(sym)
                if c is not None:
                    seen[c.name] = c

        scan(self.sx)
        return tuple(seen[name] for name in sorted(seen))

    def atoms(self, recursive: bool = False) -> Tuple[AppliedFunction, ...]:
        found: dict[tuple, AppliedFunction] = {}

        def scan(sx: sp.Expr) -> None:
            for sym in sx.free_symbols:
                atom = atom_for_symbol(sym)
                if atom is None:
                    continue
                found.setdefault(atom.key(), atom)
                if recursive:
                    for a in atom.args:
                        scan(a.sx)

        scan(self.sx)
        return tuple(found.values())

    @property
    def order(self) -> int:
        """Highest jet order appearing, atom arguments included."""
        return max((c.order for c in self.free_coordinates(recursive=True)), default=0)

    @property
    def is_zero(self) -> bool:
        return self.sx == 0

    def equals_zero(self) -> bool:
        return self.is_zero

    def numerator_denominator(self) -> Tuple["Expression", "Expression"]:
        num, den = sp.fraction(self.sx)
        return (
            Expression(self.space, sp.expand(num), canonical=True),
            Expression(self.space, sp.expand(den), canonical=True),
        )

    def denominator_factors(self) -> Tuple["Expression", ...]:
        """Non-constant irreducible factors of the denominator (domain restrictions)."""
        _, den = sp.fraction(self.sx)
        return self._irreducible_factors(den)

    def factors(self) -> Tuple["Expression", ...]:
        """Non-constant irreducible factors of the numerator."""
        num, _ = sp.fraction(self.sx)
        return self._irreducible_factors(num)

    def _irreducible_factors(self, poly: sp.Expr) -> Tuple["Expression", ...]:
        _, factors = sp.factor_list(poly)
        out = []
        for base, _mult in factors:
            if base.free_symbols:
                out.append(Expression(self.space, sp.expand(base), canonical=True))
        return tuple(sorted(out, key=lambda e: sp.default_sort_key(e.sx)))

    # -- algebra -----------------------------------------------------------

    def _coerce(self, other) -> "Expression":
        if isinstance(other, Expression):
            if other.space is not self.space:
                # Same declaration content is fine; different spaces are a bug upstream.
                if other.space.describe() != self.space.describe():
                    raise UndeclaredSymbolError("cannot mix expressions from different spaces")
            return other
        return Expression.number(self.space, other)

    def __add__(self, other):
        other = self._coerce(other)
        return Expression(self.space, self.sx + other.sx)

    __radd__ = __add__

    def __sub__(self, other):
        other = self._coerce(other)
        return Expression(self.space, self.sx - other.sx)

    def __rsub__(self, other):
        other = self._coerce(other)
        return Expression(self.space, other.sx - self.sx)

    def __mul__(self, other):
        other = self._coerce(other)
        return Expression(self.space, self.sx * other.sx)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = self._coerce(other)
        return Expression(self.space, self.sx / other.sx)

    def __rtruediv__(self, other):
        other = self._coerce(other)
        return Expression(self.space, other.sx / self.sx)

    def __pow__(self, n: int):
        if not isinstance(n, int):
            raise DomainRestrictionError("only integer exponents are supported")
        return Expression(self.space, self.sx ** n)

    def __neg__(self):
        return Expression(self.space, -self.sx, canonical=True)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Expression):
            other = Expression.number(self.space, other)
        return self.sx == other.sx

    def __hash__(self) -> int:
        return hash(self.sx)

    # -- calculus ----------------------------------------------------------

    def diff(self, coord: Union[Coordinate, str]) -> "Expression":
        """Partial derivative treating every Coordinate as an independent symbol.

        Atoms differentiate by the chain rule through their arguments; each
        contribution is a new slot-indexed derivative atom.
        """
        if isinstance(coord, str):
            coord = self.space.coordinate(coord)
        return Expression(self.space, self._diff_sx(self.sx, coord))

    def _diff_sx(self, sx: sp.Expr, coord: Coordinate) -> sp.Expr:
        out = sx.diff(coord.sym)
        for sym in sx.free_symbols:
            atom = atom_for_symbol(sym)
            if atom is None:
                continue
            outer = sx.diff(sym)
            if outer == 0:
                continue
            chain = sp.Integer(0)
            for slot, arg in enumerate(atom.args, start=1):
                darg = self._diff_sx(arg.sx, coord)
                if darg == 0:
                    continue
                chain += atom.derivative(slot).sym * darg
            if chain != 0:
                out += outer * chain
        return out

    def substitute(self, rules: Mapping[Coordinate, "Expression"]) -> "Expression":
        """Simultaneous substitution of coordinates followed by renormalization.

        Rules must be acyclic: no right-hand side may mention a left-hand-side
        Coordinate.  Substitution rewrites atom arguments as well, producing
        fresh atoms.
        """
        if not rules:
            return self
        lhs_syms = {c.sym for c in rules}
        sym_map: Dict[sp.Symbol, sp.Expr] = {}
        for c, e in rules.items():
            if isinstance(e, (int, Fraction)):
                e = Expression.number(self.space, e)
            if any(s in lhs_syms for s in _coordinate_symbols(e)):
                raise CyclicRulesError(
                    f"substitution for {c.name} mentions another rule's left-hand side"
                )
            sym_map[c.sym] = e.sx if isinstance(e, Expression) else sp.sympify(e)
        return Expression(self.space, self._substitute_sx(self.sx, sym_map))

    def _substitute_sx(self, sx: sp.Expr, sym_map: Dict[sp.Symbol, sp.Expr]) -> sp.Expr:
        full: Dict[sp.Symbol, sp.Expr] = {}
        for sym in sx.free_symbols:
            if sym in sym_map:
                # direct mappings win, including explicit atom replacements
                full[sym] = sym_map[sym]
                continue
            atom = atom_for_symbol(sym)
            if atom is None:
                continue
            new_args = []
            changed = False
            for arg in atom.args:
                new_sx = _canonical(self._substitute_sx(arg.sx, sym_map))
                if new_sx != arg.sx:
                    changed = True
                new_args.append(Expression(self.space, new_sx, canonical=True))
            if changed:
                full[sym] = AppliedFunction(atom.name, tuple(new_args), atom.slots).sym
        if not full:
            return sx
        return sx.xreplace(full)

    # -- numerics ----------------------------------------------------------

    def eval(
        self,
        point: Mapping[Union[Coordinate, str], float],
        fns: Optional[Mapping[str, Union["FunctionBinding", Callable[..., float]]]] = None,
    ) -> float:
        """IEEE double evaluation of the canonical form.

        ``point`` binds coordinates (by Coordinate or name); ``fns`` binds the
        function symbols of any atoms present, either to a FunctionBinding (full
        support, including derivative atoms) or to a plain callable (underived
        atoms only).
        """
        values: Dict[sp.Symbol, float] = {}
        for k, v in point.items():
            name = k.name if isinstance(k, Coordinate) else k
            values[sp.Symbol(name)] = float(v)

        def atom_eval(atom: AppliedFunction) -> float:
            binding = (fns or {}).get(atom.name)
            if binding is None:
                raise UnboundSymbolError(f"no numeric binding for function {atom.name!r}")
            argv = [_eval_sympy(a.sx, values, atom_eval) for a in atom.args]
            if isinstance(binding, FunctionBinding):
                return binding.eval(atom.slots, argv)
            if atom.slots:
                raise UnboundSymbolError(
                    f"callable binding for {atom.name!r} cannot evaluate derivative atoms; "
                    "use a FunctionBinding"
                )
            return float(binding(*argv))

        return _eval_sympy(self.sx, values, atom_eval)

    # -- misc ----------------------------------------------------------------

    def to_dsl(self) -> str:
        from .dsl import print_expression

        return print_expression(self)

    def __str__(self) -> str:
        return self.to_dsl()

    def __repr__(self) -> str:
        return f"<Expression {self.to_dsl()}>"


def _coordinate_symbols(e: Union[Expression, int, Fraction]) -> set:
    """All coordinate symbols of an expression, descending into atom arguments."""
    if not isinstance(e, Expression):
        return set()
    out = set()

    def scan(sx: sp.Expr) -> None:
        for sym in sx.free_symbols:
            atom = atom_for_symbol(sym)
            if atom is not None:
                for a in atom.args:
                    scan(a.sx)
            else:
                out.add(sym)

    scan(e.sx)
    return out


def _eval_sympy(
    sx: sp.Expr,
    values: Dict[sp.Symbol, float],
    atom_eval: Callable[[AppliedFunction], float],
) -> float:
    if isinstance(sx, sp.Symbol):
        atom = atom_for_symbol(sx)
        if atom is not None:
            return atom_eval(atom)
        try:
            return values[sx]
        except KeyError:
            raise UnboundSymbolError(f"no numeric value bound for {sx.name!r}") from None
    if isinstance(sx, (sp.Integer, sp.Rational, sp.Float)):
        return float(sx)
    if isinstance(sx, sp.Add):
        return sum(_eval_sympy(a, values, atom_eval) for a in sx.args)
    if isinstance(sx, sp.Mul):
        out = 1.0
        for a in sx.args:
            out *= _eval_sympy(a, values, atom_eval)
        return out
    if isinstance(sx, sp.Pow):
        base = _eval_sympy(sx.base, values, atom_eval)
        exp = sx.exp
        if not exp.is_Integer:
            raise EvalDomainError(f"non-integer exponent in {sx}")
        if base == 0.0 and exp < 0:
            raise EvalDomainError("division by zero during numeric evaluation")
        return base ** int(exp)
    raise EvalDomainError(f"cannot evaluate node {type(sx).__name__}")


# ---------------------------------------------------------------------------
# Numeric bindings for opaque functions
# ---------------------------------------------------------------------------


class FunctionBinding:
    """Concrete instantiation of an opaque function symbol for the numeric side.

    The body is a sympy expression in slot symbols s1..sn; derivative atoms
    evaluate by differentiating the body symbolically in the requested slots.
    """

    def __init__(self, arity: int, body: sp.Expr):
        self.arity = arity
        self.slot_syms = sp.symbols(f"s1:{arity + 1}") if arity else ()
        if arity == 1 and not isinstance(self.slot_syms, tuple):
            self.slot_syms = (self.slot_syms,)
        self.body = sp.sympify(body)
        self._deriv_cache: Dict[Tuple[int, ...], sp.Expr] = {(): self.body}

    @staticmethod
    def random_polynomial(rng, arity: int, degree: int = 2) -> "FunctionBinding":
        """Dense random polynomial with small nonzero rational coefficients."""
        syms = sp.symbols(f"s1:{arity + 1}")
        if arity == 1 and not isinstance(syms, tuple):
            syms = (syms,)
        body = sp.Integer(0)
        from itertools import combinations_with_replacement

        monomials = [()]
        for d in range(1, degree + 1):
            monomials.extend(combinations_with_replacement(range(arity), d))
        for mono in monomials:
            c = sp.Rational(rng.randint(-9, 9), rng.randint(1, 4))
            if c == 0:
                c = sp.Rational(1, 2)
            term = c
            for i in mono:
                term *= syms[i]
            body += term
        return FunctionBinding(arity, body)

    def derivative_body(self, slots: Tuple[int, ...]) -> sp.Expr:
        slots = tuple(sorted(slots))
        if slots not in self._deriv_cache:
            body = self.body
            for s in slots:
                body = body.diff(self.slot_syms[s - 1])
            self._deriv_cache[slots] = body
        return self._deriv_cache[slots]

    def eval(self, slots: Tuple[int, ...], args: Sequence[float]) -> float:
        if len(args) != self.arity:
            raise UnboundSymbolError(
                f"binding expects {self.arity} argument(s), got {len(args)}"
            )
        body = self.derivative_body(slots)
        values = {s: float(v) for s, v in zip(self.slot_syms, args)}
        return _eval_sympy(body, values, lambda a: 0.0)
