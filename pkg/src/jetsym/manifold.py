"""Constraint manifolds: condition sets, differential consequences, rewrite rules.

A ConditionSet holds generator equations G_a = 0; build_manifold closes the set
under total derivatives up to the requested number of rounds, solves each
resulting equation for a leading jet coordinate and triangularizes the rules by
back-substitution.  reduce_modulo then computes normal forms: substitute the
triangular rules once, renormalize, done.

Leading-coordinate selection: among the highest-order jet coordinates in which
the (already reduced) equation is linear with a nonzero coefficient, prefer the
candidate whose solution introduces the fewest new domain restrictions, and
break ties by the lexicographic ranking of the multi-index (so for
x*u_y - y*u_x the rule solves for u_y, and for t*u_x + x*u_t it solves for u_x,
each with a single restriction recorded).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations_with_replacement
from typing import Dict, List, Optional, Sequence, Tuple

import sympy as sp

from .errors import InconsistentManifoldError, NonQuasiLinearError
from .expr import Expression, _coordinate_symbols
from .jets import total_derivative
from .spaces import Coordinate, JetSpace


@dataclass
class ConditionSet:
    """Generators G_a = 0 plus the number of differentiation rounds to close under."""

    space: JetSpace
    generators: Tuple[Expression, ...]
    consequence_order: int = 0
    name: str = ""

    def __post_init__(self):
        self.generators = tuple(self.generators)
        for g in self.generators:
            if g.is_zero:
                raise InconsistentManifoldError("condition generators must be nonzero")

    @property
    def order(self) -> int:
        return max((g.order for g in self.generators), default=0)


@dataclass
class ConstraintManifold:
    """Triangular rewrite rules (leading jet coordinate -> expression)."""

    space: JetSpace
    rules: Dict[Coordinate, Expression] = field(default_factory=dict)
    domain_notes: Tuple[Expression, ...] = ()
    source: Optional[ConditionSet] = None
    unsolved: Tuple[Expression, ...] = ()
    dependent_count: int = 0

    def reduce(self, e: Expression) -> Expression:
        """Normal form of e modulo the manifold (one triangular pass)."""
        if not self.rules:
            return e
        out = e.substitute(self.rules)
        leftovers = {c.sym for c in self.rules} & _coordinate_symbols(out)
        if leftovers:
            raise NonQuasiLinearError(
                f"reduction left rule coordinates {sorted(s.name for s in leftovers)}; "
                "rules are not triangular"
            )
        return out

    def is_zero_on(self, e: Expression) -> bool:
        return self.reduce(e).is_zero

    def note_strings(self) -> Tuple[str, ...]:
        return tuple(f"{n.to_dsl()} != 0" for n in self.domain_notes)

    def extended(
        self,
        equations: Sequence[Expression],
        rounds: int = 0,
        on_unsolvable: str = "raise",
        source: Optional[ConditionSet] = None,
    ) -> "ConstraintManifold":
        """A new manifold with additional equations (and their consequences) solved in."""
        builder = _Builder(self.space, dict(self.rules), list(self.domain_notes))
        builder.unsolved = list(self.unsolved)
        builder.dependent_count = self.dependent_count
        for eq in equations:
            for consequence in _consequences(self.space, eq, rounds):
                builder.add(consequence, on_unsolvable)
        return ConstraintManifold(
            self.space,
            builder.rules,
            tuple(builder.notes),
            source or self.source,
            tuple(builder.unsolved),
            builder.dependent_count,
        )


def identity_manifold(space: JetSpace) -> ConstraintManifold:
    return ConstraintManifold(space)


def _consequences(space: JetSpace, g: Expression, rounds: int) -> List[Expression]:
    """g and its total-derivative consequences, deterministically ordered."""
    out = [g]
    n = len(space.independents)
    for r in range(1, rounds + 1):
        for idx in combinations_with_replacement(range(n), r):
            e = g
            for i in idx:
                e = total_derivative(space, e, i)
            out.append(e)
    return out


class _Builder:
    def __init__(self, space: JetSpace, rules: Dict[Coordinate, Expression], notes: List[Expression]):
        self.space = space
        self.rules = rules
        self.notes = notes
        self.unsolved: List[Expression] = []
        self.dependent_count = 0

    def add(self, eq: Expression, on_unsolvable: str) -> None:
        reduced = eq.substitute(self.rules) if self.rules else eq
        if reduced.is_zero:
            self.dependent_count += 1
            return
        num, _den = reduced.numerator_denominator()
        coords = [c for c in num.free_coordinates(recursive=False) if c.order >= 1]
        if not coords:
            if not num.free_coordinates(recursive=True) and num.atoms() == ():
                raise InconsistentManifoldError(
                    f"conditions imply {num.to_dsl()} = 0: inconsistent manifold"
                )
            self._unsolvable(reduced, on_unsolvable, "no jet coordinate to solve for")
            return
        top = max(c.order for c in coords)
        candidates = []
        for c in coords:
            if c.order != top:
                continue
            poly = sp.Poly(num.sx, c.sym)
            if poly.degree() != 1:
                continue
            coeff = Expression(self.space, poly.nth(1))
            rest = Expression(self.space, poly.nth(0))
            # Solving is only valid if the coordinate does not hide inside atom args.
            rhs = Expression(self.space, sp.cancel(-rest.sx / coeff.sx))
            if c.sym in _coordinate_symbols(rhs) or coeff.is_zero:
                continue
            restriction = coeff.factors() + rhs.denominator_factors()
            new_notes = []
            for f in restriction:
                if all(not (f == n) for n in self.notes + new_notes):
                    new_notes.append(f)
            candidates.append((len(new_notes), self.space.rank(c), c, rhs, new_notes))
        if not candidates:
            self._unsolvable(
                reduced, on_unsolvable,
                "equation is not quasi-linear in any leading jet coordinate",
            )
            return
        best_new = min(c[0] for c in candidates)
        pool = [c for c in candidates if c[0] == best_new]
        pool.sort(key=lambda item: item[1], reverse=True)
        _, _, coord, rhs, new_notes = pool[0]
        # retriangularize: eliminate the new leading coordinate from existing rules
        for lhs, old_rhs in list(self.rules.items()):
            self.rules[lhs] = old_rhs.substitute({coord: rhs})
        self.rules[coord] = rhs
        self.notes.extend(new_notes)

    def _unsolvable(self, reduced: Expression, on_unsolvable: str, why: str) -> None:
        if on_unsolvable == "raise":
            raise NonQuasiLinearError(f"{why}: {reduced.to_dsl()}")
        self.unsolved.append(reduced)


def build_manifold(
    space: JetSpace,
    conditions: ConditionSet,
    rounds: Optional[int] = None,
    on_unsolvable: str = "raise",
) -> ConstraintManifold:
    """Close the condition set under consequences and triangularize into rules."""
    rounds = conditions.consequence_order if rounds is None else rounds
    base = identity_manifold(space)
    out = base.extended(conditions.generators, rounds, on_unsolvable, source=conditions)
    return out
