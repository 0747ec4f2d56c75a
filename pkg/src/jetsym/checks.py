"""Invariance verdict engines.

Each checker prolongs the candidate operator, applies it to the target
expression(s), reduces the result modulo the appropriate constraint manifold
and reports a Verdict: the boolean outcome, the residual that had to vanish,
the manifold used and any domain restrictions picked up along the way.

The manifolds are built per check:

  - Lie invariance: the equation's own solution manifold (F = 0 solved for its
    leading derivative; if F is not quasi-linear there the residual is checked
    absolutely and the Verdict says so).
  - Q-conditional invariance: F = 0 together with the characteristic condition
    Q[u] = 0 and its consequences up to ord(F) - 1 rounds; both the equation
    residual and the condition residual must vanish.
  - Conditional invariance: F = 0 together with a user-supplied condition set
    (consequences to ord(F) - ord(G) rounds per condition); also reports
    whether the operator is a plain Lie symmetry of F, and flags the verdict
    "proper" only when it is not.
  - Differential invariants: no equation; absolute invariance demands the
    applied operator vanish identically, the conditional variant reduces
    modulo the condition manifold and also requires the conditions themselves
    to be invariant.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple, Union

from .errors import NonQuasiLinearError
from .expr import Expression
from .fields import VectorField, prolong
from .manifold import ConditionSet, ConstraintManifold, build_manifold, identity_manifold
from .spaces import JetSpace


@dataclass
class Verdict:
    """Outcome of an invariance check."""

    kind: str
    holds: bool
    residual: Expression
    residuals: Dict[str, Expression] = field(default_factory=dict)
    manifold: Optional[ConstraintManifold] = None
    domain_notes: Tuple[str, ...] = ()
    proper: Optional[bool] = None
    notes: Tuple[str, ...] = ()
    sub: Dict[str, "Verdict"] = field(default_factory=dict)

    def to_dict(self, include_manifold: bool = True) -> dict:
        out = {
            "kind": self.kind,
            "holds": self.holds,
            "residual": self.residual.to_dsl(),
            "residuals": {k: v.to_dsl() for k, v in self.residuals.items()},
            "domain_notes": list(self.domain_notes),
            "notes": list(self.notes),
        }
        if self.proper is not None:
            out["proper"] = self.proper
        if include_manifold and self.manifold is not None:
            out["manifold"] = {
                "rules": {c.name: r.to_dsl() for c, r in self.manifold.rules.items()},
                "notes": list(self.manifold.note_strings()),
                "unsolved": [e.to_dsl() for e in self.manifold.unsolved],
            }
        if self.sub:
            out["sub"] = {k: v.to_dict(include_manifold=False) for k, v in self.sub.items()}
        return out


def _fields_list(fields: Union[VectorField, Sequence[VectorField]]) -> List[VectorField]:
    if isinstance(fields, VectorField):
        return [fields]
    return list(fields)


def _first_failing(residuals: Dict[str, Expression], space: JetSpace) -> Expression:
    for r in residuals.values():
        if not r.is_zero:
            return r
    return Expression.zero(space)


def _collect_notes(manifold: ConstraintManifold, *exprs: Expression) -> Tuple[str, ...]:
    notes = list(manifold.note_strings())
    for e in exprs:
        for f in e.denominator_factors():
            s = f"{f.to_dsl()} != 0"
            if s not in notes:
                notes.append(s)
    return tuple(notes)


def equation_manifold(
    space: JetSpace, equation: Expression, base: Optional[ConstraintManifold] = None
) -> Tuple[ConstraintManifold, Tuple[str, ...]]:
    """Extend a manifold with the equation solved for its leading derivative.

    Returns the manifold and any advisory notes (non-quasi-linear fallback)."""
    base = base if base is not None else identity_manifold(space)
    m = base.extended([equation], rounds=0, on_unsolvable="note")
    notes: Tuple[str, ...] = ()
    if len(m.unsolved) > len(base.unsolved):
        notes = (
            "equation not solvable for a leading derivative; residual checked "
            "modulo the remaining rules only",
        )
    return m, notes


def check_lie_invariance(field: VectorField, equation: Expression) -> Verdict:
    """Classical Lie invariance: pr Q (F) = 0 on the manifold F = 0."""
    space = field.space
    order = max(equation.order, 1)
    pf = prolong(field, order)
    applied = pf.apply(equation)
    manifold, notes = equation_manifold(space, equation)
    residual = manifold.reduce(applied)
    return Verdict(
        kind="lie",
        holds=residual.is_zero,
        residual=residual,
        residuals={"equation": residual},
        manifold=manifold,
        domain_notes=_collect_notes(manifold, equation),
        notes=notes,
    )


def check_q_conditional(field: VectorField, equation: Expression) -> Verdict:
    """Q-conditional invariance: the joint system {F = 0, Q[u] = 0 (with
    consequences)} must be invariant under Q; both residuals are reported."""
    space = field.space
    order = max(equation.order, 1)
    characteristics = field.characteristic()
    conditions = ConditionSet(
        space,
        tuple(q for q in characteristics.values() if not q.is_zero),
        consequence_order=max(order - 1, 0),
        name="Q[u]",
    )
    manifold = build_manifold(space, conditions)
    manifold, notes = equation_manifold(space, equation, base=manifold)
    pf = prolong(field, order)
    residuals: Dict[str, Expression] = {
        "equation": manifold.reduce(pf.apply(equation)),
    }
    for dep, q in characteristics.items():
        if not q.is_zero:
            residuals[f"characteristic {dep}"] = manifold.reduce(pf.apply(q))
    holds = all(r.is_zero for r in residuals.values())
    return Verdict(
        kind="q-conditional",
        holds=holds,
        residual=_first_failing(residuals, space),
        residuals=residuals,
        manifold=manifold,
        domain_notes=_collect_notes(manifold, equation),
        notes=notes,
    )


def check_conditional_invariance(
    field: VectorField,
    equation: Expression,
    conditions: ConditionSet,
    rounds: Optional[int] = None,
) -> Verdict:
    """Conditional invariance under a general condition set G_a = 0.

    The joint system {F = 0, G = 0 with consequences} must be invariant;
    the verdict is flagged proper only when the operator is not already a
    Lie symmetry of F alone."""
    space = field.space
    order = max(equation.order, 1)
    if rounds is None:
        rounds = max(order - conditions.order, 0)
    manifold = build_manifold(space, conditions, rounds=rounds)
    manifold, notes = equation_manifold(space, equation, base=manifold)
    pf = prolong(field, order)
    residuals: Dict[str, Expression] = {
        "equation": manifold.reduce(pf.apply(equation)),
    }
    for k, g in enumerate(conditions.generators, start=1):
        residuals[f"condition {k}: {g.to_dsl()}"] = manifold.reduce(pf.apply(g))
    holds = all(r.is_zero for r in residuals.values())
    lie = check_lie_invariance(field, equation)
    return Verdict(
        kind="conditional",
        holds=holds,
        residual=_first_failing(residuals, space),
        residuals=residuals,
        manifold=manifold,
        domain_notes=_collect_notes(manifold, equation, *conditions.generators),
        proper=bool(holds and not lie.holds),
        notes=notes,
        sub={"lie": lie},
    )


def check_absolute_invariant(
    fields: Union[VectorField, Sequence[VectorField]], invariant: Expression
) -> Verdict:
    """Absolute differential invariant: annihilated identically by every field."""
    flds = _fields_list(fields)
    space = flds[0].space
    order = invariant.order
    residuals: Dict[str, Expression] = {}
    for f in flds:
        pf = prolong(f, order)
        residuals[f.name] = pf.apply(invariant)
    holds = all(r.is_zero for r in residuals.values())
    return Verdict(
        kind="absolute-invariant",
        holds=holds,
        residual=_first_failing(residuals, space),
        residuals=residuals,
        manifold=None,
        domain_notes=(),
    )


def check_conditional_differential_invariant(
    fields: Union[VectorField, Sequence[VectorField]],
    invariant: Expression,
    conditions: ConditionSet,
    rounds: Optional[int] = None,
) -> Verdict:
    """Conditional differential invariant: on the condition manifold, the
    prolonged fields must annihilate both the invariant and the conditions.

    Prolongation order is max(ord I, ord G); consequences close the manifold
    up to that order."""
    flds = _fields_list(fields)
    space = flds[0].space
    p_order = max(invariant.order, conditions.order, 1)
    if rounds is None:
        rounds = max(p_order - conditions.order, 0)
    manifold = build_manifold(space, conditions, rounds=rounds)
    residuals: Dict[str, Expression] = {}
    for f in flds:
        pf = prolong(f, p_order)
        residuals[f"{f.name}(invariant)"] = manifold.reduce(pf.apply(invariant))
        for k, g in enumerate(conditions.generators, start=1):
            residuals[f"{f.name}(condition {k})"] = manifold.reduce(pf.apply(g))
    holds = all(r.is_zero for r in residuals.values())
    return Verdict(
        kind="conditional-invariant",
        holds=holds,
        residual=_first_failing(residuals, space),
        residuals=residuals,
        manifold=manifold,
        domain_notes=_collect_notes(manifold, invariant),
    )
