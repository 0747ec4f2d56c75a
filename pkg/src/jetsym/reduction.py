"""Ansatz reduction, translation reduction, hidden symmetry, pipelines.

apply_ansatz substitutes u = phi(invariant variables) into an equation by the
chain rule, eliminates the old independents polynomially (using the defining
relation of each new variable), tests that nothing outside the new variables
survives (by applying the geometric parts of the reduction operators, which is
robust against algebraically disguised dependence), and finally pins a section
to emit the reduced equation over the reduced jet space.

check_hidden_symmetry composes a reduction with two Lie checks: the candidate
operator, projected to the reduced variables, must be a symmetry of the
reduced equation while the unprojected operator fails on the original one.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import sympy as sp

from .checks import Verdict, check_lie_invariance
from .errors import (
    DomainRestrictionError,
    NonInvertibleTransformError,
    NotReducibleError,
    ProjectionError,
    SingularSectionError,
)
from .expr import AppliedFunction, Expression, atom_for_symbol, _coordinate_symbols
from .fields import VectorField
from .spaces import Coordinate, JetSpace, declare_space


def _rehost(e: Expression, target: JetSpace) -> Expression:
    """Rebuild an expression over another space; coordinates map by name."""

    def convert(sx: sp.Expr) -> sp.Expr:
        mapping: Dict[sp.Symbol, sp.Expr] = {}
        for sym in sx.free_symbols:
            atom = atom_for_symbol(sym)
            if atom is not None:
                new_args = tuple(
                    Expression(target, convert(a.sx)) for a in atom.args
                )
                mapping[sym] = AppliedFunction(atom.name, new_args, atom.slots).sym
                continue
            if not target.has_coordinate(sym.name):
                raise ProjectionError(
                    f"coordinate {sym.name!r} does not exist in the target space"
                )
        return sx.xreplace(mapping) if mapping else sx

    return Expression(target, convert(e.sx))


def _substitute_raw(e: Expression, sym_map: Dict[sp.Symbol, sp.Expr]) -> Expression:
    """Simultaneous substitution without the acyclicity guard (renamings)."""
    return Expression(e.space, e._substitute_sx(e.sx, sym_map))


def _rewrite_square(e: Expression, var: sp.Symbol, repl: sp.Expr) -> Expression:
    """Replace var^2 by repl throughout, descending into atom arguments.

    Works on numerator and denominator separately so that even powers of
    ``var`` disappear completely; odd powers keep a single factor."""

    def rewrite_poly(p: sp.Expr) -> sp.Expr:
        p = sp.expand(p)
        if not p.has(var):
            return p
        poly = sp.Poly(p, var)
        out = sp.Integer(0)
        for (k,), coeff in poly.terms():
            out += coeff * var ** (k % 2) * repl ** (k // 2)
        return sp.expand(out)

    def rewrite_expr(ex: Expression) -> Expression:
        sym_map: Dict[sp.Symbol, sp.Expr] = {}
        for sym in ex.sx.free_symbols:
            atom = atom_for_symbol(sym)
            if atom is None:
                continue
            new_args = tuple(rewrite_expr(a) for a in atom.args)
            if any(na.sx != a.sx for na, a in zip(new_args, atom.args)):
                sym_map[sym] = AppliedFunction(atom.name, new_args, atom.slots).sym
        sx = ex.sx.xreplace(sym_map) if sym_map else ex.sx
        num, den = sp.fraction(sp.cancel(sx))
        return Expression(ex.space, rewrite_poly(num) / rewrite_poly(den))

    return rewrite_expr(e)


@dataclass
class Ansatz:
    """u = phi(retained old independents, new invariant variables)."""

    space: JetSpace
    new_vars: Tuple[Tuple[str, Expression], ...]
    retained: Tuple[str, ...] = ()
    phi: str = "phi"
    solve_var: Optional[str] = None
    sqrt_var: Optional[str] = None
    operators: Tuple[VectorField, ...] = ()
    name: str = ""

    def __post_init__(self):
        self.new_vars = tuple((n, e) for n, e in self.new_vars)
        self.retained = tuple(self.retained)
        for _, e in self.new_vars:
            if e.order > 0 or any(
                c.kind not in ("independent", "parameter")
                for c in e.free_coordinates()
            ):
                raise NotReducibleError(
                    "new ansatz variables must be expressions in the old independents"
                )
        self._check_independence()

    def _check_independence(self) -> None:
        """New variables plus retained ones must be functionally independent."""
        rng = random.Random(20_24)
        inds = self.space.independents
        point = {name: rng.uniform(0.4, 1.7) for name in inds}
        rows = []
        for name in self.retained:
            rows.append([1.0 if j == name else 0.0 for j in inds])
        for _, e in self.new_vars:
            rows.append([e.diff(j).eval(point) for j in inds])
        rank = np.linalg.matrix_rank(np.array(rows)) if rows else 0
        if rank != len(rows):
            raise NotReducibleError("ansatz variables are not functionally independent")

    @property
    def reduced_independents(self) -> Tuple[str, ...]:
        return self.retained + tuple(n for n, _ in self.new_vars)

    def reduced_space(self) -> JetSpace:
        return declare_space(
            self.reduced_independents,
            (self.phi,),
            self.space.max_order,
            parameters=self.space.parameters,
            functions=self.space.functions,
            reduced=True,
        )

    def bridge_space(self) -> Tuple[JetSpace, str]:
        """Scratch space holding both the old independents and the new variables."""
        section = "s"
        taken = set(self.space.independents) | set(self.space.dependents) | set(
            self.space.parameters
        ) | {n for n, _ in self.new_vars}
        while section in taken:
            section += "s"
        space = declare_space(
            self.space.independents + tuple(n for n, _ in self.new_vars),
            (self.phi,),
            self.space.max_order,
            parameters=self.space.parameters + (section,),
            functions=self.space.functions,
            reduced=True,
        )
        return space, section

    # -- chain rule --------------------------------------------------------

    def phi_atom(self) -> Expression:
        args = tuple(
            Expression.coordinate(self.space, n) for n in self.retained
        ) + tuple(e for _, e in self.new_vars)
        atom = AppliedFunction(self.phi, args, ())
        return Expression(self.space, atom.sym, canonical=True)

    def jet_substitution(self, dep: Optional[str] = None) -> Dict[Coordinate, Expression]:
        """Map every u-jet coordinate to its chain-rule expansion in phi atoms."""
        dep = dep or self.space.dependents[0]
        phi = self.phi_atom()
        out: Dict[Coordinate, Expression] = {self.space.coordinate(dep): phi}
        cache: Dict[Tuple[int, ...], Expression] = {(): phi}
        for coord in self.space.jets(min_order=1):
            if coord.base != dep:
                continue
            idx = coord.multi_index
            parent = cache[idx[:-1]]
            e = parent.diff(self.space.independents[idx[-1]])
            cache[idx] = e
            out[coord] = e
        return out

def radial_ansatz(space: JetSpace, operators: Sequence[VectorField] = ()) -> Ansatz:
    """u = phi(t, r) with r = x**2 + y**2 on a (t, x, y) space."""
    from .dsl import parse_expression

    return Ansatz(
        space,
        new_vars=(("r", parse_expression("x^2 + y^2", space)),),
        retained=("t",),
        solve_var="y",
        sqrt_var="x",
        operators=tuple(operators),
        name="radial",
    )


@dataclass
class ReductionResult:
    ok: bool
    reduced: Optional[Expression]
    residuals: Tuple[Expression, ...]
    ansatz: Ansatz
    notes: Tuple[str, ...] = ()
    trace: dict = field(default_factory=dict)

    def raise_for_failure(self) -> "ReductionResult":
        if not self.ok:
            raise NotReducibleError(
                "equation is not reducible by the ansatz; residual dependence: "
                + "; ".join(r.to_dsl() for r in self.residuals),
                result=self,
            )
        return self


def apply_ansatz(equation: Expression, ansatz: Ansatz, strict: bool = False) -> ReductionResult:
    """Reduce an equation by the ansatz; see the module docstring for the steps."""
    space = ansatz.space
    bridge, section_name = ansatz.bridge_space()

    # 1. chain-rule substitution of every u-jet
    substituted = equation.substitute(ansatz.jet_substitution())

    # 2. move to the bridge space and turn phi atoms into jet coordinates
    retarget: Dict[sp.Symbol, sp.Expr] = {}
    expected = tuple(
        sp.srepr(Expression.coordinate(space, n).sx) for n in ansatz.retained
    ) + tuple(sp.srepr(e.sx) for _, e in ansatz.new_vars)
    names = ansatz.reduced_independents

    def scan_atoms(sx: sp.Expr) -> None:
        for sym in sx.free_symbols:
            atom = atom_for_symbol(sym)
            if atom is None:
                continue
            if atom.name == ansatz.phi:
                if tuple(sp.srepr(a.sx) for a in atom.args) != expected:
                    raise NotReducibleError(
                        f"{ansatz.phi} appears with unexpected arguments"
                    )
                idx = tuple(
                    sorted(bridge.independent_index(names[s - 1]) for s in atom.slots)
                )
                retarget[sym] = bridge.jet(ansatz.phi, idx).sym
            else:
                for a in atom.args:
                    scan_atoms(a.sx)

    scan_atoms(substituted.sx)
    work = _substitute_raw(Expression(bridge, substituted.sx, canonical=True), retarget)

    # 3. polynomial elimination via each new variable's defining relation
    eliminations: List[Tuple[sp.Symbol, sp.Expr]] = []
    for var_name, defn in ansatz.new_vars:
        target = _pick_elimination_var(ansatz, var_name, defn)
        sv = sp.Symbol(target)
        poly = sp.Poly(defn.sx, sv)
        v_sym = sp.Symbol(var_name)
        if poly.degree() == 2 and poly.nth(1) == 0:
            c2 = poly.nth(2)
            repl = sp.cancel((v_sym - poly.nth(0)) / c2)
            eliminations.append((sv, repl))
        elif poly.degree() == 1:
            c1 = poly.nth(1)
            repl = sp.cancel((v_sym - poly.nth(0)) / c1)
            work = _substitute_raw(work, {sv: repl})
            continue
        else:
            raise NotReducibleError(
                f"cannot eliminate {target!r} from {var_name} = {defn.to_dsl()}"
            )
        work = _rewrite_square(work, sv, repl)

    def eliminate(e: Expression) -> Expression:
        for sv, repl in eliminations:
            e = _rewrite_square(e, sv, repl)
        return e

    # 4. residual dependence test: geometric annihilators, else syntactic
    residuals: List[Expression] = []
    if ansatz.operators:
        for op in ansatz.operators:
            geo = Expression.zero(bridge)
            for ind in space.independents:
                comp = op.xi.get(ind)
                if comp is None or comp.is_zero:
                    continue
                geo = geo + _rehost(comp, bridge) * work.diff(bridge.coordinate(ind))
            geo = eliminate(geo)
            if not geo.is_zero:
                residuals.append(geo)
    else:
        drop = set(space.independents) - set(ansatz.retained)
        for c in work.free_coordinates():
            if c.name in drop:
                residuals.append(work)
                break

    if residuals:
        result = ReductionResult(False, None, tuple(residuals), ansatz)
        if strict:
            result.raise_for_failure()
        return result

    # 5. pin the section to emit the reduced equation
    notes: List[str] = []
    section_sym = sp.Symbol(section_name)
    section_map: Dict[sp.Symbol, sp.Expr] = {}
    sqrt_var = _pick_sqrt_var(ansatz) if ansatz.new_vars else None
    for ind in space.independents:
        if ind in ansatz.retained:
            continue
        section_map[sp.Symbol(ind)] = section_sym if ind == sqrt_var else sp.Integer(0)
    used_section = any(sym in _coordinate_symbols(work) for sym in section_map)
    if section_map:
        try:
            work = _substitute_raw(work, section_map)
        except DomainRestrictionError as exc:
            raise SingularSectionError(
                f"expression is singular on the section: {exc}"
            ) from exc
        # on the section, section_sym^2 equals the first new variable's value
        var_name, defn = ansatz.new_vars[0]
        poly = sp.Poly(defn.sx, sp.Symbol(sqrt_var))
        if poly.degree() == 2 and poly.nth(1) == 0:
            rest = _substitute_raw(
                Expression(bridge, poly.nth(0), canonical=True), section_map
            )
            repl = sp.cancel((sp.Symbol(var_name) - rest.sx) / poly.nth(2))
            work = _rewrite_square(work, section_sym, repl)
        if section_sym in _coordinate_symbols(work):
            raise SingularSectionError(
                "odd powers of the section parameter survive; the expression is "
                "not single-valued on the chart"
            )
        if used_section:
            notes.append(f"{ansatz.new_vars[0][0]} > 0 on the chosen chart")

    reduced = _rehost(work, ansatz.reduced_space())
    trace = {
        "jets": {c.name: e.to_dsl() for c, e in ansatz.jet_substitution().items()},
        "new_vars": {n: e.to_dsl() for n, e in ansatz.new_vars},
        "section": {str(k): str(v) for k, v in section_map.items()},
    }
    return ReductionResult(True, reduced, (), ansatz, tuple(notes), trace)


def _pick_elimination_var(ansatz: Ansatz, var_name: str, defn: Expression) -> str:
    if ansatz.solve_var is not None:
        return ansatz.solve_var
    candidates = [
        c.name
        for c in defn.free_coordinates()
        if c.kind == "independent" and c.name not in ansatz.retained
    ]
    if not candidates:
        raise NotReducibleError(f"no eliminable variable in {var_name} = {defn.to_dsl()}")
    return sorted(candidates, key=ansatz.space.independent_index)[-1]


def _pick_sqrt_var(ansatz: Ansatz) -> str:
    """Which eliminated variable becomes sqrt(new variable) on the section.

    Default chart: the first non-retained independent whose square enters the
    defining expression with a positive coefficient (x = sqrt(r) for the
    radial chart, the timelike t = sqrt(rho) for the signature (1,-1,-1))."""
    if ansatz.sqrt_var is not None:
        return ansatz.sqrt_var
    _, defn = ansatz.new_vars[0]
    for ind in ansatz.space.independents:
        if ind in ansatz.retained:
            continue
        poly = sp.Poly(defn.sx, sp.Symbol(ind))
        if poly.degree() == 2 and sp.sympify(poly.nth(2)).is_positive:
            return ind
    return _pick_elimination_var(ansatz, *ansatz.new_vars[0])


# ---------------------------------------------------------------------------
# Translation reduction and hidden symmetry
# ---------------------------------------------------------------------------


def translation_field(space: JetSpace, direction: str, name: Optional[str] = None) -> VectorField:
    return VectorField(
        space,
        xi={direction: Expression.number(space, 1)},
        name=name or f"d/d{direction}",
    )


def reduced_translation_space(space: JetSpace, direction: str) -> JetSpace:
    keep = tuple(n for n in space.independents if n != direction)
    return declare_space(
        keep,
        space.dependents,
        space.max_order,
        parameters=space.parameters,
        functions=space.functions,
    )


def reduce_by_translation(equation: Expression, direction: str) -> Expression:
    """Drop one independent direction: requires Lie invariance under the
    translation, substitutes the direction's jets to zero and rehosts."""
    space = equation.space
    i = space.independent_index(direction)
    explicit = equation.diff(direction)
    if not explicit.is_zero:
        raise NotReducibleError(
            f"equation depends explicitly on {direction}: {explicit.to_dsl()}"
        )
    lie = check_lie_invariance(translation_field(space, direction), equation)
    if not lie.holds:
        raise NotReducibleError(
            f"equation is not invariant under d/d{direction}; residual "
            + lie.residual.to_dsl()
        )
    rules = {
        c: Expression.zero(space)
        for c in space.jets(min_order=1)
        if i in c.multi_index
    }
    dropped = equation.substitute(rules)
    return _rehost(dropped, reduced_translation_space(space, direction))


def project_field(
    X: VectorField, reduction: Union[str, Ansatz], reduced_space: JetSpace
) -> VectorField:
    """The reduced-variable projection X1 of X; raises ProjectionError when the
    components depend on eliminated variables (the projection is undefined)."""
    space = X.space
    if isinstance(reduction, str):
        direction = reduction
        xi = {}
        eta = {}
        try:
            for ind in reduced_space.independents:
                comp = X.xi.get(ind)
                if comp is not None and not comp.is_zero:
                    xi[ind] = _rehost(comp, reduced_space)
            for dep in reduced_space.dependents:
                comp = X.eta.get(dep)
                if comp is not None and not comp.is_zero:
                    eta[dep] = _rehost(comp, reduced_space)
        except ProjectionError as exc:
            raise ProjectionError(
                f"{X.name} does not project along d/d{direction}: {exc}"
            ) from exc
        return VectorField(reduced_space, xi, eta, name=f"{X.name}|reduced")

    ansatz = reduction
    xi = {}
    for ind in ansatz.retained:
        comp = X.xi.get(ind)
        if comp is not None and not comp.is_zero:
            xi[ind] = _push_order0(comp, ansatz, reduced_space)
    for var_name, defn in ansatz.new_vars:
        comp = X.first_order_action(defn)
        if not comp.is_zero:
            xi[var_name] = _push_order0(comp, ansatz, reduced_space)
    eta = {}
    dep = space.dependents[0]
    comp = X.eta.get(dep)
    if comp is not None and not comp.is_zero:
        eta[ansatz.phi] = _push_order0(comp, ansatz, reduced_space)
    return VectorField(reduced_space, xi, eta, name=f"{X.name}|reduced")


def _push_order0(e: Expression, ansatz: Ansatz, reduced_space: JetSpace) -> Expression:
    """Push an order-0 expression through the ansatz variable map."""
    dep = ansatz.space.dependents[0]
    subbed = e.substitute({ansatz.space.coordinate(dep): ansatz.phi_atom()})
    result = apply_ansatz(subbed, ansatz)
    if not result.ok:
        raise ProjectionError(
            "field component is not expressible in the reduced variables: "
            + "; ".join(r.to_dsl() for r in result.residuals)
        )
    return _rehost(result.reduced, reduced_space)


def check_hidden_symmetry(
    equation: Expression,
    reduction: Union[str, Ansatz],
    candidate: VectorField,
) -> Verdict:
    """Hidden symmetry: the projected candidate is a Lie symmetry of the
    reduced equation while the candidate itself is not one of the original."""
    if isinstance(reduction, str):
        reduced = reduce_by_translation(equation, reduction)
    else:
        reduced = apply_ansatz(equation, reduction, strict=True).reduced
    x1 = project_field(candidate, reduction, reduced.space)
    lie_reduced = check_lie_invariance(x1, reduced)
    lie_original = check_lie_invariance(candidate, equation)
    holds = lie_reduced.holds and not lie_original.holds
    notes = []
    if lie_reduced.holds and lie_original.holds:
        notes.append(
            f"{candidate.name} is already a Lie symmetry of the original equation; "
            "the symmetry is not hidden"
        )
    return Verdict(
        kind="hidden",
        holds=holds,
        residual=lie_reduced.residual,
        residuals={
            "reduced equation": lie_reduced.residual,
            "original equation": lie_original.residual,
        },
        manifold=lie_reduced.manifold,
        domain_notes=lie_reduced.domain_notes,
        notes=tuple(notes),
        sub={"lie_reduced": lie_reduced, "lie_original": lie_original},
    )


# ---------------------------------------------------------------------------
# Point transformations and the classification pipeline
# ---------------------------------------------------------------------------


@dataclass
class PointTransform:
    """Fibre-preserving invertible point transformation, given with its inverse.

    ``forward`` maps each listed variable to its image expressed in the old
    variables; ``inverse`` expresses each old variable in the new ones (same
    names).  Variables not listed are fixed."""

    forward: Dict[str, str]
    inverse: Dict[str, str]
    name: str = "T"

    def apply(self, equation: Expression) -> Expression:
        from .dsl import parse_expression

        space = equation.space
        dep = space.dependents[0]
        fwd = {v: parse_expression(txt, space) for v, txt in self.forward.items()}
        inv = {v: parse_expression(txt, space) for v, txt in self.inverse.items()}
        for v in list(fwd) + list(inv):
            if v not in space.independents and v != dep:
                raise NonInvertibleTransformError(f"transform touches unknown variable {v!r}")
        for v, e in list(fwd.items()) + list(inv.items()):
            if v != dep and any(c.kind != "independent" and c.kind != "parameter"
                                for c in e.free_coordinates()):
                raise NonInvertibleTransformError(
                    "independent-variable maps must be fibre preserving"
                )
        # verify both compositions are the identity
        for v in set(fwd) | set(inv):
            fv = fwd.get(v, Expression.coordinate(space, v))
            composed = _substitute_raw(fv, {sp.Symbol(w): e.sx for w, e in inv.items()})
            if not (composed - Expression.coordinate(space, v)).is_zero:
                raise NonInvertibleTransformError(
                    f"inverse does not invert the map on {v!r}"
                )
            iv = inv.get(v, Expression.coordinate(space, v))
            composed = _substitute_raw(iv, {sp.Symbol(w): e.sx for w, e in fwd.items()})
            if not (composed - Expression.coordinate(space, v)).is_zero:
                raise NonInvertibleTransformError(
                    f"map does not invert the inverse on {v!r}"
                )

        # new dependent as a function of the old variables, via an opaque atom
        ind_args = tuple(
            fwd.get(n, Expression.coordinate(space, n)) for n in space.independents
        )
        new_u_atom = Expression(
            space, AppliedFunction(dep, ind_args, ()).sym, canonical=True
        )
        u_of_old = inv.get(dep, Expression.coordinate(space, dep)).substitute(
            {space.coordinate(dep): new_u_atom}
        )

        # chain-rule map for every jet of the old dependent
        jet_map: Dict[Coordinate, Expression] = {space.coordinate(dep): u_of_old}
        cache = {(): u_of_old}
        for coord in space.jets(min_order=1):
            idx = coord.multi_index
            parent = cache[idx[:-1]]
            e = parent.diff(space.independents[idx[-1]])
            cache[idx] = e
            jet_map[coord] = e
        out = equation.substitute(jet_map)

        # retarget the atom's jets onto ordinary jet coordinates
        expected = tuple(sp.srepr(a.sx) for a in ind_args)
        mapping: Dict[sp.Symbol, sp.Expr] = {}

        def scan(sx: sp.Expr) -> None:
            for sym in sx.free_symbols:
                atom = atom_for_symbol(sym)
                if atom is None:
                    continue
                if atom.name == dep and tuple(sp.srepr(a.sx) for a in atom.args) == expected:
                    idx = tuple(sorted(s - 1 for s in atom.slots))
                    mapping[sym] = space.jet(dep, idx).sym
                else:
                    for a in atom.args:
                        scan(a.sx)

        scan(out.sx)
        out = _substitute_raw(out, mapping)
        # finally rewrite the old base coordinates in the new names
        base_map = {sp.Symbol(v): e.sx for v, e in inv.items() if v != dep}
        return _substitute_raw(out, base_map)


@dataclass
class PipelineReport:
    rows: List[dict] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"rows": self.rows}


def run_pipeline(
    space: JetSpace,
    members: Sequence[Tuple[str, Expression]],
    reductions: Sequence[Union[str, Ansatz]],
    candidates: Sequence[VectorField] = (),
    transforms: Sequence[PointTransform] = (),
) -> PipelineReport:
    """Orchestrated verification: reduce every class member, test every
    candidate symmetry on the reduced equations (reporting the residual as the
    constraint that must vanish), flag proper hidden symmetries, and push the
    reduced equations through any supplied equivalence transformations, lifting
    the results back to the original variables."""
    report = PipelineReport()
    for member_id, equation in members:
        for reduction in reductions:
            row: dict = {
                "member": member_id,
                "reduction": reduction if isinstance(reduction, str)
                else f"ansatz {reduction.name or reduction.new_vars[0][0]}",
            }
            try:
                if isinstance(reduction, str):
                    reduced = reduce_by_translation(equation, reduction)
                    lift_map = None
                else:
                    rr = apply_ansatz(equation, reduction, strict=True)
                    reduced = rr.reduced
                    lift_map = _lift_map(reduction)
            except (NotReducibleError, SingularSectionError) as exc:
                row["error"] = str(exc)
                report.rows.append(row)
                continue
            row["reduced"] = reduced.to_dsl()
            row["candidates"] = []
            for cand in candidates:
                entry = {"candidate": cand.name or cand.to_dsl()}
                try:
                    verdict = check_hidden_symmetry(
                        equation,
                        reduction,
                        cand,
                    )
                except ProjectionError as exc:
                    entry["error"] = str(exc)
                    row["candidates"].append(entry)
                    continue
                lie_reduced = verdict.sub["lie_reduced"]
                entry["lie_on_reduced"] = lie_reduced.holds
                entry["constraint"] = lie_reduced.residual.to_dsl()
                entry["lie_on_original"] = verdict.sub["lie_original"].holds
                entry["hidden"] = verdict.holds
                row["candidates"].append(entry)
            row["transforms"] = []
            for tr in transforms:
                entry = {"transform": tr.name}
                try:
                    moved = tr.apply(reduced)
                    entry["reduced_image"] = moved.to_dsl()
                    if isinstance(reduction, str):
                        lifted = _rehost(moved, space)
                    else:
                        lifted = _lift(moved, reduction, lift_map)
                    entry["lifted"] = lifted.to_dsl()
                except (NonInvertibleTransformError, ProjectionError) as exc:
                    entry["error"] = str(exc)
                row["transforms"].append(entry)
            report.rows.append(row)
    return report


def _lift_map(ansatz: Ansatz) -> Dict[Coordinate, Expression]:
    """Invert the chain-rule jet map: reduced jets as expressions in old jets.

    Processed by increasing order; each original jet picked to realize a
    reduced jet is linear in it, so the triangular solve is rational."""
    space = ansatz.space
    reduced_space = ansatz.reduced_space()
    dep = space.dependents[0]
    jet_map = ansatz.jet_substitution()

    # realization of each reduced direction by an original direction
    realize: Dict[int, int] = {}
    for j, name in enumerate(ansatz.reduced_independents):
        if name in space.independents:
            realize[j] = space.independent_index(name)
        else:
            defn = dict(ansatz.new_vars)[name]
            candidates = [
                c.name for c in defn.free_coordinates()
                if c.kind == "independent" and c.name not in ansatz.retained
                and c.name != ansatz.solve_var
            ]
            if not candidates:
                candidates = [
                    c.name for c in defn.free_coordinates() if c.kind == "independent"
                ]
            realize[j] = space.independent_index(
                sorted(candidates, key=space.independent_index)[0]
            )

    bridge, _ = ansatz.bridge_space()
    solved: Dict[Coordinate, Expression] = {}
    for coord in sorted(reduced_space.jets(), key=lambda c: (c.order, c.multi_index)):
        old_idx = tuple(sorted(realize[j] for j in coord.multi_index))
        old_jet = space.jet(dep, old_idx)
        fwd = jet_map[old_jet]
        # express the forward image over the bridge space with phi jets
        retarget: Dict[sp.Symbol, sp.Expr] = {}
        expected = tuple(
            sp.srepr(Expression.coordinate(space, n).sx) for n in ansatz.retained
        ) + tuple(sp.srepr(e.sx) for _, e in ansatz.new_vars)
        names = ansatz.reduced_independents
        for sym in fwd.sx.free_symbols:
            atom = atom_for_symbol(sym)
            if atom is not None and atom.name == ansatz.phi:
                idx = tuple(sorted(bridge.independent_index(names[s - 1]) for s in atom.slots))
                retarget[sym] = bridge.jet(ansatz.phi, idx).sym
        fwd_b = _substitute_raw(Expression(bridge, fwd.sx, canonical=True), retarget)
        target_sym = bridge.jet(ansatz.phi, tuple(
            bridge.independent_index(reduced_space.independents[j]) for j in coord.multi_index
        )).sym
        poly = sp.Poly(fwd_b.sx, target_sym)
        if poly.degree() != 1:
            raise ProjectionError(f"jet map is not linear in {coord.name}")
        rhs = Expression(bridge, sp.cancel(
            (space.jet(dep, old_idx).sym - poly.nth(0)) / poly.nth(1)
        ))
        # substitute previously solved reduced jets
        if solved:
            rhs = rhs.substitute({bridge.coordinate(c.name): e for c, e in solved.items()})
        solved[coord] = rhs
    return solved


def _lift(reduced_eq: Expression, ansatz: Ansatz, lift_map: Dict[Coordinate, Expression]) -> Expression:
    """Rewrite a reduced-space equation in the original variables."""
    space = ansatz.space
    bridge, _ = ansatz.bridge_space()
    work = _rehost(reduced_eq, bridge)
    rules = {bridge.coordinate(c.name): e for c, e in lift_map.items()}
    for var_name, defn in ansatz.new_vars:
        rules[bridge.coordinate(var_name)] = Expression(bridge, defn.sx, canonical=True)
    out = work.substitute(rules)
    return _rehost(out, space)
