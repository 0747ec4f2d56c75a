"""Point vector fields and their prolongations to jet space.

A VectorField is a first-order operator with order-0 coefficients,

    Q = xi^i(x, u) d/dx_i + eta^r(x, u) d/du^r.

Its order-k prolongation carries one coefficient per jet coordinate,
computed by the standard recursion

    eta^{J u {i}} = D_i eta^J - sum_j u^r_{J u {j}} D_i xi^j,

and acts on expressions as a derivation.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Mapping, Optional, Tuple

from .errors import OrderMismatchError, OrderOverflowError, UndeclaredSymbolError
from .expr import Expression
from .jets import total_derivative
from .spaces import Coordinate, JetSpace


class VectorField:
    def __init__(
        self,
        space: JetSpace,
        xi: Mapping[str, Expression] = (),
        eta: Mapping[str, Expression] = (),
        name: str = "Q",
    ):
        self.space = space
        self.name = name
        self.xi: Dict[str, Expression] = dict(xi or {})
        self.eta: Dict[str, Expression] = dict(eta or {})
        for var, comp in list(self.xi.items()):
            if var not in space.independents:
                raise UndeclaredSymbolError(f"xi component for unknown variable {var!r}")
            self._require_point(comp)
        for var, comp in list(self.eta.items()):
            if var not in space.dependents:
                raise UndeclaredSymbolError(f"eta component for unknown variable {var!r}")
            self._require_point(comp)

    @staticmethod
    def _require_point(comp: Expression) -> None:
        if comp.order > 0:
            raise OrderMismatchError(
                "point-field coefficients may only involve base variables "
                f"(got {comp.to_dsl()!r})"
            )

    def xi_at(self, var: str) -> Expression:
        return self.xi.get(var, Expression.zero(self.space))

    def eta_at(self, var: str) -> Expression:
        return self.eta.get(var, Expression.zero(self.space))

    def characteristic(self) -> Dict[str, Expression]:
        """Q[u]^r = eta^r - xi^i u^r_i, one entry per dependent variable."""
        out = {}
        for dep in self.space.dependents:
            q = self.eta_at(dep)
            for i, ind in enumerate(self.space.independents):
                u_i = Expression.coordinate(self.space, self.space.jet(dep, (i,)))
                q = q - self.xi_at(ind) * u_i
            out[dep] = q
        return out

    def first_order_action(self, e: Expression) -> Expression:
        """xi^i de/dx_i + eta^r de/du^r: the action on order-0 expressions."""
        out = Expression.zero(self.space)
        for ind in self.space.independents:
            comp = self.xi.get(ind)
            if comp is not None and not comp.is_zero:
                out = out + comp * e.diff(ind)
        for dep in self.space.dependents:
            comp = self.eta.get(dep)
            if comp is not None and not comp.is_zero:
                out = out + comp * e.diff(dep)
        return out

    def commutator(self, other: "VectorField", name: Optional[str] = None) -> "VectorField":
        """[self, other] = self o other - other o self on first-order parts."""
        xi = {}
        eta = {}
        for ind in self.space.independents:
            comp = self.first_order_action(other.xi_at(ind)) - other.first_order_action(
                self.xi_at(ind)
            )
            if not comp.is_zero:
                xi[ind] = comp
        for dep in self.space.dependents:
            comp = self.first_order_action(other.eta_at(dep)) - other.first_order_action(
                self.eta_at(dep)
            )
            if not comp.is_zero:
                eta[dep] = comp
        return VectorField(self.space, xi, eta, name or f"[{self.name},{other.name}]")

    def to_dsl(self) -> str:
        from .dsl import print_vector_field

        return print_vector_field(self)

    def __repr__(self):
        return f"<VectorField {self.name} = {self.to_dsl()}>"


@dataclass
class ProlongedField:
    """A vector field together with its prolongation coefficients up to ``order``."""

    base: VectorField
    order: int
    coefficients: Dict[Coordinate, Expression] = field(default_factory=dict)

    @property
    def space(self) -> JetSpace:
        return self.base.space

    def coefficient(self, coord: Coordinate) -> Expression:
        return self.coefficients.get(coord, Expression.zero(self.space))

    def apply(self, e: Expression) -> Expression:
        """Sum of xi^i de/dx_i and eta^{r,J} de/du^r_J, normalized."""
        if e.order > self.order:
            raise OrderMismatchError(
                f"expression order {e.order} exceeds prolongation order {self.order}"
            )
        out = Expression.zero(self.space)
        for ind in self.space.independents:
            comp = self.base.xi.get(ind)
            if comp is not None and not comp.is_zero:
                out = out + comp * e.diff(ind)
        for coord, comp in self.coefficients.items():
            if comp.is_zero:
                continue
            de = e.diff(coord)
            if not de.is_zero:
                out = out + comp * de
        return out

    def recompute_coefficient(self, coord: Coordinate, via_first: bool = True) -> Expression:
        """Recompute one coefficient from the level below, choosing the removed
        index independently of the cached construction (used as a cross-check)."""
        if coord.order == 0:
            return self.base.eta_at(coord.base)
        idx = coord.multi_index
        i = idx[0] if via_first else idx[-1]
        parent_idx = list(idx)
        parent_idx.remove(i)
        parent = self.space.jet(coord.base, tuple(parent_idx))
        return self._step(parent, i)

    def _step(self, parent: Coordinate, i: int) -> Expression:
        space = self.space
        out = total_derivative(space, self.coefficient(parent), i)
        for j, ind in enumerate(space.independents):
            xi_j = self.base.xi.get(ind)
            if xi_j is None or xi_j.is_zero:
                continue
            u_pj = Expression.coordinate(space, space.jet(parent.base, parent.multi_index + (j,)))
            out = out - u_pj * total_derivative(space, xi_j, i)
        return out


def prolong(fld: VectorField, order: int, space: Optional[JetSpace] = None) -> ProlongedField:
    """Prolong a point field to the given jet order; coefficients are cached eagerly."""
    space = space or fld.space
    if order > space.max_order:
        raise OrderOverflowError(
            f"prolongation order {order} exceeds the space's max_order {space.max_order}"
        )
    pf = ProlongedField(fld, order)
    for dep in space.dependents:
        pf.coefficients[space.coordinate(dep)] = fld.eta_at(dep)
    for k in range(1, order + 1):
        for coord in space.jets(min_order=k, max_order=k):
            i = coord.multi_index[-1]
            parent_idx = list(coord.multi_index)
            parent_idx.remove(i)
            parent = space.jet(coord.base, tuple(parent_idx))
            pf.coefficients[coord] = pf._step(parent, i)
    return pf
