"""Jet space declarations.

A JetSpace fixes the independent variables, the dependent variables and a
maximal derivative order, and enumerates the full coordinate universe: base
variables, parameters and one Coordinate per symmetrized derivative
``u_J`` with ``|J| <= max_order``.  Mixed partials are identified, so the
multi-index of a jet coordinate is kept sorted and ``u_xy`` and ``u_yx``
denote the same Coordinate.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations_with_replacement
from typing import Iterable, Mapping, Optional, Sequence, Tuple

import sympy as sp

from .errors import DuplicateNameError, OrderOverflowError, UndeclaredSymbolError

# Hard cap on the derivative order; keeps the jet universe small.
MAX_SUPPORTED_ORDER = 4

KIND_INDEPENDENT = "independent"
KIND_DEPENDENT = "dependent"
KIND_REDUCED_DEPENDENT = "reduced-dependent"
KIND_JET = "jet"
KIND_PARAMETER = "parameter"


@dataclass(frozen=True)
class Coordinate:
    """One named coordinate of a jet space.

    ``multi_index`` is a sorted tuple of independent-variable positions; it is
    empty unless ``kind == "jet"``.  ``base`` names the dependent variable a
    jet coordinate derives from.
    """

    kind: str
    name: str
    base: str = ""
    multi_index: Tuple[int, ...] = ()

    @property
    def order(self) -> int:
        return len(self.multi_index)

    @property
    def sym(self) -> sp.Symbol:
        return sp.Symbol(self.name)

    def __str__(self) -> str:
        return self.name


class JetSpace:
    """Immutable declaration of the ambient space and its coordinate universe."""

    def __init__(
        self,
        independents: Sequence[str],
        dependents: Sequence[str],
        max_order: int,
        metric: Optional[Sequence[int]] = None,
        parameters: Sequence[str] = (),
        functions: Optional[Mapping[str, int]] = None,
        reduced: bool = False,
    ):
        if not independents or not dependents:
            raise DuplicateNameError("need at least one independent and one dependent variable")
        if max_order < 1:
            raise OrderOverflowError("max_order must be >= 1")
        if max_order > MAX_SUPPORTED_ORDER:
            raise OrderOverflowError(
                f"max_order {max_order} exceeds the supported cap {MAX_SUPPORTED_ORDER}"
            )
        self.independents = tuple(independents)
        self.dependents = tuple(dependents)
        self.max_order = int(max_order)
        self.metric = tuple(int(g) for g in metric) if metric is not None else None
        self.parameters = tuple(parameters)
        self.functions = dict(functions or {})
        self.reduced = bool(reduced)

        if self.metric is not None:
            if len(self.metric) != len(self.independents):
                raise DuplicateNameError("metric must list one signature entry per independent")
            if any(g not in (1, -1) for g in self.metric):
                raise DuplicateNameError("metric entries must be +1 or -1")

        dep_kind = KIND_REDUCED_DEPENDENT if reduced else KIND_DEPENDENT
        coords: dict[str, Coordinate] = {}

        def _add(c: Coordinate) -> None:
            if c.name in coords or c.name in self.functions:
                raise DuplicateNameError(f"name {c.name!r} declared more than once")
            coords[c.name] = c

        for name in self.independents:
            _add(Coordinate(KIND_INDEPENDENT, name))
        for name in self.dependents:
            _add(Coordinate(dep_kind, name, base=name))
        for name in self.parameters:
            _add(Coordinate(KIND_PARAMETER, name))
        for dep in self.dependents:
            for order in range(1, self.max_order + 1):
                for idx in combinations_with_replacement(range(len(self.independents)), order):
                    _add(Coordinate(KIND_JET, self._jet_name(dep, idx), base=dep, multi_index=idx))
        self._coords = coords
        self._universe = tuple(coords.values())
        fn_names = set(self.functions)
        if fn_names & set(coords):
            raise DuplicateNameError("function names collide with coordinate names")

    def _jet_name(self, dep: str, idx: Tuple[int, ...]) -> str:
        return dep + "_" + "".join(self.independents[i] for i in idx)

    # -- lookups ---------------------------------------------------------

    @property
    def universe(self) -> Tuple[Coordinate, ...]:
        return self._universe

    def coordinate(self, name: str) -> Coordinate:
        try:
            return self._coords[name]
        except KeyError:
            raise UndeclaredSymbolError(f"undeclared coordinate {name!r}") from None

    def has_coordinate(self, name: str) -> bool:
        return name in self._coords

    def by_symbol(self, sym: sp.Symbol) -> Optional[Coordinate]:
        return self._coords.get(sym.name)

    def jet(self, dep: str, multi_index: Iterable[int]) -> Coordinate:
        idx = tuple(sorted(multi_index))
        if len(idx) > self.max_order:
            raise OrderOverflowError(
                f"derivative order {len(idx)} exceeds declared max_order {self.max_order}"
            )
        if not idx:
            return self.coordinate(dep)
        return self.coordinate(self._jet_name(dep, idx))

    def derived(self, coord: Coordinate, i: int) -> Coordinate:
        """The coordinate obtained by one more derivative in direction ``i``."""
        if coord.kind not in (KIND_DEPENDENT, KIND_REDUCED_DEPENDENT, KIND_JET):
            raise UndeclaredSymbolError(f"{coord.name} has no derivative coordinates")
        return self.jet(coord.base, coord.multi_index + (i,))

    def jets(self, min_order: int = 0, max_order: Optional[int] = None) -> Tuple[Coordinate, ...]:
        hi = self.max_order if max_order is None else max_order
        return tuple(
            c
            for c in self._universe
            if c.kind in (KIND_DEPENDENT, KIND_REDUCED_DEPENDENT, KIND_JET)
            and min_order <= c.order <= hi
        )

    def independent_index(self, name: str) -> int:
        try:
            return self.independents.index(name)
        except ValueError:
            raise UndeclaredSymbolError(f"{name!r} is not an independent variable") from None

    def rank(self, coord: Coordinate) -> tuple:
        """Ranking used to pick leading jet coordinates: order, then base, then
        lexicographic multi-index in declaration order."""
        dep_pos = self.dependents.index(coord.base) if coord.base else -1
        return (coord.order, dep_pos, coord.multi_index)

    def signature(self, i: int) -> int:
        from .errors import MetricUndeclaredError

        if self.metric is None:
            raise MetricUndeclaredError("space has no declared metric")
        return self.metric[i]

    # -- misc ------------------------------------------------------------

    def describe(self) -> dict:
        return {
            "independents": list(self.independents),
            "dependents": list(self.dependents),
            "max_order": self.max_order,
            "metric": list(self.metric) if self.metric is not None else None,
            "parameters": list(self.parameters),
            "functions": dict(self.functions),
            "reduced": self.reduced,
        }

    def __repr__(self) -> str:
        sig = f", metric={self.metric}" if self.metric is not None else ""
        return (
            f"JetSpace({'/'.join(self.independents)} | {'/'.join(self.dependents)}"
            f", order {self.max_order}{sig})"
        )


def declare_space(
    independents: Sequence[str],
    dependents: Sequence[str],
    max_order: int,
    metric: Optional[Sequence[int]] = None,
    parameters: Sequence[str] = (),
    functions: Optional[Mapping[str, int]] = None,
    reduced: bool = False,
) -> JetSpace:
    """Declare a jet space; see JetSpace."""
    return JetSpace(independents, dependents, max_order, metric, parameters, functions, reduced)
