"""Total derivatives and metric contractions on a jet space."""

from __future__ import annotations

import re
from typing import List, Tuple, Union

import sympy as sp

from .errors import DslSyntaxError, OrderOverflowError, UndeclaredSymbolError
from .expr import Expression
from .spaces import Coordinate, JetSpace


def total_derivative(space: JetSpace, e: Expression, direction: Union[int, str]) -> Expression:
    """The total derivative D_i e = de/dx_i + sum_J u_{J u {i}} de/du_J.

    The partial-derivative step chains through opaque atoms, so expressions
    such as f(t,x,y,u) acquire the expected u_t * f[4](...) contributions.
    Raises OrderOverflowError when e already involves jets of maximal order.
    """
    i = space.independent_index(direction) if isinstance(direction, str) else direction
    x_i = space.coordinate(space.independents[i])
    out = e.diff(x_i)
    for c in space.jets():
        de = e.diff(c)
        if de.is_zero:
            continue
        if c.order >= space.max_order:
            raise OrderOverflowError(
                f"total derivative of {c.name}-dependent expression leaves the "
                f"order-{space.max_order} jet space"
            )
        out = out + de * Expression.coordinate(space, space.derived(c, i))
    return out


_FACTOR_RE = re.compile(r"^([A-Za-z][A-Za-z0-9]*)_([a-z]+)$")

POSITION_BASE = "x"  # family marker for the base-point coordinates


def contract(space: JetSpace, term: str) -> Expression:
    """Build a fully contracted index expression, e.g. ``contract(space, "x_m u_mn u_n")``.

    Each whitespace-separated factor is a family member: ``x_m`` ranges over
    the base coordinates, ``u_m`` / ``u_mn`` over first / second derivative
    coordinates of the dependent variable ``u``.  Every index letter must
    appear exactly twice.  Repeated indices are summed with metric weights
    chosen so that the result is a scalar under the declared signature:
    position-position and derivative-derivative pairings carry the metric
    factor, a position paired against a derivative is a natural pairing and
    carries none.
    """
    if space.metric is None:
        from .errors import MetricUndeclaredError

        raise MetricUndeclaredError("contract requires a declared metric")
    factors: List[Tuple[str, str]] = []  # (base, index letters)
    for raw in term.split():
        m = _FACTOR_RE.match(raw)
        if m is None:
            raise DslSyntaxError(f"malformed contraction factor {raw!r}", term, term.find(raw))
        base, letters = m.group(1), m.group(2)
        if base == POSITION_BASE and base not in space.dependents:
            if len(letters) != 1:
                raise DslSyntaxError(
                    f"position factor {raw!r} must carry exactly one index", term, term.find(raw)
                )
            factors.append((POSITION_BASE, letters))
        elif base in space.dependents:
            if len(letters) > space.max_order:
                raise OrderOverflowError(f"factor {raw!r} exceeds max derivative order")
            factors.append((base, letters))
        else:
            raise UndeclaredSymbolError(f"unknown contraction family {base!r}")

    counts: dict[str, int] = {}
    kinds: dict[str, List[str]] = {}
    for base, letters in factors:
        for ch in letters:
            counts[ch] = counts.get(ch, 0) + 1
            kinds.setdefault(ch, []).append("pos" if base == POSITION_BASE else "der")
    for ch, n in counts.items():
        if n != 2:
            raise DslSyntaxError(
                f"index {ch!r} appears {n} time(s); every index must appear exactly twice",
                term, 0,
            )

    letters = sorted(counts)
    n = len(space.independents)
    total = Expression.zero(space)
    from itertools import product

    for assignment in product(range(n), repeat=len(letters)):
        bind = dict(zip(letters, assignment))
        weight = 1
        for ch in letters:
            if kinds[ch] != ["pos", "der"] and kinds[ch] != ["der", "pos"]:
                weight *= space.metric[bind[ch]]
        piece = Expression.number(space, weight)
        for base, lets in factors:
            idx = tuple(bind[ch] for ch in lets)
            if base == POSITION_BASE:
                coord = space.coordinate(space.independents[idx[0]])
            else:
                coord = space.jet(base, idx)
            piece = piece * Expression.coordinate(space, coord)
        total = total + piece
    return total
