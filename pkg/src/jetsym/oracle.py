"""Independent numeric verification of symbolic verdicts.

The oracle never reuses the symbolic reduction path: it samples jet points
(projected onto a constraint manifold by evaluating the triangular rules
numerically), transports them along the prolonged flow of the operator by
adaptive Runge-Kutta integration, and compares expression values before and
after.  Invariance means the value is preserved along the flow.

For fields whose geometric part is affine with constant coefficients and whose
eta vanishes (translations, rotations, boosts) a closed-form flow is available
via the matrix exponential; it must agree with the integrator to 1e-9 and is
used as the fast transport in batch runs.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
import sympy as sp
from scipy.integrate import solve_ivp
from scipy.linalg import expm

from .errors import IntegrationError, SamplingError
from .expr import Expression, FunctionBinding, atom_for_symbol
from .fields import ProlongedField, VectorField
from .manifold import ConstraintManifold
from .spaces import Coordinate, JetSpace

INVARIANT_TOL = 1e-9
NONINVARIANT_TOL = 1e-3
DEFAULT_THETAS = (0.1, -0.1, 0.3, -0.3)


@dataclass
class JetPoint:
    """A numeric point of the jet space (parameters included)."""

    space: JetSpace
    values: Dict[str, float]

    def get(self, coord: Union[Coordinate, str]) -> float:
        name = coord.name if isinstance(coord, Coordinate) else coord
        return self.values[name]

    def copy(self) -> "JetPoint":
        return JetPoint(self.space, dict(self.values))


@dataclass
class FlowResult:
    point: JetPoint
    theta: float
    steps: int = 0
    est_error: float = 0.0


# ---------------------------------------------------------------------------
# Flow transport
# ---------------------------------------------------------------------------


def _state_coords(pf: ProlongedField) -> List[Coordinate]:
    space = pf.space
    coords = [space.coordinate(n) for n in space.independents]
    coords.extend(c for c in space.jets() if c.order <= pf.order)
    return coords


def _rhs_function(pf: ProlongedField, coords: Sequence[Coordinate],
                  bindings: Optional[Mapping[str, FunctionBinding]] = None):
    space = pf.space
    exprs: List[Expression] = []
    for c in coords:
        if c.kind == "independent":
            exprs.append(pf.base.xi_at(c.name))
        else:
            exprs.append(pf.coefficient(c))
    syms = [sp.Symbol(c.name) for c in coords]
    param_syms = [sp.Symbol(p) for p in space.parameters]
    if not any(e.atoms() for e in exprs):
        fn = sp.lambdify(syms + param_syms, [e.sx for e in exprs], modules="math")

        def rhs(_theta, y, params=()):
            return fn(*y, *params)

        return rhs

    def rhs(_theta, y, params=()):
        point = {c.name: v for c, v in zip(coords, y)}
        point.update({p: v for p, v in zip(space.parameters, params)})
        return [e.eval(point, bindings) for e in exprs]

    return rhs


def flow(
    pf: ProlongedField,
    point: JetPoint,
    theta: float,
    bindings: Optional[Mapping[str, FunctionBinding]] = None,
    estimate_error: bool = True,
) -> FlowResult:
    """Transport a jet point along the prolonged flow, adaptive RK45 at 1e-12."""
    if abs(theta) > 1.0:
        raise IntegrationError("flow parameter must satisfy |theta| <= 1")
    coords = _state_coords(pf)
    y0 = np.array([point.get(c) for c in coords], dtype=float)
    params = tuple(point.values[p] for p in pf.space.parameters)
    rhs = _rhs_function(pf, coords, bindings)
    if theta == 0.0:
        return FlowResult(point.copy(), 0.0, steps=0, est_error=0.0)

    def integrate(y_start, t0, t1):
        sol = solve_ivp(
            rhs, (t0, t1), y_start, method="RK45", rtol=1e-12, atol=1e-12,
            args=(params,), dense_output=False,
        )
        if not sol.success:
            raise IntegrationError(f"flow integration failed: {sol.message}")
        return sol.y[:, -1], sol.t.size

    y1, steps = integrate(y0, 0.0, theta)
    est = 0.0
    if estimate_error:
        mid, s1 = integrate(y0, 0.0, theta / 2.0)
        y1b, s2 = integrate(mid, theta / 2.0, theta)
        est = float(np.max(np.abs(y1 - y1b)))
        steps += s1 + s2
    values = dict(point.values)
    values.update({c.name: float(v) for c, v in zip(coords, y1)})
    return FlowResult(JetPoint(pf.space, values), theta, steps=steps, est_error=est)


def _affine_geometry(field: VectorField):
    """(A, b) with xi = A x + b constant, provided eta = 0; else None."""
    space = field.space
    n = len(space.independents)
    if any(not e.is_zero for e in field.eta.values()):
        return None
    A = np.zeros((n, n))
    b = np.zeros(n)
    for i, ind in enumerate(space.independents):
        comp = field.xi.get(ind)
        if comp is None or comp.is_zero:
            continue
        if comp.atoms():
            return None
        poly = comp.sx
        syms = list(poly.free_symbols)
        base_syms = {sp.Symbol(n2) for n2 in space.independents}
        if any(s not in base_syms for s in syms):
            return None
        try:
            const = float(poly.subs({s: 0 for s in syms}))
        except TypeError:
            return None
        b[i] = const
        rest = sp.expand(poly - const)
        for j, ind2 in enumerate(space.independents):
            c = sp.expand(rest).coeff(sp.Symbol(ind2), 1)
            if c.free_symbols:
                return None
            A[i, j] = float(c)
        if sp.expand(rest - sum(A[i, j] * sp.Symbol(n2)
                                for j, n2 in enumerate(space.independents))) != 0:
            return None
    return A, b


def closed_flow(field: VectorField, point: JetPoint, theta: float,
                order: int = 2) -> Optional[JetPoint]:
    """Closed-form jet transport for affine geometric fields with eta = 0.

    Base points move by the affine flow of xi; the gradient transforms by the
    inverse-transpose Jacobian, the Hessian by congruence with it."""
    geo = _affine_geometry(field)
    if geo is None:
        return None
    A, b = geo
    space = field.space
    n = len(space.independents)
    aug = np.zeros((n + 1, n + 1))
    aug[:n, :n] = A * theta
    aug[:n, n] = b * theta
    E = expm(aug)
    x0 = np.array([point.get(name) for name in space.independents])
    x1 = E[:n, :n] @ x0 + E[:n, n]
    Jinv_T = expm(-theta * A.T)

    values = dict(point.values)
    for i, name in enumerate(space.independents):
        values[name] = float(x1[i])
    for dep in space.dependents:
        if order >= 1:
            g0 = np.array([point.get(space.jet(dep, (i,))) for i in range(n)])
            g1 = Jinv_T @ g0
            for i in range(n):
                values[space.jet(dep, (i,)).name] = float(g1[i])
        if order >= 2:
            H0 = np.zeros((n, n))
            for i in range(n):
                for j in range(n):
                    H0[i, j] = point.get(space.jet(dep, tuple(sorted((i, j)))))
            H1 = Jinv_T @ H0 @ Jinv_T.T
            for i in range(n):
                for j in range(i, n):
                    values[space.jet(dep, (i, j)).name] = float(H1[i, j])
    return JetPoint(space, values)


# ---------------------------------------------------------------------------
# On-manifold sampling
# ---------------------------------------------------------------------------


def sample_point(
    space: JetSpace,
    manifold: Optional[ConstraintManifold],
    rng: random.Random,
    bindings: Optional[Mapping[str, FunctionBinding]] = None,
    avoid: Sequence[Expression] = (),
    margin: float = 0.1,
    attempts: int = 100,
) -> JetPoint:
    """Random jet point with rule-bound coordinates computed from the manifold.

    Free coordinates are drawn uniformly from +-[margin, 2]; candidate points
    (and nothing else) must keep every avoided expression at least ``margin``
    away from zero."""
    rules = manifold.rules if manifold is not None else {}
    bound = {c.name for c in rules}
    free = [c for c in space.universe if c.name not in bound]
    for _ in range(attempts):
        values: Dict[str, float] = {}
        for c in free:
            mag = rng.uniform(margin, 2.0)
            values[c.name] = mag if rng.random() < 0.5 else -mag
        ok = True
        for c, rhs in rules.items():
            try:
                values[c.name] = rhs.eval(values, bindings)
            except Exception:
                ok = False
                break
        if not ok:
            continue
        point = JetPoint(space, values)
        try:
            if any(abs(a.eval(values, bindings)) < margin for a in avoid):
                continue
        except Exception:
            continue
        return point
    raise SamplingError(
        f"could not sample an admissible point in {attempts} attempts"
    )


# ---------------------------------------------------------------------------
# Invariance verdicts
# ---------------------------------------------------------------------------


@dataclass
class OracleResult:
    invariant: bool
    max_deviation: float
    trials: int
    thetas: Tuple[float, ...]
    seed: int
    conclusive: bool = True
    method: str = "rk45"

    def to_dict(self) -> dict:
        return {
            "invariant": self.invariant,
            "max_deviation": self.max_deviation,
            "trials": self.trials,
            "thetas": list(self.thetas),
            "seed": self.seed,
            "conclusive": self.conclusive,
            "method": self.method,
        }


def _avoid_set(
    exprs: Sequence[Expression], manifold: Optional[ConstraintManifold]
) -> List[Expression]:
    seen: List[Expression] = []

    def push(e: Expression) -> None:
        if all(not (e == s) for s in seen):
            seen.append(e)

    for e in exprs:
        for f in e.denominator_factors():
            push(f)
    if manifold is not None:
        for note in manifold.domain_notes:
            push(note)
        for rhs in manifold.rules.values():
            for f in rhs.denominator_factors():
                push(f)
    return seen


def numeric_invariance(
    pf: ProlongedField,
    exprs: Union[Expression, Sequence[Expression]],
    manifold: Optional[ConstraintManifold] = None,
    trials: int = 20,
    thetas: Sequence[float] = DEFAULT_THETAS,
    seed: int = 0,
    bindings: Optional[Mapping[str, FunctionBinding]] = None,
    method: str = "rk45",
) -> Union[OracleResult, List[OracleResult]]:
    """Numeric invariance of expression(s) under the prolonged flow.

    Samples ``trials`` points (on the manifold when given), flows each by every
    theta, and reports the maximum relative deviation |e(flow p) - e(p)| /
    (1 + |e(p)|).  Batch form: passing a list evaluates every expression on the
    same transported points.  ``method`` is "rk45", "closed" or "auto" (closed
    form when the field supports it, integrator otherwise)."""
    single = isinstance(exprs, Expression)
    expr_list: List[Expression] = [exprs] if single else list(exprs)
    rng = random.Random(seed)
    avoid = _avoid_set(expr_list, manifold)

    use_closed = False
    if method in ("closed", "auto"):
        use_closed = _affine_geometry(pf.base) is not None
        if method == "closed" and not use_closed:
            raise IntegrationError("field has no closed-form flow")

    devs = [0.0 for _ in expr_list]
    for _ in range(trials):
        point = sample_point(pf.space, manifold, rng, bindings, avoid)
        endpoints = []
        ok = True
        for theta in thetas:
            if use_closed:
                moved = closed_flow(pf.base, point, theta, order=pf.order)
            else:
                moved = flow(pf, point, theta, bindings, estimate_error=False).point
            # transported points must stay clear of all singular sets
            try:
                if any(abs(a.eval(moved.values, bindings)) < 0.05 for a in avoid):
                    ok = False
                    break
            except Exception:
                ok = False
                break
            endpoints.append(moved)
        if not ok:
            continue
        for k, e in enumerate(expr_list):
            before = e.eval(point.values, bindings)
            scale = 1.0 + abs(before)
            for moved in endpoints:
                after = e.eval(moved.values, bindings)
                devs[k] = max(devs[k], abs(after - before) / scale)

    results = []
    for dev in devs:
        invariant = dev < INVARIANT_TOL
        conclusive = dev < INVARIANT_TOL or dev > NONINVARIANT_TOL
        results.append(
            OracleResult(
                invariant=invariant,
                max_deviation=dev,
                trials=trials,
                thetas=tuple(thetas),
                seed=seed,
                conclusive=conclusive,
                method="closed" if use_closed else "rk45",
            )
        )
    return results[0] if single else results
