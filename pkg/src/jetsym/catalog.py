"""Machine-readable registry of the named operators, conditions, invariant
lists, ansatze, example equations and pipeline specs used by the test corpus
and addressable from the CLI as @catalog/<id>.

Payloads are DSL text, pinned by a checksum file shipped with the package;
the Lorentz invariant lists are stored in expanded metric-contracted form and
a test re-derives them through the contract builder.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from importlib import resources
from typing import Dict, List, Tuple, Union

from .errors import UnknownCatalogEntryError
from .expr import Expression
from .dsl import parse_expression, parse_vector_field
from .fields import VectorField
from .manifold import ConditionSet
from .spaces import JetSpace, declare_space

_R_ARGS = "t, y, u, u_t, u_x, u_y, u_tt, u_tx, u_ty, u_xx, u_xy, u_yy"

_SPACE_SPECS = {
    "rotation": dict(
        independents=("t", "x", "y"),
        dependents=("u",),
        max_order=2,
        metric=(1, 1, 1),
        functions={
            "K1": 3, "K2": 2,
            "R1": 12, "R2": 12, "R3": 12, "R4": 12,
            "Finv": 11, "Fr": 12,
        },
    ),
    "lorentz": dict(
        independents=("t", "x", "y"),
        dependents=("u",),
        max_order=2,
        metric=(1, -1, -1),
        parameters=("lambda0", "lambda1", "lambda2"),
        functions={"f": 4, "fp": 3, "Frho": 9},
    ),
}

_SPACES: Dict[str, JetSpace] = {}


def space(space_id: str) -> JetSpace:
    if space_id not in _SPACES:
        try:
            _SPACES[space_id] = declare_space(**_SPACE_SPECS[space_id])
        except KeyError:
            raise UnknownCatalogEntryError(f"unknown catalog space {space_id!r}") from None
    return _SPACES[space_id]


@dataclass(frozen=True)
class CatalogEntry:
    id: str
    kind: str  # operator | condition-set | invariant-list | ansatz | equation | pipeline
    space_id: str
    payload: Union[str, Tuple[str, ...]]
    anchor: str

    def payload_text(self) -> str:
        if isinstance(self.payload, str):
            return self.payload
        return "\n".join(self.payload)


_E = CatalogEntry

ENTRIES: Dict[str, CatalogEntry] = {
    e.id: e
    for e in [
        # -- operators ----------------------------------------------------
        _E("translation.dx", "operator", "rotation", "d/dx",
           "translation along x"),
        _E("translation.dy", "operator", "rotation", "d/dy",
           "translation along y"),
        _E("rotation.J", "operator", "rotation", "x*d/dy - y*d/dx",
           "rotation generator in the (x,y) plane"),
        _E("lorentz.J01", "operator", "lorentz", "t*d/dx + x*d/dt",
           "boost generator in the (t,x) plane"),
        _E("lorentz.J02", "operator", "lorentz", "t*d/dy + y*d/dt",
           "boost generator in the (t,y) plane"),
        _E("lorentz.J12", "operator", "lorentz", "x*d/dy - y*d/dx",
           "rotation generator inside the boost algebra"),
        # -- condition sets -------------------------------------------------
        _E("cond-rotation", "condition-set", "rotation",
           "x*u_y - y*u_x = 0 upto 1",
           "invariant-surface condition of the rotation generator"),
        _E("cond-lorentz", "condition-set", "lorentz",
           "t*u_x + x*u_t = 0, t*u_y + y*u_t = 0, x*u_y - y*u_x = 0 upto 1",
           "invariant-surface conditions of the boost algebra"),
        _E("cond-ux", "condition-set", "rotation",
           "u_x = 0 upto 1",
           "invariant-surface condition of the x-translation"),
        # -- invariant lists ------------------------------------------------
        _E("di-rotation", "invariant-list", "rotation", (
            "t",
            "u",
            "u_t",
            "u_tt",
            "x^2 + y^2",
            "x*u_x + y*u_y",
            "u_x^2 + u_y^2",
            "u_xx + u_yy",
            "u_x^2*u_xx + 2*u_x*u_y*u_xy + u_y^2*u_yy",
            "x*u_x*u_xx + (x*u_y + y*u_x)*u_xy + y*u_y*u_yy",
            "u_tx^2 + u_ty^2",
            "x*u_tx + y*u_ty",
        ), "functional basis of absolute invariants of the plane rotation (12 entries)"),
        _E("cdi-rotation", "invariant-list", "rotation", (
            "u_x/x",
            "u_y/y",
            "u_tx/x",
            "u_ty/y",
            "u_xx/x^2 - u_x/x^3",
            "u_yy/y^2 - u_y/y^3",
            "u_xy/(x*y)",
        ), "proper conditional invariants of the rotation on its invariant surface"),
        _E("di-lorentz", "invariant-list", "lorentz", (
            "u",
            "t^2 - x^2 - y^2",
            "t*u_t + u_x*x + u_y*y",
            "u_t^2 - u_x^2 - u_y^2",
            "u_tt - u_xx - u_yy",
            "u_t^2*u_tt + u_x^2*u_xx + u_y^2*u_yy - 2*u_t*u_tx*u_x - 2*u_t*u_ty*u_y"
            " + 2*u_x*u_xy*u_y",
            "u_t^2*u_tt^2 - u_t^2*u_tx^2 - u_t^2*u_ty^2 + u_tx^2*u_x^2 + u_ty^2*u_y^2"
            " - u_x^2*u_xx^2 - u_x^2*u_xy^2 - u_xy^2*u_y^2 - u_y^2*u_yy^2"
            " - 2*u_t*u_tt*u_tx*u_x - 2*u_t*u_tt*u_ty*u_y + 2*u_t*u_tx*u_x*u_xx"
            " + 2*u_t*u_tx*u_xy*u_y + 2*u_t*u_ty*u_x*u_xy + 2*u_t*u_ty*u_y*u_yy"
            " + 2*u_tx*u_ty*u_x*u_y - 2*u_x*u_xx*u_xy*u_y - 2*u_x*u_xy*u_y*u_yy",
            "u_tt^3 - u_xx^3 - u_yy^3 - 3*u_tt*u_tx^2 - 3*u_tt*u_ty^2 + 3*u_tx^2*u_xx"
            " + 3*u_ty^2*u_yy - 3*u_xx*u_xy^2 - 3*u_xy^2*u_yy + 6*u_tx*u_ty*u_xy",
            "t*u_t*u_tt - t*u_tx*u_x - t*u_ty*u_y + u_t*u_tx*x + u_t*u_ty*y - u_x*u_xx*x"
            " - u_x*u_xy*y - u_xy*u_y*x - u_y*u_yy*y",
            "t*u_t*u_tt^2 - t*u_t*u_tx^2 - t*u_t*u_ty^2 - u_tx^2*u_x*x - u_ty^2*u_y*y"
            " + u_x*u_xx^2*x + u_x*u_xy^2*x + u_xy^2*u_y*y + u_y*u_yy^2*y"
            " - t*u_tt*u_tx*u_x - t*u_tt*u_ty*u_y + t*u_tx*u_x*u_xx + t*u_tx*u_xy*u_y"
            " + t*u_ty*u_x*u_xy + t*u_ty*u_y*u_yy + u_t*u_tt*u_tx*x + u_t*u_tt*u_ty*y"
            " - u_t*u_tx*u_xx*x - u_t*u_tx*u_xy*y - u_t*u_ty*u_xy*x - u_t*u_ty*u_yy*y"
            " - u_tx*u_ty*u_x*y - u_tx*u_ty*u_y*x + u_x*u_xx*u_xy*y + u_x*u_xy*u_yy*y"
            " + u_xx*u_xy*u_y*x + u_xy*u_y*u_yy*x",
        ), "functional basis of absolute invariants of the boost algebra, "
           "metric-contracted with signature (1,-1,-1)"),
        _E("cdi-lorentz", "invariant-list", "lorentz", (
            "u_t/t",
            "u_x/x",
            "u_y/y",
            "u_tt/t^2 - u_t/t^3",
            "u_xx/x^2 - u_x/x^3",
            "u_yy/y^2 - u_y/y^3",
            "u_tx/(t*x)",
            "u_ty/(t*y)",
            "u_xy/(x*y)",
        ), "proper conditional invariants of the boost algebra on its invariant surface"),
        _E("control.euclidean-xx", "invariant-list", "lorentz", (
            "t^2 + x^2 + y^2",
        ), "control: unweighted square sum, must fail boost invariance"),
        _E("cdi-lorentz.signed-control", "invariant-list", "lorentz", (
            "u_xx/x^2 + u_x/x^3",
            "u_yy/y^2 + u_y/y^3",
        ), "control: signature-signed second-order ratio variant, must fail"),
        # -- translation-conditional invariants ------------------------------
        _E("q.1", "equation", "rotation", f"u_x*R1({_R_ARGS})",
           "translation-conditional invariant carried by u_x"),
        _E("q.2", "equation", "rotation", f"u_tx*R2({_R_ARGS})",
           "translation-conditional invariant carried by u_tx"),
        _E("q.3", "equation", "rotation", f"u_xx*R3({_R_ARGS})",
           "translation-conditional invariant carried by u_xx"),
        _E("q.4", "equation", "rotation", f"u_xy*R4({_R_ARGS})",
           "translation-conditional invariant carried by u_xy"),
        # -- ansatze ---------------------------------------------------------
        _E("ansatz-r", "ansatz", "rotation",
           "r = x^2 + y^2 | retain t | solve y | sqrt x | operators rotation.J",
           "radial substitution u = phi(t, r)"),
        _E("ansatz-rho", "ansatz", "lorentz",
           "rho = t^2 - x^2 - y^2 | solve t | sqrt t"
           " | operators lorentz.J01 lorentz.J02 lorentz.J12",
           "light-cone radial substitution u = phi(rho)"),
        # -- equations ---------------------------------------------------------
        _E("hidden-translation.1", "equation", "rotation",
           "u_t + u_x*K1(t,y,u) + u_y*K2(t,u) + u_xx + u_yy",
           "evolution equation with hidden y-translation symmetry"),
        _E("hidden-translation.2", "equation", "rotation",
           "u_tt - K1[3](t,y,u)*u_x^2 - K1(t,y,u)*u_xx - K2[2](t,u)*u_y^2 - K2(t,u)*u_yy",
           "wave equation in divergence form with hidden y-translation symmetry"),
        _E("nl-wave1.class", "equation", "lorentz",
           "u_tt - u_xx - u_yy - f(t,x,y,u)",
           "nonlinear wave equation class in two space dimensions"),
        _E("fts.equation", "equation", "lorentz",
           "u_tt - u_xx - u_yy - lambda0*u_t^2/t^2 - lambda1*u_x^2/x^2 - lambda2*u_y^2/y^2",
           "nonlinear wave equation built from first-order ratio invariants"),
        _E("inv1.generic", "equation", "rotation",
           f"Finv(u_x*R1({_R_ARGS}), u_tx*R2({_R_ARGS}), u_xx*R3({_R_ARGS}),"
           f" u_xy*R4({_R_ARGS}), t, u, u_t, u_y, u_tt, u_ty, u_yy)",
           "general member solving the x-translation/hidden-y-translation conditions"),
        _E("eq-r.generic", "equation", "rotation",
           "Fr(t, u, u_t, u_tt, x^2 + y^2, x*u_x + y*u_y, u_x^2 + u_y^2, u_xx + u_yy,"
           " u_x/x, u_tx/x, u_xx/x^2 - u_x/x^3, u_xy/(x*y))",
           "general member reducible by the radial substitution"),
        _E("eq-rho.generic", "equation", "lorentz",
           "Frho(u, t^2 - x^2 - y^2, t*u_t + x*u_x + y*u_y, u_t^2 - u_x^2 - u_y^2,"
           " u_tt - u_xx - u_yy, u_t/t, u_x/x, u_tt/t^2 - u_t/t^3, u_xy/(x*y))",
           "general member reducible by the light-cone radial substitution"),
        _E("reducible-r.1", "equation", "rotation", "u_t - u_xx - u_yy",
           "heat equation (radially reducible)"),
        _E("reducible-r.2", "equation", "rotation", "u_tt - u_xx - u_yy + u^2",
           "wave equation with quadratic source (radially reducible)"),
        _E("reducible-r.3", "equation", "rotation", "u_t - u_x^2 - u_y^2",
           "Hamilton-Jacobi type equation (radially reducible)"),
        _E("reducible-r.4", "equation", "rotation", "u_t - u_x/x",
           "convection by a ratio invariant (radially reducible off x = 0)"),
        _E("reducible-r.5", "equation", "rotation", "u_t - u_xx/x^2 + u_x/x^3",
           "diffusion by a second-order ratio invariant (radially reducible)"),
        _E("control-r.1", "equation", "rotation", "u_t - u_x",
           "control: drift equation, not radially reducible"),
        _E("control-r.2", "equation", "rotation", "u_x - 1",
           "control: inhomogeneous gradient condition, not radially reducible"),
        # -- pipelines ---------------------------------------------------------
        _E("pipeline.nl-wave1", "pipeline", "lorentz",
           "space t x y | u order 2 metric 1 -1 -1;\n"
           "fn fp(3);\n"
           "class nlwave: u_tt - u_xx - u_yy - fp(t,x,u);\n"
           "reduce trans y;\n"
           "candidate dx: d/dx;\n"
           "candidate boost: t*d/dx + x*d/dt;\n"
           "transform shiftx: x -> x + 1 inverse x -> x - 1;\n",
           "hidden-symmetry scan of the wave class under the y-translation reduction"),
        _E("pipeline.fts-rho", "pipeline", "lorentz",
           "space t x y | u order 2 metric 1 -1 -1;\n"
           "param lambda0 lambda1 lambda2;\n"
           "class fts: u_tt - u_xx - u_yy - lambda0*u_t^2/t^2 - lambda1*u_x^2/x^2"
           " - lambda2*u_y^2/y^2;\n"
           "reduce ansatz rho = t^2 - x^2 - y^2 | solve t | sqrt t;\n",
           "reduction of the ratio-invariant wave equation to an ordinary equation"),
    ]
}


def list_ids() -> List[str]:
    return sorted(ENTRIES)


def entry(entry_id: str) -> CatalogEntry:
    try:
        return ENTRIES[entry_id]
    except KeyError:
        raise UnknownCatalogEntryError(f"unknown catalog id {entry_id!r}") from None


def _parse_condition_set(text: str, sp: JetSpace, name: str) -> ConditionSet:
    body, _, tail = text.partition("upto")
    rounds = int(tail.strip()) if tail.strip() else 0
    gens = []
    for part in body.split(","):
        part = part.strip()
        if part.endswith("= 0"):
            part = part[: -len("= 0")].strip()
        elif part.endswith("=0"):
            part = part[: -len("=0")].strip()
        gens.append(parse_expression(part, sp))
    return ConditionSet(sp, tuple(gens), rounds, name)


def parse_ansatz_payload(text: str, sp: JetSpace, name: str = ""):
    """Ansatz payload: 'r = expr[, r2 = expr] | retain t | solve y | sqrt x | operators id...'."""
    from .reduction import Ansatz

    segments = [s.strip() for s in text.split("|")]
    new_vars = []
    for part in segments[0].split(","):
        var, _, expr = part.partition("=")
        new_vars.append((var.strip(), parse_expression(expr.strip(), sp)))
    retained: Tuple[str, ...] = ()
    solve_var = None
    sqrt_var = None
    operators: Tuple[VectorField, ...] = ()
    for seg in segments[1:]:
        head, _, rest = seg.partition(" ")
        rest = rest.strip()
        if head == "retain":
            retained = tuple(rest.split())
        elif head == "solve":
            solve_var = rest
        elif head == "sqrt":
            sqrt_var = rest
        elif head == "operators":
            operators = tuple(load(op_id) for op_id in rest.split())
        else:
            raise UnknownCatalogEntryError(f"unknown ansatz directive {head!r}")
    return Ansatz(
        sp, tuple(new_vars), retained, "phi", solve_var, sqrt_var, operators, name
    )


def load(entry_id: str):
    """Parse a catalog entry into its typed object."""
    e = entry(entry_id)
    sp = space(e.space_id)
    if e.kind == "operator":
        return parse_vector_field(e.payload, sp, name=e.id)
    if e.kind == "condition-set":
        return _parse_condition_set(e.payload, sp, name=e.id)
    if e.kind == "invariant-list":
        return [parse_expression(text, sp) for text in e.payload]
    if e.kind == "equation":
        return parse_expression(e.payload, sp)
    if e.kind == "ansatz":
        return parse_ansatz_payload(e.payload, sp, name=e.id)
    if e.kind == "pipeline":
        from .session import parse_pipeline_spec

        return parse_pipeline_spec(e.payload)
    raise UnknownCatalogEntryError(f"cannot load entries of kind {e.kind!r}")


def resolve(ref: str, default_space: JetSpace = None):
    """Resolve '@catalog/<id>' references; plain text parses in default_space."""
    if ref.startswith("@catalog/"):
        return load(ref[len("@catalog/"):])
    if default_space is None:
        raise UnknownCatalogEntryError(f"cannot resolve {ref!r} without a space")
    return parse_expression(ref, default_space)


def checksums() -> Dict[str, str]:
    return {
        e.id: hashlib.sha256(e.payload_text().encode()).hexdigest()
        for e in ENTRIES.values()
    }


def pinned_checksums() -> Dict[str, str]:
    data = resources.files("jetsym").joinpath("data/catalog_checksums.json")
    return json.loads(data.read_text())
