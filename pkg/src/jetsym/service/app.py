"""FastAPI service exposing the symbolic verification engine.

All computation is pure and stateless, so the service is safe to run with
multiple workers; the CLI talks to the same app in-process by default.
"""

from __future__ import annotations

from typing import List, Optional, Tuple, Union

from fastapi import FastAPI
from fastapi.requests import Request
from fastapi.responses import JSONResponse

from .. import catalog
from ..checks import (
    Verdict,
    check_absolute_invariant,
    check_conditional_differential_invariant,
    check_conditional_invariance,
    check_lie_invariance,
    check_q_conditional,
)
from ..dsl import parse_expression, parse_vector_field
from ..errors import JetsymError, SessionError, UnknownCatalogEntryError
from ..expr import Expression
from ..fields import VectorField, prolong
from ..manifold import ConditionSet
from ..oracle import numeric_invariance
from ..reduction import apply_ansatz, check_hidden_symmetry, reduce_by_translation
from ..session import run_session
from ..spaces import JetSpace, declare_space
from ..suite import make_bindings, run_paper_suite
from .models import (
    CatalogEntryModel,
    CheckRequest,
    ErrorModel,
    HiddenRequest,
    OracleRequest,
    OracleResponse,
    PipelineRequest,
    ProlongRequest,
    ProlongResponse,
    ReduceRequest,
    ReduceResponse,
    SessionRequest,
    SpaceModel,
    SuiteRequest,
    VerdictModel,
)

CHECK_KINDS = ("lie", "qcond", "cond", "inv", "cdi")


def _space_from(model: Optional[Union[SpaceModel, str]], refs: List[str]) -> JetSpace:
    if isinstance(model, SpaceModel):
        return declare_space(
            model.independents, model.dependents, model.max_order,
            model.metric, model.parameters, model.functions,
        )
    if isinstance(model, str):
        return catalog.space(model)
    space_ids = {
        catalog.entry(r[len("@catalog/"):]).space_id
        for r in refs
        if r and r.startswith("@catalog/")
    }
    if len(space_ids) == 1:
        return catalog.space(space_ids.pop())
    if len(space_ids) > 1:
        raise SessionError(
            f"catalog references span different spaces: {sorted(space_ids)}"
        )
    raise SessionError(
        "no space given and none of the references pins one; pass 'space'"
    )


def _operator(text: str, space: JetSpace) -> VectorField:
    if text.startswith("@catalog/"):
        return catalog.load(text[len("@catalog/"):])
    return parse_vector_field(text, space, name=text)


def _expression(text: str, space: JetSpace) -> Expression:
    if text.startswith("@catalog/"):
        return catalog.load(text[len("@catalog/"):])
    return parse_expression(text, space)


def _conditions(text: str, space: JetSpace) -> ConditionSet:
    if text.startswith("@catalog/"):
        return catalog.load(text[len("@catalog/"):])
    return catalog._parse_condition_set(text, space, "conditions")


def _run_check(kind: str, req: CheckRequest) -> Tuple[Verdict, JetSpace]:
    refs = list(req.operators) + [req.expression, req.conditions or ""]
    space = _space_from(req.space, refs)
    ops = [_operator(o, space) for o in req.operators]
    target = _expression(req.expression, space)
    if kind == "lie":
        return check_lie_invariance(ops[0], target), space
    if kind == "qcond":
        return check_q_conditional(ops[0], target), space
    if kind == "cond":
        if req.conditions is None:
            raise SessionError("conditional checks need a 'conditions' field")
        return check_conditional_invariance(ops[0], target, _conditions(req.conditions, space)), space
    if kind == "inv":
        return check_absolute_invariant(ops, target), space
    if kind == "cdi":
        if req.conditions is None:
            raise SessionError("conditional-invariant checks need a 'conditions' field")
        return (
            check_conditional_differential_invariant(
                ops, target, _conditions(req.conditions, space)
            ),
            space,
        )
    raise SessionError(f"unknown check kind {kind!r}")


def _space_model(space: JetSpace) -> SpaceModel:
    d = space.describe()
    d.pop("reduced", None)
    return SpaceModel(**d)


def create_app() -> FastAPI:
    app = FastAPI(
        title="jetsym",
        description="Symbolic verification of Lie, conditional and hidden "
        "symmetries of PDEs on jet spaces",
        version="0.1.0",
    )

    @app.exception_handler(JetsymError)
    async def _jetsym_error(request: Request, exc: JetsymError):
        status = 404 if isinstance(exc, UnknownCatalogEntryError) else 422
        return JSONResponse(
            status_code=status,
            content=ErrorModel(error=type(exc).__name__, message=str(exc)).model_dump(),
        )

    @app.get("/health")
    def health() -> dict:
        return {"status": "ok", "version": app.version}

    @app.get("/catalog", response_model=List[CatalogEntryModel])
    def catalog_list():
        return [
            CatalogEntryModel(
                id=e.id, kind=e.kind, space=e.space_id,
                payload=e.payload_text(), anchor=e.anchor,
            )
            for e in (catalog.entry(i) for i in catalog.list_ids())
        ]

    @app.get("/catalog/{entry_id:path}", response_model=CatalogEntryModel)
    def catalog_show(entry_id: str):
        e = catalog.entry(entry_id)
        return CatalogEntryModel(
            id=e.id, kind=e.kind, space=e.space_id,
            payload=e.payload_text(), anchor=e.anchor,
        )

    @app.post("/prolong", response_model=ProlongResponse)
    def prolong_endpoint(req: ProlongRequest):
        space = _space_from(req.space, [req.operator])
        field = _operator(req.operator, space)
        pf = prolong(field, req.order, space)
        return ProlongResponse(
            operator=field.to_dsl(),
            order=req.order,
            coefficients={c.name: e.to_dsl() for c, e in pf.coefficients.items()},
        )

    @app.post("/check/{kind}", response_model=VerdictModel)
    def check_endpoint(kind: str, req: CheckRequest):
        if kind not in CHECK_KINDS:
            raise SessionError(f"unknown check kind {kind!r}; use one of {CHECK_KINDS}")
        verdict, _ = _run_check(kind, req)
        return VerdictModel(**verdict.to_dict())

    @app.post("/oracle/{kind}", response_model=OracleResponse)
    def oracle_endpoint(kind: str, req: OracleRequest):
        if kind not in CHECK_KINDS:
            raise SessionError(f"unknown check kind {kind!r}; use one of {CHECK_KINDS}")
        verdict, space = _run_check(kind, req)
        target = _expression(req.expression, space)
        pf = prolong(
            _operator(req.operators[0], space), max(target.order, 1), space
        )
        result = numeric_invariance(
            pf,
            target,
            verdict.manifold,
            trials=req.trials,
            thetas=tuple(req.thetas),
            seed=req.seed,
            bindings=make_bindings(space, req.seed),
            method=req.method,
        )
        return OracleResponse(
            symbolic=VerdictModel(**verdict.to_dict()),
            oracle=result.to_dict(),
            agree=bool(verdict.holds == result.invariant and result.conclusive),
        )

    @app.post("/reduce", response_model=ReduceResponse)
    def reduce_endpoint(req: ReduceRequest):
        space = _space_from(req.space, [req.equation, req.ansatz or ""])
        equation = _expression(req.equation, space)
        if req.by is not None:
            reduced = reduce_by_translation(equation, req.by)
            return ReduceResponse(
                ok=True, reduced=reduced.to_dsl(),
                reduced_space=_space_model(reduced.space),
            )
        if req.ansatz is None:
            raise SessionError("reduce needs either 'by' (translation) or 'ansatz'")
        if req.ansatz.startswith("@catalog/"):
            ansatz = catalog.load(req.ansatz[len("@catalog/"):])
        else:
            ansatz = catalog.parse_ansatz_payload(req.ansatz, space)
        result = apply_ansatz(equation, ansatz)
        return ReduceResponse(
            ok=result.ok,
            reduced=result.reduced.to_dsl() if result.ok else None,
            residuals=[r.to_dsl() for r in result.residuals],
            notes=list(result.notes),
            reduced_space=_space_model(ansatz.reduced_space()) if result.ok else None,
        )

    @app.post("/hidden", response_model=VerdictModel)
    def hidden_endpoint(req: HiddenRequest):
        space = _space_from(req.space, [req.equation, req.candidate, req.ansatz or ""])
        equation = _expression(req.equation, space)
        candidate = _operator(req.candidate, space)
        if req.reduce_by is not None:
            reduction: Union[str, object] = req.reduce_by
        elif req.ansatz is not None:
            if req.ansatz.startswith("@catalog/"):
                reduction = catalog.load(req.ansatz[len("@catalog/"):])
            else:
                reduction = catalog.parse_ansatz_payload(req.ansatz, space)
        else:
            raise SessionError("hidden needs either 'reduce_by' or 'ansatz'")
        verdict = check_hidden_symmetry(equation, reduction, candidate)
        return VerdictModel(**verdict.to_dict())

    @app.post("/pipeline")
    def pipeline_endpoint(req: PipelineRequest) -> dict:
        if req.spec.startswith("@catalog/"):
            spec = catalog.load(req.spec[len("@catalog/"):])
        else:
            from ..session import parse_pipeline_spec

            spec = parse_pipeline_spec(req.spec)
        return spec.run().to_dict()

    @app.post("/suite/paper")
    def suite_endpoint(req: SuiteRequest) -> dict:
        return run_paper_suite(seed=req.seed, trials=req.trials, method=req.method).to_dict()

    @app.post("/session/run")
    def session_endpoint(req: SessionRequest) -> dict:
        return run_session(req.text)

    return app


app = create_app()
