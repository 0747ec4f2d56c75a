"""Request and response schemas of the verification service."""

from __future__ import annotations

from typing import Dict, List, Optional, Union

from pydantic import BaseModel, Field


class SpaceModel(BaseModel):
    independents: List[str]
    dependents: List[str]
    max_order: int = 2
    metric: Optional[List[int]] = None
    parameters: List[str] = Field(default_factory=list)
    functions: Dict[str, int] = Field(default_factory=dict)


class CheckRequest(BaseModel):
    """One invariance check.

    Operators and expressions are DSL text or @catalog/<id> references; the
    space is an explicit declaration, a catalog space id, or omitted when every
    referenced object already pins one."""

    operators: List[str]
    expression: str
    conditions: Optional[str] = None  # 'G = 0, ... upto k' or @catalog/<id>
    space: Optional[Union[SpaceModel, str]] = None


class OracleRequest(CheckRequest):
    trials: int = 20
    seed: int = 0
    thetas: List[float] = Field(default_factory=lambda: [0.1, -0.1, 0.3, -0.3])
    method: str = "auto"


class ManifoldModel(BaseModel):
    rules: Dict[str, str] = Field(default_factory=dict)
    notes: List[str] = Field(default_factory=list)
    unsolved: List[str] = Field(default_factory=list)


class VerdictModel(BaseModel):
    kind: str
    holds: bool
    residual: str
    residuals: Dict[str, str] = Field(default_factory=dict)
    domain_notes: List[str] = Field(default_factory=list)
    notes: List[str] = Field(default_factory=list)
    proper: Optional[bool] = None
    manifold: Optional[ManifoldModel] = None
    sub: Optional[Dict[str, "VerdictModel"]] = None


class OracleResultModel(BaseModel):
    invariant: bool
    max_deviation: float
    trials: int
    thetas: List[float]
    seed: int
    conclusive: bool
    method: str


class OracleResponse(BaseModel):
    symbolic: VerdictModel
    oracle: OracleResultModel
    agree: bool


class ProlongRequest(BaseModel):
    operator: str
    order: int = 2
    space: Optional[Union[SpaceModel, str]] = None


class ProlongResponse(BaseModel):
    operator: str
    order: int
    coefficients: Dict[str, str]


class ReduceRequest(BaseModel):
    equation: str
    by: Optional[str] = None  # translation direction
    ansatz: Optional[str] = None  # @catalog/<id> or ansatz payload text
    space: Optional[Union[SpaceModel, str]] = None


class ReduceResponse(BaseModel):
    ok: bool
    reduced: Optional[str] = None
    residuals: List[str] = Field(default_factory=list)
    notes: List[str] = Field(default_factory=list)
    reduced_space: Optional[SpaceModel] = None


class HiddenRequest(BaseModel):
    equation: str
    reduce_by: Optional[str] = None
    ansatz: Optional[str] = None
    candidate: str = ""
    space: Optional[Union[SpaceModel, str]] = None


class PipelineRequest(BaseModel):
    spec: str  # pipeline DSL text or @catalog/<id>


class SuiteRequest(BaseModel):
    seed: int = 0
    trials: int = 20
    method: str = "auto"


class SessionRequest(BaseModel):
    text: str


class CatalogEntryModel(BaseModel):
    id: str
    kind: str
    space: str
    payload: str
    anchor: str


class ErrorModel(BaseModel):
    error: str
    message: str
