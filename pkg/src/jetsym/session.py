"""Session files: declarations plus a command list, in the expression DSL.

A session is a sequence of semicolon-terminated statements ('#' starts a
comment).  Declarations build the workspace; commands run checks and
reductions and contribute to the report:

    space t x y | u order 2 metric 1 1 1;
    param lambda0;
    fn K1(3);
    let F = u_t + u_x*K1(t,y,u) + u_xx + u_yy;
    op J = x*d/dy - y*d/dx;
    cond rot: x*u_y - y*u_x = 0 upto 1;
    ansatz rad: r = x^2 + y^2 | retain t | solve y | sqrt x | operators J;
    check lie J: F;
    check inv J: u_x^2 + u_y^2;
    check cdi J: u_x/x given rot;
    reduce F by ansatz rad;
    hidden F by trans x candidate J;

Pipeline specs use the same statement syntax with class / reduce / candidate /
transform statements.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple, Union

from .checks import (
    Verdict,
    check_absolute_invariant,
    check_conditional_differential_invariant,
    check_conditional_invariance,
    check_lie_invariance,
    check_q_conditional,
)
from .dsl import parse_expression, parse_vector_field
from .errors import SessionError
from .expr import Expression
from .fields import VectorField
from .manifold import ConditionSet
from .reduction import (
    Ansatz,
    PointTransform,
    apply_ansatz,
    check_hidden_symmetry,
    reduce_by_translation,
    run_pipeline,
)
from .spaces import JetSpace, declare_space


def _statements(text: str) -> List[str]:
    lines = []
    for line in text.splitlines():
        if "#" in line:
            line = line[: line.index("#")]
        lines.append(line)
    joined = "\n".join(lines)
    return [s.strip() for s in joined.split(";") if s.strip()]


def _parse_space_statement(body: str) -> JetSpace:
    # body: "t x y | u order 2 [metric 1 -1 -1]"
    head, _, rest = body.partition("order")
    if not rest:
        raise SessionError(f"space statement needs an order clause: {body!r}")
    inds, _, deps = head.partition("|")
    if not deps:
        raise SessionError("space statement needs 'independents | dependents'")
    rest = rest.strip()
    metric = None
    if "metric" in rest:
        order_part, _, metric_part = rest.partition("metric")
        metric = tuple(int(v) for v in metric_part.split())
        rest = order_part
    return declare_space(
        tuple(inds.split()), tuple(deps.split()), int(rest.strip()), metric
    )


@dataclass
class Session:
    """Parsed session: the declared space, named objects and commands."""

    space: Optional[JetSpace] = None
    expressions: Dict[str, Expression] = field(default_factory=dict)
    operators: Dict[str, VectorField] = field(default_factory=dict)
    conditions: Dict[str, ConditionSet] = field(default_factory=dict)
    ansatze: Dict[str, Ansatz] = field(default_factory=dict)
    commands: List[Tuple[str, str]] = field(default_factory=list)
    # pipeline statements
    members: List[Tuple[str, Expression]] = field(default_factory=list)
    reductions: List[Union[str, Ansatz]] = field(default_factory=list)
    candidates: List[VectorField] = field(default_factory=list)
    transforms: List[PointTransform] = field(default_factory=list)
    parameters: List[str] = field(default_factory=list)
    functions: Dict[str, int] = field(default_factory=dict)

    def expression(self, text: str) -> Expression:
        text = text.strip()
        if text in self.expressions:
            return self.expressions[text]
        if text.startswith("@catalog/"):
            from . import catalog

            return catalog.load(text[len("@catalog/"):])
        return parse_expression(text, self._space())

    def operator(self, text: str) -> VectorField:
        text = text.strip()
        if text in self.operators:
            return self.operators[text]
        if text.startswith("@catalog/"):
            from . import catalog

            return catalog.load(text[len("@catalog/"):])
        return parse_vector_field(text, self._space(), name=text)

    def condition(self, name: str) -> ConditionSet:
        try:
            return self.conditions[name.strip()]
        except KeyError:
            if name.strip().startswith("@catalog/"):
                from . import catalog

                return catalog.load(name.strip()[len("@catalog/"):])
            raise SessionError(f"unknown condition set {name!r}") from None

    def _space(self) -> JetSpace:
        if self.space is None:
            raise SessionError("no space declared")
        return self.space


def parse_session(text: str) -> Session:
    """Parse declarations and commands; nothing is executed yet."""
    from . import catalog as _catalog

    s = Session()
    pending: List[Tuple[str, str]] = []
    for stmt in _statements(text):
        head, _, body = stmt.partition(" ")
        body = body.strip()
        if head == "space":
            if s.space is not None:
                raise SessionError("space declared twice")
            s.space = _parse_space_statement(body)
            continue
        if head == "param":
            s.parameters.extend(body.split())
            s.space = None if s.space is None else _respace(s)
            continue
        if head == "fn":
            name, _, arity = body.partition("(")
            if not arity.endswith(")"):
                raise SessionError(f"malformed fn statement: {stmt!r}")
            s.functions[name.strip()] = int(arity[:-1])
            s.space = None if s.space is None else _respace(s)
            continue
        pending.append((head, body))

    if s.space is not None and (s.parameters or s.functions):
        s.space = _respace(s)

    for head, body in pending:
        if head == "let":
            name, _, expr = body.partition("=")
            s.expressions[name.strip()] = s.expression(expr)
        elif head == "op":
            name, _, fld = body.partition("=")
            s.operators[name.strip()] = parse_vector_field(
                fld.strip(), s._space(), name=name.strip()
            )
        elif head == "cond":
            name, _, spec = body.partition(":")
            from .catalog import _parse_condition_set

            s.conditions[name.strip()] = _parse_condition_set(
                spec.strip(), s._space(), name.strip()
            )
        elif head == "ansatz":
            name, _, spec = body.partition(":")
            s.ansatze[name.strip()] = _parse_session_ansatz(s, spec.strip(), name.strip())
        elif head == "class":
            name, _, expr = body.partition(":")
            s.members.append((name.strip(), s.expression(expr)))
        elif head == "reduce" and body.startswith("trans "):
            s.reductions.append(body[len("trans "):].strip())
        elif head == "reduce" and body.startswith("ansatz ") and "=" in body:
            spec = body[len("ansatz "):].strip()
            s.reductions.append(_parse_session_ansatz(s, spec, "ansatz"))
        elif head == "candidate":
            name, _, fld = body.partition(":")
            s.candidates.append(
                parse_vector_field(fld.strip(), s._space(), name=name.strip())
            )
        elif head == "transform":
            name, _, spec = body.partition(":")
            fwd_part, _, inv_part = spec.partition("inverse")
            s.transforms.append(
                PointTransform(
                    _parse_assignments(fwd_part),
                    _parse_assignments(inv_part),
                    name.strip(),
                )
            )
        elif head in ("check", "reduce", "hidden", "prolong"):
            s.commands.append((head, body))
        else:
            raise SessionError(f"unknown statement {head!r}")
    return s


def _respace(s: Session) -> JetSpace:
    base = s.space
    return declare_space(
        base.independents,
        base.dependents,
        base.max_order,
        base.metric,
        parameters=tuple(dict.fromkeys(tuple(base.parameters) + tuple(s.parameters))),
        functions={**base.functions, **s.functions},
    )


def _parse_session_ansatz(s: Session, spec: str, name: str) -> Ansatz:
    from .catalog import parse_ansatz_payload

    segments = spec.split("|")
    ops: List[VectorField] = []
    kept = []
    for seg in segments:
        if seg.strip().startswith("operators "):
            for op_name in seg.strip()[len("operators "):].split():
                ops.append(s.operator(op_name))
        else:
            kept.append(seg)
    anz = parse_ansatz_payload("|".join(kept), s._space(), name)
    if ops:
        anz = Ansatz(
            anz.space, anz.new_vars, anz.retained, anz.phi,
            anz.solve_var, anz.sqrt_var, tuple(ops), name,
        )
    return anz


def _parse_assignments(text: str) -> Dict[str, str]:
    out: Dict[str, str] = {}
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        var, _, expr = part.partition("->")
        if not expr:
            raise SessionError(f"malformed assignment {part!r}")
        out[var.strip()] = expr.strip()
    return out


@dataclass
class PipelineSpec:
    space: JetSpace
    members: List[Tuple[str, Expression]]
    reductions: List[Union[str, Ansatz]]
    candidates: List[VectorField]
    transforms: List[PointTransform]

    def run(self):
        return run_pipeline(
            self.space, self.members, self.reductions, self.candidates, self.transforms
        )


def parse_pipeline_spec(text: str) -> PipelineSpec:
    s = parse_session(text)
    if not s.members:
        raise SessionError("pipeline spec declares no class members")
    if not s.reductions:
        raise SessionError("pipeline spec declares no reductions")
    return PipelineSpec(s._space(), s.members, s.reductions, s.candidates, s.transforms)


# ---------------------------------------------------------------------------
# Command execution
# ---------------------------------------------------------------------------


def _run_check(s: Session, body: str) -> Verdict:
    sub, _, rest = body.partition(" ")
    rest = rest.strip()
    given = None
    if " given " in rest:
        rest, _, given = rest.rpartition(" given ")
        rest = rest.strip()
    ops_part, _, expr_part = rest.partition(":")
    if not expr_part:
        raise SessionError(f"check statement needs 'operator(s): expression': {body!r}")
    ops = [s.operator(o) for o in ops_part.split(",")]
    target = s.expression(expr_part)
    if sub == "lie":
        return check_lie_invariance(ops[0], target)
    if sub == "qcond":
        return check_q_conditional(ops[0], target)
    if sub == "cond":
        if given is None:
            raise SessionError("check cond needs a 'given <condition>' clause")
        return check_conditional_invariance(ops[0], target, s.condition(given))
    if sub == "inv":
        return check_absolute_invariant(ops, target)
    if sub == "cdi":
        if given is None:
            raise SessionError("check cdi needs a 'given <condition>' clause")
        return check_conditional_differential_invariant(ops, target, s.condition(given))
    raise SessionError(f"unknown check kind {sub!r}")


def run_session(text: str) -> dict:
    """Parse and execute a session; the report lists one row per command."""
    s = parse_session(text)
    rows: List[dict] = []
    ok = True
    for head, body in s.commands:
        row: dict = {"command": f"{head} {body}"}
        try:
            if head == "check":
                verdict = _run_check(s, body)
                row["verdict"] = verdict.to_dict()
                ok = ok and verdict.holds
            elif head == "reduce":
                target, _, how = body.partition(" by ")
                target_expr = s.expression(target)
                how = how.strip()
                if how.startswith("trans "):
                    reduced = reduce_by_translation(target_expr, how[len("trans "):].strip())
                    row["reduced"] = reduced.to_dsl()
                elif how.startswith("ansatz "):
                    anz = s.ansatze.get(how[len("ansatz "):].strip())
                    if anz is None:
                        raise SessionError(f"unknown ansatz {how!r}")
                    result = apply_ansatz(target_expr, anz)
                    row["ok"] = result.ok
                    if result.ok:
                        row["reduced"] = result.reduced.to_dsl()
                    else:
                        row["residuals"] = [r.to_dsl() for r in result.residuals]
                        ok = False
                else:
                    raise SessionError(f"unknown reduction {how!r}")
            elif head == "hidden":
                target, _, rest = body.partition(" by ")
                how, _, cand = rest.partition(" candidate ")
                how = how.strip()
                target_expr = s.expression(target)
                candidate = s.operator(cand)
                if how.startswith("trans "):
                    reduction: Union[str, Ansatz] = how[len("trans "):].strip()
                elif how.startswith("ansatz "):
                    reduction = s.ansatze[how[len("ansatz "):].strip()]
                else:
                    raise SessionError(f"unknown reduction {how!r}")
                verdict = check_hidden_symmetry(target_expr, reduction, candidate)
                row["verdict"] = verdict.to_dict()
                ok = ok and verdict.holds
            else:
                raise SessionError(f"unknown command {head!r}")
        except SessionError:
            raise
        rows.append(row)
    return {"ok": ok, "rows": rows}
