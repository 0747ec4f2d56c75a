"""The full verification corpus: every catalog claim checked twice.

Each row of the suite runs one invariance statement both symbolically (exact
reduction to a residual) and numerically (flow transport of sampled jet
points) and records whether the two verdicts agree and match the expected
outcome.  The corpus covers the absolute and conditional invariant lists for
the rotation and the boost algebra, the ratio-invariant wave equation, the
hidden-translation examples, the translation-conditional invariants, the
radially reducible equations and all negative controls.

Reports are deterministic for a fixed seed: rows are ordered, floats are
formatted explicitly, and sampling uses seeded generators only.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from . import catalog
from .checks import (
    check_absolute_invariant,
    check_conditional_differential_invariant,
    check_conditional_invariance,
    check_lie_invariance,
    equation_manifold,
)
from .expr import Expression, FunctionBinding
from .fields import VectorField, prolong
from .manifold import ConstraintManifold, build_manifold, identity_manifold
from .oracle import DEFAULT_THETAS, numeric_invariance
from .reduction import check_hidden_symmetry, reduce_by_translation, translation_field
from .spaces import JetSpace


def make_bindings(space: JetSpace, seed: int) -> Dict[str, FunctionBinding]:
    """Deterministic random polynomial instantiations for every declared function."""
    bindings: Dict[str, FunctionBinding] = {}
    for name in sorted(space.functions):
        arity = space.functions[name]
        rng = random.Random((seed, name))
        degree = 2 if arity <= 4 else 1
        bindings[name] = FunctionBinding.random_polynomial(rng, arity, degree)
    return bindings


@dataclass
class SuiteRow:
    id: str
    kind: str
    description: str
    expected: bool
    symbolic: bool
    oracle: bool
    deviation: float
    conclusive: bool

    @property
    def agree(self) -> bool:
        return self.symbolic == self.oracle and self.conclusive

    @property
    def passed(self) -> bool:
        return self.agree and self.symbolic == self.expected

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "kind": self.kind,
            "description": self.description,
            "expected": self.expected,
            "symbolic": self.symbolic,
            "oracle": self.oracle,
            "deviation": f"{self.deviation:.6e}",
            "agree": self.agree,
            "pass": self.passed,
        }


@dataclass
class SuiteReport:
    seed: int
    trials: int
    thetas: Tuple[float, ...]
    method: str
    rows: List[SuiteRow] = field(default_factory=list)

    @property
    def all_agree(self) -> bool:
        return all(r.agree for r in self.rows)

    @property
    def all_pass(self) -> bool:
        return all(r.passed for r in self.rows)

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "trials": self.trials,
            "thetas": list(self.thetas),
            "method": self.method,
            "checks": len(self.rows),
            "agreements": sum(r.agree for r in self.rows),
            "passes": sum(r.passed for r in self.rows),
            "all_pass": self.all_pass,
            "rows": [r.to_dict() for r in self.rows],
        }

    def to_text(self) -> str:
        lines = [
            f"verification corpus  seed={self.seed} trials={self.trials} "
            f"thetas={','.join(str(t) for t in self.thetas)} method={self.method}",
            f"{'id':42} {'expect':7} {'symbolic':9} {'oracle':7} {'max_dev':13} agree pass",
        ]
        for r in self.rows:
            lines.append(
                f"{r.id:42} {_hf(r.expected):7} {_hf(r.symbolic):9} {_hf(r.oracle):7} "
                f"{r.deviation:<13.6e} {_yn(r.agree):5} {_yn(r.passed)}"
            )
        lines.append(
            f"TOTAL checks={len(self.rows)} agreements={sum(r.agree for r in self.rows)} "
            f"passes={sum(r.passed for r in self.rows)}"
        )
        return "\n".join(lines) + "\n"


def _hf(b: bool) -> str:
    return "holds" if b else "fails"


def _yn(b: bool) -> str:
    return "yes" if b else "NO"


def run_paper_suite(
    seed: int = 0,
    trials: int = 20,
    thetas: Sequence[float] = DEFAULT_THETAS,
    method: str = "auto",
) -> SuiteReport:
    report = SuiteReport(seed=seed, trials=trials, thetas=tuple(thetas), method=method)
    rot = catalog.space("rotation")
    lor = catalog.space("lorentz")
    bind_rot = make_bindings(rot, seed)
    bind_lor = make_bindings(lor, seed + 1)

    J = catalog.load("rotation.J")
    dy_rot = catalog.load("translation.dy")
    dx_rot = catalog.load("translation.dx")
    lorentz_ops = [catalog.load(i) for i in ("lorentz.J01", "lorentz.J02", "lorentz.J12")]
    cond_rot = catalog.load("cond-rotation")
    cond_lor = catalog.load("cond-lorentz")
    cond_ux = catalog.load("cond-ux")
    m_rot = build_manifold(rot, cond_rot)
    m_lor = build_manifold(lor, cond_lor)
    m_ux = build_manifold(rot, cond_ux)

    def group(
        gid: str,
        fld: VectorField,
        exprs: Sequence[Expression],
        manifold: Optional[ConstraintManifold],
        expected: Sequence[bool],
        bindings: Optional[Mapping[str, FunctionBinding]],
        kind: str,
        descriptions: Sequence[str],
        order: Optional[int] = None,
    ) -> None:
        p_order = order if order is not None else max((e.order for e in exprs), default=1)
        pf = prolong(fld, max(p_order, 1))
        symbolic = []
        for e in exprs:
            applied = pf.apply(e)
            reduced = manifold.reduce(applied) if manifold is not None else applied
            symbolic.append(reduced.is_zero)
        oracle = numeric_invariance(
            pf, list(exprs), manifold, trials=trials, thetas=thetas,
            seed=seed, bindings=bindings, method=method,
        )
        for i, (e, sym, orc, exp, desc) in enumerate(
            zip(exprs, symbolic, oracle, expected, descriptions)
        ):
            report.rows.append(
                SuiteRow(
                    id=f"{gid}/{i:02d}",
                    kind=kind,
                    description=desc,
                    expected=exp,
                    symbolic=sym,
                    oracle=orc.invariant,
                    deviation=orc.max_deviation,
                    conclusive=orc.conclusive,
                )
            )

    # -- absolute invariants of the rotation --------------------------------
    di_rot = catalog.load("di-rotation")
    group(
        "di-rotation", J, di_rot, None, [True] * len(di_rot), None,
        "absolute-invariant", [e.to_dsl() for e in di_rot], order=2,
    )
    ux = catalog.space("rotation")
    from .dsl import parse_expression

    group(
        "di-rotation-control", J, [parse_expression("u_x", rot)], None, [False], None,
        "absolute-invariant", ["u_x (rotates into -u_y)"], order=2,
    )

    # -- conditional invariants of the rotation ------------------------------
    cdi_rot = catalog.load("cdi-rotation")
    group(
        "cdi-rotation", J, cdi_rot, m_rot, [True] * len(cdi_rot), None,
        "conditional-invariant", [e.to_dsl() for e in cdi_rot], order=2,
    )

    # -- absolute invariants of the boost algebra ----------------------------
    di_lor = catalog.load("di-lorentz")
    for op in lorentz_ops:
        group(
            f"di-lorentz-{op.name.split('.')[-1]}", op, di_lor, None,
            [True] * len(di_lor), None, "absolute-invariant",
            [e.to_dsl()[:46] for e in di_lor], order=2,
        )
    euclid_control = catalog.load("control.euclidean-xx")
    group(
        "di-lorentz-control", lorentz_ops[0], euclid_control, None, [False], None,
        "absolute-invariant", ["unweighted t^2+x^2+y^2 under a boost"], order=2,
    )

    # -- conditional invariants of the boost algebra -------------------------
    cdi_lor = catalog.load("cdi-lorentz")
    for op in lorentz_ops:
        group(
            f"cdi-lorentz-{op.name.split('.')[-1]}", op, cdi_lor, m_lor,
            [True] * len(cdi_lor), None, "conditional-invariant",
            [e.to_dsl() for e in cdi_lor], order=2,
        )
    signed = catalog.load("cdi-lorentz.signed-control")
    for e, op in zip(signed, lorentz_ops[:2]):
        tag = op.name.split(".")[-1]
        group(
            f"cdi-lorentz-signed-control-{tag}", op, [e], m_lor,
            [False], None, "conditional-invariant",
            [f"{e.to_dsl()} under {tag}"], order=2,
        )

    # -- the ratio-invariant wave equation -----------------------------------
    fts = catalog.load("fts.equation")
    m_fts_cond, _ = equation_manifold(lor, fts, base=m_lor)
    m_fts_only, _ = equation_manifold(lor, fts)
    for op in lorentz_ops:
        tag = op.name.split(".")[-1]
        verdict = check_conditional_invariance(op, fts, cond_lor)
        orc = numeric_invariance(
            prolong(op, 2), fts, m_fts_cond, trials=trials, thetas=thetas,
            seed=seed, bindings=bind_lor, method=method,
        )
        report.rows.append(
            SuiteRow(
                id=f"fts-conditional/{tag}", kind="conditional",
                description=f"ratio-invariant wave equation under {tag} on the boost conditions",
                expected=True, symbolic=verdict.holds and bool(verdict.proper),
                oracle=orc.invariant, deviation=orc.max_deviation,
                conclusive=orc.conclusive,
            )
        )
        lie = check_lie_invariance(op, fts)
        orc = numeric_invariance(
            prolong(op, 2), fts, m_fts_only, trials=trials, thetas=thetas,
            seed=seed, bindings=bind_lor, method=method,
        )
        report.rows.append(
            SuiteRow(
                id=f"fts-lie-control/{tag}", kind="lie",
                description=f"plain Lie invariance of the ratio equation under {tag} (generic parameters)",
                expected=False, symbolic=lie.holds,
                oracle=orc.invariant, deviation=orc.max_deviation,
                conclusive=orc.conclusive,
            )
        )

    # -- hidden translational symmetry ---------------------------------------
    for eq_id in ("hidden-translation.1", "hidden-translation.2"):
        equation = catalog.load(eq_id)
        reduced = reduce_by_translation(equation, "x")
        red_space = reduced.space
        dy_red = translation_field(red_space, "y")
        m_red, _ = equation_manifold(red_space, reduced)
        lie_red = check_lie_invariance(dy_red, reduced)
        bind_red = make_bindings(red_space, seed)
        orc = numeric_invariance(
            prolong(dy_red, 2, red_space), reduced, m_red, trials=trials,
            thetas=thetas, seed=seed, bindings=bind_red, method=method,
        )
        report.rows.append(
            SuiteRow(
                id=f"{eq_id}/reduced-dy", kind="lie",
                description="reduced equation is invariant under the y-translation",
                expected=True, symbolic=lie_red.holds, oracle=orc.invariant,
                deviation=orc.max_deviation, conclusive=orc.conclusive,
            )
        )
        lie_orig = check_lie_invariance(dy_rot, equation)
        m_orig, _ = equation_manifold(rot, equation)
        orc = numeric_invariance(
            prolong(dy_rot, 2), equation, m_orig, trials=trials, thetas=thetas,
            seed=seed, bindings=bind_rot, method=method,
        )
        report.rows.append(
            SuiteRow(
                id=f"{eq_id}/original-dy", kind="lie",
                description="original equation is NOT invariant under the y-translation",
                expected=False, symbolic=lie_orig.holds, oracle=orc.invariant,
                deviation=orc.max_deviation, conclusive=orc.conclusive,
            )
        )

    # -- translation-conditional invariants q1..q4 ---------------------------
    q_invs = [catalog.load(f"q.{k}") for k in range(1, 5)]
    group(
        "q-invariants", dy_rot, q_invs, m_ux, [True] * 4, bind_rot,
        "conditional-invariant",
        [f"q{k} vanishes identically on the u_x manifold" for k in range(1, 5)],
        order=2,
    )

    # -- the generic member of the translation class -------------------------
    inv1 = catalog.load("inv1.generic")
    m_inv1, _ = equation_manifold(rot, inv1, base=m_ux)
    for op, tag, expected in ((dx_rot, "qcond-dx", True), (dy_rot, "cond-dy", True)):
        if tag.startswith("qcond"):
            from .checks import check_q_conditional

            verdict = check_q_conditional(op, inv1)
        else:
            verdict = check_conditional_invariance(op, inv1, cond_ux)
        orc = numeric_invariance(
            prolong(op, 2), inv1, m_inv1, trials=trials, thetas=thetas,
            seed=seed, bindings=bind_rot, method=method,
        )
        report.rows.append(
            SuiteRow(
                id=f"inv1-generic/{tag}", kind=verdict.kind,
                description=f"generic translation-class member under {op.name}",
                expected=expected, symbolic=verdict.holds, oracle=orc.invariant,
                deviation=orc.max_deviation, conclusive=orc.conclusive,
            )
        )

    # -- radially reducible equations and controls ----------------------------
    for k in range(1, 6):
        eq = catalog.load(f"reducible-r.{k}")
        verdict = check_conditional_invariance(J, eq, cond_rot)
        m_eq = verdict.manifold
        orc = numeric_invariance(
            prolong(J, 2), eq, m_eq, trials=trials, thetas=thetas,
            seed=seed, bindings=bind_rot, method=method,
        )
        report.rows.append(
            SuiteRow(
                id=f"reducible-r.{k}/conditional", kind="conditional",
                description=f"radially reducible equation {k} under the rotation conditions",
                expected=True, symbolic=verdict.holds, oracle=orc.invariant,
                deviation=orc.max_deviation, conclusive=orc.conclusive,
            )
        )
    for k in (1, 2):
        eq = catalog.load(f"control-r.{k}")
        verdict = check_conditional_invariance(J, eq, cond_rot)
        orc = numeric_invariance(
            prolong(J, 2), eq, verdict.manifold, trials=trials, thetas=thetas,
            seed=seed, bindings=bind_rot, method=method,
        )
        report.rows.append(
            SuiteRow(
                id=f"control-r.{k}/conditional", kind="conditional",
                description=f"non-reducible control {k} fails the rotation conditions",
                expected=False, symbolic=verdict.holds, oracle=orc.invariant,
                deviation=orc.max_deviation, conclusive=orc.conclusive,
            )
        )

    # -- conditional reading of the hidden translation example ----------------
    F1 = catalog.load("hidden-translation.1")
    verdict = check_conditional_invariance(dy_rot, F1, cond_ux)
    m_f1, _ = equation_manifold(rot, F1, base=m_ux)
    orc = numeric_invariance(
        prolong(dy_rot, 2), F1, m_f1, trials=trials, thetas=thetas,
        seed=seed, bindings=bind_rot, method=method,
    )
    report.rows.append(
        SuiteRow(
            id="hidden-translation.1/conditional-dy", kind="conditional",
            description="hidden symmetry read as conditional invariance on u_x = 0",
            expected=True, symbolic=verdict.holds and bool(verdict.proper),
            oracle=orc.invariant, deviation=orc.max_deviation,
            conclusive=orc.conclusive,
        )
    )

    report.rows.sort(key=lambda r: r.id)
    return report
