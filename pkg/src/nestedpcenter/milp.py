"""Deterministic LP-format emission of the five model families, with optional
bound-based strengthenings, and a constraint-level validator for chains.

Formulations: A1 (assignment variables), A2 (radius-push rows only), A3
(distance-threshold variables), R1/R2 (min-max relative regret with and
without explicit radius variables). Lifting replaces the plain radius-push
rows by their bound-anchored versions; fixing (A3 only) pins the threshold
variables outside the per-period bound windows.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple, Union

from .bounds import BoundSet
from .instances import Chain, Instance, Schedule

Coef = Union[int, Fraction]
Term = Tuple[Coef, str]

FORMULATIONS = ("A1", "A2", "A3", "R1", "R2")


@dataclass(frozen=True)
class ModelSpec:
    formulation: str
    lift: bool = False
    fix: bool = False
    bounds: Optional[BoundSet] = None
    rel_anchor: Fraction = Fraction(1)  # scale of the R2 lift anchor (times d*)

    def __post_init__(self):
        if self.formulation not in FORMULATIONS:
            raise ValueError(f"unknown formulation {self.formulation!r}")
        if self.fix and self.formulation != "A3":
            raise ValueError("variable fixing applies to A3 only")
        if (self.lift or self.fix) and self.bounds is None:
            raise ValueError("lift/fix strengthenings need a BoundSet")
        if self.fix and self.bounds.UB is None:
            raise ValueError("fixing needs per-period upper bounds")


@dataclass
class Constraint:
    name: str
    terms: Tuple[Term, ...]
    sense: str  # "<=", ">=", "="
    rhs: Coef


@dataclass
class Variable:
    name: str
    kind: str  # "B" binary, "C" continuous
    fixed: Optional[int] = None  # emitted in Bounds when set


@dataclass
class ModelDocument:
    name: str
    objective: Tuple[Term, ...]
    constraints: List[Constraint]
    variables: List[Variable]
    meta: Dict[str, object] = field(default_factory=dict)

    def variable_names(self) -> List[str]:
        return [v.name for v in self.variables]


def _fmt_coef(value: Coef) -> str:
    if isinstance(value, Fraction) and value.denominator == 1:
        value = value.numerator
    if isinstance(value, int):
        return str(value)
    return format(float(value), ".17g")


def _fmt_expr(terms: Sequence[Term]) -> str:
    parts: List[str] = []
    for coef, var in terms:
        if coef == 0:
            continue
        sign = "-" if coef < 0 else "+"
        mag = -coef if coef < 0 else coef
        if mag == 1:
            body = var
        else:
            body = f"{_fmt_coef(mag)} {var}"
        if not parts and sign == "+":
            parts.append(body)
        else:
            parts.append(f"{sign} {body}")
    return " ".join(parts) if parts else "0"


def _wrap(line: str, width: int = 220) -> List[str]:
    if len(line) <= width:
        return [line]
    out: List[str] = []
    current = ""
    for tok in line.split(" "):
        if current and len(current) + 1 + len(tok) > width:
            out.append(current)
            current = " " + tok
        else:
            current = tok if not current else current + " " + tok
    out.append(current)
    return out


def serialize_lp(doc: ModelDocument) -> str:
    lines: List[str] = ["Minimize"]
    lines.extend(_wrap(" obj: " + _fmt_expr(doc.objective)))
    lines.append("Subject To")
    for con in doc.constraints:
        sense = {"<=": "<=", ">=": ">=", "=": "="}[con.sense]
        row = f" {con.name}: {_fmt_expr(con.terms)} {sense} {_fmt_coef(con.rhs)}"
        lines.extend(_wrap(row))
    fixed = [v for v in doc.variables if v.fixed is not None]
    if fixed:
        lines.append("Bounds")
        for v in fixed:
            lines.append(f" {v.name} = {v.fixed}")
    binaries = [v.name for v in doc.variables if v.kind == "B"]
    if binaries:
        lines.append("Binaries")
        for name in binaries:
            lines.append(f" {name}")
    lines.append("End")
    return "\n".join(lines) + "\n"


def _y(j: int, h: int) -> str:
    return f"y_{j + 1}_{h + 1}"


def _x(i: int, j: int, h: int) -> str:
    return f"x_{i + 1}_{j + 1}_{h + 1}"


def _u(k: int, h: int) -> str:
    return f"u_{k + 1}_{h + 1}"


def _z(h: int) -> str:
    return f"z_{h + 1}"


def emit_model(
    inst: Instance, schedule: Schedule, spec: ModelSpec
) -> Tuple[ModelDocument, str]:
    """Build the requested formulation and its deterministic LP text."""
    schedule.validate_for(inst)
    n = inst.n
    H = schedule.H
    customers = inst.customers
    dist = inst.dist
    fam = spec.formulation

    d_star = spec.bounds.d_star if spec.bounds is not None else None
    if fam in ("R1", "R2"):
        if d_star is None:
            raise ValueError("relative formulations need the per-period p-center optima")
        if any(d == 0 for d in d_star):
            raise ValueError("relative formulations undefined: a period optimum is zero")
    LB = list(spec.bounds.LB) if spec.bounds is not None else [0] * H
    UB = list(spec.bounds.UB) if (spec.bounds is not None and spec.bounds.UB) else None
    if spec.fix and UB is None:
        raise ValueError("fixing needs per-period upper bounds")

    variables: List[Variable] = []
    for j in range(n):
        for h in range(H):
            variables.append(Variable(_y(j, h), "B"))
    if fam == "A1":
        for i in customers:
            for j in range(n):
                for h in range(H):
                    variables.append(Variable(_x(i, j, h), "B"))
    if fam == "A3":
        K = len(inst.distinct)
        for k in range(K):
            for h in range(H):
                variables.append(Variable(_u(k, h), "B"))
    if fam in ("A1", "A2", "A3", "R1"):
        for h in range(H):
            variables.append(Variable(_z(h), "C"))
    if fam in ("R1", "R2"):
        variables.append(Variable("w", "C"))

    cons: List[Constraint] = []

    def cardinality():
        for h in range(H):
            cons.append(
                Constraint(
                    f"card_h{h + 1}",
                    tuple((1, _y(j, h)) for j in range(n)),
                    "=",
                    schedule.p[h],
                )
            )

    def nesting():
        for j in range(n):
            for h in range(1, H):
                cons.append(
                    Constraint(
                        f"nest_j{j + 1}_h{h + 1}",
                        ((1, _y(j, h)), (-1, _y(j, h - 1))),
                        ">=",
                        0,
                    )
                )

    def a2_push(name: str, lifted: bool):
        """Radius-push rows shared by A2/R1: for each (i, j, h) force the
        radius above d_ij unless a closer facility is open."""
        for h in range(H):
            anchor = LB[h] if lifted else 0
            for i in customers:
                for j in range(n):
                    dij = max(int(dist[i, j]), anchor)
                    terms: List[Term] = [(1, _z(h))]
                    for jp in range(n):
                        dijp = int(dist[i, jp])
                        if dijp < dist[i, j]:
                            coef = dij - max(dijp, anchor)
                            if coef != 0:
                                terms.append((coef, _y(jp, h)))
                    cons.append(
                        Constraint(
                            f"{name}_i{i + 1}_j{j + 1}_h{h + 1}",
                            tuple(terms),
                            ">=",
                            dij,
                        )
                    )

    if fam == "A1":
        cardinality()
        for i in customers:
            for h in range(H):
                cons.append(
                    Constraint(
                        f"assign_i{i + 1}_h{h + 1}",
                        tuple((1, _x(i, j, h)) for j in range(n)),
                        "=",
                        1,
                    )
                )
        for i in customers:
            for j in range(n):
                for h in range(H):
                    cons.append(
                        Constraint(
                            f"open_i{i + 1}_j{j + 1}_h{h + 1}",
                            ((1, _x(i, j, h)), (-1, _y(j, h))),
                            "<=",
                            0,
                        )
                    )
        if not spec.lift:
            for i in customers:
                for h in range(H):
                    terms = tuple(
                        (int(dist[i, j]), _x(i, j, h)) for j in range(n) if dist[i, j] != 0
                    ) + ((-1, _z(h)),)
                    cons.append(
                        Constraint(f"zpush_i{i + 1}_h{h + 1}", terms, "<=", 0)
                    )
        nesting()
        if spec.lift:
            for i in customers:
                for h in range(H):
                    terms = tuple(
                        (max(int(dist[i, j]), LB[h]), _x(i, j, h))
                        for j in range(n)
                        if max(int(dist[i, j]), LB[h]) != 0
                    ) + ((-1, _z(h)),)
                    cons.append(
                        Constraint(f"lift_i{i + 1}_h{h + 1}", terms, "<=", 0)
                    )

    elif fam == "A2":
        cardinality()
        if not spec.lift:
            a2_push("zpush", lifted=False)
        nesting()
        if spec.lift:
            a2_push("lift", lifted=True)

    elif fam == "A3":
        distinct = inst.distinct
        K = len(distinct)
        d0 = distinct[0]
        cardinality()
        for h in range(H):
            if spec.lift:
                # anchored at the smallest distinct distance >= LB^h; the
                # thresholds below it are implied one in any optimal solution
                kp = next(k for k, d in enumerate(distinct) if d >= LB[h])
                hi = K
                if spec.fix and UB is not None:
                    while hi > kp + 1 and distinct[hi - 1] > UB[h]:
                        hi -= 1
                terms = [
                    (distinct[k] - distinct[k - 1], _u(k, h))
                    for k in range(kp + 1, hi)
                    if distinct[k] - distinct[k - 1] != 0
                ]
                terms.append((-1, _z(h)))
                cons.append(
                    Constraint(f"zlink_h{h + 1}", tuple(terms), "<=", -distinct[kp])
                )
            else:
                terms = [
                    (distinct[k] - distinct[k - 1], _u(k, h))
                    for k in range(1, K)
                    if distinct[k] - distinct[k - 1] != 0
                ]
                terms.append((-1, _z(h)))
                cons.append(
                    Constraint(f"zlink_h{h + 1}", tuple(terms), "<=", -d0)
                )
        for i in customers:
            row_ks = sorted({inst.index_of[int(dist[i, j])] for j in range(n)} | {K - 1})
            for k in row_ks:
                for h in range(H):
                    terms = [(1, _u(k, h))]
                    for j in range(n):
                        if dist[i, j] < inst.distinct[k]:
                            terms.append((1, _y(j, h)))
                    cons.append(
                        Constraint(
                            f"upush_i{i + 1}_k{k + 1}_h{h + 1}",
                            tuple(terms),
                            ">=",
                            1,
                        )
                    )
        for k in range(K - 1):
            for h in range(H):
                cons.append(
                    Constraint(
                        f"unest_k{k + 1}_h{h + 1}",
                        ((1, _u(k, h)), (-1, _u(k + 1, h))),
                        ">=",
                        0,
                    )
                )
        nesting()
        if spec.fix:
            by_name = {v.name: v for v in variables}
            for h in range(H):
                for k, d in enumerate(inst.distinct):
                    if d < LB[h]:
                        by_name[_u(k, h)].fixed = 1
                    elif d > UB[h]:
                        by_name[_u(k, h)].fixed = 0

    elif fam == "R1":
        cardinality()
        if not spec.lift:
            a2_push("zpush", lifted=False)
        for h in range(H):
            cons.append(
                Constraint(
                    f"regret_h{h + 1}",
                    ((1, "w"), (Fraction(-1, d_star[h]), _z(h))),
                    ">=",
                    -1,
                )
            )
        nesting()
        if spec.lift:
            a2_push("lift", lifted=True)

    elif fam == "R2":

        def r2_push(name: str, lifted: bool):
            for h in range(H):
                d = d_star[h]
                anchor = int(spec.rel_anchor * d) if lifted else 0
                for i in customers:
                    for j in range(n):
                        dij = max(int(dist[i, j]), anchor)
                        terms: List[Term] = [(1, "w")]
                        for jp in range(n):
                            dijp = int(dist[i, jp])
                            if dijp < dist[i, j]:
                                coef = Fraction(dij - max(dijp, anchor), d)
                                if coef != 0:
                                    terms.append((coef, _y(jp, h)))
                        cons.append(
                            Constraint(
                                f"{name}_i{i + 1}_j{j + 1}_h{h + 1}",
                                tuple(terms),
                                ">=",
                                Fraction(dij, d) - 1,
                            )
                        )

        cardinality()
        if not spec.lift:
            r2_push("wpush", lifted=False)
        nesting()
        if spec.lift:
            r2_push("lift", lifted=True)

    doc = ModelDocument(
        name=f"{inst.name}_{'-'.join(str(q) for q in schedule.p)}_{fam}"
        + ("_lift" if spec.lift else "")
        + ("_fix" if spec.fix else ""),
        objective=tuple((1, _z(h)) for h in range(H))
        if fam in ("A1", "A2", "A3")
        else ((1, "w"),),
        constraints=cons,
        variables=variables,
        meta={
            "formulation": fam,
            "d_star": tuple(d_star) if d_star is not None else None,
            "LB": tuple(LB),
            "UB": tuple(UB) if UB is not None else None,
            "n": n,
            "H": H,
            "customers": customers,
        },
    )
    return doc, serialize_lp(doc)


@dataclass(frozen=True)
class Verdict:
    ok: bool
    violated: Tuple[str, ...]
    objective_value: Fraction


def canonical_assignment(
    doc: ModelDocument, inst: Instance, chain: Chain
) -> Dict[str, Coef]:
    """Variable values induced by a chain: nearest-open assignment for x,
    threshold indicators for u, radii for z, max relative regret for w."""
    fam = doc.meta["formulation"]
    H = doc.meta["H"]
    values: Dict[str, Coef] = {}
    for h in range(H):
        for j in chain.sets[h]:
            values[_y(j, h)] = 1
    if fam == "A1":
        for h in range(H):
            for i in inst.customers:
                best = min(chain.sets[h], key=lambda j: (inst.dist[i, j], j))
                values[_x(i, best, h)] = 1
    if fam == "A3":
        for h in range(H):
            for k, d in enumerate(inst.distinct):
                if d <= chain.radii[h]:
                    values[_u(k, h)] = 1
    if fam in ("A1", "A2", "A3", "R1"):
        for h in range(H):
            values[_z(h)] = chain.radii[h]
    if fam in ("R1", "R2"):
        d_star = doc.meta["d_star"]
        values["w"] = max(
            Fraction(r - d, d) for r, d in zip(chain.radii, d_star)
        )
    return values


def validate_chain_against_model(
    doc: ModelDocument, inst: Instance, chain: Chain
) -> Verdict:
    """Check the canonical assignment of ``chain`` against every constraint.

    Exact arithmetic throughout (coefficients are ints or Fractions), so a
    violation is a real violation, not rounding noise.
    """
    values = canonical_assignment(doc, inst, chain)
    violated: List[str] = []
    for var in doc.variables:
        if var.fixed is not None and values.get(var.name, 0) != var.fixed:
            violated.append(f"bound:{var.name}")
    for con in doc.constraints:
        lhs = sum(
            (Fraction(c) if not isinstance(c, Fraction) else c) * values.get(v, 0)
            for c, v in con.terms
        )
        rhs = Fraction(con.rhs)
        ok = lhs <= rhs if con.sense == "<=" else lhs >= rhs if con.sense == ">=" else lhs == rhs
        if not ok:
            violated.append(con.name)
    objective = sum(
        (Fraction(c) if not isinstance(c, Fraction) else c) * values.get(v, 0)
        for c, v in doc.objective
    )
    return Verdict(ok=not violated, violated=tuple(violated), objective_value=objective)
