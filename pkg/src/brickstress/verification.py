"""Exact-arithmetic checks of the reference element and a plain-text element file.

Every check returns a :class:`CheckResult`; failures carry a counterexample
string suitable for printing.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Sequence

from . import exact
from .mesh import build_box_mesh, global_dof_map
from .polybox import Box, Polynomial, restrict, span_rank
from .ref_element import (
    DIV_S2_BOUNDS,
    FULL,
    PAIRS,
    RIGID,
    SYM_INDEX,
    V_BOUNDS,
    DofFunctional,
    MatrixPolynomial,
    ReferenceElement,
    VectorPolynomial,
    bounded_monomials,
    build_displacement_basis,
    div_in_space,
    in_s2,
    nodal_basis,
    resolve_variant,
    s2_basis,
    third_axis,
    unisolvency_report,
    vector_coords,
)

FILE_MAGIC = "brickstress-element"
FILE_VERSION = 1
NO_VERTEX_MESHES = ((1, 1, 1), (2, 1, 1), (2, 2, 2), (3, 2, 1), (4, 4, 4))


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str = ""
    counterexample: str = ""

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] {self.name}: {self.detail}"


# ---------------------------------------------------------------------------
# Dimension counts


def divergence_constraint_count(space: str = FULL) -> tuple[int, int, int]:
    """``(dim S2, independent constraints, dim of the constrained space)``.

    The constrained space is ``{tau in S2 : div tau in W}`` with ``W`` the
    displacement space of the variant; its dimension is the nullity of the
    map ``(tau, w) -> div tau - w`` because ``w`` is determined by ``tau``.
    """
    variant = resolve_variant(space)
    s2 = s2_basis()
    w = build_displacement_basis(variant)
    div_cols = [vector_coords(t.divergence()) for t in s2]
    w_cols = [vector_coords(v) for v in w]
    nrows = len(div_cols[0])
    rows = [[c[r] for c in div_cols] + [-c[r] for c in w_cols] for r in range(nrows)]
    dim = len(s2) + len(w) - exact.rank(rows)
    return len(s2), len(s2) - dim, dim


def divergence_image_dimension() -> int:
    """Rank of ``div`` on S2 inside P211 x P121 x P112."""
    return exact.rank([vector_coords(t.divergence()) for t in s2_basis()])


def check_dimensions(variant: str = FULL) -> CheckResult:
    variant = resolve_variant(variant)
    s2, cons, dim = divergence_constraint_count(variant)
    image = divergence_image_dimension()
    target_space = sum(len(bounded_monomials(b)) for b in DIV_S2_BOUNDS)
    want = {FULL: (24, 78), RIGID: (30, 72)}[variant]
    ok = s2 == 102 and image == target_space == 36 and (cons, dim) == want
    detail = f"dim S2 = {s2}, div image = {image}/{target_space}, constraints = {cons}, dim = {dim}"
    if variant == FULL:
        ok = ok and sum(len(bounded_monomials(b)) for b in V_BOUNDS) == 12
    return CheckResult(f"dimension ledger ({variant})", ok, detail, "" if ok else f"expected constraints/dim {want}")


def check_basis_in_space(element: ReferenceElement) -> CheckResult:
    bad = [
        b
        for b, m in enumerate(element.stress_basis)
        if not in_s2(m) or not div_in_space(m, element.displacement_basis)
    ]
    r = _matrix_span_rank(element.stress_basis)
    ok = not bad and r == element.n_stress
    detail = f"{element.n_stress} members, span rank {r}"
    return CheckResult("basis inside constrained space", ok, detail, f"members {bad[:5]}" if bad else "")


def _matrix_span_rank(basis: Sequence[MatrixPolynomial]) -> int:
    keys = sorted({(ij, e) for m in basis for ij, p in zip(SYM_INDEX, m.symmetric_entries()) for e in p.terms})
    rows = [[m[ij].terms.get(e, Fraction(0)) for ij, e in keys] for m in basis]
    return exact.rank(rows)


# ---------------------------------------------------------------------------
# Element checks


def check_unisolvency(element: ReferenceElement) -> CheckResult:
    rep = unisolvency_report(element.dofs, element.stress_basis)
    n = len(element.dofs)
    name = f"unisolvency {n}x{n} ({element.variant})"
    if rep.nonsingular:
        return CheckResult(name, True, f"rank {rep.rank}, det = {_short(rep.determinant)}")
    vec = ", ".join(str(v) for v in rep.null_vector) if rep.null_vector else ""
    return CheckResult(name, False, f"rank {rep.rank} < {n}", f"null vector: [{vec}]")


def _short(q: Fraction) -> str:
    s = str(q)
    return s if len(s) < 40 else f"{s[:18]}...{s[-18:]} ({len(s)} chars)"


def extra_pair(m: MatrixPolynomial) -> tuple | None:
    """The single off-diagonal slot ``(i, j)`` an extra generator occupies, if unique."""
    slots = [(i, j) for i, j in PAIRS if not m[i, j].is_zero()]
    return slots[0] if len(slots) == 1 else None


def check_div_free_generators(element: ReferenceElement) -> CheckResult:
    extras = [(b, m) for b, (m, lab) in enumerate(zip(element.stress_basis, element.stress_labels)) if lab == "extra"]
    bad = [(b, m) for b, m in extras if not m.divergence().is_zero()]
    ok = len(extras) == 24 and not bad
    detail = f"{len(extras)} generators, {len(extras) - len(bad)} divergence free"
    cex = ""
    if bad:
        b, m = bad[0]
        cex = f"member {b}: div = {m.divergence()!r}"
    return CheckResult("divergence-free generators", ok, detail, cex)


def check_sparsity_law(element: ReferenceElement) -> CheckResult:
    """Each extra generator has exactly one nonzero off-diagonal slot, 8 per slot."""
    counts = {p: 0 for p in PAIRS}
    bad = []
    for b, (m, lab) in enumerate(zip(element.stress_basis, element.stress_labels)):
        if lab != "extra":
            continue
        pair = extra_pair(m)
        if pair is None:
            bad.append(b)
            continue
        counts[pair] += 1
        k = third_axis(*pair)
        if not m[k, k].is_zero():
            bad.append(b)
    ok = not bad and all(c == 8 for c in counts.values())
    detail = "generators per slot " + ", ".join(f"({i + 1},{j + 1}): {c}" for (i, j), c in counts.items())
    return CheckResult("sparsity law", ok, detail, f"members {bad[:5]}" if bad else "")


def _fits_on(p: Polynomial, bounds: dict) -> bool:
    return all(all(e[a] <= d for a, d in bounds.items()) for e in p.terms)


def check_trace_degrees(element: ReferenceElement) -> CheckResult:
    """Off-diagonal traces: faces of either normal in the pair carry degree <= (2, 1)
    in (other pair variable, x_k); edges carry degree <= 1 in x_k."""
    for b, m in enumerate(element.stress_basis):
        for i, j in PAIRS:
            k = third_axis(i, j)
            for fixed, other in ((i, j), (j, i)):
                for side in (0, 1):
                    t = restrict(m[i, j], fixed, side)
                    if not _fits_on(t, {other: 2, k: 1}):
                        return CheckResult(
                            "trace degrees", False, "face trace too rich", f"member {b}, entry ({i + 1},{j + 1}), face x{fixed + 1}={side}: {t}"
                        )
            for s in (0, 1):
                for t_ in (0, 1):
                    t = restrict(restrict(m[i, j], i, s), j, t_)
                    if not _fits_on(t, {k: 1}):
                        return CheckResult(
                            "trace degrees", False, "edge trace too rich", f"member {b}, entry ({i + 1},{j + 1}), edge: {t}"
                        )
    return CheckResult("trace degrees", True, f"all {element.n_stress} members")


def check_no_vertex_dofs(element: ReferenceElement, meshes: Sequence = NO_VERTEX_MESHES) -> CheckResult:
    unit = Box((0, 0, 0), (1, 1, 1))
    for n in meshes:
        mesh = build_box_mesh(unit, n)
        el = element if element.variant != RIGID else nodal_basis(RIGID, mesh.h)
        dm = global_dof_map(mesh, el)
        if dm.vertex_dofs():
            return CheckResult("no vertex DOFs", False, f"mesh {n}", f"DOFs {dm.vertex_dofs()[:5]}")
        if any(d.locus_dimension < 1 for d in el.dofs):
            return CheckResult("no vertex DOFs", False, "point-supported local DOF", "")
    return CheckResult("no vertex DOFs", True, f"meshes {', '.join('x'.join(map(str, n)) for n in meshes)}")


def run_verification(variant: str = FULL, element: ReferenceElement | None = None) -> list[CheckResult]:
    """The full exact suite for one variant (or a supplied element)."""
    variant = resolve_variant(variant)
    if element is None:
        element = nodal_basis(variant)
    checks = [
        lambda: check_unisolvency(element),
        lambda: check_div_free_generators(element),
        lambda: check_sparsity_law(element),
        lambda: check_dimensions(element.variant),
        lambda: check_basis_in_space(element),
        lambda: check_trace_degrees(element),
        lambda: check_no_vertex_dofs(element),
    ]
    out = []
    for chk in checks:
        try:
            out.append(chk())
        except Exception as exc:  # a crashing check is a failing check
            out.append(CheckResult(getattr(chk, "__name__", "check"), False, f"raised {type(exc).__name__}", str(exc)))
    return out


# ---------------------------------------------------------------------------
# Element description file


def _fmt_terms(p: Polynomial) -> str:
    if p.is_zero():
        return "0"
    return ";".join(f"{a},{b},{c}:{v.numerator}/{v.denominator}" for (a, b, c), v in sorted(p.terms.items()))


def _parse_terms(s: str) -> Polynomial:
    if s == "0":
        return Polynomial()
    terms = {}
    for item in s.split(";"):
        exps, val = item.split(":")
        terms[tuple(int(v) for v in exps.split(","))] = Fraction(val)
    return Polynomial(terms)


def dump_element(element: ReferenceElement, path) -> None:
    """Versioned text file: basis, displacement basis, DOFs and nodal matrix."""
    lines = [
        f"{FILE_MAGIC} {FILE_VERSION}",
        f"variant {element.variant}",
        "aspect " + " ".join(str(a) for a in element.aspect),
        f"stress {element.n_stress}",
    ]
    for m, lab in zip(element.stress_basis, element.stress_labels):
        lines.append(f"basis {lab} " + " ".join(_fmt_terms(p) for p in m.symmetric_entries()))
    lines.append(f"displacement {element.n_displacement}")
    for v in element.displacement_basis:
        lines.append("dbasis " + " ".join(_fmt_terms(p) for p in v))
    lines.append(f"dofs {len(element.dofs)}")
    for d in element.dofs:
        fixed = ",".join(f"{a}={v}" for a, v in d.fixed) or "-"
        lines.append(f"dof {d.kind} {fixed} {d.target[0]},{d.target[1]} {_fmt_terms(d.weight)}")
    lines.append("nodal")
    for row in element.nodal_matrix:
        lines.append(" ".join(str(v) for v in row))
    lines.append("end")
    Path(path).write_text("\n".join(lines) + "\n")


class ElementFileError(ValueError):
    pass


def load_element(path) -> ReferenceElement:
    """Read an element file; the stored nodal matrix is trusted, not recomputed."""
    rows = Path(path).read_text().splitlines()
    it = iter(rows)

    def take(prefix):
        line = next(it, None)
        if line is None or not line.startswith(prefix):
            raise ElementFileError(f"expected {prefix!r}, got {line!r}")
        return line[len(prefix):].strip()

    header = take(FILE_MAGIC)
    if int(header) != FILE_VERSION:
        raise ElementFileError(f"unsupported element file version {header}")
    variant = take("variant")
    aspect = tuple(Fraction(v) for v in take("aspect").split())
    n = int(take("stress"))
    basis, labels = [], []
    for _ in range(n):
        lab, *entries = take("basis").split()
        labels.append(lab)
        basis.append(MatrixPolynomial(dict(zip(SYM_INDEX, (_parse_terms(e) for e in entries)))))
    m = int(take("displacement"))
    disp = [VectorPolynomial([_parse_terms(e) for e in take("dbasis").split()]) for _ in range(m)]
    nd = int(take("dofs"))
    dofs = []
    for _ in range(nd):
        kind, fixed, target, weight = take("dof").split()
        fx = () if fixed == "-" else tuple((int(a), int(v)) for a, v in (f.split("=") for f in fixed.split(",")))
        dofs.append(DofFunctional(kind, fx, _parse_terms(weight), tuple(int(t) for t in target.split(","))))
    take("nodal")
    nodal = [[Fraction(v) for v in next(it).split()] for _ in range(n)]
    take("end")
    return ReferenceElement(variant, basis, labels, disp, dofs, nodal_matrix=nodal, aspect=aspect)
