"""Command-line entry point: ``verify``, ``solve`` and ``convergence``.

Options may also come from a ``key = value`` file given with ``--config``;
command-line flags take precedence over the file.  Exit codes: 0 success,
1 failed check or rate, 2 usage error.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

DEFAULTS = {
    "variant": "full",
    "domain": "0,0,0,1,1,1",
    "n": "1,1,1",
    "levels": "2,4,8",
    "E": "1",
    "nu": "0.3",
    "lam": None,
    "mu": None,
    "recipe": "trigonometric",
    "quad_order": "5",
    "rate_floor": "0.85",
    "csv": None,
    "vtk": None,
    "system_dump": None,
    "element_file": None,
    "dump_element": None,
}
RECIPE_CHOICES = ("trigonometric", "polynomial-bubble", "exact-capture", "zero")


class UsageError(ValueError):
    pass


@dataclass
class RunConfig:
    command: str
    variant: str = "full"
    domain: tuple = (0, 0, 0, 1, 1, 1)
    n: tuple = (1, 1, 1)
    levels: tuple = (2, 4, 8)
    material: tuple = ("engineering", Fraction(1), Fraction(3, 10))
    recipe: str = "trigonometric"
    quad_order: int = 5
    rate_floor: float = 0.85
    outputs: dict = field(default_factory=dict)

    def material_model(self):
        from .assembly import MaterialModel

        kind, a, b = self.material
        return MaterialModel.from_engineering(a, b) if kind == "engineering" else MaterialModel(a, b)


def read_config_file(path) -> dict:
    out = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read config file {path}: {exc}") from exc
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in DEFAULTS:
            raise UsageError(f"{path}:{lineno}: unknown key {key!r}")
        out[key] = value
    return out


def _ints(s: str, name: str) -> tuple:
    try:
        vals = tuple(int(v) for v in s.replace(" ", ",").split(",") if v)
    except ValueError as exc:
        raise UsageError(f"{name} must be comma-separated integers, got {s!r}") from exc
    if not vals or any(v < 1 for v in vals):
        raise UsageError(f"{name} needs positive integers, got {s!r}")
    return vals


def _frac(s: str, name: str) -> Fraction:
    try:
        return Fraction(s)
    except (ValueError, ZeroDivisionError) as exc:
        raise UsageError(f"{name} must be a number, got {s!r}") from exc


def build_config(command: str, flags: dict) -> RunConfig:
    """Merge defaults, the optional config file and explicit flags, then validate."""
    merged = dict(DEFAULTS)
    if flags.get("config"):
        merged.update(read_config_file(flags["config"]))
    merged.update({k: v for k, v in flags.items() if k in DEFAULTS and v is not None})

    variant = merged["variant"]
    if variant not in ("full", "rigid"):
        raise UsageError(f"variant must be full or rigid, got {variant!r}")
    domain = tuple(_frac(v, "domain") for v in merged["domain"].split(","))
    if len(domain) != 6 or any(domain[a + 3] <= domain[a] for a in range(3)):
        raise UsageError("domain needs lo1,lo2,lo3,hi1,hi2,hi3 with hi > lo")
    n = _ints(merged["n"], "n")
    if len(n) == 1:
        n = n * 3
    if len(n) != 3:
        raise UsageError("n needs one or three integers")
    levels = _ints(merged["levels"], "levels")
    if command == "convergence":
        if len(levels) < 3:
            raise UsageError("a convergence study needs at least 3 levels")
        if any(b != 2 * a for a, b in zip(levels, levels[1:])):
            raise UsageError("levels must double from one to the next")
    if merged["lam"] is not None or merged["mu"] is not None:
        if merged["lam"] is None or merged["mu"] is None:
            raise UsageError("give both lam and mu")
        material = ("lame", _frac(merged["lam"], "lam"), _frac(merged["mu"], "mu"))
    else:
        material = ("engineering", _frac(merged["E"], "E"), _frac(merged["nu"], "nu"))
    recipe = merged["recipe"]
    if recipe not in RECIPE_CHOICES:
        raise UsageError(f"recipe must be one of {', '.join(RECIPE_CHOICES)}")
    unit = domain == (0, 0, 0, 1, 1, 1)
    if not unit and recipe in ("trigonometric", "polynomial-bubble"):
        raise UsageError(f"recipe {recipe} vanishes on the boundary of the unit cube only")
    quad = int(merged["quad_order"])
    if quad < 5:
        raise UsageError("quad-order must be at least 5")
    cfg = RunConfig(
        command,
        variant,
        domain,
        n,
        levels,
        material,
        recipe,
        quad,
        float(merged["rate_floor"]),
        {k: merged[k] for k in ("csv", "vtk", "system_dump", "element_file", "dump_element") if merged[k]},
    )
    try:
        cfg.material_model()
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    return cfg


# ---------------------------------------------------------------------------
# Commands


def run_verify(cfg: RunConfig, out=sys.stdout) -> int:
    from .ref_element import nodal_basis
    from .verification import dump_element, load_element, run_verification

    if "element_file" in cfg.outputs:
        element = load_element(cfg.outputs["element_file"])
        variant = element.variant
    else:
        variant = cfg.variant
        element = nodal_basis(variant)
    results = run_verification(variant, element)
    for r in results:
        print(r.line(), file=out)
    failed = [r for r in results if not r.passed]
    for r in failed:
        print(f"counterexample for {r.name}: {r.counterexample}", file=out)
    if "dump_element" in cfg.outputs:
        dump_element(element, cfg.outputs["dump_element"])
    print(f"{len(results) - len(failed)}/{len(results)} checks passed", file=out)
    return EXIT_FAIL if failed else EXIT_OK


def _case(cfg: RunConfig, m):
    from .solver import manufactured_case, zero_case

    return zero_case(m) if cfg.recipe == "zero" else manufactured_case(m, cfg.recipe)


def run_solve(cfg: RunConfig, out=sys.stdout) -> int:
    from .assembly import QuadratureRule, write_system_coo
    from .interpolation import displacement_values, l2_norm
    from .mesh import build_box_mesh
    from .polybox import Box
    from .solver import Discretization, error_norms, normal_jump, solve_saddle, stress_norm, write_vtk_solution

    m = cfg.material_model()
    mesh = build_box_mesh(Box(cfg.domain[:3], cfg.domain[3:]), cfg.n)
    disc = Discretization.build(mesh, cfg.variant, m, QuadratureRule(cfg.quad_order))
    case = _case(cfg, m)
    print(mesh.summary(), file=out)
    print(f"stress dofs: {disc.dofmap.n_stress}, displacement dofs: {disc.dofmap.n_displacement}", file=out)
    system = disc.assemble(case)
    if "system_dump" in cfg.outputs:
        write_system_coo(system, cfg.outputs["system_dump"])
    sol = solve_saddle(system)
    snorm = stress_norm(sol.sigma, disc)
    unorm = l2_norm(displacement_values(sol.u, mesh, disc.element, disc.dofmap, disc.quad.points), mesh, disc.quad)
    jump = normal_jump(sol.sigma, disc)
    print(f"residual: {sol.residual:.3e} ({sol.method})", file=out)
    print(f"normal jump: {jump:.3e} (relative {jump / max(snorm, 1e-300):.3e})", file=out)
    print(f"|sigma_h|_0 = {snorm:.6e}, |u_h|_0 = {unorm:.6e}", file=out)
    es, eu, ed = error_norms(sol, case, disc)
    print(f"errors: e_sigma = {es:.6e}, e_u = {eu:.6e}, e_div = {ed:.6e}", file=out)
    if "vtk" in cfg.outputs:
        write_vtk_solution(cfg.outputs["vtk"], sol, disc)
    return EXIT_OK


def run_convergence(cfg: RunConfig, out=sys.stdout) -> int:
    from .assembly import QuadratureRule
    from .solver import convergence_study

    m = cfg.material_model()
    report = convergence_study(_case(cfg, m), cfg.levels, cfg.variant, QuadratureRule(cfg.quad_order))
    text = report.to_csv()
    if "csv" in cfg.outputs:
        Path(cfg.outputs["csv"]).write_text(text)
    out.write(text)
    status = EXIT_OK
    for name in ("e_sigma", "e_u", "e_div"):
        for k, r in enumerate(report.rates(name)):
            if np.isnan(r):
                print(f"note: {name} rate undefined between levels {k} and {k + 1} (error at machine level)", file=out)
            elif r < cfg.rate_floor:
                print(f"rate {name} = {r:.3f} below floor {cfg.rate_floor}", file=out)
                status = EXIT_FAIL
    worst = max(lv.div_identity for lv in report.levels)
    print(f"divergence identity defect: {worst:.3e}", file=out)
    return status


COMMANDS = {"verify": run_verify, "solve": run_solve, "convergence": run_convergence}


def make_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key = value file; flags override it")
    common.add_argument("--variant", choices=("full", "rigid"), help="element variant (default full)")
    common.add_argument("--E", dest="E", help="Young modulus (default 1)")
    common.add_argument("--nu", help="Poisson ratio in [0, 0.49] (default 0.3)")
    common.add_argument("--lam", help="first Lame parameter (overrides E, nu)")
    common.add_argument("--mu", help="shear modulus (overrides E, nu)")
    common.add_argument("--recipe", choices=RECIPE_CHOICES, help="manufactured solution (default trigonometric)")
    common.add_argument("--quad-order", dest="quad_order", help="Gauss points per axis (default 5)")

    p = argparse.ArgumentParser(prog="brickstress", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    v = sub.add_parser("verify", parents=[common], help="exact checks of the reference element")
    v.add_argument("--element-file", dest="element_file", help="check an element read from this file")
    v.add_argument("--dump-element", dest="dump_element", help="write the element description here")
    s = sub.add_parser("solve", parents=[common], help="assemble and solve one problem")
    s.add_argument("--n", help="subdivisions, e.g. 2,1,1 (default 1,1,1)")
    s.add_argument("--domain", help="lo1,lo2,lo3,hi1,hi2,hi3 (default unit cube)")
    s.add_argument("--vtk", help="write sampled fields as legacy VTK")
    s.add_argument("--system-dump", dest="system_dump", help="write the system in coordinate format")
    c = sub.add_parser("convergence", parents=[common], help="refinement study on the unit cube")
    c.add_argument("--levels", help="subdivisions per level, e.g. 2,4,8")
    c.add_argument("--csv", help="write the report here")
    c.add_argument("--rate-floor", dest="rate_floor", help="minimum accepted rate (default 0.85)")
    return p


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = make_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        cfg = build_config(args.command, vars(args))
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        return COMMANDS[args.command](cfg, out)
    except Exception as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
