"""Command line interface.

Every subcommand takes a SYSTEM argument: a system file path, `-` for
standard input, or the name of a built-in gallery system.  Reports are
plain `key: value` lines; graphs are DOT.

Exit codes: 0 success, 1 parse or validation error, 2 cap exceeded,
3 internal error.
"""

from __future__ import annotations

import os
import sys
from fractions import Fraction

import click

from . import gallery, sft
from .cayley import ball, complexity, growth
from .homology import (
    HomologyComputer, NotACycle, Unclassified, coefficient_string, dimension_group,
    parse_coefficients,
)
from .localmap import StateExplosion, invert, moore_to_dot
from .nucleus import (
    DEFAULT_MAX_DEPTH, DEFAULT_MAX_ELEMENTS, NotContracting, NotInNucleus, compute_nucleus,
    moore_graph,
)
from .steinberg import Algebra, graded_dimension, matrix_recursion, parse_field, verify_presentation
from .sysfile import ParseError, System, parse_expression, parse_text, serialize, word_text

EXIT_PARSE = 1
EXIT_CAP = 2
EXIT_INTERNAL = 3


class Context:
    def __init__(self, max_states: int, max_depth: int, field: str):
        self.max_states = max_states
        self.max_depth = max_depth
        self.field = field


def load_system(source: str) -> System:
    if source == "-":
        return parse_text(sys.stdin.read(), "stdin")
    if not os.path.exists(source) and source in gallery.GALLERY:
        return gallery.get(source)
    try:
        with open(source, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise click.UsageError(f"cannot read {source}: {exc.strerror}") from exc
    stem = os.path.basename(source).rsplit(".", 1)[0]
    return parse_text(text, stem)


def nucleus_of(ctx: Context, s: System):
    return compute_nucleus(s.machine, s.generators(), ctx.max_states, ctx.max_depth)


def emit(key: str, value) -> None:
    click.echo(f"{key}: {value}")


def fmt(x) -> str:
    if isinstance(x, Fraction):
        return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"
    if isinstance(x, (list, tuple)):
        return "(" + ",".join(fmt(y) for y in x) + ")"
    return str(x)


def fmt_matrix(a) -> str:
    return "[" + ", ".join("[" + ", ".join(fmt(x) for x in row) + "]" for row in a) + "]"


def base_point(s: System, text: str):
    x = sft.parse_epword(text, s.shift)
    if not s.shift.is_allowed(tuple(x.pre) + tuple(x.period) * 2):
        raise ValueError(f"{text} is not a point of the shift")
    return x


pass_ctx = click.make_pass_decorator(Context)
system_arg = click.argument("system", default="-")


@click.group()
@click.option("--max-states", default=DEFAULT_MAX_ELEMENTS, show_default=True,
              help="Cap on section classes explored for the nucleus.")
@click.option("--max-depth", default=DEFAULT_MAX_DEPTH, show_default=True,
              help="Cap on the product depth n0.")
@click.option("--field", default="Q", show_default=True, help="Q or GF(p) for algebra commands.")
@click.pass_context
def cli(cctx, max_states, max_depth, field):
    """Contracting self-similar inverse semigroups on shifts of finite type."""
    cctx.obj = Context(max_states, max_depth, field)


@cli.command("nucleus")
@system_arg
@click.option("--dot", is_flag=True, help="Append the Moore diagram in DOT.")
@pass_ctx
def nucleus_cmd(ctx, system, dot):
    """Compute the nucleus."""
    s = load_system(system)
    nuc = nucleus_of(ctx, s)
    emit("system", s.name)
    emit("elements", len(nuc))
    emit("n0", nuc.n0)
    emit("k1", nuc.k1)
    emit("nucleus", " ".join(nuc.names()))
    if dot:
        click.echo(moore_to_dot(moore_graph(nuc), "nucleus"), nl=False)


@cli.command("check-contracting")
@system_arg
@pass_ctx
def check_contracting(ctx, system):
    """Decide contraction within the caps."""
    s = load_system(system)
    nuc = nucleus_of(ctx, s)
    emit("system", s.name)
    emit("contracting", "yes")
    emit("elements", len(nuc))
    emit("n0", nuc.n0)


@cli.command("cayley")
@system_arg
@click.option("--base", required=True, help="Base point u(v).")
@click.option("--radius", required=True, type=click.IntRange(0))
@click.option("--dot", is_flag=True, help="Print the ball in DOT instead of a summary.")
@pass_ctx
def cayley_cmd(ctx, system, base, radius, dot):
    """Labelled ball of the orbital graph around a point."""
    s = load_system(system)
    x = base_point(s, base)
    b = ball(s.machine, s.generators(), x, radius, nucleus_of(ctx, s))
    if dot:
        click.echo(b.to_dot(), nl=False)
        return
    emit("base", x)
    emit("radius", radius)
    emit("vertices", len(b))
    emit("arrows", len(b.arrows))
    emit("well-labeled", "yes" if b.is_well_labeled() else "no")
    emit("hash", b.canonical_hash())


@cli.command("growth")
@system_arg
@click.option("--base", required=True, help="Base point u(v).")
@click.option("--radius", required=True, type=click.IntRange(0))
@pass_ctx
def growth_cmd(ctx, system, base, radius):
    """Ball sizes gamma(0..R)."""
    s = load_system(system)
    x = base_point(s, base)
    g = growth(s.machine, s.generators(), x, radius, nucleus_of(ctx, s))
    emit("base", x)
    emit("growth", " ".join(map(str, g)))


@cli.command("complexity")
@system_arg
@click.option("--radius", required=True, type=click.IntRange(0))
@pass_ctx
def complexity_cmd(ctx, system, radius):
    """Number of ball classes delta(0..R)."""
    s = load_system(system)
    nuc = nucleus_of(ctx, s)
    gens = s.generators()
    vals = [complexity(s.machine, gens, r, nuc=nuc) for r in range(radius + 1)]
    emit("complexity", " ".join(map(str, vals)))


def _ordered_basis(s: System, basis: list) -> list:
    order = {n: i for i, n in enumerate(s.generator_names)}
    return sorted(basis, key=lambda n: (order.get(n, len(order)), n))


@cli.command("homology")
@system_arg
@click.option("--n", "degree", type=click.Choice(["0", "1"]), default="1", show_default=True)
@click.option("--coeff", default="Z", show_default=True, help="Z or Z/m.")
@pass_ctx
def homology_cmd(ctx, system, degree, coeff):
    """Homology group with its shift action and chosen generators."""
    s = load_system(system)
    m = parse_coefficients(coeff)
    comp = HomologyComputer(nucleus_of(ctx, s))
    h = comp.homology(int(degree), m)
    d = h.descriptor
    basis = _ordered_basis(s, h.basis)
    emit("system", s.name)
    emit("degree", degree)
    emit("coefficients", coefficient_string(m))
    emit("group", d)
    emit("classification", d.kind)
    emit("rational-rank", d.rational_rank)
    emit("eventual-torsion", " ".join(map(str, d.eventual_torsion)) or "none")
    emit("endo-det", "none" if d.endo_det is None else d.endo_det)
    emit("chain-rank", len(h.sigma))
    if int(degree) == 0:
        emit("shift-matrix", fmt_matrix(h.sigma))
    if d.automorphism:
        emit("automorphism", fmt_matrix(d.automorphism))
    if d.torsion_automorphism:
        emit("torsion-automorphism", fmt_matrix(d.torsion_automorphism))
    gens = ",".join(f"[{b}]" for b in basis)
    emit("generators", gens or "none")
    for name in basis:
        c = h.classes[name]
        emit(f"class [{name}]", f"free {fmt(c['free'])} torsion {fmt(c['torsion'] or [])}")
    click.echo(f"H{degree} = {d}" + (f"; generators {gens}" if gens else ""))


@cli.command("h1class")
@system_arg
@click.option("--element", required=True, help="Expression such as C*D11 or R1^-1.")
@click.option("--coeff", default="Z", show_default=True)
@pass_ctx
def h1class_cmd(ctx, system, element, coeff):
    """Degree-one class of a bisection with zero boundary."""
    s = load_system(system)
    e = parse_expression(s, element)
    m = parse_coefficients(coeff)
    comp = HomologyComputer(nucleus_of(ctx, s))
    c = comp.cycle_class(e, m)
    emit("element", element)
    emit("group", comp.homology(1, m).descriptor)
    emit("free", fmt(c["free"]))
    emit("torsion", fmt(c["torsion"] or []))


@cli.command("dimgroup")
@system_arg
@pass_ctx
def dimgroup_cmd(ctx, system):
    """H0 as an ordered group: unit, Perron eigenvalue and vertex measures."""
    s = load_system(system)
    dg = dimension_group(nucleus_of(ctx, s))
    emit("H0", dg.h0)
    emit("shift-matrix", fmt_matrix(dg.h0.automorphism or []))
    emit("unit", fmt(dg.unit))
    if dg.eigenvalue is None:
        emit("eigenvalue", "none (matrix not primitive)")
        return
    emit("eigenvalue", dg.eigenvalue)
    for v in sorted(dg.vertex_measure, key=str):
        emit(f"measure [{v}]", dg.vertex_measure[v])


@cli.group("algebra")
def algebra_grp():
    """The convolution algebra through its nucleus presentation."""


def _algebra(ctx: Context, s: System) -> Algebra:
    return Algebra(nucleus_of(ctx, s), parse_field(ctx.field))


@algebra_grp.command("verify")
@system_arg
@pass_ctx
def algebra_verify(ctx, system):
    """Check the defining relations on maps and in the algebra."""
    s = load_system(system)
    alg = _algebra(ctx, s)
    rep = verify_presentation(alg)
    emit("system", s.name)
    emit("field", alg.field)
    for kind, (total, ok) in sorted(rep.summary().items()):
        emit(kind, f"{ok}/{total}")
    for c in rep.failures():
        emit("failed", f"{c.kind} {c.name} map={c.map_ok} algebra={c.algebra_ok}")
    emit("presentation", "ok" if rep.ok else "FAILED")
    if not rep.ok:
        raise SystemExit(EXIT_INTERNAL)


@algebra_grp.command("dim")
@system_arg
@click.option("--n", "steps", default=3, show_default=True, type=click.IntRange(0))
@pass_ctx
def algebra_dim(ctx, system, steps):
    """dim V_0..V_n for the generators, their adjoints and the S_x, S_x^-1."""
    s = load_system(system)
    alg = _algebra(ctx, s)
    gens = []
    for name in s.tables:
        g = alg.from_map(s.gen(name))
        gens += [g, alg.from_map(invert(s.gen(name)))]
    for x in s.shift.letters:
        gens += [alg.S((x,)), alg.S_inv((x,))]
    emit("generators", len(gens))
    emit("dimensions", " ".join(map(str, graded_dimension(alg, gens, steps))))


@algebra_grp.command("recursion")
@system_arg
@click.option("--element", required=True, help="Expression such as D11*A0*D00.")
@click.option("--k", "depth", default=1, show_default=True, type=click.IntRange(1))
@pass_ctx
def algebra_recursion(ctx, system, element, depth):
    """Matrix recursion of an element over paths of length k."""
    s = load_system(system)
    alg = _algebra(ctx, s)
    a = alg.from_map(parse_expression(s, element))
    r = matrix_recursion(alg, a, depth)
    emit("element", element)
    emit("rows", " ".join(word_text(s.shift, w) or "()" for w in r.rows))
    emit("cols", " ".join(word_text(s.shift, w) or "()" for w in r.cols))
    click.echo(str(r))


@cli.command("gallery")
@click.argument("name", type=click.Choice(sorted(gallery.GALLERY)))
def gallery_cmd(name):
    """Print a built-in system as a system file."""
    click.echo(serialize(gallery.get(name)), nl=False)


@cli.command("export-dot")
@click.argument("kind", type=click.Choice(["moore", "cayley"]))
@system_arg
@click.option("--base", help="Base point u(v) (cayley).")
@click.option("--radius", default=3, show_default=True, type=click.IntRange(0))
@pass_ctx
def export_dot(ctx, kind, system, base, radius):
    """Moore diagram of the nucleus or a Cayley ball, in DOT."""
    s = load_system(system)
    nuc = nucleus_of(ctx, s)
    if kind == "moore":
        click.echo(moore_to_dot(moore_graph(nuc), "nucleus"), nl=False)
        return
    if not base:
        raise click.UsageError("--base is required for cayley")
    b = ball(s.machine, s.generators(), base_point(s, base), radius, nuc)
    click.echo(b.to_dot(), nl=False)


def main(argv=None) -> int:
    try:
        cli.main(args=argv, prog_name="selfsim", standalone_mode=False)
    except click.exceptions.Exit as exc:
        return exc.exit_code
    except click.Abort:
        return EXIT_PARSE
    except click.ClickException as exc:
        exc.show()
        return EXIT_PARSE
    except (NotContracting, StateExplosion) as exc:
        click.echo(f"error: cap exceeded: {exc}", err=True)
        return EXIT_CAP
    except (ParseError, NotACycle, Unclassified, NotInNucleus, ValueError, KeyError) as exc:
        click.echo(f"error: {exc}", err=True)
        return EXIT_PARSE
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_INTERNAL
    except Exception as exc:  # noqa: BLE001
        click.echo(f"internal error: {type(exc).__name__}: {exc}", err=True)
        return EXIT_INTERNAL
    return 0


if __name__ == "__main__":
    sys.exit(main())
