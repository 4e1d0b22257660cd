"""System descriptions and the plain-text system file format.

    # comment
    [graph]
    vertices: 0 1
    0_0: 0 -> 0
    0_1: 0 -> 1

    [shift]                      (alternative to [graph]: a Markov shift)
    letters: 0 1
    forbidden: 11

    [generator R1]
    domain: 0 1                  (optional; checked against the branches)
    0 -> 0 R0^-1
    1 -> 0 R1^-1
    0 -> 1 1 when 00             (identity target restricted to a cylinder)

    [generator R1inv]
    inverse-of R1

    [options]
    max-states: 512

Branch targets are unions (`+`) of: a generator name, `NAME^-1`, `1` (the
identity), `I@v` (the identity on paths from vertex v) or `I[w1 w2]` (the
identity on a cylinder set; letters of a word separated by commas when they
are longer than one character).
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from . import sft
from .localmap import EMPTY, Expr, Machine, compose, invert, state, union
from .sft import Shift, VertexGraph


class ParseError(ValueError):
    def __init__(self, msg: str, line: int = 0, col: int = 0):
        super().__init__(f"line {line}, column {col}: {msg}" if line else msg)
        self.line = line
        self.col = col


@dataclass
class System:
    """A shift with named generators; `tables` keeps the source branch text."""

    name: str
    shift: Shift
    tables: dict  # generator -> list of (x, y, target text)
    inverse_of: dict = field(default_factory=dict)  # generator -> generator
    domains: dict = field(default_factory=dict)  # generator -> list of words
    options: dict = field(default_factory=dict)
    expected: dict = field(default_factory=dict)
    machine: Machine | None = None

    @property
    def generator_names(self) -> list[str]:
        return list(self.tables) + [n for n in self.inverse_of if n not in self.tables]

    def gen(self, name: str) -> Expr:
        if name in self.inverse_of:
            return invert(state(self.inverse_of[name]))
        return state(name)

    def generators(self) -> dict:
        return {n: self.gen(n) for n in self.generator_names}


def word_text(shift: Shift, w) -> str:
    sep = "" if all(len(x) == 1 for x in shift.letters) else ","
    return sep.join(w)


def parse_word(shift: Shift, text: str) -> tuple:
    text = text.strip()
    if "," in text or text in shift.follow:
        w = tuple(t.strip() for t in text.split(",") if t.strip())
    else:
        w = tuple(text)
    if not shift.is_allowed(w):
        raise ValueError(f"{text!r} is not an allowed word")
    return w


def parse_target(shift: Shift, text: str, known: set) -> Expr:
    terms = set()
    for part in text.split("+"):
        p = part.strip()
        if not p:
            raise ValueError("empty summand in target")
        if p == "1":
            terms.add(())
        elif p == "0":
            continue
        elif p.startswith("I@"):
            if shift.graph is None:
                raise ValueError("I@v needs a [graph] system")
            v = p[2:]
            if v not in shift.graph.vertices:
                raise ValueError(f"unknown vertex {v!r}")
            c = shift.vertex_cylinder(v)
            terms.add(() if c.is_full else (("I", c),))
        elif p.startswith("I[") and p.endswith("]"):
            words = [parse_word(shift, w) for w in p[2:-1].split()]
            c = sft.cylinder(shift, *words)
            if not c.is_empty:
                terms.add(() if c.is_full else (("I", c),))
        else:
            inv = p.endswith("^-1")
            name = p[:-3] if inv else p
            if name not in known:
                raise ValueError(f"unknown generator {name!r}")
            terms.add((("q", name, inv),))
    return frozenset(terms)


def parse_expression(sys_: System, text: str) -> Expr:
    """A union (`+`) of products (`*`) of targets, e.g. `C*D11 + A0^-1`.

    Products compose right to left: `f*g` applies g first.
    """
    known = set(sys_.tables)
    terms = []
    for summand in text.split("+"):
        factors = [f.strip() for f in summand.split("*")]
        if not all(factors):
            raise ValueError(f"malformed expression {text!r}")
        parts = []
        for f in factors:
            inv = f.endswith("^-1")
            name = f[:-3] if inv else f
            if name in sys_.inverse_of:
                e = sys_.gen(name)
                parts.append(invert(e) if inv else e)
            else:
                parts.append(parse_target(sys_.shift, f, known))
        terms.append(compose(*parts))
    return union(*terms)


def build_machine(sys_: System, max_pairs: int = 100_000) -> Machine:
    """Create the machine for a system; stored on the system and returned."""
    s = sys_.shift
    m = Machine(s, max_pairs=max_pairs)
    known = set(sys_.tables)
    for name, rows in sys_.tables.items():
        table: dict = {}
        for x, y, tgt in rows:
            text, _, when = tgt.partition(" when ")
            e = parse_target(s, text, known)
            if when.strip():
                words = [parse_word(s, w) for w in when.split()]
                c = sft.cylinder(s, *words)
                if any(t and t[0][0] != "I" for t in e):
                    raise ValueError("`when` needs an identity target")
                new = set()
                for t in e:
                    base = t[0][1] if t else sft.full(s)
                    cc = sft.intersect(base, c)
                    if not cc.is_empty:
                        new.add(() if cc.is_full else (("I", cc),))
                e = frozenset(new)
            table.setdefault(x, []).append((y, e))
        m.add_state(name, table)
    for name, base in sys_.inverse_of.items():
        if base not in sys_.tables:
            raise ValueError(f"inverse-of refers to unknown generator {base!r}")
    sys_.machine = m
    for name, words in sys_.domains.items():
        declared = sft.cylinder(s, *words) if words else sft.empty(s)
        actual = m.domain(sys_.gen(name))
        if not sft.equal(declared, actual):
            raise ValueError(f"generator {name}: declared domain differs from the branch domain")
    return m


def make_system(name: str, shift: Shift, tables: dict, inverse_of=None, domains=None,
                options=None, expected=None) -> System:
    sys_ = System(name, shift, tables, dict(inverse_of or {}), dict(domains or {}),
                  dict(options or {}), dict(expected or {}))
    build_machine(sys_)
    return sys_


_SECTION = re.compile(r"^\[(\w+)(?:\s+(\S+))?\]$")
_EDGE = re.compile(r"^(\S+)\s*:\s*(\S+)\s*->\s*(\S+)$")
_BRANCH = re.compile(r"^(\S+)\s*->\s*(\S+)\s+(.+)$")


def parse_text(text: str, name: str = "system") -> System:
    graph_v = None
    graph_e = []
    letters = None
    forbidden: list = []
    tables: dict = {}
    inverse_of: dict = {}
    domains_raw: dict = {}
    options: dict = {}
    section = None
    current = None
    raw_rows: dict = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip() if not raw.strip().startswith("[generator") else raw.strip()
        if not line:
            continue
        m = _SECTION.match(line)
        if m:
            section = m.group(1)
            if section == "generator":
                current = m.group(2)
                if not current:
                    raise ParseError("generator section needs a name", lineno, 1)
                if current in raw_rows or current in inverse_of:
                    raise ParseError(f"generator {current} defined twice", lineno, 1)
                raw_rows[current] = []
            elif section not in ("graph", "shift", "options"):
                raise ParseError(f"unknown section [{section}]", lineno, 1)
            continue
        col = len(raw) - len(raw.lstrip()) + 1
        if section == "graph":
            if line.startswith("vertices:"):
                graph_v = line.split(":", 1)[1].split()
                continue
            em = _EDGE.match(line)
            if not em:
                raise ParseError("expected `name: src -> dst`", lineno, col)
            graph_e.append(em.groups())
        elif section == "shift":
            key, _, val = line.partition(":")
            if key.strip() == "letters":
                letters = val.split()
            elif key.strip() == "forbidden":
                forbidden = val.split()
            else:
                raise ParseError(f"unknown shift key {key.strip()!r}", lineno, col)
        elif section == "generator":
            if line.startswith("inverse-of"):
                parts = line.split()
                if len(parts) != 2:
                    raise ParseError("expected `inverse-of NAME`", lineno, col)
                del raw_rows[current]
                inverse_of[current] = parts[1]
                continue
            if line.startswith("domain:"):
                domains_raw[current] = (lineno, line.split(":", 1)[1].split())
                continue
            bm = _BRANCH.match(line)
            if not bm:
                raise ParseError("expected `x -> y TARGET`", lineno, col)
            if current not in raw_rows:
                raise ParseError("branch lines after inverse-of", lineno, col)
            raw_rows[current].append((lineno, col, bm.groups()))
        elif section == "options":
            key, _, val = line.partition(":")
            options[key.strip()] = val.strip()
        else:
            raise ParseError("content outside any section", lineno, col)
    if graph_v is not None and letters is not None:
        raise ParseError("a system has either [graph] or [shift], not both")
    try:
        if graph_v is not None:
            g = VertexGraph.build(graph_v, graph_e)
            shift = Shift.edge_shift(g)
        elif letters is not None:
            shift = Shift.markov(letters, forbidden)
        else:
            raise ParseError("missing [graph] or [shift] section")
    except ValueError as exc:
        if isinstance(exc, ParseError):
            raise
        raise ParseError(str(exc)) from exc
    known = set(raw_rows)
    for gname, rows in raw_rows.items():
        out = []
        for lineno, col, (x, y, tgt) in rows:
            if x not in shift.follow or y not in shift.follow:
                raise ParseError(f"unknown letter in branch {x} -> {y}", lineno, col)
            try:
                parse_target(shift, tgt.partition(" when ")[0], known)
            except ValueError as exc:
                raise ParseError(str(exc), lineno, col) from exc
            out.append((x, y, tgt.strip()))
        tables[gname] = out
    domains = {}
    for gname, (lineno, words) in domains_raw.items():
        try:
            domains[gname] = [parse_word(shift, w) for w in words]
        except ValueError as exc:
            raise ParseError(str(exc), lineno, 1) from exc
    try:
        return make_system(name, shift, tables, inverse_of, domains, options)
    except ValueError as exc:
        raise ParseError(f"invalid system: {exc}") from exc


def parse(path: str) -> System:
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    stem = path.rsplit("/", 1)[-1].rsplit(".", 1)[0]
    return parse_text(text, stem)


def serialize(sys_: System) -> str:
    s = sys_.shift
    lines = [f"# {sys_.name}"]
    if s.graph is not None:
        lines.append("[graph]")
        lines.append("vertices: " + " ".join(s.graph.vertices))
        for n, a, b in s.graph.edges:
            lines.append(f"{n}: {a} -> {b}")
    else:
        lines.append("[shift]")
        lines.append("letters: " + " ".join(s.letters))
        if s.forbidden:
            lines.append("forbidden: " + " ".join(s.forbidden))
    for gname in sys_.generator_names:
        lines.append("")
        lines.append(f"[generator {gname}]")
        if gname in sys_.inverse_of:
            lines.append(f"inverse-of {sys_.inverse_of[gname]}")
            continue
        if gname in sys_.domains:
            lines.append("domain: " + " ".join(word_text(s, w) for w in sys_.domains[gname]))
        for x, y, tgt in sys_.tables[gname]:
            lines.append(f"{x} -> {y} {tgt}")
    if sys_.options:
        lines.append("")
        lines.append("[options]")
        for k in sorted(sys_.options):
            lines.append(f"{k}: {sys_.options[k]}")
    return "\n".join(lines) + "\n"


def same_system(a: System, b: System) -> bool:
    """Structural equality up to ordering."""
    sa, sb = a.shift, b.shift
    if sa.letters != sb.letters or sa.follow != sb.follow:
        return False
    if (sa.graph is None) != (sb.graph is None):
        return False
    if sa.graph is not None and (sa.graph.vertices != sb.graph.vertices or sa.graph.edges != sb.graph.edges):
        return False
    if a.inverse_of != b.inverse_of or set(a.tables) != set(b.tables):
        return False
    ma, mb = a.machine, b.machine

    def norm_table(m, name):
        return {
            x: sorted((y, sorted(m.render(t) for t in [tgt])) for y, tgt in outs)
            for x, outs in m.branches[name].items()
        }

    return all(norm_table(ma, n) == norm_table(mb, n) for n in a.tables)


__all__ = [
    "System", "ParseError", "parse", "parse_text", "parse_expression", "serialize", "make_system",
    "build_machine", "same_system", "EMPTY",
]
