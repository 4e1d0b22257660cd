"""Contraction: section closure, the nucleus, the product depth n0 and multi-nuclei."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Iterable

import networkx as nx

from . import sft
from .localmap import (
    EMPTY,
    IDENTITY,
    Expr,
    Machine,
    StateExplosion,
    compose,
    invert,
)


class NotContracting(RuntimeError):
    """Closure caps were exceeded; `trace` records class counts per sweep."""

    def __init__(self, msg: str, trace: list[int] | None = None):
        super().__init__(msg)
        self.trace = trace or []


class NotInNucleus(RuntimeError):
    """A product section matched no nucleus element."""


DEFAULT_MAX_ELEMENTS = 512
DEFAULT_MAX_DEPTH = 64


def _explore(m: Machine, seeds: Iterable[Expr], cap: int, trace: list[int]) -> list[int]:
    """Classify all iterated sections of the seeds; return the new class ids."""
    before = len(m.class_reps)
    todo = deque(m.norm(e) for e in seeds)
    done = set()
    while todo:
        e = todo.popleft()
        if not e or e in done:
            continue
        done.add(e)
        n = len(m.class_reps)
        cid = m.classify(e)
        if len(m.class_reps) > cap:
            trace.append(len(m.class_reps))
            raise NotContracting(f"more than {cap} section classes", trace)
        if cid >= n:
            todo.extend(m.sections(m.class_reps[cid]).values())
    new = list(range(before, len(m.class_reps)))
    m.seal(new)
    return new


def section_closure(m: Machine, seeds: Iterable[Expr], cap: int = DEFAULT_MAX_ELEMENTS) -> list[int]:
    """Class ids of the section closure of the seeds (deduplicated by `equal`)."""
    seeds = [m.norm(e) for e in seeds]
    _explore(m, seeds, cap, [])
    out = set()
    todo = [m.find_class(e) for e in seeds if e]
    while todo:
        c = todo.pop()
        if c in out:
            continue
        out.add(c)
        for outs in m.branches[f"#{c}"].values():
            for _, tgt in outs:
                (t,), = tgt
                todo.append(m.class_id(t))
    return sorted(out)


def class_graph(m: Machine) -> nx.DiGraph:
    g = nx.DiGraph()
    for cid, ok in enumerate(m.sealed):
        if not ok:
            continue
        g.add_node(cid)
        for outs in m.branches[f"#{cid}"].values():
            for _, tgt in outs:
                (t,), = tgt
                g.add_edge(cid, m.class_id(t))
    return g


def stable_part(g: nx.DiGraph) -> set:
    """Nodes reachable from a cycle: the classes that are sections at every depth."""
    cyc = set()
    for comp in nx.strongly_connected_components(g):
        if len(comp) > 1 or any(g.has_edge(v, v) for v in comp):
            cyc |= comp
    out = set(cyc)
    for v in cyc:
        out |= nx.descendants(g, v)
    return out


@dataclass
class Nucleus:
    machine: Machine
    elements: list[int]
    n0: int
    k1: int
    generators: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def __contains__(self, cid):
        return cid in self._set

    @property
    def _set(self):
        return set(self.elements)

    def expr(self, cid: int) -> Expr:
        return self.machine.class_expr(cid)

    def name(self, cid: int) -> str:
        return self.machine.class_names.get(cid, f"#{cid}")

    def names(self) -> list[str]:
        return [self.name(c) for c in self.elements]

    def by_name(self, name: str) -> int:
        for c in self.elements:
            if self.name(c) == name:
                return c
        raise KeyError(name)

    def lookup(self, e: Expr):
        """Nucleus class equal to e, or None (also None for the empty map)."""
        m = self.machine
        e = m.norm(e)
        if not e:
            return None
        cid = m.find_class(e)
        return cid if cid in self._set else None

    def section_table(self, cid: int) -> dict:
        """(x, y) -> class id of the section with input x and output y."""
        out = {}
        for x, outs in self.machine.branches[f"#{cid}"].items():
            for y, tgt in outs:
                (t,), = tgt
                out[(x, y)] = self.machine.class_id(t)
        return out


def _idempotent_name(m: Machine, c: sft.CylinderSet) -> str:
    s = m.shift
    if c.is_full:
        return "1"
    if s.graph is not None:
        for v in s.graph.vertices:
            if s.vertex_cylinder(v) == c:
                return f"I{v}"
    cells = sorted(c.cells, key=lambda w: [s.order(x) for x in w])
    sep = "" if all(len(x) == 1 for x in s.letters) else ","
    return "I" + "|".join(sep.join(w) for w in cells) if len(cells) == 1 else "I[" + " ".join(sep.join(w) for w in cells) + "]"


def _word_names(m: Machine, generators: dict, wanted: set, max_len: int, budget: int) -> dict:
    """Shortest generator products equal to the wanted classes."""
    found: dict = {}
    level = [((), IDENTITY)]
    seen_classes: set = set()
    for _ in range(max_len):
        nxt = []
        for word, e in level:
            for g, ge in generators.items():
                budget -= 1
                if budget < 0:
                    return found
                f = m.norm(compose(e, ge))
                if not f:
                    continue
                cid = m.find_class(f)
                w = word + (g,)
                if cid is not None:
                    if cid in seen_classes:
                        continue
                    seen_classes.add(cid)
                    if cid in wanted and cid not in found:
                        found[cid] = "*".join(w)
                    f = m.class_expr(cid)
                nxt.append((w, f))
        level = nxt
        if wanted <= found.keys():
            break
    return found


def name_classes(m: Machine, generators: dict, stable: set | None = None) -> None:
    """Human names: generators, their inverses, idempotents by support,
    short generator products (for stable classes), else #k."""
    pending = []
    for cid, ok in enumerate(m.sealed):
        if not ok or cid in m.class_names:
            continue
        rep = m.class_reps[cid]
        name = None
        for g, e in generators.items():
            if m.equal(rep, e):
                name = g
                break
        if name is None:
            for g, e in generators.items():
                if m.equal(rep, invert(e)):
                    name = g + "^-1"
                    break
        if name is None:
            try:
                src = m.domain(rep)
                if m.equal(rep, frozenset({(("I", src),)}) if not src.is_full else IDENTITY):
                    name = _idempotent_name(m, src)
            except ValueError:
                pass
        if name is None:
            pending.append(cid)
            continue
        if name in m.class_names.values():
            name = f"{name}#{cid}"
        m.class_names[cid] = name
    words = _word_names(m, generators, set(pending) & (stable or set()), 6, 20000) if pending else {}
    for cid in pending:
        name = words.get(cid, f"#{cid}")
        if name in m.class_names.values():
            name = f"{name}#{cid}"
        m.class_names[cid] = name


def product_levels(m: Machine, e: Expr, depth: int) -> list[set]:
    """Distinct sections of e at depths 0..depth."""
    levels = [{m.norm(e)} - {EMPTY}]
    for _ in range(depth):
        nxt = set()
        for f in levels[-1]:
            nxt.update(m.sections(f).values())
        levels.append(nxt)
    return levels


def compute_nucleus(
    m: Machine,
    generators: dict,
    max_elements: int = DEFAULT_MAX_ELEMENTS,
    max_depth: int = DEFAULT_MAX_DEPTH,
) -> Nucleus:
    """The minimal nucleus of the inverse semigroup generated by `generators`.

    `generators` maps names to expressions.  Raises NotContracting when the
    number of section classes exceeds max_elements or n0 exceeds max_depth.
    """
    trace: list[int] = []
    seeds = list(generators.values()) + [invert(e) for e in generators.values()] + [IDENTITY]
    _explore(m, seeds, max_elements, trace)
    done_pairs: set = set()
    while True:
        trace.append(len(m.class_reps))
        nuc = stable_part(class_graph(m))
        fresh = []
        for p in sorted(nuc):
            for q in sorted(nuc):
                if (p, q) in done_pairs:
                    continue
                done_pairs.add((p, q))
                e = m.norm(compose(m.class_expr(p), m.class_expr(q)))
                if e:
                    fresh.append(e)
        if not fresh:
            break
        _explore(m, fresh, max_elements, trace)
        if stable_part(class_graph(m)) == nuc:
            break
    nuc = stable_part(class_graph(m))
    name_classes(m, generators, nuc)
    elements = sorted(nuc, key=lambda c: (m.class_names.get(c, ""), c))

    # product depth
    n0 = 1
    for p in elements:
        for q in elements:
            e = compose(m.class_expr(p), m.class_expr(q))
            levels = [{m.norm(e)} - {EMPTY}]
            d = 0
            while True:
                if d >= 1 and all(_in(m, f, nuc) for f in levels[-1]):
                    break
                if d >= max_depth:
                    raise NotContracting(f"product sections not in the nucleus by depth {max_depth}", trace)
                nxt = set()
                for f in levels[-1]:
                    nxt.update(m.sections(f).values())
                levels.append(nxt)
                d += 1
            n0 = max(n0, d)
    k1 = 0
    for c in elements:
        k1 = max(k1, m.domain(m.class_expr(c)).depth, m.range(m.class_expr(c)).depth)
    return Nucleus(m, elements, n0, k1, dict(generators))


def _in(m: Machine, f: Expr, nuc: set) -> bool:
    cid = m.find_class(f)
    return cid is not None and cid in nuc


def vertex_idempotents(nuc: Nucleus) -> list[int]:
    """The n=0 multi-nucleus: one idempotent per vertex (edge shifts only)."""
    m = nuc.machine
    s = m.shift
    if s.graph is None:
        raise ValueError("vertex idempotents need an edge shift")
    out = []
    for v in s.graph.vertices:
        cid = nuc.lookup(frozenset({(("I", s.vertex_cylinder(v)),)}) if len(s.graph.vertices) > 1 else IDENTITY)
        if cid is None:
            raise NotInNucleus(f"vertex idempotent I{v} missing from the nucleus")
        out.append(cid)
    return out


def composable_pairs(nuc: Nucleus) -> list[tuple[int, int]]:
    """The n=2 multi-nucleus: the stable set of pairs under tuple sections."""
    m = nuc.machine
    tables = {c: nuc.section_table(c) for c in nuc.elements}
    nonempty = {}

    def ok(p, q):
        key = (p, q)
        if key not in nonempty:
            nonempty[key] = not m.is_empty(compose(m.class_expr(p), m.class_expr(q)))
        return nonempty[key]

    cur = {(p, q) for p in nuc.elements for q in nuc.elements if ok(p, q)}
    while True:
        nxt = set()
        for p, q in cur:
            for (v1, v0), p1 in tables[p].items():
                for (v2, w1), q1 in tables[q].items():
                    if w1 == v1 and ok(p1, q1):
                        nxt.add((p1, q1))
        if nxt == cur:
            break
        cur = nxt
    order = {c: i for i, c in enumerate(nuc.elements)}
    return sorted(cur, key=lambda pq: (order[pq[0]], order[pq[1]]))


def multi_nucleus(nuc: Nucleus, n: int) -> list:
    if n == 0:
        return vertex_idempotents(nuc)
    if n == 1:
        return list(nuc.elements)
    if n == 2:
        return composable_pairs(nuc)
    raise ValueError("only n = 0, 1, 2 are supported")


def product_section_table(nuc: Nucleus, p: int, q: int, depth: int | None = None) -> dict:
    """(output word, input word) -> nucleus class of S_out^-1 p q S_in."""
    m = nuc.machine
    depth = nuc.n0 if depth is None else depth
    out = {}
    for (u, v), f in m.deep_sections(compose(m.class_expr(p), m.class_expr(q)), depth).items():
        cid = nuc.lookup(f)
        if cid is None:
            raise NotInNucleus(f"section {v}|{u} of {nuc.name(p)}*{nuc.name(q)} is not in the nucleus")
        out[(v, u)] = cid
    return out


def landing_depth(nuc: Nucleus, e: Expr, max_depth: int = DEFAULT_MAX_DEPTH) -> int:
    """Least d such that every depth-d section of e lies in the nucleus.

    Raises NotInNucleus when sections cycle outside the nucleus or the
    depth exceeds max_depth.
    """
    m = nuc.machine
    memo: dict = {}
    active: set = set()

    def need(f, level):
        if nuc.lookup(f) is not None:
            return 0
        if f in memo:
            return memo[f]
        if f in active:
            raise NotInNucleus("sections cycle outside the nucleus")
        if level >= max_depth:
            raise NotInNucleus("expression does not contract into the nucleus")
        active.add(f)
        r = 1 + max([need(g, level + 1) for g in m.sections(f).values()] + [0])
        active.discard(f)
        memo[f] = r
        return r

    return need(m.norm(e), 0)


def expand(nuc: Nucleus, e: Expr, depth: int | None = None, max_depth: int = DEFAULT_MAX_DEPTH):
    """Write e as a disjoint sum of S_out N S_in^-1 with N in the nucleus.

    Returns (depth, {(out, in): class}).  With depth None the least depth
    at which every section lies in the nucleus is used.
    """
    m = nuc.machine
    d = landing_depth(nuc, e, max_depth) if depth is None else depth
    table = {}
    for (u, v), f in m.deep_sections(e, d).items():
        cid = nuc.lookup(f)
        if cid is None:
            raise NotInNucleus(f"sections at depth {d} are not all in the nucleus")
        table[(v, u)] = cid
    return d, table


def moore_graph(nuc: Nucleus) -> nx.MultiDiGraph:
    """Moore diagram of the nucleus: name -> name arrows labeled x|y."""
    g = nx.MultiDiGraph()
    g.add_nodes_from(nuc.names())
    for c in nuc.elements:
        for (x, y), t in sorted(nuc.section_table(c).items()):
            g.add_edge(nuc.name(c), nuc.name(t), label=f"{x}|{y}", x=x, y=y)
    return g
