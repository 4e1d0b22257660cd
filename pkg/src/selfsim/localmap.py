"""Partial homeomorphisms of a shift given by finite transducers.

A map expression is a finite union of terms; a term is a product of atoms,
applied right to left.  Atoms are tuples:

    ("q", name, inv)   a base state of the machine, or its inverse
    ("S", x)           the prefix map w -> xw
    ("T", x)           its inverse, xw -> w
    ("I", cyl)         the identity restricted to a cylinder set

Every atom has finitely many sections S_y^-1 a S_x, each a union of atoms,
so the sections of a term are again terms of no greater length.  That makes
the set of iterated sections of any expression finite, and equality of maps
is decided by bisimulation over it.  The empty frozenset is the empty map
and the empty term () is the identity of the whole space.

Once a nucleus has been computed the machine also carries a class registry:
sealed equivalence classes become base states "#k", and simplification
replaces atoms and adjacent class pairs by the class they are equal to.  The
replacement is semantic only (equal maps), so cached results stay valid.
"""

from __future__ import annotations

import sys
from collections import defaultdict
from typing import Iterable

import networkx as nx

from . import sft
from .sft import CylinderSet, EPWord, Shift

sys.setrecursionlimit(max(sys.getrecursionlimit(), 20000))

Expr = frozenset
EMPTY: frozenset = frozenset()
IDENTITY: frozenset = frozenset({()})

_KEEP = object()


class StateExplosion(RuntimeError):
    """A closure or bisimulation exceeded its configured size cap."""


class NotFunctional(ValueError):
    """An expression relates one point to several points."""


class NotClopen(ValueError):
    """An idempotent does not have a cylinder-set support."""


def q(name: str) -> tuple:
    return ("q", name, False)


def atom_inverse(a: tuple) -> tuple:
    k = a[0]
    if k == "q":
        return ("q", a[1], not a[2])
    if k == "S":
        return ("T", a[1])
    if k == "T":
        return ("S", a[1])
    return a


def state(name: str) -> Expr:
    return frozenset({(q(name),)})


def identity(c: CylinderSet | None = None) -> Expr:
    if c is None or c.is_full:
        return IDENTITY
    if c.is_empty:
        return EMPTY
    return frozenset({(("I", c),)})


def prefix_map(x) -> Expr:
    """S_x as an expression."""
    return frozenset({(("S", x),)})


def prefix_word(word: Iterable) -> Expr:
    return frozenset({tuple(("S", x) for x in word)})


def invert(e: Expr) -> Expr:
    return frozenset(tuple(atom_inverse(a) for a in reversed(t)) for t in e)


def compose(*es: Expr) -> Expr:
    """Composition; compose(a, b) applies b first."""
    out = IDENTITY
    for e in es:
        out = frozenset(s + t for s in out for t in e)
    return out


def union(*es: Expr) -> Expr:
    out = set()
    for e in es:
        out.update(e)
    return frozenset(out)


def restrict(e: Expr, c: CylinderSet) -> Expr:
    return compose(e, identity(c))


def section_expr(y, e: Expr, x) -> Expr:
    """S_y^-1 e S_x as an unevaluated expression."""
    return compose(frozenset({(("T", y),)}), e, prefix_map(x))


class Machine:
    """Base states over a shift, with memoized sections, emptiness and equality."""

    def __init__(self, shift: Shift, max_pairs: int = 100_000):
        self.shift = shift
        self.max_pairs = max_pairs
        self.branches: dict[str, dict] = {}
        self.names: dict[str, str] = {}
        self._inv_branches: dict[str, dict] = {}
        self._term_sec: dict = {}
        self._alive: dict = {}
        self._sections: dict = {}
        self._norm: dict = {}
        # class registry
        self.class_reps: list[Expr] = []
        self.sealed: list[bool] = []
        self.class_names: dict[int, str] = {}
        self._buckets: dict = defaultdict(list)
        self._atom_canon: dict = {}
        self._pair_canon: dict = {}
        self._busy: set = set()
        self.version = 0

    # construction

    def add_state(self, name: str, table: dict) -> None:
        """Register a base state.  `table` maps input x to [(output y, target Expr)].

        Targets must be unions of single atoms.  A bare identity target is
        replaced by the identity on the cylinder allowed after both x and y.
        """
        if name in self.branches:
            raise ValueError(f"state {name} already defined")
        s = self.shift
        clean = {}
        for x, outs in table.items():
            if x not in s.follow:
                raise ValueError(f"state {name}: unknown input letter {x!r}")
            lst = []
            for y, tgt in outs:
                if y not in s.follow:
                    raise ValueError(f"state {name}: unknown output letter {y!r}")
                terms = set()
                for t in tgt:
                    if t == ():
                        c = sft.intersect(s.follow_cylinder(x), s.follow_cylinder(y))
                        if c.is_empty:
                            continue
                        t = () if c.is_full else (("I", c),)
                    if len(t) > 1:
                        raise ValueError(f"state {name}: branch targets must be single atoms")
                    terms.add(t)
                if terms:
                    lst.append((y, frozenset(terms)))
            if lst:
                clean[x] = tuple(lst)
        self.branches[name] = clean
        self.names.setdefault(name, name)

    # atoms and terms

    def _inverse_table(self, name: str) -> dict:
        t = self._inv_branches.get(name)
        if t is None:
            t = defaultdict(list)
            for x, outs in self.branches[name].items():
                for y, tgt in outs:
                    t[y].append((x, invert(tgt)))
            t = {k: tuple(v) for k, v in t.items()}
            self._inv_branches[name] = t
        return t

    def atom_branches(self, a: tuple, x) -> tuple:
        k = a[0]
        s = self.shift
        if k == "q":
            table = self._inverse_table(a[1]) if a[2] else self.branches[a[1]]
            return table.get(x, ())
        if k == "S":
            if x in s.follow[a[1]]:
                return ((a[1], frozenset({(("S", x),)})),)
            return ()
        if k == "T":
            if x != a[1]:
                return ()
            return tuple((y, frozenset({(("T", y),)})) for y in s.letters if y in s.follow[x])
        c = sft.residual(a[1], x)
        if c.is_empty:
            return ()
        return ((x, frozenset({(("I", c),)} if not c.is_full else {()})),)

    def simplify(self, t: tuple):
        """Local rewriting of a term; None when the term is syntactically empty."""
        stack: list = []
        for a in t:
            if not self._push(stack, a):
                return None
        return tuple(stack)

    def _push(self, stack: list, a: tuple) -> bool:
        while True:
            a = self._canon_atom(a)
            if a[0] == "I":
                if a[1].is_empty:
                    return False
                if a[1].is_full:
                    return True
            if not stack:
                stack.append(a)
                return True
            r = self._pair(stack[-1], a)
            if r is _KEEP:
                stack.append(a)
                return True
            if r is None:
                return False
            stack.pop()
            a = r

    def _pair(self, b: tuple, a: tuple):
        kb, ka = b[0], a[0]
        if kb == "I" and ka == "I":
            return ("I", sft.intersect(b[1], a[1]))
        if kb == "T" and ka == "S":
            if b[1] != a[1]:
                return None
            return ("I", self.shift.follow_cylinder(a[1]))
        if kb == "S" and ka == "T" and b[1] == a[1]:
            return ("I", sft.cylinder(self.shift, (a[1],)))
        if kb == "q" and ka == "q" and self.version:
            return self._pair_canon_lookup(b, a)
        return _KEEP

    def term_sections(self, t: tuple) -> dict:
        """Map (x, y) -> frozenset of simplified terms."""
        r = self._term_sec.get(t)
        if r is not None:
            return r
        s = self.shift
        out: dict = defaultdict(set)
        if not t:
            for x in s.letters:
                c = s.follow_cylinder(x)
                out[(x, x)].add(() if c.is_full else self.simplify((("I", c),)))
        else:
            for x in s.letters:
                partial = [(x, ())]
                for a in reversed(t):
                    nxt = []
                    for cur, acc in partial:
                        for y, tgt in self.atom_branches(a, cur):
                            for tt in tgt:
                                nxt.append((y, tt + acc))
                    partial = nxt
                    if not partial:
                        break
                for y, acc in partial:
                    st = self.simplify(acc)
                    if st is not None:
                        out[(x, y)].add(st)
        r = {k: frozenset(v) for k, v in out.items() if v}
        self._term_sec[t] = r
        return r

    # emptiness

    def _ensure_alive(self, roots: Iterable) -> None:
        alive = self._alive
        nodes: dict = {}
        stack = [t for t in roots if t not in alive]
        while stack:
            t = stack.pop()
            if t in nodes or t in alive:
                continue
            succ = set()
            for v in self.term_sections(t).values():
                succ.update(v)
            nodes[t] = succ
            if len(nodes) > self.max_pairs:
                raise StateExplosion(f"more than {self.max_pairs} section terms")
            stack.extend(u for u in succ if u not in nodes and u not in alive)
        if not nodes:
            return
        count = {}
        preds: dict = defaultdict(list)
        queue = []
        for t, succ in nodes.items():
            c = 0
            for u in succ:
                if u in nodes:
                    c += 1
                    preds[u].append(t)
                elif alive[u]:
                    c += 1
            count[t] = c
            if c == 0:
                queue.append(t)
        dead = set()
        while queue:
            t = queue.pop()
            if t in dead:
                continue
            dead.add(t)
            for p in preds[t]:
                count[p] -= 1
                if count[p] == 0:
                    queue.append(p)
        for t in nodes:
            alive[t] = t not in dead

    def norm(self, e: Expr) -> Expr:
        """Simplify every term and drop the empty ones."""
        r = self._norm.get(e)
        if r is not None:
            return r
        terms = set()
        for t in e:
            st = self.simplify(t)
            if st is not None:
                terms.add(st)
        self._ensure_alive(terms)
        r = frozenset(t for t in terms if self._alive[t])
        self._norm[e] = r
        self._norm[r] = r
        return r

    def is_empty(self, e: Expr) -> bool:
        return not self.norm(e)

    def sections(self, e: Expr) -> dict:
        """Nonempty sections (x, y) -> normalized Expr of a normalized expression."""
        r = self._sections.get(e)
        if r is not None:
            return r
        acc: dict = defaultdict(set)
        for t in e:
            for k, v in self.term_sections(t).items():
                acc[k].update(v)
        allterms = set()
        for v in acc.values():
            allterms.update(v)
        self._ensure_alive(allterms)
        r = {}
        for k in sorted(acc, key=lambda k: (self.shift.order(k[0]), self.shift.order(k[1]))):
            v = frozenset(t for t in acc[k] if self._alive[t])
            if v:
                self._norm[v] = v
                r[k] = v
        self._sections[e] = r
        return r

    def section(self, e: Expr, x, y) -> Expr:
        return self.sections(self.norm(e)).get((x, y), EMPTY)

    def deep_sections(self, e: Expr, depth: int) -> dict:
        """Map (u, v) -> section S_v^-1 e S_u over words of the given length."""
        cur = {((), ()): self.norm(e)}
        for _ in range(depth):
            nxt = {}
            for (u, v), f in cur.items():
                for (x, y), g in self.sections(f).items():
                    nxt[(u + (x,), v + (y,))] = g
            cur = nxt
        return {k: f for k, f in cur.items() if f}

    # equality

    def equal(self, a: Expr, b: Expr) -> bool:
        a, b = self.norm(a), self.norm(b)
        seen = set()
        stack = [(a, b)]
        while stack:
            a, b = stack.pop()
            if a == b or (a, b) in seen:
                continue
            seen.add((a, b))
            if len(seen) > self.max_pairs:
                raise StateExplosion(f"bisimulation exceeded {self.max_pairs} pairs")
            if not a or not b:
                return False
            sa, sb = self.sections(a), self.sections(b)
            if sa.keys() != sb.keys():
                return False
            for k, v in sa.items():
                stack.append((v, sb[k]))
        return True

    def germ_disjoint(self, a: Expr, b: Expr) -> bool:
        a, b = self.norm(a), self.norm(b)
        seen = set()
        stack = [(a, b)]
        while stack:
            p = stack.pop()
            if p in seen:
                continue
            seen.add(p)
            if len(seen) > self.max_pairs:
                raise StateExplosion(f"pair exploration exceeded {self.max_pairs} pairs")
            x, y = p
            if not x or not y:
                continue
            if self.equal(x, y):
                return False
            sx, sy = self.sections(x), self.sections(y)
            for k in sx.keys() & sy.keys():
                stack.append((sx[k], sy[k]))
        return True

    # domains

    def idempotent_support(self, j: Expr) -> CylinderSet:
        """Cylinder set on which an idempotent expression is the identity."""
        s = self.shift
        memo: dict = {}

        def rel(j, ctx):
            key = (j, ctx)
            if key in memo:
                if memo[key] is None:
                    raise NotClopen("idempotent support is not a finite union of cylinders")
                return memo[key]
            if not j:
                memo[key] = set()
                return memo[key]
            ident = IDENTITY if ctx is None else identity(s.follow_cylinder(ctx))
            if self.equal(j, ident):
                memo[key] = {()}
                return memo[key]
            memo[key] = None
            out = set()
            for (x, y), sub in self.sections(j).items():
                if x != y:
                    raise ValueError("expression is not an idempotent")
                out.update((x,) + w for w in rel(sub, x))
            memo[key] = out
            return out

        words = rel(self.norm(j), None)
        return sft.cylinder(s, *words) if words else sft.empty(s)

    def domain(self, e: Expr) -> CylinderSet:
        return self.idempotent_support(compose(invert(e), e))

    def range(self, e: Expr) -> CylinderSet:
        return self.idempotent_support(compose(e, invert(e)))

    def source_idempotent(self, e: Expr) -> Expr:
        return self.norm(compose(invert(e), e))

    def range_idempotent(self, e: Expr) -> Expr:
        return self.norm(compose(e, invert(e)))

    def disjoint_union(self, *es: Expr) -> Expr:
        """Union of expressions with pairwise disjoint domains and ranges."""
        for i in range(len(es)):
            for j in range(i + 1, len(es)):
                if not self.is_empty(compose(invert(es[i]), es[i], invert(es[j]), es[j])):
                    raise ValueError("disjoint union operands have overlapping domains")
                if not self.is_empty(compose(es[i], invert(es[i]), es[j], invert(es[j]))):
                    raise ValueError("disjoint union operands have overlapping ranges")
        return union(*es)

    # points

    def _point_graph(self, e: Expr, w: EPWord):
        """Nodes (term, phase) reachable along w, and those admitting an infinite run."""
        e = self.norm(e)
        succ = {}
        stack = [(t, 0) for t in e]
        while stack:
            node = stack.pop()
            if node in succ:
                continue
            t, p = node
            x = w.letter_at_phase(p)
            np_ = w.next_phase(p)
            out = []
            for (xx, y), ts in self.term_sections(t).items():
                if xx != x:
                    continue
                for u in ts:
                    if self._alive.get(u) is None:
                        self._ensure_alive([u])
                    if self._alive[u]:
                        out.append((y, (u, np_)))
            succ[node] = out
            if len(succ) > self.max_pairs:
                raise StateExplosion("point exploration too large")
            stack.extend(n for _, n in out if n not in succ)
        # greatest fixpoint: remove nodes without live successors
        live = set(succ)
        changed = True
        while changed:
            changed = False
            for n in list(live):
                if not any(m in live for _, m in succ[n]):
                    live.discard(n)
                    changed = True
        return succ, live

    def defined_at(self, e: Expr, w: EPWord) -> bool:
        e = self.norm(e)
        _, live = self._point_graph(e, w)
        return any((t, 0) in live for t in e)

    def run(self, e: Expr, w: EPWord):
        """Iterate (output letter, section-at-point) along w.

        Yields pairs (y_n, E_n) where E_n is the union of terms alive at the
        point after n letters; raises NotFunctional on branching output.
        """
        e = self.norm(e)
        succ, live = self._point_graph(e, w)
        cur = frozenset(t for t in e if (t, 0) in live)
        if not cur:
            raise ValueError(f"expression is not defined at {w}")
        p = 0
        while True:
            outs: dict = defaultdict(set)
            for t in cur:
                for y, (u, np_) in succ[(t, p)]:
                    if (u, np_) in live:
                        outs[y].add(u)
            if len(outs) != 1:
                raise NotFunctional(f"expression is not a function at {w}")
            (y, nxt), = outs.items()
            p = w.next_phase(p)
            cur = frozenset(nxt)
            yield y, cur, p

    def evaluate(self, e: Expr, w: EPWord) -> EPWord | None:
        """Image of w, or None when w is outside the domain."""
        if not self.defined_at(e, w):
            return None
        seen = {}
        out = []
        state = (self.norm(e), 0)
        seen[state] = 0
        for y, cur, p in self.run(e, w):
            out.append(y)
            st = (cur, p)
            if st in seen:
                k = seen[st]
                return sft.epword(out[:k], out[k:])
            seen[st] = len(out)

    def section_at(self, e: Expr, w: EPWord, n: int) -> tuple[tuple, Expr]:
        """Output prefix of length n and the section of e along w after n letters."""
        out = []
        cur = self.norm(e)
        if n == 0:
            if not self.defined_at(e, w):
                raise ValueError(f"expression is not defined at {w}")
            return (), cur
        for i, (y, cur, _) in enumerate(self.run(e, w)):
            out.append(y)
            if i + 1 == n:
                break
        return tuple(out), cur

    def is_unit_germ(self, e: Expr, w: EPWord) -> bool:
        """True when e fixes w and is the identity on a neighbourhood of w."""
        if self.evaluate(e, w) != w:
            return False
        seen = set()
        cur, p = self.norm(e), 0
        steps = self.run(e, w)
        while (cur, p) not in seen:
            seen.add((cur, p))
            if self.equal(cur, compose(invert(cur), cur)):
                return True
            _, nxt, p = next(steps)
            cur = self.norm(nxt)
        return False

    def germs_equal_at(self, a: Expr, b: Expr, w: EPWord) -> bool:
        """Germ equality of a and b at the point w (both defined there)."""
        if self.evaluate(a, w) != self.evaluate(b, w):
            return False
        return self.is_unit_germ(compose(invert(b), a), w)

    # class registry

    def class_atom(self, cid: int) -> tuple:
        return ("q", f"#{cid}", False)

    def class_expr(self, cid: int) -> Expr:
        return frozenset({(self.class_atom(cid),)})

    @staticmethod
    def class_id(a: tuple):
        if a[0] == "q" and not a[2] and a[1].startswith("#"):
            return int(a[1][1:])
        return None

    def fingerprint(self, e: Expr):
        return frozenset(self.sections(e).keys())

    def find_class(self, e: Expr):
        """Id of a registered class equal to e, None if there is none."""
        e = self.norm(e)
        if not e:
            raise ValueError("the empty map has no class")
        for cid in self._buckets.get(self.fingerprint(e), ()):
            if self.equal(e, self.class_reps[cid]):
                return cid
        return None

    def classify(self, e: Expr, create: bool = True):
        cid = self.find_class(e)
        if cid is None and create:
            e = self.norm(e)
            cid = len(self.class_reps)
            self.class_reps.append(e)
            self.sealed.append(False)
            self._buckets[self.fingerprint(e)].append(cid)
        return cid

    def seal(self, cids: Iterable[int]) -> None:
        """Give each class a base state "#k" whose branches point to classes.

        Every nonempty section of every class in `cids` must already be classified.
        """
        cids = list(cids)
        tables = {}
        for cid in cids:
            table = defaultdict(list)
            for (x, y), sub in self.sections(self.class_reps[cid]).items():
                tid = self.find_class(sub)
                if tid is None:
                    raise RuntimeError("sealing a class with an unclassified section")
                table[x].append((y, self.class_expr(tid)))
            tables[cid] = table
        for cid in cids:
            name = f"#{cid}"
            self.branches[name] = {x: tuple(v) for x, v in tables[cid].items()}
            self.names.setdefault(name, name)
            self.sealed[cid] = True
        self.version += 1

    def _canon_atom(self, a: tuple) -> tuple:
        if not self.version or a[0] not in "qI":
            return a
        cid = self.class_id(a)
        if cid is not None and self.sealed[cid]:
            return a
        hit = self._atom_canon.get(a)
        if hit is not None and (hit[0] == self.version or hit[1] is not None):
            return hit[1] if hit[1] is not None else a
        if a in self._busy:
            return a
        self._busy.add(a)
        try:
            cid = self.find_class(frozenset({(a,)}))
        finally:
            self._busy.discard(a)
        res = self.class_atom(cid) if cid is not None and self.sealed[cid] else None
        self._atom_canon[a] = (self.version, res)
        return res if res is not None else a

    def _pair_canon_lookup(self, b: tuple, a: tuple):
        i, j = self.class_id(b), self.class_id(a)
        if i is None or j is None:
            return _KEEP
        key = (i, j)
        hit = self._pair_canon.get(key)
        if hit is not None and (hit[0] == self.version or hit[1] is not _KEEP):
            return hit[1]
        if key in self._busy:
            return _KEEP
        self._busy.add(key)
        try:
            e = self.norm(frozenset({(b, a)}))
            if not e:
                res = None
            else:
                cid = self.find_class(e)
                res = self.class_atom(cid) if cid is not None and self.sealed[cid] else _KEEP
        finally:
            self._busy.discard(key)
        self._pair_canon[key] = (self.version, res)
        return res

    # display

    def atom_name(self, a: tuple) -> str:
        k = a[0]
        if k == "q":
            cid = self.class_id(a) if not a[2] else None
            base = a[1]
            if base.startswith("#"):
                base = self.class_names.get(int(base[1:]), base)
            else:
                base = self.names.get(base, base)
            return base + ("^-1" if a[2] else "")
        if k == "S":
            return f"S[{a[1]}]"
        if k == "T":
            return f"S[{a[1]}]^-1"
        return f"I{a[1]!r}"

    def render(self, e: Expr) -> str:
        if not e:
            return "0"
        parts = []
        for t in e:
            parts.append("*".join(self.atom_name(a) for a in t) if t else "1")
        return " + ".join(sorted(parts))


# module-level operations


def section(m: Machine, e: Expr, x, y) -> Expr:
    """S_y^-1 e S_x, normalized; EMPTY when there is no such branch."""
    return m.section(e, x, y)


def evaluate(m: Machine, e: Expr, w: EPWord) -> EPWord | None:
    return m.evaluate(e, w)


def equal(m: Machine, a: Expr, b: Expr) -> bool:
    return m.equal(a, b)


def germ_disjoint(m: Machine, a: Expr, b: Expr) -> bool:
    return m.germ_disjoint(a, b)


def is_self_similar_closed(m: Machine, elements: Iterable[Expr]):
    """(True, None) or (False, (element, x, y, section)) for a missing section."""
    elements = [m.norm(e) for e in elements]
    for e in elements:
        for (x, y), sub in m.sections(e).items():
            if not any(m.equal(sub, f) for f in elements):
                return False, (e, x, y, sub)
    return True, None


def moore_diagram(m: Machine, elements: dict) -> nx.MultiDiGraph:
    """Arrows name -> name labeled x|y for each nonempty section.

    `elements` maps display names to expressions; sections are matched by
    `equal`.  Raises ValueError if the set is not closed under sections.
    """
    names = list(elements)
    exprs = [m.norm(elements[n]) for n in names]
    g = nx.MultiDiGraph()
    g.add_nodes_from(names)
    for n, e in zip(names, exprs):
        for (x, y), sub in m.sections(e).items():
            hit = [k for k, f in zip(names, exprs) if m.equal(sub, f)]
            if not hit:
                raise ValueError(f"section ({x}|{y}) of {n} is outside the set")
            g.add_edge(n, hit[0], label=f"{x}|{y}", x=x, y=y)
    return g


def moore_to_dot(g: nx.MultiDiGraph, name: str = "moore") -> str:
    lines = [f"digraph {name} {{"]
    for n in g.nodes:
        lines.append(f'  "{n}";')
    for u, v, d in sorted(g.edges(data=True), key=lambda e: (str(e[0]), str(e[1]), e[2]["label"])):
        lines.append(f'  "{u}" -> "{v}" [label="{d["label"]}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"
