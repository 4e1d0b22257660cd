"""Finite graphs, one-sided shifts of finite type and cylinder sets.

Two kinds of shift are supported.  An edge shift is the space of infinite
paths in a finite directed graph; its letters are the edges.  A Markov shift
is given by an alphabet and a list of forbidden two-letter words.  Both are
described uniformly by a `Shift`: an alphabet together with the set of
letters allowed to follow each letter.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from functools import cached_property
from itertools import product
from typing import Iterable, Sequence


@dataclass(frozen=True)
class VertexGraph:
    """A finite directed multigraph.  `edges` holds (name, src, dst) triples."""

    vertices: tuple
    edges: tuple

    def __post_init__(self):
        names = [e[0] for e in self.edges]
        if len(set(names)) != len(names):
            raise ValueError("duplicate edge names")
        vs = set(self.vertices)
        for name, s, d in self.edges:
            if s not in vs or d not in vs:
                raise ValueError(f"edge {name} has an endpoint outside the vertex set")

    @classmethod
    def build(cls, vertices: Iterable, edges: Iterable[tuple]) -> "VertexGraph":
        return cls(tuple(vertices), tuple((str(n), s, d) for n, s, d in edges))

    @cached_property
    def edge_names(self) -> tuple:
        return tuple(e[0] for e in self.edges)

    @cached_property
    def _src(self) -> dict:
        return {n: s for n, s, _ in self.edges}

    @cached_property
    def _dst(self) -> dict:
        return {n: d for n, _, d in self.edges}

    def src(self, e):
        return self._src[e]

    def dst(self, e):
        return self._dst[e]

    @cached_property
    def _out(self) -> dict:
        out = {v: [] for v in self.vertices}
        for n, s, _ in self.edges:
            out[s].append(n)
        return {v: tuple(es) for v, es in out.items()}

    def out_edges(self, v) -> tuple:
        return self._out[v]

    def adjacency(self) -> list[list[int]]:
        """Adjacency matrix, rows indexed by source vertex."""
        idx = {v: i for i, v in enumerate(self.vertices)}
        a = [[0] * len(self.vertices) for _ in self.vertices]
        for _, s, d in self.edges:
            a[idx[s]][idx[d]] += 1
        return a

    def is_pruned(self) -> bool:
        return all(self._out[v] for v in self.vertices)

    def to_dot(self, name: str = "G") -> str:
        lines = [f"digraph {name} {{"]
        for v in self.vertices:
            lines.append(f'  "{v}";')
        for n, s, d in self.edges:
            lines.append(f'  "{s}" -> "{d}" [label="{n}"];')
        lines.append("}")
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class Path:
    """A finite path: its start vertex and its edge word."""

    vertex: object
    edges: tuple = ()

    def __len__(self):
        return len(self.edges)


def allowed_paths(g: VertexGraph, n: int) -> list[Path]:
    """All composable edge words of length n in lexicographic order."""
    if n < 0:
        raise ValueError("path length must be nonnegative")
    if n == 0:
        return [Path(v, ()) for v in g.vertices]
    words = [(e,) for e in g.edge_names]
    for _ in range(n - 1):
        words = [w + (e,) for w in words for e in g.out_edges(g.dst(w[-1]))]
    return sorted((Path(g.src(w[0]), w) for w in words), key=lambda p: p.edges)


def _bool_mult(a, b):
    n = len(a)
    return [[int(any(a[i][k] and b[k][j] for k in range(n))) for j in range(n)] for i in range(n)]


def is_primitive(g: VertexGraph) -> tuple[bool, int | None]:
    """Whether some power of the adjacency matrix is positive, with the least such power."""
    n = len(g.vertices)
    if n == 0:
        return False, None
    a = [[int(x > 0) for x in row] for row in g.adjacency()]
    p = a
    for m in range(1, n * n + 2):
        if all(all(row) for row in p):
            return True, m
        p = _bool_mult(p, a)
    return False, None


def _subgraph(g: VertexGraph, keep) -> VertexGraph:
    keep = set(keep)
    return VertexGraph(
        tuple(v for v in g.vertices if v in keep),
        tuple(e for e in g.edges if e[1] in keep and e[2] in keep),
    )


def eventual_image(g: VertexGraph) -> VertexGraph:
    """Restrict to the vertices that are endpoints of arbitrarily long paths."""
    cur = g
    while True:
        hit = {d for _, _, d in cur.edges}
        if hit == set(cur.vertices):
            return cur
        cur = _subgraph(cur, hit)


def reachable_part(g: VertexGraph) -> VertexGraph:
    """Drop vertices from which no infinite path starts."""
    cur = g
    while True:
        alive = {s for _, s, _ in cur.edges}
        if alive == set(cur.vertices):
            return cur
        cur = _subgraph(cur, alive)


def block_code(g, k: int) -> tuple[VertexGraph, dict]:
    """Width-k block recoding of an edge shift (a VertexGraph) or of a `Shift`.

    Vertices are words of length k-1, edges are words of length k, with
    src/dst the prefix/suffix of length k-1.  Names join letters with "_",
    so width 2 on the golden mean Markov chain gives edges 0_0, 0_1, 1_0.
    The dictionary maps each new edge to the old word it encodes.
    """
    if k < 1:
        raise ValueError("block width must be at least 1")
    if isinstance(g, VertexGraph):
        if k == 1:
            return g, {e: (e,) for e in g.edge_names}
        vwords = [p.edges for p in allowed_paths(g, k - 1)]
        ewords = [p.edges for p in allowed_paths(g, k)]
    else:
        if k == 1:
            if g.graph is None:
                raise ValueError("a Markov shift needs width at least 2 to become an edge shift")
            return g.graph, {e: (e,) for e in g.letters}
        vwords = g.words(k - 1)
        ewords = g.words(k)
    join = "_".join
    new_edges = [(join(w), join(w[:-1]), join(w[1:])) for w in ewords]
    return VertexGraph(tuple(join(w) for w in vwords), tuple(new_edges)), {join(w): w for w in ewords}


def markov_graph(letters: Sequence[str], forbidden: Iterable[str]) -> VertexGraph:
    """Graph whose edge shift is the width-2 recoding of a Markov shift."""
    return block_code(Shift.markov(letters, forbidden), 2)[0]


@dataclass(eq=False)
class Shift:
    """Alphabet plus follower sets.  Identity-hashed; one instance per system."""

    letters: tuple
    follow: dict
    graph: VertexGraph | None = None
    forbidden: tuple = ()
    _follow_cyl: dict = field(default_factory=dict, repr=False)

    @classmethod
    def edge_shift(cls, g: VertexGraph) -> "Shift":
        if not g.is_pruned():
            raise ValueError("graph has a vertex without outgoing edges")
        follow = {e: frozenset(g.out_edges(g.dst(e))) for e in g.edge_names}
        return cls(tuple(g.edge_names), follow, graph=g)

    @classmethod
    def markov(cls, letters: Sequence[str], forbidden: Iterable[str]) -> "Shift":
        letters = tuple(str(a) for a in letters)
        bad = tuple(sorted(set(forbidden)))
        for w in bad:
            if len(w) != 2 or any(c not in letters for c in w):
                raise ValueError(f"forbidden word {w!r} must be two letters of the alphabet")
        follow = {a: frozenset(b for b in letters if a + b not in bad) for a in letters}
        if any(not f for f in follow.values()):
            raise ValueError("some letter has no allowed successor")
        return cls(letters, follow, forbidden=bad)

    @property
    def is_edge_shift(self) -> bool:
        return self.graph is not None

    def order(self, x) -> int:
        return self._index[x]

    @cached_property
    def _index(self) -> dict:
        return {x: i for i, x in enumerate(self.letters)}

    def continuations(self, prefix: tuple) -> frozenset:
        return self.follow[prefix[-1]] if prefix else frozenset(self.letters)

    def is_allowed(self, word: Sequence) -> bool:
        if any(x not in self._index for x in word):
            return False
        return all(b in self.follow[a] for a, b in zip(word, word[1:]))

    def words(self, n: int) -> list[tuple]:
        """Allowed words of length n in lexicographic letter order."""
        ws = [()]
        for _ in range(n):
            ws = [w + (x,) for w in ws for x in self.letters if not w or x in self.follow[w[-1]]]
        return ws

    def extensions(self, word: tuple, n: int) -> list[tuple]:
        """Allowed words of length n extending `word` by n letters (suffixes only)."""
        ws = [()]
        for _ in range(n):
            ws = [
                w + (x,)
                for w in ws
                for x in self.letters
                if x in self.continuations(word + w)
            ]
        return ws

    # vertex data used by homology and the algebra
    def vertex_of(self, x):
        """The vertex reached after reading letter x (edge shifts only)."""
        return self.graph.dst(x)

    def follow_cylinder(self, x) -> "CylinderSet":
        c = self._follow_cyl.get(x)
        if c is None:
            c = canonical(self, 1, {(y,) for y in self.follow[x]})
            self._follow_cyl[x] = c
        return c

    def context_cylinder(self, prefix: tuple) -> "CylinderSet":
        return self.follow_cylinder(prefix[-1]) if prefix else full(self)

    def vertex_cylinder(self, v) -> "CylinderSet":
        return canonical(self, 1, {(e,) for e in self.graph.out_edges(v)})


@dataclass(frozen=True)
class CylinderSet:
    """Union of cylinders [w] over `cells`, all of length `depth`.

    Values built by `canonical` are coarsened to the least uniform depth, so
    two canonical cylinder sets are equal as sets iff they are equal as
    values.  The full space is depth 0 with the single empty cell.
    """

    shift: Shift
    depth: int
    cells: frozenset

    def __repr__(self):
        if self.depth == 0:
            return "Cyl(full)" if self.cells else "Cyl(empty)"
        return "Cyl{" + ",".join(sorted(" ".join(c) for c in self.cells)) + "}"

    @property
    def is_empty(self) -> bool:
        return not self.cells

    @property
    def is_full(self) -> bool:
        return self.depth == 0 and bool(self.cells)


def canonical(shift: Shift, depth: int, cells) -> CylinderSet:
    cells = set(cells)
    for c in cells:
        if len(c) != depth:
            raise ValueError("cells must all have length equal to the depth")
        if not shift.is_allowed(c):
            raise ValueError(f"cell {c} is not an allowed word")
    while depth > 0 and cells:
        groups = defaultdict(set)
        for c in cells:
            groups[c[:-1]].add(c[-1])
        if any(last != shift.continuations(p) for p, last in groups.items()):
            break
        cells = set(groups)
        depth -= 1
    if not cells:
        depth = 0
    return CylinderSet(shift, depth, frozenset(cells))


def full(shift: Shift) -> CylinderSet:
    return CylinderSet(shift, 0, frozenset({()}))


def empty(shift: Shift) -> CylinderSet:
    return CylinderSet(shift, 0, frozenset())


def cylinder(shift: Shift, *words) -> CylinderSet:
    """Cylinder set from words given as letter tuples or strings of one-char letters."""
    ws = [tuple(w) for w in words]
    d = max((len(w) for w in ws), default=0)
    cells = set()
    for w in ws:
        cells.update(w + e for e in shift.extensions(w, d - len(w)))
    return canonical(shift, d, cells)


def normalize_to_depth(c: CylinderSet, d: int) -> set:
    """Cells of c refined to depth d."""
    if d < c.depth:
        raise ValueError(f"cannot normalize depth {c.depth} cylinder set to depth {d}")
    out = set()
    for w in c.cells:
        out.update(w + e for e in c.shift.extensions(w, d - c.depth))
    return out


def _binary(c1: CylinderSet, c2: CylinderSet, op) -> CylinderSet:
    if c1.shift is not c2.shift:
        raise ValueError("cylinder sets over different shifts")
    d = max(c1.depth, c2.depth)
    return canonical(c1.shift, d, op(normalize_to_depth(c1, d), normalize_to_depth(c2, d)))


def union(c1: CylinderSet, c2: CylinderSet) -> CylinderSet:
    return _binary(c1, c2, set.union)


def intersect(c1: CylinderSet, c2: CylinderSet) -> CylinderSet:
    if c1.is_full:
        return c2
    if c2.is_full or c1 == c2:
        return c1
    return _binary(c1, c2, set.intersection)


def complement(c: CylinderSet) -> CylinderSet:
    return canonical(c.shift, c.depth, set(c.shift.words(c.depth)) - set(c.cells))


def equal(c1: CylinderSet, c2: CylinderSet) -> bool:
    d = max(c1.depth, c2.depth)
    return normalize_to_depth(c1, d) == normalize_to_depth(c2, d)


def subset(c1: CylinderSet, c2: CylinderSet) -> bool:
    return equal(intersect(c1, c2), c1)


def contains_word(c: CylinderSet, w: "EPWord") -> bool:
    return w.prefix(c.depth) in c.cells


def residual(c: CylinderSet, x) -> CylinderSet:
    """The set {w : xw in c} as a subset of the cylinder of letters following x."""
    s = c.shift
    if c.depth == 0:
        return s.follow_cylinder(x) if c.cells else c
    if c.depth == 1:
        return s.follow_cylinder(x) if (x,) in c.cells else empty(s)
    return canonical(s, c.depth - 1, {w[1:] for w in c.cells if w[0] == x})


def prepend(c: CylinderSet, x) -> CylinderSet:
    """The set x.c (restricted to allowed words)."""
    s = c.shift
    d = max(c.depth, 1)
    cells = {w for w in normalize_to_depth(c, d) if w[0] in s.follow[x]}
    return canonical(s, d + 1, {(x,) + w for w in cells})


@dataclass(frozen=True)
class EPWord:
    """The eventually periodic word pre.period.period...

    Construct through `epword` to get the normal form: primitive period and
    shortest preperiod.
    """

    pre: tuple
    period: tuple

    def letter(self, i: int):
        if i < len(self.pre):
            return self.pre[i]
        return self.period[(i - len(self.pre)) % len(self.period)]

    def prefix(self, n: int) -> tuple:
        return tuple(self.letter(i) for i in range(n))

    def phase(self, i: int) -> int:
        """Position index in the finite automaton of positions."""
        if i < len(self.pre):
            return i
        return len(self.pre) + (i - len(self.pre)) % len(self.period)

    @property
    def positions(self) -> int:
        return len(self.pre) + len(self.period)

    def next_phase(self, p: int) -> int:
        p += 1
        return p if p < self.positions else len(self.pre)

    def letter_at_phase(self, p: int):
        return self.pre[p] if p < len(self.pre) else self.period[p - len(self.pre)]

    def shift(self, n: int = 1) -> "EPWord":
        if n <= len(self.pre):
            return epword(self.pre[n:], self.period)
        k = (n - len(self.pre)) % len(self.period)
        return epword((), self.period[k:] + self.period[:k])

    def __str__(self):
        sep = "" if all(len(str(x)) == 1 for x in self.pre + self.period) else ","
        return sep.join(self.pre) + "(" + sep.join(self.period) + ")"


def epword(pre: Sequence, period: Sequence) -> EPWord:
    pre, period = tuple(pre), tuple(period)
    if not period:
        raise ValueError("period must be nonempty")
    n = len(period)
    for d in range(1, n + 1):
        if n % d == 0 and period == period[:d] * (n // d):
            period = period[:d]
            break
    while pre and pre[-1] == period[-1]:
        pre = pre[:-1]
        period = (period[-1],) + period[:-1]
    return EPWord(pre, period)


def check_epword(shift: Shift, w: EPWord) -> None:
    word = w.pre + w.period + w.period[:1]
    if not shift.is_allowed(word):
        raise ValueError(f"{w} is not a point of the shift")


def parse_epword(text: str, shift: Shift | None = None) -> EPWord:
    """Parse `u(v)`.

    Letters are comma separated; without commas the text is split into
    single characters, or by longest match against the shift's alphabet.
    """
    text = text.strip()
    if not text.endswith(")") or "(" not in text:
        raise ValueError(f"expected u(v) syntax, got {text!r}")
    head, tail = text[:-1].split("(", 1)
    alphabet = sorted(map(str, shift.letters), key=len, reverse=True) if shift else []

    def split(s):
        s = s.strip().rstrip(",")
        if not s:
            return ()
        if "," in s:
            return tuple(t.strip() for t in s.split(","))
        if not alphabet or all(len(a) == 1 for a in alphabet):
            return tuple(s)
        out = []
        while s:
            a = next((a for a in alphabet if s.startswith(a)), None)
            if a is None:
                raise ValueError(f"cannot split {s!r} into letters")
            out.append(a)
            s = s[len(a):]
        return tuple(out)

    w = epword(split(head), split(tail))
    if shift is not None:
        check_epword(shift, w)
    return w


def all_words_product(shift: Shift, n: int) -> list[tuple]:
    """Brute-force enumeration over the full product, used as a test oracle."""
    return [w for w in product(shift.letters, repeat=n) if shift.is_allowed(w)]
