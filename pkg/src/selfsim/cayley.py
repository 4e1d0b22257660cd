"""Cayley graphs of the groupoid of germs at a point, growth and complexity.

Vertices of the ball B_x(r) are germs (g, x) with g a product of at most r
generators and inverses; an arrow labelled F goes from (g, x) to (Fg, x).
Germs are identified by `Machine.germs_equal_at`, so the result does not
depend on how a product is written.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field

from . import sft
from .localmap import Expr, Machine, StateExplosion, compose, identity, invert
from .nucleus import Nucleus, compute_nucleus
from .sft import EPWord


@dataclass
class LabeledBall:
    center: EPWord
    radius: int
    points: list  # vertex id -> image point g(x)
    depth: list  # vertex id -> distance from the center
    arrows: list  # (source id, label, target id)
    exprs: list = field(default_factory=list, repr=False)

    def __len__(self) -> int:
        return len(self.points)

    def out_arrows(self, v: int) -> list:
        return [(lab, t) for s, lab, t in self.arrows if s == v]

    def in_arrows(self, v: int) -> list:
        return [(lab, s) for s, lab, t in self.arrows if t == v]

    def is_well_labeled(self) -> bool:
        seen_out, seen_in = set(), set()
        for s, lab, t in self.arrows:
            if (s, lab) in seen_out or (t, lab) in seen_in:
                return False
            seen_out.add((s, lab))
            seen_in.add((t, lab))
        return True

    def canonical_form(self) -> tuple:
        """Breadth-first relabelling from the root with label-sorted adjacency."""
        adj: dict = {v: [] for v in range(len(self.points))}
        for s, lab, t in self.arrows:
            adj[s].append((0, lab, t))
            adj[t].append((1, lab, s))
        order = {0: 0}
        queue = [0]
        edges = []
        i = 0
        while i < len(queue):
            v = queue[i]
            i += 1
            for d, lab, u in sorted(adj[v], key=lambda a: (a[0], a[1])):
                if u not in order:
                    order[u] = len(order)
                    queue.append(u)
                if d == 0:
                    edges.append((order[v], lab, order[u]))
        return (len(self.points), tuple(sorted(set(edges))))

    def canonical_hash(self) -> str:
        return hashlib.sha256(repr(self.canonical_form()).encode()).hexdigest()[:16]

    def to_dot(self, name: str = "ball") -> str:
        lines = [f'digraph "{name}" {{']
        for v, (p, d) in enumerate(zip(self.points, self.depth)):
            shape = ', shape=doublecircle' if v == 0 else ""
            lines.append(f'  v{v} [label="{p}"{shape}];')
        for s, lab, t in sorted(self.arrows):
            lines.append(f'  v{s} -> v{t} [label="{lab}"];')
        lines.append("}")
        return "\n".join(lines) + "\n"


def _nucleus(m: Machine, gens: dict) -> Nucleus:
    return compute_nucleus(m, gens)


class GermTracker:
    """Germs at a fixed point x, each written as S_v F S_u^-1 near x.

    A germ is stored as (depth n, nucleus class F): near x it equals the
    map u w -> v F(w) with u, v the length-n prefixes of x and of its image.
    Two germs with the same image are compared by moving both to a common
    depth and testing the nucleus pair there, which only involves short
    expressions.
    """

    def __init__(self, m: Machine, nuc, x: EPWord, cap: int = 256):
        self.m = m
        self.nuc = nuc
        self.x = x
        self.cap = cap
        self._eq: dict = {}
        self._tables = {c: nuc.section_table(c) for c in nuc.elements}

    def land(self, e: Expr, n: int) -> tuple[int, int]:
        """Depth and nucleus class of e acting at the tail of x after n letters."""
        t = self.x.shift(n)
        cid = self.nuc.lookup(e)
        if cid is not None:
            return n, cid
        for k, (_, cur, _) in enumerate(self.m.run(e, t), 1):
            cid = self.nuc.lookup(frozenset(cur))
            if cid is None:
                for term in sorted(cur, key=repr):
                    cid = self.nuc.lookup(frozenset({term}))
                    if cid is not None:
                        break
            if cid is not None:
                return n + k, cid
            if k >= self.cap:
                break
        raise RuntimeError("section did not reach the nucleus")

    def start(self) -> tuple[int, int]:
        return self.land(identity(), 0)

    def apply(self, f: Expr, germ: tuple, y: EPWord) -> tuple[int, int]:
        """The germ f g, where g has image y."""
        n, cid = germ
        _, h = self.m.section_at(f, y, n)
        return self.land(self.m.norm(compose(frozenset(h), self.nuc.expr(cid))), n)

    def advance(self, germ: tuple, y: EPWord, depth: int) -> int:
        n, cid = germ
        while n < depth:
            cid = self._tables[cid][(self.x.letter(n), y.letter(n))]
            n += 1
        return cid

    def equal(self, g1: tuple, g2: tuple, y: EPWord) -> bool:
        d = max(g1[0], g2[0])
        a, b = self.advance(g1, y, d), self.advance(g2, y, d)
        if a == b:
            return True
        key = (a, b, self.x.phase(d))
        r = self._eq.get(key)
        if r is None:
            e = compose(invert(self.nuc.expr(b)), self.nuc.expr(a))
            r = self.m.is_unit_germ(e, self.x.shift(d))
            self._eq[key] = r
        return r


def ball(m: Machine, gens: dict, x: EPWord, r: int, nuc=None) -> LabeledBall:
    """Breadth-first ball of radius r around the unit germ at x.

    `nuc` is the nucleus of the generators on the same machine; it is
    computed when not given.
    """
    if r < 0:
        raise ValueError("radius must be nonnegative")
    sft.check_epword(m.shift, x)
    nuc = nuc or _nucleus(m, gens)
    names = sorted(gens)
    moves = [(n, fwd, m.norm(gens[n] if fwd else invert(gens[n]))) for n in names for fwd in (True, False)]
    tr = GermTracker(m, nuc, x)
    points = [x]
    depth = [0]
    germs = [tr.start()]
    by_point: dict = {x: [0]}
    arrows = set()

    def find(g, y):
        for v in by_point.get(y, []):
            if tr.equal(g, germs[v], y):
                return v
        return None

    frontier = [0]
    for d in range(1, r + 2):
        nxt = []
        for v in frontier:
            y = points[v]
            for n, fwd, f in moves:
                z = m.evaluate(f, y)
                if z is None:
                    continue
                g = tr.apply(f, germs[v], y)
                u = find(g, z)
                if u is None:
                    if d > r:
                        continue
                    u = len(points)
                    points.append(z)
                    depth.append(d)
                    germs.append(g)
                    by_point.setdefault(z, []).append(u)
                    nxt.append(u)
                arrows.add((v, n, u) if fwd else (u, n, v))
        frontier = nxt
    return LabeledBall(x, r, points, depth, sorted(arrows), germs)


def growth(m: Machine, gens: dict, x: EPWord, r: int, nuc=None) -> list[int]:
    """gamma(0..r): vertex counts of the balls around x."""
    b = ball(m, gens, x, r, nuc)
    return [sum(1 for d in b.depth if d <= k) for k in range(r + 1)]


def growth_exponent(values: list[int]) -> float:
    """Least-squares slope of log gamma(r) against log r over r >= 1."""
    pts = [(math.log(r), math.log(v)) for r, v in enumerate(values) if r >= 1 and v > 0]
    if len(pts) < 2:
        return 0.0
    mx = sum(p[0] for p in pts) / len(pts)
    my = sum(p[1] for p in pts) / len(pts)
    num = sum((a - mx) * (b - my) for a, b in pts)
    den = sum((a - mx) ** 2 for a, _ in pts)
    return num / den


def representatives(shift: sft.Shift, depth: int, tail: int = 2) -> list[EPWord]:
    """Eventually periodic points covering every allowed prefix of the given depth."""
    out = []
    periods = [w for n in range(1, tail + 1) for w in shift.words(n)]
    for u in shift.words(depth):
        for p in periods:
            cand = u + p + p[:1]
            if shift.is_allowed(cand) and shift.is_allowed(p + p[:1]):
                out.append(sft.epword(u, p))
    return sorted(set(out), key=str)


def ball_classes(m: Machine, gens: dict, r: int, depth: int, tail: int = 2, nuc=None) -> dict:
    """canonical hash -> a basepoint with that ball, over prefix representatives."""
    nuc = nuc or _nucleus(m, gens)
    out: dict = {}
    for x in representatives(m.shift, depth, tail):
        h = ball(m, gens, x, r, nuc).canonical_hash()
        out.setdefault(h, x)
    return out


def complexity(m: Machine, gens: dict, r: int, depth: int | None = None, max_depth: int = 24,
               checks: int = 2, nuc=None) -> int:
    """Number of isomorphism classes of rooted labelled balls of radius r.

    Basepoints are sampled by prefix; the prefix depth starts at `depth`
    (default about log2 r + 2) and is increased until `checks` further
    refinements split no class.
    """
    nuc = nuc or _nucleus(m, gens)
    d = depth if depth is not None else max(1, r.bit_length() + 1)
    prev = set(ball_classes(m, gens, r, d, nuc=nuc))
    quiet = 0
    while d < max_depth:
        d += 1
        cur = set(ball_classes(m, gens, r, d, nuc=nuc))
        quiet = quiet + 1 if cur == prev else 0
        if quiet >= checks:
            return len(cur)
        prev = cur
    raise StateExplosion("ball classes did not stabilise within the depth cap")


# label words of chain systems


@dataclass
class LabelWord:
    out_label: str  # label of the arrow leaving the center
    in_label: str  # label of the arrow entering the center
    forward: str  # labels after the outgoing arrow, read away from the center
    backward: str  # labels before the incoming arrow, read away from the center

    @property
    def word(self) -> str:
        """The window read along the chain, center between the two halves."""
        return self.backward[::-1] + self.in_label + self.out_label + self.forward


def _label_index(name: str) -> str:
    digits = "".join(ch for ch in name if ch.isdigit())
    return digits or name


def _step(m: Machine, gens: dict, y: EPWord, backwards: bool):
    hits = []
    for n in sorted(gens):
        f = invert(gens[n]) if backwards else gens[n]
        z = m.evaluate(f, y)
        if z is not None:
            hits.append((n, z))
    if len(hits) > 1:
        raise ValueError(f"not a chain: several arrows at {y}")
    return hits[0] if hits else (None, None)


def label_word(m: Machine, gens: dict, x: EPWord, window: int) -> LabelWord:
    """Indices of the labels along the chain through x, `window` arrows each way."""
    if window == 0:
        return LabelWord("", "", "", "")
    out = []
    y = x
    for _ in range(window):
        n, y = _step(m, gens, y, False)
        if n is None:
            break
        out.append(_label_index(n))
    back = []
    y = x
    for _ in range(window):
        n, y = _step(m, gens, y, True)
        if n is None:
            break
        back.append(_label_index(n))
    return LabelWord(out[0] if out else "", back[0] if back else "", "".join(out[1:]), "".join(back[1:]))


# the Fibonacci substitution 0 -> 1, 1 -> 10

TAU = {"0": "1", "1": "10"}


def substitute(rule: dict, word: str) -> str:
    return "".join(rule[c] for c in word)


def tau_power(n: int, seed: str = "1") -> str:
    w = seed
    for _ in range(n):
        w = substitute(TAU, w)
    return w


def factors(n: int, rule: dict = TAU, seed: str = "1") -> set[str]:
    """Length-n factors of the substitution shift, iterating until the set is stable."""
    if n == 0:
        return {""}
    w = seed
    found: set = set()
    stable = 0
    while stable < 3:
        w = substitute(rule, w)
        new = {w[i:i + n] for i in range(len(w) - n + 1)}
        if len(w) >= 2 * n and new <= found:
            stable += 1
        else:
            stable = 0
        found |= new
    return found


def palindromic_centers(length: int = 41) -> dict:
    """Center types of bi-infinite palindromes in the Fibonacci shift.

    Palindromic factors are grown two letters at a time from each possible
    center (a letter or the gap between letters); a class survives if it
    still has a palindrome near `length`, and each surviving class must be
    unique at that length.
    """
    out = {}
    for center in ("1", "0", ""):
        cur = {center}
        n = len(center)
        while n + 2 <= length:
            allowed = factors(n + 2)
            cur = {a + w + a for w in cur for a in "01" if a + w + a in allowed}
            n += 2
            if not cur:
                break
        if cur:
            if len(cur) != 1:
                raise RuntimeError("palindrome extension is not unique")
            label = {"1": "symbol 1", "0": "symbol 0", "": "gap"}[center]
            out[label] = next(iter(cur))
    return out
