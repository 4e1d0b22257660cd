"""Groupoid homology from the nucleus: chain data, colimits, classes of bisections.

Chains live at levels: a vector v at level k stands for the k-fold shift
pushforward of a chain, and v at level k is identified with Sigma v at
level k + 1.  Degree 0 uses the vertex idempotents as basis (letters for
a Markov shift), degree 1 the nucleus and degree 2 the composable pairs of
the two-dimensional nucleus.  Boundaries use the face maps
d0(g1, g2) = g2, d1 = g1 g2, d2 = g1 and d0(g) = r(g), d1(g) = s(g).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import networkx as nx

from . import intlin as il
from . import sft
from .localmap import EMPTY, Expr, compose, invert
from .nucleus import NotInNucleus, Nucleus, multi_nucleus


class NotACycle(ValueError):
    """The boundary of the chain is not zero."""


class Unclassified(ValueError):
    """The colimit is not one of the certified shapes."""


MAX_LEVEL = 40


# degree 0


def vertex_basis(shift: sft.Shift) -> list:
    """Vertices of an edge shift, letters of a Markov shift of memory one."""
    if shift.graph is not None:
        return list(shift.graph.vertices)
    for x in shift.letters:
        if shift.follow_cylinder(x).depth > 1:
            raise ValueError("homology needs a Markov shift given by forbidden words of length 2")
    return list(shift.letters)


def vertex_cylinder(shift: sft.Shift, v) -> sft.CylinderSet:
    if shift.graph is not None:
        return shift.vertex_cylinder(v)
    return sft.cylinder(shift, (v,))


def sigma0(shift: sft.Shift) -> list[list[int]]:
    """Shift pushforward on the vertex basis; column v lists the children of v."""
    basis = vertex_basis(shift)
    idx = {v: i for i, v in enumerate(basis)}
    n = len(basis)
    out = il.zeros(n, n)
    if shift.graph is not None:
        g = shift.graph
        for v in basis:
            for e in g.out_edges(v):
                out[idx[g.dst(e)]][idx[v]] += 1
    else:
        for a in basis:
            for b in shift.follow[a]:
                out[idx[b]][idx[a]] += 1
    return out


def _cell_vertex(shift: sft.Shift, w: tuple):
    """(vertex, level) of the chain represented by the cylinder of w."""
    if shift.graph is not None:
        return shift.graph.dst(w[-1]), len(w)
    return w[-1], len(w) - 1


def cylinder_level(shift: sft.Shift, c: sft.CylinderSet) -> int:
    """Least level at which a cylinder set has vertex coordinates."""
    if c.is_empty:
        return 0
    if shift.graph is not None:
        return c.depth
    return max(c.depth, 1) - 1


def cylinder_coords(shift: sft.Shift, c: sft.CylinderSet, level: int, s0=None) -> list[int]:
    basis = vertex_basis(shift)
    idx = {v: i for i, v in enumerate(basis)}
    n = len(basis)
    if c.is_empty:
        return [0] * n
    s0 = s0 or sigma0(shift)
    d = c.depth
    if shift.graph is None:
        d = max(d, 1)
    if cylinder_level(shift, c) > level:
        raise ValueError("level too small for this cylinder set")
    out = [0] * n
    if d == 0:
        for v in basis:
            out[idx[v]] += 1
        lev = 0
    else:
        lev = None
        for w in sft.normalize_to_depth(c, d):
            v, lev = _cell_vertex(shift, w)
            out[idx[v]] += 1
    return il.matvec(il.matpow(s0, level - lev), out)


# patterns and relations


def _leq_table(nuc: Nucleus) -> dict:
    """(a, b) -> True when a is a restriction of b."""
    m = nuc.machine
    out = {}
    for a in nuc.elements:
        ea = nuc.expr(a)
        src = compose(invert(ea), ea)
        for b in nuc.elements:
            out[(a, b)] = a == b or m.equal(ea, compose(nuc.expr(b), src))
    return out


def _walk_patterns(starts, step, cap: int = 200_000) -> set:
    """Joined sets of nodes lying on cycles of the walk graph."""
    g = nx.DiGraph()
    seen = set()
    todo = list(starts)
    while todo:
        node = todo.pop()
        if node in seen:
            continue
        seen.add(node)
        if len(seen) > cap:
            raise RuntimeError("pattern search exceeded its cap")
        g.add_node(node)
        for nxt in step(node):
            g.add_edge(node, nxt)
            if nxt not in seen:
                todo.append(nxt)
    out = set()
    for comp in nx.strongly_connected_components(g):
        if len(comp) > 1 or any(g.has_edge(v, v) for v in comp):
            for v in comp:
                out.add(v[1])
    return out


def realized_patterns(nuc: Nucleus) -> list[frozenset]:
    """The sets {F in N : germ in F} over all germs lying in some element."""
    leq = _leq_table(nuc)
    tables = {c: nuc.section_table(c) for c in nuc.elements}

    def advance(a, joined, alive):
        j = set(joined)
        rest = []
        for k, b in alive:
            if leq[(a, b)]:
                j.add(k)
            else:
                rest.append((k, b))
        return (a, frozenset(j), tuple(rest))

    def step(node):
        a, joined, alive = node
        for xy, a2 in tables[a].items():
            nxt = [(k, tables[b][xy]) for k, b in alive if xy in tables[b]]
            yield advance(a2, joined, nxt)

    patterns = set()
    for ref in nuc.elements:
        start = advance(ref, frozenset({ref}), tuple((k, k) for k in nuc.elements if k != ref))
        patterns |= _walk_patterns([start], step)
    order = {c: i for i, c in enumerate(nuc.elements)}
    return sorted(patterns, key=lambda p: sorted(order[c] for c in p))


def realized_pair_patterns(nuc: Nucleus, pairs: list) -> list[frozenset]:
    """Pattern sets for germs of composable pairs, as sets of indices into `pairs`."""
    leq = _leq_table(nuc)
    tables = {c: nuc.section_table(c) for c in nuc.elements}
    pair_set = set(pairs)

    def advance(a, joined, alive):
        j = set(joined)
        rest = []
        for k, b in alive:
            if leq[(a, b)]:
                j.add(k)
            else:
                rest.append((k, b))
        return frozenset(j), tuple(rest)

    def step(node):
        (p, q), (jp, jq), (ap, aq) = node
        for (x0, x1), q2 in tables[q].items():
            nq = [(k, tables[b][(x0, x1)]) for k, b in aq if (x0, x1) in tables[b]]
            for (y1, x2), p2 in tables[p].items():
                if y1 != x1 or (p2, q2) not in pair_set:
                    continue
                npp = [(k, tables[b][(x1, x2)]) for k, b in ap if (x1, x2) in tables[b]]
                jp2, ap2 = advance(p2, jp, npp)
                jq2, aq2 = advance(q2, jq, nq)
                yield ((p2, q2), (jp2, jq2), (ap2, aq2))

    def pack(node):
        return node

    out = set()
    for p, q in pairs:
        jp, ap = advance(p, frozenset({p}), tuple((k, k) for k in nuc.elements if k != p))
        jq, aq = advance(q, frozenset({q}), tuple((k, k) for k in nuc.elements if k != q))
        start = ((p, q), (jp, jq), (ap, aq))
        for jp2, jq2 in _walk_patterns([pack(start)], step):
            out.add(frozenset(i for i, (a, b) in enumerate(pairs) if a in jp2 and b in jq2))
    return sorted(out, key=sorted)


def pattern_matrix(patterns: list, n: int, index=None) -> list[list[int]]:
    rows = []
    for p in patterns:
        row = [0] * n
        for c in p:
            row[index[c] if index else c] = 1
        rows.append(row)
    return rows


def relation_lattice(P: list, n: int, m: int = 0) -> list[list[int]]:
    """{a in Z^n : P a = 0}, or {a : P a = 0 mod m} (which contains m Z^n)."""
    if m == 0:
        return il.kernel(P, n) if P else [[int(i == j) for i in range(n)] for j in range(n)]
    rows = len(P)
    mod_basis = [[m * int(i == j) for i in range(rows)] for j in range(rows)]
    lat = il.preimage(P, mod_basis, n) if P else []
    return il.hnf_columns(lat + [[m * int(i == j) for i in range(n)] for j in range(n)], n)


def relation_module(nuc: Nucleus, n: int = 1, m: int = 0) -> list[list[int]]:
    """Basis of the linear relations among the indicators of the n-dimensional nucleus."""
    if n == 0:
        k = len(vertex_basis(nuc.machine.shift))
        return relation_lattice([[int(i == j) for j in range(k)] for i in range(k)], k, m)
    if n == 1:
        idx = {c: i for i, c in enumerate(nuc.elements)}
        P = pattern_matrix(realized_patterns(nuc), len(nuc.elements), idx)
        return relation_lattice(P, len(nuc.elements), m)
    if n == 2:
        pairs = multi_nucleus(nuc, 2)
        P = pattern_matrix(realized_pair_patterns(nuc, pairs), len(pairs))
        return relation_lattice(P, len(pairs), m)
    raise ValueError("n must be 0, 1 or 2")


# chain data


class Chains:
    """Level-tagged coordinates of bisections in the nucleus basis."""

    def __init__(self, nuc: Nucleus):
        self.nuc = nuc
        self.m = nuc.machine
        self.shift = self.m.shift
        self.basis0 = vertex_basis(self.shift)
        self.basis1 = list(nuc.elements)
        self.index1 = {c: i for i, c in enumerate(self.basis1)}
        self.sigma0 = sigma0(self.shift)
        self.sigma1 = self._sigma1()
        self._pow: dict = {}
        self._memo: dict = {}

    def _sigma1(self) -> list[list[int]]:
        n = len(self.basis1)
        out = il.zeros(n, n)
        for c in self.basis1:
            for d in self.nuc.section_table(c).values():
                out[self.index1[d]][self.index1[c]] += 1
        return out

    def pushed(self, cid: int, level: int) -> tuple:
        """Sigma1^level applied to the basis vector of cid."""
        key = (cid, level)
        r = self._pow.get(key)
        if r is None:
            n = len(self.basis1)
            if level == 0:
                v = [0] * n
                v[self.index1[cid]] = 1
            else:
                v = [0] * n
                for d in self.nuc.section_table(cid).values():
                    for i, x in enumerate(self.pushed(d, level - 1)):
                        v[i] += x
            r = tuple(v)
            self._pow[key] = r
        return r

    def coords(self, e: Expr, level: int):
        """Degree-1 coordinates of e at the given level, or None if its
        sections at that depth are not all in the nucleus."""
        e = self.m.norm(e)
        key = (e, level)
        if key in self._memo:
            return self._memo[key]
        n = len(self.basis1)
        if not e:
            r = (0,) * n
        else:
            cid = self.nuc.lookup(e)
            if cid is not None:
                r = self.pushed(cid, level)
            elif level == 0:
                r = None
            else:
                acc = [0] * n
                r = None
                for sub in self.m.sections(e).values():
                    v = self.coords(sub, level - 1)
                    if v is None:
                        break
                    for i, x in enumerate(v):
                        acc[i] += x
                else:
                    r = tuple(acc)
        self._memo[key] = r
        return r

    def min_level(self, e: Expr, cap: int = MAX_LEVEL) -> int:
        for lev in range(cap + 1):
            if self.coords(e, lev) is not None:
                return lev
        raise NotInNucleus("expression does not contract into the nucleus")

    def push1(self, v, k: int) -> list[int]:
        return il.matvec(il.matpow(self.sigma1, k), list(v))

    def push0(self, v, k: int) -> list[int]:
        return il.matvec(il.matpow(self.sigma0, k), list(v))

    def boundary0(self, e: Expr, level: int) -> list[int]:
        """Vertex coordinates of [r(e)] - [s(e)] at the given level."""
        r = cylinder_coords(self.shift, self.m.range(e), level, self.sigma0)
        s = cylinder_coords(self.shift, self.m.domain(e), level, self.sigma0)
        return [a - b for a, b in zip(r, s)]

    def boundary0_level(self, e: Expr) -> int:
        return max(cylinder_level(self.shift, self.m.range(e)), cylinder_level(self.shift, self.m.domain(e)))


@dataclass
class ChainData:
    """Matrices of the nucleus chain complex.

    B1 maps level k to level k + d1, B2 maps level k to level k + d2.
    """

    chains: Chains
    basis0: list
    basis1: list
    basis2: list
    sigma0: list
    sigma1: list
    B1: list
    d1: int
    B2: list
    d2: int
    _sigma2: list | None = None

    @property
    def sigma2(self) -> list:
        if self._sigma2 is None:
            self._sigma2 = _sigma2(self.chains.nuc, self.basis2)
        return self._sigma2


def _sigma2(nuc: Nucleus, pairs: list) -> list[list[int]]:
    idx = {p: i for i, p in enumerate(pairs)}
    out = il.zeros(len(pairs), len(pairs))
    tables = {c: nuc.section_table(c) for c in nuc.elements}
    for j, (p, q) in enumerate(pairs):
        for (x0, x1), q2 in tables[q].items():
            for (y1, x2), p2 in tables[p].items():
                if y1 == x1 and (p2, q2) in idx:
                    out[idx[(p2, q2)]][j] += 1
    return out


def boundary_matrix(chains: Chains, n: int):
    """(matrix, level offset) of the degree-n boundary."""
    m = chains.m
    nuc = chains.nuc
    if n == 1:
        exprs = [nuc.expr(c) for c in chains.basis1]
        d1 = max([chains.boundary0_level(e) for e in exprs] + [0])
        cols = [chains.boundary0(e, d1) for e in exprs]
        return il.from_columns(cols, len(chains.basis0)), d1
    if n == 2:
        pairs = multi_nucleus(nuc, 2)
        terms = []
        for p, q in pairs:
            ep, eq = nuc.expr(p), nuc.expr(q)
            terms.append((
                compose(invert(ep), ep, eq),
                compose(ep, eq),
                compose(ep, eq, invert(eq)),
            ))
        d2 = 0
        for tr in terms:
            for t in tr:
                d2 = max(d2, chains.min_level(t))
        cols = []
        for a, b, c in terms:
            va, vb, vc = chains.coords(a, d2), chains.coords(b, d2), chains.coords(c, d2)
            cols.append([x - y + z for x, y, z in zip(va, vb, vc)])
        return il.from_columns(cols, len(chains.basis1)), d2
    raise ValueError("n must be 1 or 2")


def chain_data(nuc: Nucleus) -> ChainData:
    ch = Chains(nuc)
    B1, d1 = boundary_matrix(ch, 1)
    B2, d2 = boundary_matrix(ch, 2)
    return ChainData(ch, ch.basis0, ch.basis1, multi_nucleus(nuc, 2), ch.sigma0, ch.sigma1, B1, d1, B2, d2)


def shift_matrix(nuc: Nucleus, n: int) -> list[list[int]]:
    if n == 0:
        return sigma0(nuc.machine.shift)
    if n == 1:
        return Chains(nuc).sigma1
    if n == 2:
        return _sigma2(nuc, multi_nucleus(nuc, 2))
    raise ValueError("n must be 0, 1 or 2")


# finitely generated groups and colimits


@dataclass
class Subquotient:
    """The group K / N for lattices N <= K <= Z^n, in Smith coordinates.

    Coordinates of an element: torsion entries (mod torsion[i]) followed
    by free entries.
    """

    n: int
    K: list  # basis columns
    N: list  # generating columns
    torsion: list = field(default_factory=list)
    free_rank: int = 0
    _U: list = field(default_factory=list)
    _keep_t: list = field(default_factory=list)
    _keep_f: list = field(default_factory=list)
    generators: list = field(default_factory=list)  # representatives in Z^n

    @classmethod
    def build(cls, K: list, N: list, n: int) -> "Subquotient":
        K = il.hnf_columns(K, n)
        k = len(K)
        kmat = il.from_columns(K, n)
        ksolve = il.Solver(kmat, k) if k else None
        ncoords = []
        for g in N:
            x = ksolve(g) if k else []
            if x is None:
                raise ValueError("relation lattice is not contained in the cycle lattice")
            ncoords.append(x)
        if k == 0:
            return cls(n, K, N)
        nmat = il.from_columns(ncoords, k) if ncoords else [[] for _ in range(k)]
        s = il.smith(nmat, ncols=len(ncoords))
        keep_t = [i for i in range(s.rank) if s.diag[i] > 1]
        keep_f = list(range(s.rank, k))
        uinv = il.inverse_unimodular(s.U)
        gens = []
        for i in keep_t + keep_f:
            col = [uinv[r][i] for r in range(k)]
            gens.append(il.matvec(kmat, col))
        out = cls(n, K, N, [s.diag[i] for i in keep_t], len(keep_f), s.U, keep_t, keep_f, gens)
        out._solve = ksolve
        return out

    def coords(self, v: list[int]) -> tuple[list[int], list[int]]:
        """(torsion coordinates, free coordinates) of a vector of K."""
        k = len(self.K)
        if k == 0:
            if any(v):
                raise ValueError("vector is not in the cycle lattice")
            return [], []
        if getattr(self, "_solve", None) is None:
            self._solve = il.Solver(il.from_columns(self.K, self.n), k)
        x = self._solve(list(v))
        if x is None:
            raise ValueError("vector is not in the cycle lattice")
        y = il.matvec(self._U, x)
        tor = [y[i] % d for i, d in zip(self._keep_t, self.torsion)]
        free = [y[i] for i in self._keep_f]
        return tor, free

    def endo(self, T: list) -> tuple[list, list, list]:
        """Blocks (T_tt, T_ft, T_ff) of an endomorphism of Z^n on this group;
        T_ft maps free generators to torsion coordinates."""
        t, f = len(self.torsion), self.free_rank
        tt = il.zeros(t, t)
        ft = il.zeros(t, f)
        ff = il.zeros(f, f)
        for j, g in enumerate(self.generators):
            tor, free = self.coords(il.matvec(T, g))
            if j < t:
                if any(free):
                    raise ValueError("endomorphism maps torsion outside the torsion subgroup")
                for i in range(t):
                    tt[i][j] = tor[i]
            else:
                for i in range(t):
                    ft[i][j - t] = tor[i]
                for i in range(f):
                    ff[i][j - t] = free[i]
        return tt, ft, ff

    def describe(self) -> str:
        return group_string(self.free_rank, self.torsion)


def group_string(rank: int, torsion: list) -> str:
    parts = []
    if rank:
        parts.append("Z" if rank == 1 else f"Z^{rank}")
    counts: dict = {}
    for d in torsion:
        counts[d] = counts.get(d, 0) + 1
    for d in sorted(counts):
        c = counts[d]
        parts.append(f"Z/{d}" if c == 1 else f"(Z/{d})^{c}")
    return " + ".join(parts) if parts else "0"


@dataclass
class ColimitDescriptor:
    kind: str  # FreeZ, ZOneOver, TorsionOnly, Presented
    rational_rank: int
    eventual_torsion: list
    endo_det: int | None
    d: int | None = None
    automorphism: list | None = None  # action of the shift on free coordinates
    torsion_automorphism: list | None = None
    level_data: dict | None = None
    _coord = None

    def __str__(self) -> str:
        if self.kind == "FreeZ":
            return group_string(self.rational_rank, self.eventual_torsion)
        if self.kind == "ZOneOver":
            return f"Z[1/{self.d}]"
        if self.kind == "TorsionOnly":
            return group_string(0, self.eventual_torsion)
        return "presented (unclassified)"

    def coordinates(self, v: list[int], level: int = 0):
        """Coordinates of the class of v at the given level."""
        return self._coord(v, level)


def _free_colimit(ff: list, f: int):
    """(kind, rank, det, d, automorphism, coordinate function on free vectors)."""
    if f == 0:
        return "TorsionOnly", 0, None, None, [], lambda w, k: []
    tf = il.matpow(ff, f)
    M = il.hnf_columns(il.columns(tf, f), f)
    r = len(M)
    if r == 0:
        return "TorsionOnly", 0, None, None, [], lambda w, k: []
    mmat = il.from_columns(M, f)
    A = il.from_columns([il.solve(mmat, il.matvec(ff, b), r) for b in M], r)
    dt = il.det(A)
    full = r == f

    def mcoords(w, k):
        return il.solve(mmat, il.matvec(tf, w), r), k + f

    if abs(dt) == 1:
        if full:
            ainv = il.inverse_unimodular(ff)
            return "FreeZ", r, dt, None, ff, lambda w, k: il.matvec(il.matpow(ainv, k), w)
        ainv = il.inverse_unimodular(A)

        def coord(w, k):
            mc, lev = mcoords(w, k)
            return il.matvec(il.matpow(ainv, lev), mc)

        return "FreeZ", r, dt, None, A, coord
    if r == 1:
        a = A[0][0]
        if full:
            return "ZOneOver", 1, dt, abs(a), A, lambda w, k: [Fraction(w[0], a**k)]

        def coord1(w, k):
            mc, lev = mcoords(w, k)
            return [Fraction(mc[0], a**lev)]

        return "ZOneOver", 1, dt, abs(a), A, coord1

    def raw(w, k):
        mc, lev = mcoords(w, k)
        return ("level", lev, mc)

    return "Presented", r, dt, None, A, raw


def _torsion_colimit(tt: list, torsion: list):
    """(stable subgroup, automorphism matrix on it, coordinate function)."""
    t = len(torsion)
    if t == 0:
        return Subquotient(0, [], []), [], (lambda w, k: [])
    D = [[torsion[j] * int(i == j) for i in range(t)] for j in range(t)]
    cur = il.hnf_columns([[int(i == j) for i in range(t)] for j in range(t)], t)
    J = 0
    while True:
        nxt = il.hnf_columns([il.matvec(tt, c) for c in cur] + D, t)
        if nxt == cur:
            break
        cur = nxt
        J += 1
    S = Subquotient.build(cur, D, t)
    st, _, _ = S.endo(tt)
    ns = len(S.torsion)
    # order of the automorphism on the stable part
    ident = [[int(i == j) for j in range(ns)] for i in range(ns)]

    def reduce(mat):
        return [[mat[i][j] % S.torsion[i] for j in range(ns)] for i in range(ns)]

    power = reduce(st)
    order = 1
    while power != reduce(ident):
        power = reduce(il.matmul(power, st))
        order += 1
        if order > 10**6:
            raise Unclassified("torsion automorphism order too large")

    def coord(w, k):
        v = il.matvec(il.matpow(tt, J), w)
        tor, _ = S.coords(v)
        e = (-(k + J)) % order
        out = il.matvec(il.matpow(st, e), tor)
        return [x % d for x, d in zip(out, S.torsion)]

    return S, reduce(st), coord


def colimit(group: Subquotient, T: list) -> ColimitDescriptor:
    """Classify the direct limit of (group, T)."""
    tt, ft, ff = group.endo(T)
    f = group.free_rank
    S, st, tcoord = _torsion_colimit(tt, group.torsion)
    kind, r, dt, d, A, fcoord = _free_colimit(ff, f)
    split = f == 0 or not any(x for row in ft for x in row)
    torsion = list(S.torsion)
    if kind == "ZOneOver" and torsion:
        kind = "Presented"
    desc = ColimitDescriptor(kind, r, torsion, dt, d, A, st)
    desc.level_data = {"group": group.describe(), "free_rank": f, "torsion": list(group.torsion)}

    t = len(group.torsion)
    nilpotent = kind == "TorsionOnly" and f > 0
    if nilpotent:
        # T^f kills the free part, so push into the torsion subgroup first
        E = [list(tt[i]) + list(ft[i]) for i in range(t)] + [[0] * t + list(ff[i]) for i in range(f)]
        Ef = il.matpow(E, f)

    def coord(v, level):
        tor, free = group.coords(v)
        fc = fcoord(free, level)
        if split:
            tc = tcoord(tor, level)
        elif nilpotent:
            w = il.matvec(Ef, tor + free)
            tc = tcoord([x % d for x, d in zip(w[:t], group.torsion)], level + f)
        else:
            tc = None
        return {"free": fc, "torsion": tc}

    desc._coord = coord
    return desc


# homology


@dataclass
class HomologyResult:
    n: int
    coeff: int  # 0 for Z
    descriptor: ColimitDescriptor
    group: Subquotient
    sigma: list
    classes: dict  # basis label -> coordinates
    basis: list  # names of basis elements whose classes generate
    data: ChainData

    def __str__(self) -> str:
        return str(self.descriptor)


def coefficient_string(m: int) -> str:
    return "Z" if m == 0 else f"Z/{m}"


def parse_coefficients(text: str) -> int:
    t = text.strip().replace(" ", "")
    if t in ("Z", "ZZ"):
        return 0
    if t.startswith("Z/") and t[2:].isdigit():
        m = int(t[2:])
        if m < 2:
            raise ValueError("modulus must be at least 2")
        return m
    raise ValueError(f"unknown coefficients {text!r}")


def _scale(lat: list, m: int, n: int) -> list:
    return lat + ([[m * int(i == j) for i in range(n)] for j in range(n)] if m else [])


class HomologyComputer:
    """Shared chain data and relation lattices for one nucleus."""

    def __init__(self, nuc: Nucleus):
        self.nuc = nuc
        self.data = chain_data(nuc)
        self.patterns = realized_patterns(nuc)
        idx = {c: i for i, c in enumerate(nuc.elements)}
        self.P = pattern_matrix(self.patterns, len(nuc.elements), idx)
        self._cache: dict = {}

    def lattices(self, m: int):
        d = self.data
        n0, n1 = len(d.basis0), len(d.basis1)
        L0 = _scale([], m, n0)
        L1 = relation_lattice(self.P, n1, m)
        return L0, L1

    def eventual_cycles(self, m: int) -> tuple[list, int]:
        """Basis of {z : Sigma0^j B1 z in L0 for some j} and the j used."""
        d = self.data
        n0, n1 = len(d.basis0), len(d.basis1)
        L0, _ = self.lattices(m)
        W = il.hnf_columns(L0, n0)
        j = 0
        while True:
            W2 = il.preimage(d.sigma0, W, n0)
            W2 = il.hnf_columns(W2 + W, n0)
            if W2 == W:
                break
            W = W2
            j += 1
        if not d.basis1:
            return [], j
        K = il.preimage(d.B1, W, n1)
        return K, j

    def homology(self, n: int, m: int = 0) -> HomologyResult:
        key = (n, m)
        if key in self._cache:
            return self._cache[key]
        d = self.data
        L0, L1 = self.lattices(m)
        if n == 0:
            n0 = len(d.basis0)
            N = L0 + il.columns(d.B1, len(d.basis1))
            G = Subquotient.build([[int(i == j) for i in range(n0)] for j in range(n0)], N, n0)
            T = d.sigma0
            labels = [("I" + str(v), [int(i == j) for i in range(n0)]) for j, v in enumerate(d.basis0)]
        elif n == 1:
            n1 = len(d.basis1)
            K, _ = self.eventual_cycles(m)
            N = L1 + il.columns(d.B2, len(d.basis2))
            G = Subquotient.build(K + N, N, n1)
            T = d.sigma1
            labels = []
            for j, c in enumerate(d.basis1):
                v = [int(i == j) for i in range(n1)]
                if G.K and il.in_lattice(v, G.K, n1):
                    labels.append((self.nuc.name(c), v))
        else:
            raise ValueError("n must be 0 or 1")
        desc = colimit(G, T)
        classes = {}
        for name, v in labels:
            classes[name] = _reduce(desc.coordinates(v, 0), desc, m)
        res = HomologyResult(n, m, desc, G, T, classes, _choose_basis(classes, desc, self.nuc), d)
        self._cache[key] = res
        return res

    def cycle_class(self, e: Expr, m: int = 0):
        """Coordinates of the degree-1 class of a bisection in the presented H1."""
        d = self.data
        ch = d.chains
        lev0 = ch.boundary0_level(e)
        b = ch.boundary0(e, lev0)
        L0, _ = self.lattices(m)
        W = il.hnf_columns(L0, len(d.basis0))
        for _ in range(len(d.basis0) + 2):
            if il.in_lattice(b, W, len(d.basis0)):
                break
            b = il.matvec(d.sigma0, b)
        else:
            raise NotACycle("the boundary of the bisection is not zero")
        try:
            level = ch.min_level(e)
            v = ch.coords(e, level)
        except NotInNucleus:
            terms = [frozenset({t}) for t in ch.m.norm(e)]
            if len(terms) < 2:
                raise
            for i in range(len(terms)):
                for j in range(i + 1, len(terms)):
                    if not ch.m.germ_disjoint(terms[i], terms[j]):
                        raise
            level = max(ch.min_level(t) for t in terms)
            v = [0] * len(d.basis1)
            for t in terms:
                for i, x in enumerate(ch.coords(t, level)):
                    v[i] += x
        h = self.homology(1, m)
        return _reduce(h.descriptor.coordinates(list(v), level), h.descriptor, m)


def _reduce(c: dict, desc: ColimitDescriptor, m: int):
    free = c["free"]
    if isinstance(free, list) and m:
        free = [x % m if isinstance(x, int) else x for x in free]
    return {"free": free, "torsion": c["torsion"]}


def _is_zero(c: dict) -> bool:
    free = c["free"]
    if isinstance(free, tuple):
        return not any(free[2])
    return not any(free) and not any(c["torsion"] or [])


def _choose_basis(classes: dict, desc: ColimitDescriptor, nuc: Nucleus) -> list:
    """Greedy generating set among generator classes (later generators first)."""
    if desc.kind not in ("FreeZ", "TorsionOnly") or desc.eventual_torsion and desc.rational_rank:
        return []
    gens = [g for g in reversed(list(nuc.generators)) if g in classes]
    others = [k for k in classes if k not in gens]
    chosen: list = []
    vecs: list = []
    mods = desc.eventual_torsion
    r = desc.rational_rank
    target = r + len(mods)
    for name in gens + others:
        c = classes[name]
        if _is_zero(c):
            continue
        vec = list(c["free"]) + list(c["torsion"] or [])
        if _spans_more(vecs, vec, r, mods):
            chosen.append(name)
            vecs.append(vec)
        if len(chosen) >= target and _generates(vecs, r, mods):
            break
    return chosen if _generates(vecs, r, mods) else []


def _relations(r: int, mods: list) -> list:
    n = r + len(mods)
    return [[d * int(i == r + j) for i in range(n)] for j, d in enumerate(mods)]


def _spans_more(vecs, vec, r, mods) -> bool:
    n = r + len(mods)
    base = il.hnf_columns(vecs + _relations(r, mods), n)
    return not il.in_lattice(vec, base, n) if base else any(vec)


def _generates(vecs, r, mods) -> bool:
    n = r + len(mods)
    if n == 0:
        return True
    base = il.hnf_columns(vecs + _relations(r, mods), n)
    return il.same_lattice(base, [[int(i == j) for i in range(n)] for j in range(n)], n)


def homology(nuc: Nucleus, n: int, coeff: int = 0) -> HomologyResult:
    return HomologyComputer(nuc).homology(n, coeff)


def h1_class(nuc: Nucleus, e: Expr, coeff: int = 0, computer: HomologyComputer | None = None):
    return (computer or HomologyComputer(nuc)).cycle_class(e, coeff)


# dimension group


@dataclass
class DimensionGroup:
    h0: ColimitDescriptor
    unit: object  # coordinates of [1]
    eigenvalue: object | None
    vertex_measure: dict | None  # vertex -> measure of the vertex cylinder
    exact: bool

    def measure(self, shift: sft.Shift, c: sft.CylinderSet):
        """Invariant measure of a cylinder set."""
        if self.vertex_measure is None:
            raise ValueError("no unique invariant state")
        basis = vertex_basis(shift)
        lev = cylinder_level(shift, c)
        v = cylinder_coords(shift, c, lev)
        total = sum(x * self.vertex_measure[b] for x, b in zip(v, basis))
        return total / self.eigenvalue**lev


def dimension_group(nuc: Nucleus, computer: HomologyComputer | None = None) -> DimensionGroup:
    import sympy

    comp = computer or HomologyComputer(nuc)
    h = comp.homology(0, 0)
    desc = h.descriptor
    if desc.kind not in ("FreeZ", "ZOneOver"):
        raise Unclassified(f"H0 is {desc}")
    d = comp.data
    n0 = len(d.basis0)
    unit = desc.coordinates([1] * n0, 0)["free"]
    ok, _ = _matrix_primitive(d.sigma0)
    if not ok:
        return DimensionGroup(desc, unit, None, None, False)
    M = sympy.Matrix(d.sigma0)
    lam = max((ev for ev in M.eigenvals() if ev.is_real), key=lambda z: float(z))
    exact = sympy.degree(M.charpoly().as_expr()) <= 2
    left = (M.T - lam * sympy.eye(n0)).nullspace()[0]
    left = left / sum(left)
    meas = {v: sympy.nsimplify(sympy.simplify(left[i])) for i, v in enumerate(d.basis0)}
    return DimensionGroup(desc, unit, sympy.simplify(lam), meas, exact)


def _matrix_primitive(a) -> tuple[bool, int | None]:
    n = len(a)
    b = [[int(x > 0) for x in row] for row in a]
    p = [list(r) for r in b]
    for k in range(1, n * n + 2):
        if all(all(row) for row in p):
            return True, k
        p = [[int(any(p[i][t] and b[t][j] for t in range(n))) for j in range(n)] for i in range(n)]
    return False, None
