"""The convolution algebra of the groupoid through its nucleus presentation.

An element is a finite linear combination of terms S_u F S_v^-1 with F in
the nucleus, stored as {(u, F, v): coefficient}.  Terms always satisfy the
compatibility condition that F lives over the last letters of u and v, so
that at a fixed pair (u, v) the term is the indicator of a set of germs.
Two elements are equal when their difference, expanded to a common depth,
vanishes block by block modulo the linear relations among nucleus
indicators.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from . import sft
from .homology import realized_patterns
from .localmap import IDENTITY, Expr, StateExplosion, compose, identity, invert, prefix_word, union
from .nucleus import Nucleus, NotInNucleus, expand, multi_nucleus, product_section_table


class Field:
    """The rationals (p = 0) or the integers modulo a prime p."""

    def __init__(self, p: int = 0):
        if p and (p < 2 or any(p % d == 0 for d in range(2, int(p**0.5) + 1))):
            raise ValueError(f"{p} is not a prime")
        self.p = p

    def __call__(self, x):
        if self.p:
            if isinstance(x, Fraction):
                return x.numerator * pow(x.denominator, -1, self.p) % self.p
            return int(x) % self.p
        return Fraction(x)

    def inv(self, x):
        if not x:
            raise ZeroDivisionError("inverse of zero")
        return pow(x, -1, self.p) if self.p else 1 / x

    def __eq__(self, other):
        return isinstance(other, Field) and other.p == self.p

    def __hash__(self):
        return hash(self.p)

    def __repr__(self):
        return "QQ" if not self.p else f"GF({self.p})"


def parse_field(text: str) -> Field:
    t = text.strip().upper().replace(" ", "")
    if t in ("Q", "QQ"):
        return Field(0)
    for pre in ("GF(", "Z/", "F"):
        if t.startswith(pre):
            return Field(int(t[len(pre):].rstrip(")")))
    raise ValueError(f"unknown field {text!r}")


class AlgebraElement:
    __slots__ = ("alg", "terms")

    def __init__(self, alg: "Algebra", terms: dict):
        self.alg = alg
        self.terms = {k: v for k, v in terms.items() if v}

    def __add__(self, other):
        out = dict(self.terms)
        for k, v in other.terms.items():
            out[k] = out.get(k, 0) + v
        return AlgebraElement(self.alg, out)

    def __neg__(self):
        return AlgebraElement(self.alg, {k: -v for k, v in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c):
        c = self.alg.field(c)
        return AlgebraElement(self.alg, {k: c * v for k, v in self.terms.items()})

    def __mul__(self, other):
        return self.alg.multiply(self, other)

    def __eq__(self, other):
        return isinstance(other, AlgebraElement) and self.alg.is_zero(self - other)

    def __hash__(self):
        raise TypeError("algebra elements are not hashable")

    def is_zero(self) -> bool:
        return self.alg.is_zero(self)

    def star(self):
        return self.alg.star(self)

    def degrees(self) -> set:
        return {len(u) - len(v) for u, _, v in self.terms}

    def __repr__(self):
        return self.alg.render(self)


class Algebra:
    """The convolution algebra over a field, presented by the nucleus."""

    def __init__(self, nuc: Nucleus, field: Field | None = None):
        self.nuc = nuc
        self.m = nuc.machine
        self.shift = self.m.shift
        self.field = field or Field(0)
        self.tables = {c: nuc.section_table(c) for c in nuc.elements}
        self.index = {c: i for i, c in enumerate(nuc.elements)}
        self._prod: dict = {}
        self._inv: dict = {}
        self._kernel = self._relation_basis()

    # relations among nucleus indicators

    def _relation_basis(self) -> list[dict]:
        """Reduced echelon basis of {c : sum c_F 1_F = 0}, as {pivot: vector}."""
        elems = self.nuc.elements
        n = len(elems)
        rows = []
        for pat in realized_patterns(self.nuc):
            rows.append([self.field(int(c in pat)) for c in elems])
        # null space of the pattern matrix by row reduction
        piv_cols = []
        r = 0
        for c in range(n):
            k = next((i for i in range(r, len(rows)) if rows[i][c]), None)
            if k is None:
                continue
            rows[r], rows[k] = rows[k], rows[r]
            inv = self.field.inv(rows[r][c])
            rows[r] = [self.field(x * inv) for x in rows[r]]
            for i in range(len(rows)):
                if i != r and rows[i][c]:
                    f = rows[i][c]
                    rows[i] = [self.field(a - f * b) for a, b in zip(rows[i], rows[r])]
            piv_cols.append(c)
            r += 1
        free = [c for c in range(n) if c not in piv_cols]
        basis = []
        for fcol in free:
            v = [self.field(0)] * n
            v[fcol] = self.field(1)
            for i, pc in enumerate(piv_cols):
                v[pc] = self.field(-rows[i][fcol])
            basis.append(v)
        # echelonize the kernel basis itself so reduction is canonical
        out = {}
        for v in basis:
            v = list(v)
            for p, w in out.items():
                if v[p]:
                    f = v[p]
                    v = [self.field(a - f * b) for a, b in zip(v, w)]
            p = next((i for i in range(n) if v[i]), None)
            if p is None:
                continue
            inv = self.field.inv(v[p])
            v = [self.field(x * inv) for x in v]
            for q in list(out):
                if out[q][p]:
                    f = out[q][p]
                    out[q] = [self.field(a - f * b) for a, b in zip(out[q], v)]
            out[p] = v
        return [(p, out[p]) for p in sorted(out)]

    def relation_dimension(self) -> int:
        return len(self._kernel)

    # constructors

    def element(self, terms: dict) -> AlgebraElement:
        return AlgebraElement(self, {k: self.field(v) for k, v in terms.items()})

    def zero(self) -> AlgebraElement:
        return AlgebraElement(self, {})

    def term(self, u, f, v, c=1) -> AlgebraElement:
        return AlgebraElement(self, {(tuple(u), f, tuple(v)): self.field(c)})

    def from_map(self, e: Expr) -> AlgebraElement:
        """The indicator of a bisection given as a map expression."""
        e = self.m.norm(e)
        if not e:
            return self.zero()
        _, table = expand(self.nuc, e)
        return AlgebraElement(self, {(out, cid, inn): self.field(1) for (out, inn), cid in table.items()})

    def one(self) -> AlgebraElement:
        return self.from_map(IDENTITY)

    def nucleus_element(self, name_or_id) -> AlgebraElement:
        cid = self.nuc.by_name(name_or_id) if isinstance(name_or_id, str) else name_or_id
        return self.term((), cid, ())

    def _follow_class(self, x) -> int:
        c = self.shift.follow_cylinder(x)
        cid = self.nuc.lookup(identity(c))
        if cid is None:
            raise NotInNucleus(f"the idempotent after {x} is not in the nucleus")
        return cid

    def S(self, word) -> AlgebraElement:
        """S_w = S_{w1} ... S_{wn}."""
        word = tuple(word)
        if not word:
            return self.one()
        if not self.shift.is_allowed(word):
            return self.zero()
        return self.term(word, self._follow_class(word[-1]), ())

    def S_inv(self, word) -> AlgebraElement:
        word = tuple(word)
        if not word:
            return self.one()
        if not self.shift.is_allowed(word):
            return self.zero()
        return self.term((), self._follow_class(word[-1]), word)

    # arithmetic

    def _expand_term(self, u, f, v):
        for (x, y), g in self.tables[f].items():
            yield (u + (y,), g, v + (x,))

    def _product(self, f: int, g: int) -> list:
        key = (f, g)
        r = self._prod.get(key)
        if r is None:
            e = self.m.norm(compose(self.nuc.expr(f), self.nuc.expr(g)))
            if not e:
                r = []
            else:
                _, table = expand(self.nuc, e)
                r = sorted((out, cid, inn) for (out, inn), cid in table.items())
            self._prod[key] = r
        return r

    def _mul_terms(self, s, t, c, out):
        u, f, v = s
        p, g, q = t
        if len(v) < len(p):
            for s2 in self._expand_term(u, f, v):
                self._mul_terms(s2, t, c, out)
            return
        if len(p) < len(v):
            for t2 in self._expand_term(p, g, q):
                self._mul_terms(s, t2, c, out)
            return
        if v != p:
            return
        for out_w, h, in_w in self._product(f, g):
            k = (u + out_w, h, q + in_w)
            out[k] = self.field(out.get(k, 0) + c)

    def multiply(self, a: AlgebraElement, b: AlgebraElement) -> AlgebraElement:
        out: dict = {}
        for s, cs in a.terms.items():
            for t, ct in b.terms.items():
                self._mul_terms(s, t, self.field(cs * ct), out)
        return AlgebraElement(self, out)

    def power(self, a: AlgebraElement, k: int) -> AlgebraElement:
        out = self.one()
        for _ in range(k):
            out = out * a
        return out

    def inverse_class(self, f: int) -> int:
        r = self._inv.get(f)
        if r is None:
            r = self.nuc.lookup(invert(self.nuc.expr(f)))
            if r is None:
                raise NotInNucleus("nucleus is not closed under inverses")
            self._inv[f] = r
        return r

    def star(self, a: AlgebraElement) -> AlgebraElement:
        """The involution S_u F S_v^-1 -> S_v F^-1 S_u^-1 (coefficients fixed)."""
        return AlgebraElement(self, {(v, self.inverse_class(f), u): c for (u, f, v), c in a.terms.items()})

    # normal forms

    def depth(self, a: AlgebraElement) -> int:
        return max([min(len(u), len(v)) for u, _, v in a.terms] + [0])

    def at_depth(self, a: AlgebraElement, d: int) -> dict:
        """Terms expanded so that min(|u|, |v|) = d for each."""
        out: dict = {}
        todo = list(a.terms.items())
        while todo:
            (u, f, v), c = todo.pop()
            if min(len(u), len(v)) >= d:
                k = (u, f, v)
                out[k] = self.field(out.get(k, 0) + c)
            else:
                todo.extend((t, c) for t in self._expand_term(u, f, v))
        return {k: c for k, c in out.items() if c}

    def reduced(self, a: AlgebraElement, d: int | None = None) -> dict:
        """Canonical coordinates at depth d: blocks reduced modulo the nucleus relations."""
        d = self.depth(a) if d is None else d
        blocks: dict = {}
        for (u, f, v), c in self.at_depth(a, d).items():
            blocks.setdefault((u, v), [self.field(0)] * len(self.nuc.elements))[self.index[f]] += c
        out = {}
        for (u, v), vec in blocks.items():
            vec = [self.field(x) for x in vec]
            for p, w in self._kernel:
                if vec[p]:
                    f = vec[p]
                    vec = [self.field(a - f * b) for a, b in zip(vec, w)]
            for i, x in enumerate(vec):
                if x:
                    out[(u, self.nuc.elements[i], v)] = x
        return out

    def coarsen(self, a: AlgebraElement) -> AlgebraElement:
        """Merge sibling terms S_{uy} g S_{vx}^-1 that together form one nucleus recursion."""
        if not hasattr(self, "_by_table"):
            self._by_table = {frozenset(t.items()): c for c, t in self.tables.items()}
        terms = {k: c for k, c in a.terms.items() if c}
        while True:
            groups: dict = {}
            for (u, f, v), c in terms.items():
                if u and v:
                    groups.setdefault((u[:-1], v[:-1]), []).append((v[-1], u[-1], f, c))
            merged = False
            for (pu, pv), items in groups.items():
                cs = {c for *_, c in items}
                keys = {(x, y) for x, y, _, _ in items}
                if len(cs) != 1 or len(keys) != len(items):
                    continue
                g = self._by_table.get(frozenset(((x, y), f) for x, y, f, _ in items))
                if g is None:
                    continue
                (c,) = cs
                for x, y, f, _ in items:
                    del terms[(pu + (y,), f, pv + (x,))]
                terms[(pu, g, pv)] = self.field(terms.get((pu, g, pv), 0) + c)
                merged = True
            if not merged:
                return AlgebraElement(self, {k: c for k, c in terms.items() if c})

    def is_zero(self, a: AlgebraElement) -> bool:
        return not self.reduced(a)

    def normal_form(self, a: AlgebraElement) -> AlgebraElement:
        return AlgebraElement(self, self.reduced(a))

    def render(self, a: AlgebraElement) -> str:
        terms = self.reduced(a)
        if not terms:
            return "0"
        sep = "" if all(len(str(x)) == 1 for x in self.shift.letters) else ","
        parts = []
        for (u, f, v) in sorted(terms, key=lambda k: (len(k[0]), len(k[2]), self._order(k[0]), self._order(k[2]), self.index[k[1]])):
            c = terms[(u, f, v)]
            body = self.nuc.name(f)
            if u:
                body = f"S_{sep.join(u)} {body}"
            if v:
                body = f"{body} S_{sep.join(v)}^-1"
            coef = "" if c == 1 else ("-" if c == -1 or (self.field.p and c == self.field.p - 1) else f"{c} ")
            parts.append(coef + body)
        return " + ".join(parts).replace("+ -", "- ")

    def _order(self, w):
        return [self.shift.order(x) for x in w]

    def to_map(self, a: AlgebraElement) -> Expr:
        """The bisection of an element whose reduced terms all have coefficient 1
        and pairwise disjoint germs; raises ValueError otherwise."""
        terms = self.reduced(a)
        if any(c != 1 for c in terms.values()):
            raise ValueError("element is not the indicator of a bisection")
        parts = [compose(prefix_word(u), self.nuc.expr(f), invert(prefix_word(v))) for u, f, v in terms]
        for i in range(len(parts)):
            for j in range(i + 1, len(parts)):
                if not self.m.germ_disjoint(parts[i], parts[j]):
                    raise ValueError("terms overlap")
        return self.m.norm(union(*parts))


# finite subgroups


def element_key(alg: Algebra, a: AlgebraElement, depth: int) -> frozenset:
    """Hashable canonical coordinates; depth must be at least the term depth."""
    a = alg.coarsen(a)
    if alg.depth(a) > depth:
        raise ValueError("depth too small for this element")
    return frozenset(alg.reduced(a, depth).items())


def element_order(alg: Algebra, a: AlgebraElement, cap: int = 1000) -> int | None:
    """Least k >= 1 with a^k = 1, or None if there is none up to cap."""
    one = alg.one()
    p = one
    for k in range(1, cap + 1):
        p = alg.coarsen(p * a)
        if p == one:
            return k
    return None


def group_order(alg: Algebra, gens: list, depth: int = 4, cap: int = 10000) -> int | None:
    """Size of the group generated by invertible elements, by breadth-first closure."""
    one = alg.one()
    seen = {element_key(alg, one, depth)}
    frontier = [one]
    while frontier:
        nxt = []
        for x in frontier:
            for g in gens:
                y = alg.coarsen(x * g)
                k = element_key(alg, y, depth)
                if k not in seen:
                    seen.add(k)
                    nxt.append(y)
                    if len(seen) > cap:
                        return None
        frontier = nxt
    return len(seen)


# matrix recursion


@dataclass
class MatrixRecursion:
    rows: list  # output paths
    cols: list  # input paths
    entries: list  # rows x cols of AlgebraElement

    def render(self) -> list[list[str]]:
        return [[repr(e) for e in row] for row in self.entries]

    def __str__(self) -> str:
        cells = self.render()
        width = max([len(c) for row in cells for c in row] + [1])
        return "\n".join("  ".join(c.rjust(width) for c in row) for row in cells)


def _supporting_vertices(alg: Algebra, c: sft.CylinderSet) -> list:
    return [v for v in alg.shift.graph.vertices
            if not sft.intersect(c, alg.shift.vertex_cylinder(v)).is_empty]


def matrix_recursion(alg: Algebra, a: AlgebraElement, k: int = 1) -> MatrixRecursion:
    """Entries S_u^-1 a S_v over length-k paths, in lexicographic order.

    For edge shifts the rows are restricted to paths starting at vertices
    meeting the range of a and the columns to those meeting its domain.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    shift = alg.shift
    paths = sorted(shift.words(k), key=alg._order)
    rows, cols = paths, paths
    if shift.graph is not None:
        try:
            e = alg.to_map(a)
            rv = set(_supporting_vertices(alg, alg.m.range(e)))
            dv = set(_supporting_vertices(alg, alg.m.domain(e)))
            rows = [p for p in paths if shift.graph.src(p[0]) in rv]
            cols = [p for p in paths if shift.graph.src(p[0]) in dv]
        except ValueError:
            pass
    entries = [[alg.S_inv(u) * a * alg.S(v) for v in cols] for u in rows]
    return MatrixRecursion(rows, cols, entries)


# graded dimension


class _Echelon:
    """Incremental row echelon form of sparse vectors over a field."""

    def __init__(self, field: Field):
        self.field = field
        self.rows: dict = {}  # pivot -> vector with entry 1 at the pivot

    def add(self, v: dict) -> bool:
        """Insert v; True when it was independent of the earlier vectors."""
        field = self.field
        v = {k: x for k, x in v.items() if x}
        while v:
            p = min(v, key=repr)
            row = self.rows.get(p)
            if row is None:
                inv = field.inv(v[p])
                self.rows[p] = {k: field(x * inv) for k, x in v.items()}
                return True
            f = v[p]
            for k, x in row.items():
                y = field(v.get(k, 0) - f * x)
                if y:
                    v[k] = y
                else:
                    v.pop(k, None)
        return False


def _eliminate(field: Field, vectors: list[dict]) -> int:
    """Rank of sparse vectors over the field."""
    ech = _Echelon(field)
    return sum(ech.add(v) for v in vectors)


def graded_dimension(alg: Algebra, gens: list, n: int, cap: int = 20000) -> list[int]:
    """dim V_0, ..., dim V_n for V_k the span of products of at most k generators (and 1)."""
    basis = [alg.one()]
    new = [alg.one()]
    dims = [1]
    for _ in range(n):
        cand = [b * g for b in new for g in gens]
        if len(basis) + len(cand) > cap:
            raise StateExplosion("graded dimension exceeded its cap")
        d = max(alg.depth(x) for x in basis + cand)
        ech = _Echelon(alg.field)
        for x in basis:
            ech.add(alg.reduced(x, d))
        new = [x for x in cand if ech.add(alg.reduced(x, d))]
        basis += new
        dims.append(len(basis))
    return dims


# presentation check


@dataclass
class RelationCheck:
    name: str
    kind: str  # CK, recursion, product
    map_ok: bool
    algebra_ok: bool

    @property
    def ok(self) -> bool:
        return self.map_ok and self.algebra_ok


@dataclass
class PresentationReport:
    checks: list

    @property
    def ok(self) -> bool:
        return all(c.ok for c in self.checks)

    def failures(self) -> list:
        return [c for c in self.checks if not c.ok]

    def summary(self) -> dict:
        out: dict = {}
        for c in self.checks:
            t = out.setdefault(c.kind, [0, 0])
            t[0] += 1
            t[1] += c.ok
        return out


def _word_text(shift, w) -> str:
    sep = "" if all(len(str(x)) == 1 for x in shift.letters) else ","
    return sep.join(w) or "()"


def verify_presentation(alg: Algebra) -> PresentationReport:
    """Check the defining relations twice: on maps with `equal` and in the algebra."""
    m, nuc, shift = alg.m, alg.nuc, alg.shift
    checks = []

    def S_map(w):
        return prefix_word(w)

    # Cuntz-Krieger relations
    one = alg.one()
    total_map = []
    total_alg = alg.zero()
    for x in shift.letters:
        lhs_map = compose(invert(S_map((x,))), S_map((x,)))
        rhs_map = identity(shift.follow_cylinder(x))
        lhs_alg = alg.S_inv((x,)) * alg.S((x,))
        rhs_alg = alg.from_map(rhs_map)
        checks.append(RelationCheck(f"S_{x}^-1 S_{x} = I", "CK", m.equal(lhs_map, rhs_map), lhs_alg == rhs_alg))
        total_map.append(compose(S_map((x,)), invert(S_map((x,)))))
        total_alg = total_alg + alg.S((x,)) * alg.S_inv((x,))
    if shift.graph is not None:
        g = shift.graph
        for v in g.vertices:
            edges = g.out_edges(v)
            pm = union(*[compose(S_map((x,)), invert(S_map((x,)))) for x in edges])
            pa = alg.zero()
            for x in edges:
                pa = pa + alg.S((x,)) * alg.S_inv((x,))
            iv = identity(shift.vertex_cylinder(v)) if len(g.vertices) > 1 else IDENTITY
            checks.append(RelationCheck(f"sum S_x S_x^-1 = P_{v}", "CK", m.equal(pm, iv), pa == alg.from_map(iv)))
    checks.append(RelationCheck("sum S_x S_x^-1 = 1", "CK", m.equal(union(*total_map), IDENTITY), total_alg == one))

    # nucleus recursion F = sum S_y F_xy S_x^-1
    for f in nuc.elements:
        parts_map = []
        parts_alg = alg.zero()
        for (x, y), h in sorted(alg.tables[f].items()):
            parts_map.append(compose(S_map((y,)), nuc.expr(h), invert(S_map((x,)))))
            parts_alg = parts_alg + alg.S((y,)) * alg.nucleus_element(h) * alg.S_inv((x,))
        ok_map = m.equal(union(*parts_map), nuc.expr(f)) if parts_map else m.is_empty(nuc.expr(f))
        checks.append(RelationCheck(f"{nuc.name(f)} recursion", "recursion", ok_map, parts_alg == alg.nucleus_element(f)))

    # products of pairs at depth n0
    for p, q in multi_nucleus(nuc, 2):
        table = product_section_table(nuc, p, q, nuc.n0)
        parts_map = []
        parts_alg = alg.zero()
        for (out, inn), h in sorted(table.items()):
            parts_map.append(compose(S_map(out), nuc.expr(h), invert(S_map(inn))))
            parts_alg = parts_alg + alg.S(out) * alg.nucleus_element(h) * alg.S_inv(inn)
        prod_map = compose(nuc.expr(p), nuc.expr(q))
        ok_map = m.equal(union(*parts_map), prod_map) if parts_map else m.is_empty(prod_map)
        prod_alg = alg.nucleus_element(p) * alg.nucleus_element(q)
        checks.append(RelationCheck(f"{nuc.name(p)}*{nuc.name(q)}", "product", ok_map, prod_alg == parts_alg))
    return PresentationReport(checks)
