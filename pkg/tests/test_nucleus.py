import itertools

import networkx as nx
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from selfsim import gallery, sft
from selfsim.localmap import compose, identity, invert, is_self_similar_closed, state, union
from selfsim.nucleus import (
    NotContracting, compute_nucleus, expand, moore_graph, multi_nucleus, product_section_table,
    section_closure,
)
from selfsim.sft import Shift, VertexGraph
from selfsim.sysfile import make_system


@pytest.fixture(scope="module")
def rot():
    s = gallery.golden_rotation()
    return s, compute_nucleus(s.machine, s.generators())


@pytest.fixture(scope="module")
def pen():
    s = gallery.penrose()
    return s, compute_nucleus(s.machine, s.generators())


def contains(m, exprs, e):
    return any(m.equal(e, f) for f in exprs)


def test_section_closure_rotation():
    s = gallery.golden_rotation()
    m = s.machine
    cl = [m.class_reps[c] for c in section_closure(m, [union(state("R0"), state("R1"))])]
    I0 = identity(sft.cylinder(s.shift, "0"))
    for e in [identity(), I0, state("R0"), state("R1"), invert(state("R0")), invert(state("R1"))]:
        assert contains(m, cl, e)


def test_section_closure_identity_gives_vertex_identities():
    s = gallery.penrose()
    m = s.machine
    cl = [m.class_reps[c] for c in section_closure(m, [identity()])]
    for v in s.shift.graph.vertices:
        assert contains(m, cl, identity(s.shift.vertex_cylinder(v)))


def test_section_closure_adding_machine():
    s = gallery.adding_machine()
    m = s.machine
    cl = [m.class_reps[c] for c in section_closure(m, [state("a")])]
    assert len(cl) == 2
    assert contains(m, cl, state("a")) and contains(m, cl, identity())


def test_rotation_nucleus(rot):
    s, nuc = rot
    assert len(nuc) == 6
    assert nuc.n0 == 2
    assert sorted(nuc.names()) == sorted(["1", "I0", "R0", "R0^-1", "R1", "R1^-1"])


def test_identity_system_nucleus():
    g = VertexGraph.build(["0", "1"], [("0_0", "0", "0"), ("0_1", "0", "1"), ("1_0", "1", "0")])
    s = make_system("plain", Shift.edge_shift(g), {})
    nuc = compute_nucleus(s.machine, {})
    assert nuc.n0 == 1
    m = s.machine
    exprs = [nuc.expr(c) for c in nuc.elements]
    assert len(exprs) == 2
    for v in g.vertices:
        assert contains(m, exprs, identity(s.shift.vertex_cylinder(v)))


def test_penrose_components(pen):
    s, nuc = pen
    g = moore_graph(nuc)
    sccs = [frozenset(c) for c in nx.strongly_connected_components(g) if len(c) > 1]
    assert frozenset({"D00", "D11", "A2", "B", "C"}) in sccs
    assert frozenset({"I0", "I1"}) in sccs
    wheel = [c for c in sccs if c not in ({"D00", "D11", "A2", "B", "C"}, {"I0", "I1"})]
    assert sorted(len(c) for c in wheel) == [2, 4, 4, 4]
    assert sum(len(c) for c in wheel) == 14
    assert all(set(n.replace("*", " ").split()) <= {"B", "C", "D00", "D11"} for c in wheel for n in c)
    # regression: size of the minimal nucleus
    assert len(nuc) == 64


def test_nucleus_is_closed_and_minimal(rot, pen):
    for s, nuc in (rot, pen):
        m = s.machine
        exprs = [nuc.expr(c) for c in nuc.elements]
        assert is_self_similar_closed(m, exprs)[0]
        hit = {t for c in nuc.elements for t in nuc.section_table(c).values()}
        assert hit == set(nuc.elements)


def test_pair_products_land_in_nucleus(rot):
    s, nuc = rot
    m = s.machine
    for p, q in itertools.product(nuc.elements, repeat=2):
        e = compose(nuc.expr(p), nuc.expr(q))
        if m.is_empty(e):
            continue
        table = product_section_table(nuc, p, q)
        assert all(c in nuc for c in table.values())


def test_multi_nucleus_rotation_vertices():
    s = gallery.golden_rotation("edge")
    nuc = compute_nucleus(s.machine, s.generators())
    names = sorted(nuc.name(c) for c in multi_nucleus(nuc, 0))
    assert names == ["I0", "I1"]
    assert multi_nucleus(nuc, 1) == list(nuc.elements)


def test_multi_nucleus_pairs_adding_machine():
    s = gallery.adding_machine()
    m = s.machine
    nuc = compute_nucleus(m, s.generators())
    got = {(nuc.name(p), nuc.name(q)) for p, q in multi_nucleus(nuc, 2)}
    # oracle: iterate depth-one tuple sections on maps directly
    named = {"1": identity(), "a": state("a"), "a^-1": invert(state("a"))}

    def name_of(e):
        return next(n for n, f in named.items() if m.equal(e, f))

    letters = s.shift.letters
    cur = {(p, q) for p in named for q in named if not m.is_empty(compose(named[p], named[q]))}
    while True:
        nxt = set()
        for p, q in cur:
            for x0, x1, x2 in itertools.product(letters, repeat=3):
                p1 = m.section(named[p], x1, x0)
                q1 = m.section(named[q], x2, x1)
                if not m.is_empty(compose(p1, q1)):
                    nxt.add((name_of(p1), name_of(q1)))
        if nxt == cur:
            break
        cur = nxt
    assert got == cur


def test_product_table_examples(rot):
    s, nuc = rot
    r1 = nuc.by_name("R1")
    table = product_section_table(nuc, r1, r1)
    assert table == {(("0", "0"), ("1", "0")): r1}
    one = nuc.by_name("1")
    for c in nuc.elements:
        flipped = {((y,), (x,)): t for (x, y), t in nuc.section_table(c).items()}
        assert product_section_table(nuc, one, c, 1) == flipped


def test_product_table_reconstructs_product(pen):
    s, nuc = pen
    m = s.machine
    from selfsim.localmap import prefix_word
    p, q = nuc.by_name("D11"), nuc.by_name("C")
    table = product_section_table(nuc, p, q)
    parts = [compose(prefix_word(u), nuc.expr(c), invert(prefix_word(v))) for (u, v), c in table.items()]
    assert m.equal(union(*parts), compose(nuc.expr(p), nuc.expr(q)))


def test_not_contracting_reports_trace():
    s = gallery.penrose()
    with pytest.raises(NotContracting) as info:
        compute_nucleus(s.machine, s.generators(), max_elements=10)
    assert info.value.trace


def test_nucleus_independent_of_generator_order():
    base = gallery.penrose()
    m = base.machine
    names = list(base.generators())

    def word(name):
        if name.startswith("I"):
            return identity(base.shift.vertex_cylinder(name[1:]))
        return compose(*(base.gen(g) for g in name.split("*")))

    first = compute_nucleus(m, base.generators())
    ref = [word(n) for n in first.names()]
    for perm in (names[::-1], names[3:] + names[:3]):
        s = gallery.penrose()
        nuc = compute_nucleus(s.machine, {n: s.gen(n) for n in perm})
        got = [word(n) for n in nuc.names()]
        assert len(got) == len(ref)
        assert all(contains(m, ref, e) for e in got)


ROT = gallery.golden_rotation()
ROT_NUC = compute_nucleus(ROT.machine, ROT.generators())
ROT_ATOMS = [state("R0"), state("R1"), invert(state("R0")), invert(state("R1"))]


@settings(max_examples=40, deadline=None)
@given(st.lists(st.integers(0, 3), min_size=1, max_size=4))
def test_words_contract_into_nucleus(ix):
    e = compose(*(ROT_ATOMS[i] for i in ix))
    if ROT.machine.is_empty(e):
        return
    d, table = expand(ROT_NUC, e)
    assert d <= ROT_NUC.n0 * len(ix)
    assert all(c in ROT_NUC for c in table.values())
