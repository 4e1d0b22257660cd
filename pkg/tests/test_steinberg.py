import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from selfsim import cayley, gallery
from selfsim.localmap import compose, invert, prefix_word
from selfsim.nucleus import compute_nucleus
from selfsim.sft import Shift, VertexGraph
from selfsim.steinberg import (
    Algebra, Field, element_order, graded_dimension, group_order, matrix_recursion, parse_field,
    verify_presentation,
)
from selfsim.sysfile import make_system


def algebra(s, field=None):
    return Algebra(compute_nucleus(s.machine, s.generators()), field)


ROT = gallery.golden_rotation()
RA = algebra(ROT)
R1 = RA.nucleus_element("R1")
ROT_GENS = [RA.S("0"), RA.S("1"), RA.S_inv("0"), RA.S_inv("1"), R1, R1.star()]


@pytest.fixture(scope="module")
def pen():
    s = gallery.penrose()
    return s, algebra(s)


def test_range_projection_of_r1():
    assert R1 * R1.star() == RA.S("0") * RA.S_inv("0")
    assert R1.star() * R1 != RA.one()


def test_worm_identities(pen):
    s, P = pen
    g = {n: P.from_map(s.gen(n)) for n in s.generators()}
    w1 = g["D11"] * g["A0"] * g["D00"] * g["A1"] * g["D11"]
    w2 = g["D11"] * g["C"] * g["A2"] * g["C"] * g["D11"]
    w3 = g["A0"] * g["B"] * g["D00"] * g["B"] * g["A1"]
    assert w1 == w2 == w3
    maps = [compose(*(s.gen(n) for n in word)) for word in (
        ["D11", "A0", "D00", "A1", "D11"], ["D11", "C", "A2", "C", "D11"], ["A0", "B", "D00", "B", "A1"])]
    assert s.machine.equal(maps[0], maps[1]) and s.machine.equal(maps[1], maps[2])
    assert s.machine.equal(P.to_map(w1), maps[0])
    mr = matrix_recursion(P, w1, 1)
    assert mr.rows == [("1_0",), ("1_1",), ("2",)]
    e = lambda *names: P.from_map(compose(*(s.gen(n) for n in names)))
    expected = [[P.zero(), e("D01", "C", "D11"), P.zero()],
                [e("D11", "C", "D10"), e("D11", "C", "D11"), P.zero()],
                [P.zero(), P.zero(), P.zero()]]
    for row, exp in zip(mr.entries, expected):
        assert all(a == b for a, b in zip(row, exp))
    assert e("D01", "C", "D10").is_zero()


def test_adding_machine_recursion_squared():
    s = gallery.adding_machine()
    A = algebra(s)
    a = A.nucleus_element("a")
    mr = matrix_recursion(A, a, 2)
    want = {(0, 3): a, (1, 2): A.one(), (2, 0): A.one(), (3, 1): A.one()}
    for i, j in itertools.product(range(4), repeat=2):
        assert mr.entries[i][j] == want.get((i, j), A.zero())
    assert str(mr).splitlines()[0].split() == ["0", "0", "0", "a"]


def test_identity_recursion_is_identity():
    s = gallery.adding_machine()
    A = algebra(s)
    mr = matrix_recursion(A, A.one(), 1)
    assert [[str(x) for x in row] for row in mr.entries] == [["1", "0"], ["0", "1"]]


def test_penrose_recursions(pen):
    s, P = pen
    b = matrix_recursion(P, P.nucleus_element("B"), 1)
    assert [[str(x) for x in row] for row in b.entries] == [["D00", "D01"], ["D10", "D11"]]
    c = matrix_recursion(P, P.nucleus_element("C"), 1)
    assert [[str(x) for x in row] for row in c.entries] == [["B", "0", "0"], ["0", "0", "I1"], ["0", "I1", "0"]]


def test_edge_rotation_recursion():
    s = gallery.golden_rotation("edge")
    E = algebra(s)
    mr = matrix_recursion(E, E.from_map(s.gen("A")), 1)
    assert mr.rows == [("1_0",)] and mr.cols == [("0_0",), ("0_1",)]
    assert [str(x) for x in mr.entries[0]] == ["I0", "0"]


def test_one_loop_dimension():
    g = VertexGraph.build(["v"], [("x", "v", "v")])
    s = make_system("loop", Shift.edge_shift(g), {})
    L = Algebra(compute_nucleus(s.machine, {}))
    dims = graded_dimension(L, [L.S("x"), L.S_inv("x")], 6)
    # oracle: S is unitary, so a word in S and S^-1 reduces to S^k with k the letter balance
    brute = []
    for n in range(7):
        ks = {sum(w) for m in range(n + 1) for w in itertools.product((1, -1), repeat=m)}
        brute.append(len(ks))
    assert dims == brute == [2 * n + 1 for n in range(7)]


def test_graded_dimension_bound():
    dims = graded_dimension(RA, ROT_GENS, 6)
    assert dims[:5] == [1, 7, 31, 95, 232]
    m, gens = ROT.machine, ROT.generators()
    nuc = RA.nuc
    pts = cayley.representatives(ROT.shift, 3)
    for n in range(1, 7):
        r = 3 * n
        gamma = max(cayley.growth(m, gens, x, r, nuc)[-1] for x in pts)
        delta = cayley.complexity(m, gens, r, nuc=nuc)
        assert dims[n] <= gamma * delta


def test_verify_presentation_all_systems():
    for s in (ROT, gallery.golden_rotation("edge"), gallery.adding_machine(), gallery.penrose(),
              gallery.intermediate_growth()):
        report = verify_presentation(algebra(s))
        assert report.ok, report.failures()
        assert {"CK", "recursion", "product"} <= set(report.summary())


def test_finite_field():
    F = Field(2)
    assert F(3) == 1 and F.inv(1) == 1
    assert parse_field("Q") == Field(0) and parse_field("GF(5)") == Field(5)
    A = algebra(gallery.adding_machine(), F)
    a = A.nucleus_element("a")
    assert (a + a).is_zero()


def test_rendering():
    assert str(RA.S("01")) == "S_01 I0"
    assert str(R1 - R1) == "0"


def test_coarsen_keeps_value(pen):
    s, P = pen
    a = P.from_map(s.gen("B"))
    d = P.from_map(s.gen("D00"))
    x = a * d * a
    y = P.coarsen(x)
    assert y == x
    assert P.depth(y) <= P.depth(x)


def test_group_orders_small():
    s = gallery.adding_machine()
    A = algebra(s)
    a = A.nucleus_element("a")
    assert element_order(A, a, cap=20) is None
    flip = A.from_map(compose(prefix_word("1"), invert(prefix_word("0")))) + \
        A.from_map(compose(prefix_word("0"), invert(prefix_word("1"))))
    assert element_order(A, flip) == 2
    assert group_order(A, [flip]) == 2


# random elements of the rotation algebra

BASIC = ROT_GENS + [RA.one()]
elements = st.lists(
    st.tuples(st.integers(-2, 2), st.lists(st.sampled_from(range(len(BASIC))), min_size=1, max_size=3)),
    min_size=1, max_size=3,
).map(lambda terms: sum(
    (_word(ix).scale(c) for c, ix in terms), RA.zero()))


def _word(ix):
    out = RA.one()
    for i in ix:
        out = out * BASIC[i]
    return out


@settings(max_examples=500, deadline=None)
@given(elements, elements, elements)
def test_associative(a, b, c):
    assert (a * b) * c == a * (b * c)


@settings(max_examples=100, deadline=None)
@given(elements, elements)
def test_star_is_an_anti_involution(a, b):
    assert (a * b).star() == b.star() * a.star()
    assert a.star().star() == a
    assert (a + b).star() == a.star() + b.star()


@settings(max_examples=100, deadline=None)
@given(elements, elements)
def test_grading(a, b):
    degs = {x + y for x in a.degrees() for y in b.degrees()}
    assert RA.normal_form(a * b).degrees() <= degs


MAPS = [prefix_word("0"), prefix_word("1"), invert(prefix_word("0")), invert(prefix_word("1")),
        ROT.gen("R1"), invert(ROT.gen("R1"))]


@settings(max_examples=100, deadline=None)
@given(st.lists(st.sampled_from(range(6)), min_size=1, max_size=4))
def test_products_agree_with_maps(ix):
    a = _word(ix)
    e = compose(*(MAPS[i] for i in ix))
    if ROT.machine.is_empty(e):
        assert a.is_zero()
    else:
        assert ROT.machine.equal(RA.to_map(a), e)
        if RA.normal_form(a).degrees() == {0}:
            assert RA.from_map(e) == a
