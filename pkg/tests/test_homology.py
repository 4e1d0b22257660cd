import math
from fractions import Fraction

import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from selfsim import gallery, sft
from selfsim import intlin as il
from selfsim.homology import (
    HomologyComputer, NotACycle, Subquotient, chain_data, colimit, dimension_group, group_string,
    parse_coefficients, sigma0,
)
from selfsim.localmap import compose, invert, prefix_word, restrict, state, union
from selfsim.nucleus import compute_nucleus
from selfsim.sft import Shift, VertexGraph
from selfsim.sysfile import make_system


def computer(s):
    return HomologyComputer(compute_nucleus(s.machine, s.generators()))


@pytest.fixture(scope="module")
def rot():
    s = gallery.golden_rotation()
    return s, computer(s)


@pytest.fixture(scope="module")
def pen():
    s = gallery.penrose()
    return s, computer(s)


@pytest.fixture(scope="module")
def add():
    s = gallery.adding_machine()
    return s, computer(s)


def test_rotation_h0(rot):
    s, hc = rot
    h = hc.homology(0)
    assert str(h) == "Z^2"
    assert h.sigma == [[1, 1], [1, 0]]
    assert h.descriptor.automorphism == [[1, 1], [1, 0]]


def test_rotation_h1(rot):
    s, hc = rot
    h = hc.homology(1)
    assert str(h) == "Z"
    assert h.classes["R0"]["free"] == [0]
    assert abs(h.classes["R1"]["free"][0]) == 1
    assert h.basis == ["R1"]
    assert h.descriptor.automorphism == [[-1]]


def test_adding_machine_h0_and_measure(add):
    s, hc = add
    assert str(hc.homology(0)) == "Z[1/2]"
    dg = dimension_group(hc.nuc, hc)
    for n in range(5):
        for v in s.shift.words(n):
            assert dg.measure(s.shift, sft.cylinder(s.shift, v)) == Fraction(1, 2**n)


def test_adding_machine_h1(add):
    s, hc = add
    assert str(hc.homology(1)) == "Z"
    assert str(hc.homology(0, 2)) == "0"


def test_penrose_h0(pen):
    s, hc = pen
    h = hc.homology(0)
    assert str(h) == "Z^2"
    assert h.sigma == [[1, 1], [1, 2]]
    assert str(hc.homology(0, 2)) == "(Z/2)^2"


def test_penrose_h1(pen):
    s, hc = pen
    h = hc.homology(1)
    assert str(h) == "(Z/2)^3"
    for n in ("A0", "A1", "D01", "D10", "D11"):
        assert not any(h.classes[n]["torsion"])
    vecs = [h.classes[n]["torsion"] for n in ("B", "C", "D00")]
    # a basis of (Z/2)^3 iff the mod-2 determinant is odd
    assert il.det(vecs) % 2 == 1
    assert sorted(h.basis) == ["B", "C", "D00"]


def test_penrose_classes_of_bisections(pen):
    s, hc = pen
    assert hc.cycle_class(s.gen("A0"))["torsion"] == [0, 0, 0]
    d = gallery.penrose_reflections(s)[1]
    assert hc.cycle_class(d) == hc.cycle_class(s.gen("D00"))
    cd = hc.cycle_class(compose(s.gen("C"), s.gen("D11")))
    assert any(cd["torsion"])


def test_wheel_restriction_is_trivial(pen):
    s, hc = pen
    cells = {("1_0", "0_0", "0_1"), ("1_1", "2", "1_1"), ("1_1", "2", "2"), ("2", "2", "1_1"), ("2", "2", "2")}
    U = sft.canonical(s.shift, 3, cells)
    e = restrict(compose(s.gen("C"), s.gen("D11")), U)
    assert not s.machine.is_empty(e)
    assert hc.cycle_class(e)["torsion"] == [0, 0, 0]


def test_class_is_additive(rot, pen):
    s, hc = rot
    r = union(state("R0"), state("R1"))
    one = hc.cycle_class(r)["free"][0]
    assert hc.cycle_class(compose(r, r))["free"] == [2 * one]
    assert hc.cycle_class(invert(r))["free"] == [-one]
    p, pc = pen
    b, c = p.gen("B"), p.gen("C")
    assert p.machine.germ_disjoint(b, c)
    tb, tc = pc.cycle_class(b)["torsion"], pc.cycle_class(c)["torsion"]
    assert pc.cycle_class(union(b, c))["torsion"] == [(x + y) % 2 for x, y in zip(tb, tc)]


def test_non_cycle_rejected(rot):
    s, hc = rot
    with pytest.raises(NotACycle):
        hc.cycle_class(prefix_word("0"))
    assert hc.cycle_class(state("R0"))["free"] == [0]


def test_chain_identities():
    for s in (gallery.golden_rotation(), gallery.adding_machine(), gallery.penrose()):
        d = chain_data(compute_nucleus(s.machine, s.generators()))
        n1, n2 = len(d.basis1), len(d.basis2)
        assert il.matmul(d.sigma0, d.B1) == il.matmul(d.B1, d.sigma1)
        assert all(x == 0 for row in il.matmul(d.B1, d.B2, n1) for x in row)
        assert il.matmul(d.sigma1, d.B2, n1) == il.matmul(d.B2, d.sigma2, n2)


def test_colimit_of_torsion_permutation():
    n = 3
    G = Subquotient.build(il.eye(n), [[2 * int(i == j) for i in range(n)] for j in range(n)], n)
    perm = [[int(i == (j + 1) % n) for j in range(n)] for i in range(n)]
    desc = colimit(G, perm)
    assert desc.kind == "TorsionOnly"
    assert desc.eventual_torsion == [2, 2, 2]


def test_colimit_of_nilpotent_is_zero():
    G = Subquotient.build(il.eye(2), [], 2)
    desc = colimit(G, [[0, 1], [0, 0]])
    assert str(desc) == "0"


def test_one_loop_shift():
    g = VertexGraph.build(["v"], [("x", "v", "v")])
    s = make_system("loop", Shift.edge_shift(g), {})
    hc = HomologyComputer(compute_nucleus(s.machine, {}))
    assert str(hc.homology(0)) == "Z"
    dg = dimension_group(hc.nuc, hc)
    assert dg.unit == [1]


def test_rotation_measures(rot):
    s, hc = rot
    dg = dimension_group(hc.nuc, hc)
    phi = (1 + sympy.sqrt(5)) / 2
    assert sympy.simplify(dg.eigenvalue - phi) == 0
    assert sympy.simplify(dg.vertex_measure["0"] - 1 / phi) == 0
    assert sympy.simplify(dg.vertex_measure["1"] - 1 / phi**2) == 0
    # oracle: the Parry measure of a word ending in 1 is phi^-(length + 1)
    c = sft.cylinder(s.shift, "01")
    assert float(dg.measure(s.shift, c)) == pytest.approx(1 / float(phi) ** 3)


def test_sigma0_markov_and_edge():
    assert sigma0(gallery.golden_rotation().shift) == [[1, 1], [1, 0]]
    assert sigma0(gallery.golden_rotation("edge").shift) == [[1, 1], [1, 0]]


def test_group_string():
    assert group_string(0, []) == "0"
    assert group_string(2, [2, 2, 4]) == "Z^2 + (Z/2)^2 + Z/4"


def test_parse_coefficients():
    assert parse_coefficients("Z") == 0
    assert parse_coefficients("Z/6") == 6
    for bad in ("Z/1", "Q", "Z/x"):
        with pytest.raises(ValueError):
            parse_coefficients(bad)


matrices = st.integers(1, 4).flatmap(lambda r: st.integers(1, 4).flatmap(
    lambda c: st.lists(st.lists(st.integers(-6, 6), min_size=c, max_size=c), min_size=r, max_size=r)))


def gcd_of_minors(a, k):
    from itertools import combinations
    r, c = len(a), len(a[0])
    g = 0
    for rows in combinations(range(r), k):
        for cols in combinations(range(c), k):
            g = math.gcd(g, il.det([[a[i][j] for j in cols] for i in rows]))
    return g


@settings(max_examples=150, deadline=None)
@given(matrices)
def test_smith_form(a):
    s = il.smith(a)
    assert il.is_unimodular(s.U) and il.is_unimodular(s.V)
    assert il.matmul(il.matmul(s.U, a), s.V) == s.D
    assert all(y % x == 0 for x, y in zip(s.diag, s.diag[1:]))
    # oracle: d1 * ... * dk is the gcd of the k by k minors
    prod = 1
    for k, d in enumerate(s.diag, start=1):
        prod *= d
        assert prod == gcd_of_minors(a, k)
    assert s.rank == sympy.Matrix(a).rank()
