from math import lcm

import pytest

from selfsim import cayley, gallery, sft
from selfsim.homology import HomologyComputer, sigma0
from selfsim.localmap import compose, identity, union
from selfsim.nucleus import compute_nucleus
from selfsim.steinberg import Algebra, element_order, group_order
from selfsim.sysfile import parse_text, same_system, serialize


@pytest.fixture(scope="module")
def pen():
    s = gallery.penrose()
    return s, Algebra(compute_nucleus(s.machine, s.generators()))


def test_reflections_are_involutions(pen):
    s, P = pen
    a, d = gallery.penrose_reflections(s)
    m = s.machine
    assert m.equal(compose(a, a), identity()) and m.equal(compose(d, d), identity())
    assert element_order(P, P.from_map(a)) == 2
    assert element_order(P, P.from_map(d)) == 2


def test_rotation_order_140(pen):
    s, P = pen
    a, d = gallery.penrose_reflections(s)
    assert element_order(P, P.from_map(a) * P.from_map(d)) == 140
    # independent route: cycle lengths of the map on sample points
    ad = compose(a, d)
    lengths = set()
    for x in cayley.representatives(s.shift, 2, tail=1):
        y, k = s.machine.evaluate(ad, x), 1
        while y != x:
            y, k = s.machine.evaluate(ad, y), k + 1
        lengths.add(k)
    assert lcm(*lengths) == 140


def test_reflection_outside_rotations(pen):
    s, _ = pen
    a, d = gallery.penrose_reflections(s)
    m = s.machine
    ad = compose(a, d)
    pts = cayley.representatives(s.shift, 2, tail=1)
    images = {x: m.evaluate(a, x) for x in pts}
    cur = {x: x for x in pts}
    for _ in range(140):
        assert any(cur[x] != images[x] for x in pts)
        cur = {x: m.evaluate(ad, y) for x, y in cur.items()}


def test_dihedral_group_order(pen):
    s, P = pen
    a, d = gallery.penrose_reflections(s)
    assert group_order(P, [P.from_map(a), P.from_map(d)]) == 280


def test_intermediate_domains_and_involutions():
    s = gallery.intermediate_growth()
    m = s.machine
    cyl = {"full": sft.cylinder(s.shift, ""), "0": sft.cylinder(s.shift, "0"), "1": sft.cylinder(s.shift, "1")}
    want, _ = s.expected["domains"]
    for n in gallery.INTERMEDIATE_GENERATORS:
        e = s.gen(n)
        dom = m.domain(e)
        assert sft.equal(dom, cyl[want[n]])
        assert sft.equal(m.range(e), dom)
        assert m.equal(compose(e, e), identity(dom))


def test_intermediate_nucleus_terminates():
    s = gallery.intermediate_growth()
    nuc = compute_nucleus(s.machine, s.generators())
    assert "b0" in nuc.names() and nuc.n0 >= 1


def test_encodings_agree():
    rot, edge = gallery.golden_rotation(), gallery.golden_rotation("edge")
    pairs = [(rot.gen("R0"), edge.gen("A")), (rot.gen("R1"), union(edge.gen("B"), edge.gen("C")))]
    for x in cayley.representatives(rot.shift, 4):
        for f, g in pairs:
            y = rot.machine.evaluate(f, x)
            ye = edge.machine.evaluate(g, edge_point(x))
            assert (y is None) == (ye is None)
            if y is not None:
                assert ye == edge_point(y)


def edge_point(x):
    """The block-code image of an eventually periodic point."""
    p = x.period
    n = len(x.pre) + len(p)
    full = x.pre + p + p + p[:1]
    return sft.epword(
        tuple(f"{full[i]}_{full[i + 1]}" for i in range(len(x.pre))),
        tuple(f"{full[i]}_{full[i + 1]}" for i in range(len(x.pre), n)),
    )


def test_expected_blocks():
    for name, ctor in gallery.GALLERY.items():
        s = ctor()
        exp = {k: v for k, (v, _) in s.expected.items()}
        if "sigma0" in exp:
            assert sigma0(s.shift) == exp["sigma0"]
        if not {"nucleus_size", "n0", "H0", "H1", "H0_mod2"} & set(exp):
            continue
        nuc = compute_nucleus(s.machine, s.generators())
        if "nucleus_size" in exp:
            assert len(nuc) == exp["nucleus_size"]
        if "n0" in exp:
            assert nuc.n0 == exp["n0"]
        hc = HomologyComputer(nuc)
        for key, (n, m) in {"H0": (0, 0), "H1": (1, 0), "H0_mod2": (0, 2)}.items():
            if key in exp:
                assert str(hc.homology(n, m)) == exp[key], (name, key)


def test_provenance_tags():
    for ctor in gallery.GALLERY.values():
        for value, source in ctor().expected.values():
            assert source in ("published", "derived")


def test_shipped_files_round_trip():
    for name, ctor in gallery.GALLERY.items():
        text = gallery.system_file(name)
        s = parse_text(text, name)
        assert same_system(s, ctor())
        assert same_system(parse_text(serialize(s), name), s)


def test_unknown_name():
    with pytest.raises(KeyError):
        gallery.get("nope")
    with pytest.raises(KeyError):
        gallery.system_file("nope")
