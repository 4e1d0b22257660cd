from hypothesis import given, settings
from hypothesis import strategies as st

from selfsim import sft
from selfsim.sft import Shift, VertexGraph

GOLDEN = VertexGraph.build(["0", "1"], [("0_0", "0", "0"), ("0_1", "0", "1"), ("1_0", "1", "0")])


def golden_markov():
    return Shift.markov(["0", "1"], ["11"])


def test_allowed_paths_golden_length_two():
    words = {"".join(p.edges) for p in sft.allowed_paths(GOLDEN, 2)}
    assert words == {"0_00_0", "0_00_1", "0_11_0", "1_00_0", "1_00_1"}


def test_allowed_paths_length_zero_is_one_per_vertex():
    paths = sft.allowed_paths(GOLDEN, 0)
    assert [p.vertex for p in paths] == ["0", "1"]
    assert all(len(p) == 0 for p in paths)


def test_allowed_paths_one_vertex_two_loops():
    g = VertexGraph.build(["v"], [("a", "v", "v"), ("b", "v", "v")])
    assert {p.edges for p in sft.allowed_paths(g, 2)} == {
        ("a", "a"), ("a", "b"), ("b", "a"), ("b", "b")}


def test_paths_compose():
    for p in sft.allowed_paths(GOLDEN, 4):
        for e, f in zip(p.edges, p.edges[1:]):
            assert GOLDEN.dst(e) == GOLDEN.src(f)


def test_primitive_examples():
    assert sft.is_primitive(GOLDEN) == (True, 2)
    loop = VertexGraph.build(["v"], [("a", "v", "v")])
    assert sft.is_primitive(loop) == (True, 1)
    split = VertexGraph.build(["a", "b"], [("x", "a", "a"), ("y", "b", "b")])
    assert sft.is_primitive(split) == (False, None)


def test_eventual_image_examples():
    g = VertexGraph.build(["s", "c"], [("in", "s", "c"), ("loop", "c", "c")])
    img = sft.eventual_image(g)
    assert img.vertices == ("c",) and img.edge_names == ("loop",)
    assert sft.eventual_image(GOLDEN) == GOLDEN


def test_block_code_golden_markov():
    g, words = sft.block_code(golden_markov(), 2)
    assert len(g.vertices) == 2
    assert set(g.edge_names) == {"0_0", "0_1", "1_0"}
    assert words["0_1"] == ("0", "1")


def test_block_code_identity_and_full_shift():
    g, _ = sft.block_code(GOLDEN, 1)
    assert g == GOLDEN
    two = VertexGraph.build(["v"], [("a", "v", "v"), ("b", "v", "v")])
    g2, _ = sft.block_code(two, 2)
    assert len(g2.vertices) == 2 and len(g2.edges) == 4


def test_cylinder_examples():
    s = golden_markov()
    c = sft.cylinder(s, "0")
    assert sft.normalize_to_depth(c, 2) == {("0", "0"), ("0", "1")}
    assert sft.intersect(c, sft.complement(c)).is_empty
    ten = sft.cylinder(s, "10")
    assert sft.contains_word(ten, sft.epword((), ("1", "0")))
    assert not sft.contains_word(ten, sft.epword((), ("0",)))


def test_parse_epword():
    s = golden_markov()
    assert sft.parse_epword("01(0)", s) == sft.epword(("0", "1"), ("0",))
    pen = Shift.edge_shift(VertexGraph.build(
        ["0", "1"], [("0_0", "0", "0"), ("0_1", "0", "1"), ("1_0", "1", "0"), ("1_1", "1", "1"),
                     ("2", "1", "1")]))
    assert sft.parse_epword("0_1(1_1,2)", pen) == sft.parse_epword("0_1(1_12)", pen)
    assert str(sft.epword(("0", "1"), ("0",))) == "01(0)"


# random graphs


@st.composite
def graphs(draw):
    n = draw(st.integers(1, 3))
    vs = [str(i) for i in range(n)]
    pairs = draw(st.lists(st.tuples(st.sampled_from(vs), st.sampled_from(vs)), min_size=1, max_size=6))
    return VertexGraph.build(vs, [(f"e{i}", a, b) for i, (a, b) in enumerate(pairs)])


def count_words(g: VertexGraph, n: int) -> int:
    return len(sft.allowed_paths(g, n))


@settings(max_examples=60, deadline=None)
@given(graphs(), st.integers(1, 3))
def test_block_code_preserves_word_counts(g, k):
    h, _ = sft.block_code(g, k)
    for n in range(k, k + 3):
        assert count_words(h, n - k + 1) == count_words(g, n)


@settings(max_examples=60, deadline=None)
@given(graphs())
def test_eventual_image_idempotent(g):
    img = sft.eventual_image(g)
    assert sft.eventual_image(img) == img


@settings(max_examples=60, deadline=None)
@given(graphs())
def test_primitive_implies_no_pruning(g):
    ok, m = sft.is_primitive(g)
    if ok:
        assert m <= len(g.vertices) ** 2 + 1
        assert sft.eventual_image(g) == sft.reachable_part(g) == g


@st.composite
def cylinder_sets(draw):
    s = golden_markov()
    d = draw(st.integers(0, 3))
    words = s.words(d)
    cells = draw(st.sets(st.sampled_from(words))) if words else set()
    return sft.canonical(s, d, cells)


SHARED = golden_markov()


@st.composite
def shared_cylinders(draw):
    d = draw(st.integers(0, 3))
    cells = draw(st.sets(st.sampled_from(SHARED.words(d))))
    return sft.canonical(SHARED, d, cells)


@settings(max_examples=100, deadline=None)
@given(shared_cylinders(), shared_cylinders(), shared_cylinders())
def test_boolean_laws(a, b, c):
    eq = sft.equal
    assert eq(sft.union(a, b), sft.union(b, a))
    assert eq(sft.intersect(a, sft.union(b, c)), sft.union(sft.intersect(a, b), sft.intersect(a, c)))
    assert eq(sft.complement(sft.union(a, b)), sft.intersect(sft.complement(a), sft.complement(b)))
    assert eq(sft.complement(sft.complement(a)), a)
    assert sft.union(a, sft.complement(a)).is_full


@settings(max_examples=60, deadline=None)
@given(cylinder_sets(), st.integers(0, 2))
def test_normalize_preserves_value(c, extra):
    d = c.depth + extra
    again = sft.canonical(c.shift, d, sft.normalize_to_depth(c, d))
    assert sft.equal(again, c) and again == c
