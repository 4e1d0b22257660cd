import pytest

from selfsim import gallery, sft
from selfsim.localmap import compose, identity, invert
from selfsim.sysfile import ParseError, parse_expression, parse_text, same_system, serialize

ROTATION = """\
# rotation
[shift]
letters: 0 1
forbidden: 11

[generator R0]
0 -> 1 I[0]

[generator R1]
0 -> 0 R0^-1
1 -> 0 R1^-1

[generator Rinv]
inverse-of R1
"""


def test_parse_rotation():
    s = parse_text(ROTATION, "rot")
    assert s.generator_names == ["R0", "R1", "Rinv"]
    assert s.machine.equal(s.gen("Rinv"), invert(s.gen("R1")))
    assert same_system(gallery.golden_rotation(), parse_text(ROTATION.replace(
        "[generator Rinv]\ninverse-of R1\n", ""), "x"))


def test_serialize_is_deterministic():
    s = gallery.penrose()
    assert serialize(s) == serialize(gallery.penrose())
    assert same_system(parse_text(serialize(s)), s)


@pytest.mark.parametrize("text,line", [
    ("[graph]\nvertices: a\nbad line\n", 3),
    ("[shift]\nletters: 0 1\n[generator F]\n0 -> 2 1\n", 4),
    ("[shift]\nletters: 0 1\n[generator F]\n0 -> 0 G\n", 4),
    ("[shift]\nletters: 0 1\n[oops]\n", 3),
    ("[shift]\nletters: 0 1\n[generator F]\n0 -> 0 1\n[generator F]\n", 5),
])
def test_parse_errors_report_lines(text, line):
    with pytest.raises(ParseError) as info:
        parse_text(text)
    assert info.value.line == line


def test_missing_shift():
    with pytest.raises(ParseError):
        parse_text("[generator F]\n")


def test_when_clause_restricts_identity():
    text = "[shift]\nletters: 0 1\nforbidden: 11\n[generator E]\n0 -> 0 1 when 0\n1 -> 1 1\n"
    s = parse_text(text)
    assert s.machine.equal(s.gen("E"), identity(sft.complement(sft.cylinder(s.shift, "01"))))


def test_parse_expression():
    s = gallery.penrose()
    m = s.machine
    e = parse_expression(s, "C*D11")
    assert m.equal(e, compose(s.gen("C"), s.gen("D11")))
    f = parse_expression(s, "A0 + A1 + A2")
    assert m.equal(f, gallery.penrose_reflections(s)[0])
    assert m.equal(parse_expression(s, "B^-1"), invert(s.gen("B")))
    with pytest.raises(ValueError):
        parse_expression(s, "Q")
