import numpy as np
import pytest

from qha.data.loaders import (
    format_algebra,
    load_algebra,
    load_module,
    load_sigma,
    module_from_spec,
    parse_algebra,
    parse_lincomb,
    parse_module,
    parse_sigma,
)
from qha.errors import AlgebraMismatch, ParseError, UnknownArrow, ValidationError
from qha.exactlin import RATIONALS
from qha.modcat import find_isomorphism, projective, simple
from qha.presentations import build_algebra


def write(tmpdir, name, text):
    tmpfile = tmpdir.join(name)
    tmpfile.write(text)
    return tmpfile.strpath


def test_load_algebra(corpus_file):
    presentation = load_algebra(corpus_file("a3_rad2.alg"))
    assert presentation.name == "a3_rad2"
    algebra = build_algebra(presentation)
    assert algebra.dimension == 5
    assert build_algebra(load_algebra(corpus_file("cyclic4.alg"))).dimension == 14


def test_name_defaults_to_file_stem(tmpdir):
    filepath = write(tmpdir, "loop.alg", "field F 3\nvertices 1\narrow x 1 1\nrelation x*x\n")
    presentation = load_algebra(filepath)
    assert presentation.name == "loop"
    assert presentation.field.characteristic == 3
    assert build_algebra(presentation).dimension == 2


def test_relation_with_coefficients(commutative_square):
    text = format_algebra(commutative_square)
    assert "relation" in text
    rebuilt = parse_algebra(text)
    assert rebuilt.name == "square"
    assert build_algebra(rebuilt).dimension == 9


@pytest.mark.parametrize(
    "text, line",
    [
        ("field Q\nvertices 2\narrow a 1\n", 3),
        ("field R\nvertices 1\n", 1),
        ("vertices x\n", 1),
        ("# comment\n\nfield F 4\nvertices 1\n", 3),
        ("vertices 2\narrow a 1 2\nrelation a*\n", 3),
    ],
)
def test_parse_errors_carry_line(text, line):
    with pytest.raises((ParseError, ValidationError)) as info:
        parse_algebra(text)
    assert info.value.details["line"] == line


def test_missing_vertices():
    with pytest.raises(ParseError):
        parse_algebra("field Q\n")


def test_unknown_arrow_in_relation():
    with pytest.raises(UnknownArrow) as info:
        parse_algebra("vertices 3\narrow a 1 2\narrow b 2 3\nrelation b*c\n")
    assert info.value.details["line"] == 4


def test_parse_lincomb(a3_rad2):
    quiver = a3_rad2.quiver
    lc = parse_lincomb("2*alpha - 1/2*alpha + e1", quiver, RATIONALS, lineno=1)
    assert len(lc) == 2
    assert lc[quiver.path(["alpha"])] == RATIONALS("3/2")
    assert parse_lincomb("alpha - alpha", quiver, RATIONALS) == {}
    with pytest.raises(ParseError):
        parse_lincomb("3", quiver, RATIONALS)
    assert len(parse_lincomb("3", quiver, RATIONALS, vertex=1)) == 1


def test_parse_module(two_cycle, corpus_file):
    m = load_module(corpus_file("two_cycle_m.mod"), two_cycle)
    assert m.name == "M"
    assert m.dims == (1, 1)
    text = "module N over two_cycle\ndims 1 1\narrow beta\n1\n"
    n = parse_module(text, two_cycle)
    assert find_isomorphism(n, m) is None
    with pytest.raises(AlgebraMismatch):
        parse_module("module N over other\ndims 1 1\n", two_cycle)
    with pytest.raises(ValidationError):
        parse_module("module N over two_cycle\ndims 1\n", two_cycle)
    text = "module N over two_cycle\ndims 1 1\narrow alpha\n1\narrow alpha\n1\n"
    with pytest.raises(ParseError):
        parse_module(text, two_cycle)


def test_parse_module_checks_relations(a3_rad2):
    text = "module bad over a3_rad2\ndims 1 1 1\narrow alpha\n1\narrow beta\n1\n"
    with pytest.raises(ValidationError):
        parse_module(text, a3_rad2)


def test_parse_sigma(a3_rad2, two_cycle, corpus_file):
    [kill] = load_sigma(corpus_file("kill_p2.map"), a3_rad2)
    assert kill.source == () and kill.target == (1,)
    assert kill.name == "kill_p2"
    [alpha] = load_sigma(corpus_file("alpha_star.map"), two_cycle)
    assert alpha.source == (1,) and alpha.target == (0,)
    assert list(alpha.entries) == [(0, 0)]


def test_parse_sigma_scalar_entry(a3_rad2):
    [sigma] = parse_sigma("map id : P1 -> P1\nentry 1 1 2\n", a3_rad2)
    [(path, coeff)] = sigma.entries[(0, 0)].items()
    assert path.degree == 0 and coeff == 2


def test_parse_sigma_errors(a3_rad2):
    with pytest.raises(ParseError):
        parse_sigma("entry 1 1 alpha\n", a3_rad2)
    with pytest.raises(ParseError):
        parse_sigma("map s : S1 -> P1\n", a3_rad2)
    with pytest.raises(ValidationError) as info:
        parse_sigma("map s : P2 -> P1\nentry 2 1 alpha\n", a3_rad2)
    assert info.value.details["line"] == 2
    with pytest.raises(ValidationError):
        parse_sigma("map s : P1 -> P2\nentry 1 1 alpha\n", a3_rad2)
    with pytest.raises(ParseError):
        parse_sigma("# nothing\n", a3_rad2)


def test_module_from_spec(a3_rad2, corpus_dir):
    assert module_from_spec(a3_rad2, "P1").dims == projective(a3_rad2, 0).dims
    assert module_from_spec(a3_rad2, "S3").dims == simple(a3_rad2, 2).dims
    from_file = module_from_spec(a3_rad2, "a3_rad2_s1.mod", corpus_dir)
    assert find_isomorphism(from_file, simple(a3_rad2, 0)) is not None
    with pytest.raises(ValidationError):
        module_from_spec(a3_rad2, "P4")
    with pytest.raises(ParseError):
        module_from_spec(a3_rad2, "missing.mod", corpus_dir)


def test_format_keeps_structure(two_cycle):
    rebuilt = build_algebra(parse_algebra(format_algebra(two_cycle.presentation)))
    assert rebuilt.labels == two_cycle.labels
    assert np.array_equal(rebuilt.table, two_cycle.table)
