"""Line oriented file formats for algebras, modules and maps of projectives

Every format ignores blank lines and everything after ``#``.
"""
import logging
import os
import re
from fractions import Fraction
from typing import Iterator, List, Optional, Sequence, Tuple

from qha.errors import AlgebraMismatch, ParseError, QhaError, ValidationError
from qha.exactlin import RATIONALS, FieldSpec, Mat, prime_field
from qha.localisation import ProjMap
from qha.modcat import Representation, projective, simple
from qha.presentations import (
    AlgebraPresentation,
    Arrow,
    LinComb,
    PathAlgebra,
    Quiver,
    lincomb_add,
    trivial_path,
)
from qha.utils import DEFAULT_DEGREE_CAP

logger = logging.getLogger(__name__)

NUMBER = re.compile(r"^\d+(/\d+)?$")
VERTEX_WORD = re.compile(r"^e(\d+)$")
MODULE_SPEC = re.compile(r"^([PS])(\d+)$")


def _lines(text: str) -> Iterator[Tuple[int, List[str]]]:
    for lineno, line in enumerate(text.splitlines(), start=1):
        tokens = line.split("#", 1)[0].split()
        if tokens:
            yield lineno, tokens


def _int(token: str, lineno: int) -> int:
    try:
        return int(token)
    except ValueError:
        raise ParseError(f"line {lineno}: expected an integer, got {token!r}", {"line": lineno})


def _located(e: QhaError, lineno: int) -> QhaError:
    e.details.setdefault("line", lineno)
    return e


def _check_presentation(presentation: AlgebraPresentation):
    n = presentation.quiver.vertex_count
    for idx, a in enumerate(presentation.quiver.arrows):
        assert 0 <= a.source < n and 0 <= a.target < n, f"{idx = }: {a = }"
    for idx, rel in enumerate(presentation.relations, start=1):
        assert len(rel) > 0, f"{idx = }: {rel = }"
        assert all(p.degree >= 2 for p in rel), f"{idx = }: {rel = }"


def _check_summands(maps: List[ProjMap]):
    for idx, sigma in enumerate(maps):
        for (t, s) in sigma.entries:
            assert t < len(sigma.target) and s < len(sigma.source), f"{idx = }: {(t, s) = }"


def _term(text: str, quiver: Quiver, fs: FieldSpec, vertex: Optional[int], lineno: int):
    pieces = [p.strip() for p in text.split("*")]
    if any(not p for p in pieces):
        raise ParseError(f"line {lineno}: malformed term {text!r}", {"line": lineno})
    coeff = fs.one
    if NUMBER.match(pieces[0]):
        coeff = fs(Fraction(pieces[0]))
        pieces = pieces[1:]
    arrows, vertices = [], set()
    for name in pieces:
        m = VERTEX_WORD.match(name)
        if m and name not in {a.name for a in quiver.arrows}:
            vertices.add(int(m.group(1)) - 1)
        else:
            arrows.append(quiver.index(name))
    if arrows:
        path = quiver.path_of(arrows)
        if vertices - {path.source, path.target}:
            raise ValidationError(f"line {lineno}: {text!r} is not a path", {"line": lineno})
        return coeff, path
    if len(vertices) > 1:
        raise ValidationError(f"line {lineno}: {text!r} is not a path", {"line": lineno})
    if vertices:
        v = vertices.pop()
    elif vertex is not None:
        v = vertex
    else:
        raise ParseError(f"line {lineno}: a scalar term needs a path", {"line": lineno})
    if not 0 <= v < quiver.vertex_count:
        raise ValidationError(f"line {lineno}: no vertex {v + 1}", {"line": lineno})
    return coeff, trivial_path(v)


def parse_lincomb(
    text: str, quiver: Quiver, fs: FieldSpec, vertex: Optional[int] = None, lineno: int = 0
) -> LinComb:
    """Parse ``[c*]name*name ... (+|-) ...`` into a linear combination of paths

    :param vertex: Vertex meant by a bare scalar term, if any
    """
    text = text.strip()
    if not text:
        raise ParseError(f"line {lineno}: empty linear combination", {"line": lineno})
    if text[0] not in "+-":
        text = "+" + text
    parts = re.split(r"\s*([+-])\s*", text)[1:]
    out: LinComb = {}
    for sign, term in zip(parts[::2], parts[1::2]):
        coeff, path = _term(term, quiver, fs, vertex, lineno)
        out = lincomb_add(out, {path: coeff}, fs, -1 if sign == "-" else 1)
    return out


def parse_algebra(text: str, name: str = "A") -> AlgebraPresentation:
    """Parse an algebra file

    :param text: Contents with ``field``, ``vertices``, ``arrow``, ``relation`` lines and
        optional ``name`` and ``degree-cap`` lines
    :param name: Name used when the file has no ``name`` line
    :return: The presentation, not yet built
    """
    fs, vertex_count, degree_cap = RATIONALS, None, DEFAULT_DEGREE_CAP
    arrows: List[Arrow] = []
    relations: List[Tuple[int, str]] = []
    for lineno, tokens in _lines(text):
        key, args = tokens[0], tokens[1:]
        if key == "field":
            if args == ["Q"]:
                fs = RATIONALS
            elif len(args) == 2 and args[0] == "F":
                try:
                    fs = prime_field(_int(args[1], lineno))
                except ValidationError as e:
                    raise _located(e, lineno)
            else:
                raise ParseError(
                    f"line {lineno}: expected 'field Q' or 'field F <p>'", {"line": lineno}
                )
        elif key == "vertices" and len(args) == 1:
            vertex_count = _int(args[0], lineno)
        elif key == "arrow" and len(args) == 3:
            arrows.append(Arrow(args[0], _int(args[1], lineno) - 1, _int(args[2], lineno) - 1))
        elif key == "relation" and args:
            relations.append((lineno, " ".join(args)))
        elif key == "degree-cap" and len(args) == 1:
            degree_cap = _int(args[0], lineno)
        elif key == "name" and len(args) == 1:
            name = args[0]
        else:
            raise ParseError(f"line {lineno}: cannot read {' '.join(tokens)!r}", {"line": lineno})
    if vertex_count is None:
        raise ParseError("missing 'vertices' line")
    quiver = Quiver(vertex_count, tuple(arrows))
    rels = []
    for lineno, body in relations:
        try:
            rel = parse_lincomb(body, quiver, fs, lineno=lineno)
        except ValidationError as e:
            raise _located(e, lineno)
        if not rel:
            raise ValidationError(f"line {lineno}: relation is zero", {"line": lineno})
        rels.append(rel)
    presentation = AlgebraPresentation(fs, quiver, rels, degree_cap, name)
    _check_presentation(presentation)
    logger.debug(
        f"parsed {name}: {vertex_count} vertices, {len(arrows)} arrows, {len(rels)} relations"
    )
    return presentation


def load_algebra(filepath: str) -> AlgebraPresentation:
    """Load file which follows the algebra format

    :param filepath: Filepath where the algebra is stored
    :return: The presentation, named after the file unless it has a ``name`` line
    """
    with open(filepath) as f:
        text = f.read()
    return parse_algebra(text, os.path.splitext(os.path.basename(filepath))[0])


def format_algebra(presentation: AlgebraPresentation) -> str:
    lines = [f"name {presentation.name}"]
    lines.append(f"field {presentation.field_label}")
    lines.append(f"vertices {presentation.quiver.vertex_count}")
    for a in presentation.quiver.arrows:
        lines.append(f"arrow {a.name} {a.source + 1} {a.target + 1}")
    for rel in presentation.relations:
        lines.append(f"relation {presentation.relation_label(rel)}")
    if presentation.degree_cap != DEFAULT_DEGREE_CAP:
        lines.append(f"degree-cap {presentation.degree_cap}")
    return "\n".join(lines) + "\n"


def parse_module(text: str, algebra: PathAlgebra) -> Representation:
    """Parse a module file over ``algebra``

    Arrows with no matrix rows act by zero.
    """
    fs = algebra.field
    quiver = algebra.quiver
    name, dims = None, None
    rows: List[List[List[str]]] = [[] for _ in quiver.arrows]
    current = None
    for lineno, tokens in _lines(text):
        key = tokens[0]
        if key == "module":
            if len(tokens) != 4 or tokens[2] != "over":
                raise ParseError(
                    f"line {lineno}: expected 'module <name> over <algebra>'", {"line": lineno}
                )
            if tokens[3] != algebra.name:
                raise AlgebraMismatch(
                    f"line {lineno}: module is over {tokens[3]}, not {algebra.name}",
                    {"line": lineno, "expected": algebra.name, "got": tokens[3]},
                )
            name = tokens[1]
        elif key == "dims":
            dims = [_int(t, lineno) for t in tokens[1:]]
            if any(d < 0 for d in dims):
                raise ValidationError(f"line {lineno}: negative dimension", {"line": lineno})
        elif key == "arrow" and len(tokens) == 2:
            try:
                current = quiver.index(tokens[1])
            except ValidationError as e:
                raise _located(e, lineno)
            if rows[current]:
                raise ParseError(f"line {lineno}: arrow {tokens[1]} given twice", {"line": lineno})
        elif current is not None and all(NUMBER.match(t.lstrip("-")) for t in tokens):
            rows[current].append(tokens)
        else:
            raise ParseError(f"line {lineno}: cannot read {' '.join(tokens)!r}", {"line": lineno})
    if name is None or dims is None:
        raise ParseError("a module file needs 'module' and 'dims' lines")
    if len(dims) != quiver.vertex_count:
        raise ValidationError(f"expected {quiver.vertex_count} dimensions, got {len(dims)}")
    matrices: List[Mat] = []
    for a, r in zip(quiver.arrows, rows):
        shape = (dims[a.target], dims[a.source])
        if not r:
            matrices.append(fs.zeros(*shape))
            continue
        if len({len(x) for x in r}) != 1:
            raise ValidationError(f"arrow {a.name}: ragged matrix", {"arrow": a.name})
        matrices.append(fs.matrix(r, shape[1]))
    return Representation(algebra, dims, matrices, name)


def load_module(filepath: str, algebra: PathAlgebra) -> Representation:
    with open(filepath) as f:
        return parse_module(f.read(), algebra)


def _summands(text: str, lineno: int) -> Tuple[int, ...]:
    text = text.strip()
    if text == "0":
        return ()
    out = []
    for piece in text.split("+"):
        m = MODULE_SPEC.match(piece.strip())
        if m is None or m.group(1) != "P":
            raise ParseError(
                f"line {lineno}: expected P<i>, got {piece.strip()!r}", {"line": lineno}
            )
        out.append(int(m.group(2)) - 1)
    return tuple(out)


def parse_sigma(text: str, algebra: PathAlgebra) -> List[ProjMap]:
    """Parse ``map`` headers with their ``entry <t> <s> <lincomb>`` lines"""
    fs = algebra.field
    maps: List[ProjMap] = []
    for lineno, tokens in _lines(text):
        key = tokens[0]
        if key == "map":
            m = re.match(r"^map\s+(\S+)\s*:\s*(.+?)\s*->\s*(.+)$", " ".join(tokens))
            if m is None:
                raise ParseError(
                    f"line {lineno}: expected 'map <name> : P.. -> P..'", {"line": lineno}
                )
            source, target = _summands(m.group(2), lineno), _summands(m.group(3), lineno)
            maps.append(ProjMap(source, target, {}, m.group(1)))
        elif key == "entry" and len(tokens) >= 4:
            if not maps:
                raise ParseError(f"line {lineno}: entry before any map", {"line": lineno})
            sigma = maps[-1]
            t, s = _int(tokens[1], lineno) - 1, _int(tokens[2], lineno) - 1
            if not (0 <= t < len(sigma.target) and 0 <= s < len(sigma.source)):
                raise ValidationError(
                    f"line {lineno}: entry ({t + 1}, {s + 1}) out of range", {"line": lineno}
                )
            vertex = sigma.target[t] if sigma.target[t] == sigma.source[s] else None
            try:
                lc = parse_lincomb(" ".join(tokens[3:]), algebra.quiver, fs, vertex, lineno)
            except ValidationError as e:
                raise _located(e, lineno)
            merged = lincomb_add(sigma.entries.get((t, s), {}), lc, fs)
            if merged:
                sigma.entries[(t, s)] = merged
            else:
                sigma.entries.pop((t, s), None)
        else:
            raise ParseError(f"line {lineno}: cannot read {' '.join(tokens)!r}", {"line": lineno})
    if not maps:
        raise ParseError("no 'map' line")
    _check_summands(maps)
    for sigma in maps:
        sigma.validate(algebra)
    return maps


def load_sigma(filepath: str, algebra: PathAlgebra) -> List[ProjMap]:
    with open(filepath) as f:
        return parse_sigma(f.read(), algebra)


def module_from_spec(
    algebra: PathAlgebra, spec: str, dirpath: Optional[str] = None
) -> Representation:
    """``P<i>``, ``S<i>`` or the path of a module file

    :param dirpath: Directory that relative file paths are resolved against
    """
    m = MODULE_SPEC.match(spec.strip())
    if m is not None:
        vertex = int(m.group(2)) - 1
        if not 0 <= vertex < algebra.vertex_count:
            raise ValidationError(f"{algebra.name} has no vertex {vertex + 1}", {"module": spec})
        return projective(algebra, vertex) if m.group(1) == "P" else simple(algebra, vertex)
    filepath = spec if dirpath is None or os.path.isabs(spec) else os.path.join(dirpath, spec)
    if not os.path.exists(filepath):
        raise ParseError(f"no such module {spec!r}", {"module": spec})
    return load_module(filepath, algebra)


def modules_from_specs(algebra: PathAlgebra, specs: Sequence[str]) -> List[Representation]:
    return [module_from_spec(algebra, s) for s in specs if s.strip()]
