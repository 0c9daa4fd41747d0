"""Quiver presentations ``A = KQ/I`` and finite dimensional algebras

Composition is written right to left: in the product ``beta*alpha`` the arrow ``alpha``
acts first, so ``beta*alpha`` is a path only when ``source(beta) == target(alpha)``.
A :class:`Path` stores its arrows in written order, ``arrows[0]`` being the arrow that
acts last.
"""
import logging
import re
from dataclasses import dataclass
from dataclasses import field as dataclass_field
from functools import cached_property
from typing import Any, Dict, Iterable, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from qha.errors import (
    NotAdmissible,
    NotAdmissibleUpToCap,
    UnknownArrow,
    ValidationError,
)
from qha.exactlin import (
    RATIONALS,
    FieldSpec,
    Mat,
    hstack,
    image_basis,
    kernel,
    quotient_map,
    solve,
    vstack,
)
from qha.exactlin import rank as matrix_rank
from qha.utils import DEFAULT_DEGREE_CAP, default_max_dim

logger = logging.getLogger(__name__)

IDENTIFIER = re.compile(r"^[A-Za-z][A-Za-z0-9_]*$")


class Arrow(NamedTuple):
    name: str
    source: int
    target: int


@dataclass(frozen=True)
class Path:
    arrows: Tuple[int, ...]
    source: int
    target: int

    @property
    def degree(self) -> int:
        return len(self.arrows)

    @property
    def is_trivial(self) -> bool:
        return not self.arrows

    def sort_key(self) -> Tuple[int, Tuple[int, ...], int, int]:
        return len(self.arrows), self.arrows, self.source, self.target

    def __mul__(self, other: "Path") -> Optional["Path"]:
        """``self * other`` is ``self`` after ``other``; ``None`` when not composable"""
        if self.source != other.target:
            return None
        return Path(self.arrows + other.arrows, other.source, self.target)

    def reversed(self) -> "Path":
        return Path(self.arrows[::-1], self.target, self.source)

    def find(self, word: Tuple[int, ...], start: int = 0) -> int:
        n = len(word)
        for pos in range(start, len(self.arrows) - n + 1):
            if self.arrows[pos : pos + n] == word:
                return pos
        return -1


LinComb = Dict[Path, Any]


def trivial_path(vertex: int) -> Path:
    return Path((), vertex, vertex)


@dataclass(frozen=True)
class Quiver:
    vertex_count: int
    arrows: Tuple[Arrow, ...] = ()

    def __post_init__(self):
        if self.vertex_count <= 0:
            raise ValidationError(f"quiver needs a vertex, got {self.vertex_count = }")
        names = [a.name for a in self.arrows]
        if len(set(names)) != len(names):
            raise ValidationError("arrow names must be unique", {"arrows": names})
        for a in self.arrows:
            if not IDENTIFIER.match(a.name):
                raise ValidationError(f"bad arrow name {a.name!r}")
            if not (0 <= a.source < self.vertex_count and 0 <= a.target < self.vertex_count):
                raise ValidationError(
                    f"arrow {a.name} has an endpoint outside [1, {self.vertex_count}]"
                )

    @cached_property
    def _names(self) -> Dict[str, int]:
        return {a.name: idx for idx, a in enumerate(self.arrows)}

    def index(self, name: str) -> int:
        try:
            return self._names[name]
        except KeyError:
            raise UnknownArrow(f"unknown arrow {name!r}", {"arrow": name})

    def path_of(self, arrows: Sequence[int], vertex: Optional[int] = None) -> Path:
        """Path with the given arrow indices in written order

        :param arrows: Arrow indices, leftmost acts last
        :param vertex: Vertex of the trivial path when ``arrows`` is empty
        :return: The path
        """
        arrows = tuple(arrows)
        if not arrows:
            assert vertex is not None, "a trivial path needs its vertex"
            return trivial_path(vertex)
        for idx in arrows:
            if not 0 <= idx < len(self.arrows):
                raise UnknownArrow(f"unknown arrow index {idx}", {"arrow": idx})
        for left, right in zip(arrows, arrows[1:]):
            if self.arrows[left].source != self.arrows[right].target:
                raise ValidationError(
                    f"{self.arrows[left].name}*{self.arrows[right].name} is not a path"
                )
        return Path(arrows, self.arrows[arrows[-1]].source, self.arrows[arrows[0]].target)

    def path(self, names: Sequence[str]) -> Path:
        return self.path_of([self.index(n) for n in names])

    def label(self, p: Path) -> str:
        if p.is_trivial:
            return f"e{p.source + 1}"
        return "*".join(self.arrows[idx].name for idx in p.arrows)

    def starting_at(self, vertex: int) -> List[int]:
        return [idx for idx, a in enumerate(self.arrows) if a.source == vertex]

    def ending_at(self, vertex: int) -> List[int]:
        return [idx for idx, a in enumerate(self.arrows) if a.target == vertex]

    def opposite(self) -> "Quiver":
        reversed_arrows = tuple(Arrow(a.name, a.target, a.source) for a in self.arrows)
        return Quiver(self.vertex_count, reversed_arrows)


def lincomb_add(x: LinComb, y: LinComb, fs: FieldSpec, scale: Any = 1) -> LinComb:
    out = dict(x)
    for w, c in y.items():
        v = fs.reduce(out.get(w, fs.zero) + scale * c)
        if v == 0:
            out.pop(w, None)
        else:
            out[w] = v
    return out


def lincomb_mul(x: LinComb, y: LinComb, fs: FieldSpec) -> LinComb:
    out: LinComb = {}
    for u, a in x.items():
        for v, b in y.items():
            w = u * v
            if w is not None:
                out = lincomb_add(out, {w: a * b}, fs)
    return out


@dataclass
class AlgebraPresentation:
    field: FieldSpec
    quiver: Quiver
    relations: List[LinComb] = dataclass_field(default_factory=list)
    degree_cap: int = DEFAULT_DEGREE_CAP
    name: str = "A"

    def __post_init__(self):
        if self.degree_cap <= 0:
            raise ValidationError(f"degree cap must be positive, got {self.degree_cap}")
        for idx, rel in enumerate(self.relations, start=1):
            if not rel:
                raise ValidationError(f"relation {idx} is zero")
            ends = {(p.source, p.target) for p in rel}
            if len(ends) != 1:
                raise ValidationError(
                    f"relation {idx} mixes paths with different endpoints", {"relation": idx}
                )
            for p in rel:
                self.quiver.path_of(p.arrows, p.source)
                if p.is_trivial:
                    raise NotAdmissible(
                        f"relation {idx} has a trivial-path component", {"relation": idx}
                    )
                if p.degree < 2:
                    raise NotAdmissible(
                        f"relation {idx} is not in the square of the arrow ideal",
                        {"relation": idx},
                    )

    @property
    def field_label(self) -> str:
        p = self.field.characteristic
        return "Q" if p == 0 else f"F {p}"

    def relation_label(self, rel: LinComb) -> str:
        terms = []
        for p in sorted(rel, key=Path.sort_key, reverse=True):
            c = self.field.format(rel[p])
            coeff = "" if c == "1" else ("-" if c == "-1" else f"{c}*")
            terms.append(f"{coeff}{self.quiver.label(p)}")
        return " + ".join(terms).replace("+ -", "- ")


class Overlap(NamedTuple):
    degree: int
    left: Tuple[int, ...]
    right: Tuple[int, ...]
    shift: int


class RewritingSystem:
    """Rewriting rules ``lead -> tail`` for an ideal of a path algebra

    Words are compared degree-lexicographically, ties broken by arrow declaration order.
    Each rule is monic in its leading word and rules are kept interreduced.
    """

    def __init__(self, quiver: Quiver, fs: FieldSpec):
        self.quiver = quiver
        self.field = fs
        self.rules: Dict[Tuple[int, ...], Tuple[Path, LinComb]] = {}

    def find(self, p: Path) -> Optional[Tuple[int, Tuple[int, ...]]]:
        for lead in self.rules:
            pos = p.find(lead)
            if pos >= 0:
                return pos, lead
        return None

    def is_reducible(self, p: Path) -> bool:
        return self.find(p) is not None

    def reduce(self, x: LinComb) -> LinComb:
        fs = self.field
        todo = {w: c for w, c in x.items() if c != 0}
        result: LinComb = {}
        while todo:
            w = max(todo, key=Path.sort_key)
            c = todo.pop(w)
            hit = self.find(w)
            if hit is None:
                result[w] = c
                continue
            pos, lead = hit
            left, right = w.arrows[:pos], w.arrows[pos + len(lead) :]
            for t, d in self.rules[lead][1].items():
                v = Path(left + t.arrows + right, w.source, w.target)
                todo = lincomb_add(todo, {v: c * d}, fs)
        return result

    def add(self, poly: LinComb) -> bool:
        """Add ``poly`` to the ideal; return whether a new rule appeared"""
        fs = self.field
        poly = self.reduce(poly)
        if not poly:
            return False
        lead = max(poly, key=Path.sort_key)
        inv = fs.inv(poly[lead])
        tail = {w: fs.reduce(-c * inv) for w, c in poly.items() if w != lead}
        displaced = [
            (p, t) for key, (p, t) in self.rules.items() if p.find(lead.arrows) >= 0
        ]
        for p, _ in displaced:
            del self.rules[p.arrows]
        self.rules[lead.arrows] = (lead, tail)
        for key, (p, t) in list(self.rules.items()):
            self.rules[key] = (p, self.reduce(t))
        for p, t in displaced:
            self.add(lincomb_add({p: fs.one}, t, fs, scale=-1))
        return True

    def overlaps(self) -> List[Overlap]:
        out = []
        leads = sorted(self.rules)
        for a in leads:
            for b in leads:
                for k in range(1, min(len(a), len(b))):
                    if a[-k:] == b[:k]:
                        out.append(Overlap(len(a) + len(b) - k, a, b, k))
        return out

    def s_polynomial(self, o: Overlap) -> LinComb:
        fs = self.field
        _, tail_a = self.rules[o.left]
        _, tail_b = self.rules[o.right]
        right = self.quiver.path_of(o.right[o.shift :])
        left = self.quiver.path_of(o.left[: -o.shift])
        first = lincomb_mul(tail_a, {right: fs.one}, fs)
        second = lincomb_mul({left: fs.one}, tail_b, fs)
        return lincomb_add(second, first, fs, scale=-1)

    def irreducible_words(self, max_degree: int, max_words: int) -> List[List[Path]]:
        """Irreducible words grouped by degree, up to ``max_degree`` inclusive"""
        levels = [[trivial_path(v) for v in range(self.quiver.vertex_count)]]
        total = len(levels[0])
        for _ in range(max_degree):
            level = []
            for w in levels[-1]:
                for idx in self.quiver.starting_at(w.target):
                    arrow = self.quiver.arrows[idx]
                    p = Path((idx,) + w.arrows, w.source, arrow.target)
                    if not any(p.arrows[: len(lead)] == lead for lead in self.rules):
                        level.append(p)
            total += len(level)
            if total > max_words:
                raise NotAdmissibleUpToCap(
                    f"more than {max_words} irreducible words", {"max_words": max_words}
                )
            levels.append(level)
            if not level:
                break
        return levels


def complete(
    presentation: AlgebraPresentation, max_words: Optional[int] = None
) -> Tuple[RewritingSystem, List[Path]]:
    """Complete the relations to a confluent rewriting system

    Overlaps are resolved degree by degree. The loop stops at the first degree with no
    irreducible word once every overlap has been resolved.

    :param presentation: Presentation to complete
    :param max_words: Guard on the number of irreducible words
    :return: The rewriting system and the irreducible words (the basis)
    """
    max_words = max_words or default_max_dim()
    system = RewritingSystem(presentation.quiver, presentation.field)
    for rel in presentation.relations:
        system.add(rel)
    done = set()
    empty_degree = None
    degree = 1
    while True:
        while True:
            pending = [
                o
                for o in system.overlaps()
                if o not in done and (empty_degree is not None or o.degree <= degree)
            ]
            if not pending:
                break
            o = min(pending)
            done.add(o)
            if system.add(system.s_polynomial(o)):
                logger.debug(f"overlap of degree {o.degree} gave a new rule")
        levels = system.irreducible_words(degree, max_words)
        if len(levels) <= degree or not levels[degree]:
            empty_degree = len(levels) - 1 if not levels[-1] else degree
            if not [o for o in system.overlaps() if o not in done]:
                break
            continue
        if degree >= presentation.degree_cap:
            raise NotAdmissibleUpToCap(
                f"irreducible words persist at degree cap {presentation.degree_cap}",
                {"degree_cap": presentation.degree_cap},
            )
        degree += 1
    levels = system.irreducible_words(degree, max_words)
    words = [w for level in levels for w in level]
    logger.debug(f"completion stopped at degree {len(levels) - 1} with {len(words)} words")
    return system, sorted(words, key=Path.sort_key)


class FDAlgebra:
    """Finite dimensional algebra given by structure constants

    ``table[i, j, k]`` is the coefficient of ``b_k`` in ``b_i * b_j``.
    """

    def __init__(
        self,
        fs: FieldSpec,
        labels: List[str],
        table: Mat,
        unit: Mat,
        idempotents: Optional[List[Mat]] = None,
        name: str = "",
    ):
        n = len(labels)
        assert table.shape == (n, n, n), f"{table.shape = } for {n} labels"
        assert unit.shape == (n,), f"{unit.shape = }"
        self.field = fs
        self.labels = labels
        self.table = table
        self.unit = unit
        self.idempotents = idempotents if idempotents is not None else [unit]
        self.name = name

    @property
    def dimension(self) -> int:
        return len(self.labels)

    def basis_vector(self, i: int) -> Mat:
        v = self.field.zeros(self.dimension, 1)[:, 0]
        v[i] = self.field.one
        return v

    def left_matrix(self, x: Mat) -> Mat:
        """Matrix of ``y -> x * y``"""
        if self.dimension == 0:
            return self.field.zeros(0, 0)
        return self.field.reduce(np.tensordot(x, self.table, axes=(0, 0))).T

    def right_matrix(self, x: Mat) -> Mat:
        """Matrix of ``y -> y * x``"""
        if self.dimension == 0:
            return self.field.zeros(0, 0)
        return self.field.reduce(np.tensordot(x, self.table, axes=(0, 1))).T

    def multiply(self, x: Mat, y: Mat) -> Mat:
        return self.field.matmul(self.left_matrix(x), y.reshape(-1, 1))[:, 0]

    @cached_property
    def left_matrices(self) -> List[Mat]:
        return [self.left_matrix(self.basis_vector(i)) for i in range(self.dimension)]

    @cached_property
    def right_matrices(self) -> List[Mat]:
        return [self.right_matrix(self.basis_vector(i)) for i in range(self.dimension)]

    def is_associative(self) -> bool:
        fs = self.field
        for i in range(self.dimension):
            for j in range(self.dimension):
                prod = self.multiply(self.basis_vector(i), self.basis_vector(j))
                lhs = self.left_matrix(prod)
                rhs = fs.matmul(self.left_matrices[i], self.left_matrices[j])
                if np.any(lhs != rhs):
                    return False
        return True

    def is_unital(self) -> bool:
        n = self.dimension
        eye = self.field.identity(n)
        return bool(
            np.all(self.left_matrix(self.unit) == eye)
            and np.all(self.right_matrix(self.unit) == eye)
        )

    def ideal(self, generators: Mat) -> Mat:
        """Two-sided ideal generated by the columns of ``generators`` (basis as columns)"""
        fs = self.field
        n = self.dimension
        current = image_basis(generators, fs)
        while True:
            blocks = [current]
            blocks += [fs.matmul(m, current) for m in self.left_matrices]
            blocks += [fs.matmul(m, current) for m in self.right_matrices]
            grown = image_basis(hstack(blocks, n, fs), fs)
            if grown.shape[1] == current.shape[1]:
                return current
            current = grown

    def quotient(self, ideal: Mat, name: str = "") -> Tuple["FDAlgebra", Mat]:
        """Quotient by a two-sided ideal

        :param ideal: Columns spanning the ideal
        :return: Quotient algebra and the projection matrix onto its basis
        """
        fs = self.field
        projection, section = quotient_map(ideal, fs)
        q = projection.shape[0]
        table = np.empty((q, q, q), dtype=object)
        table.fill(fs.zero)
        for i in range(q):
            for j in range(q):
                prod = self.multiply(section[:, i], section[:, j])
                table[i, j, :] = fs.matmul(projection, prod.reshape(-1, 1))[:, 0]
        survivors = [int(np.nonzero(section[:, i])[0][0]) for i in range(q)]
        labels = [self.labels[s] for s in survivors]
        unit = fs.matmul(projection, self.unit.reshape(-1, 1))[:, 0]
        idempotents = [fs.matmul(projection, e.reshape(-1, 1))[:, 0] for e in self.idempotents]
        idempotents = [e for e in idempotents if np.any(e != 0)]
        return FDAlgebra(fs, labels, table, unit, idempotents, name), projection

    def subalgebra(self, basis: Mat, unit: Mat, labels: List[str], name: str = "") -> "FDAlgebra":
        """Subalgebra spanned by the columns of ``basis`` with its own unit ``unit``"""
        fs = self.field
        k = basis.shape[1]
        table = np.empty((k, k, k), dtype=object)
        table.fill(fs.zero)
        for i in range(k):
            for j in range(k):
                prod = self.multiply(basis[:, i], basis[:, j])
                coords = solve(basis, prod.reshape(-1, 1), fs)
                if coords is None:
                    raise ValidationError("subspace is not closed under multiplication")
                table[i, j, :] = coords[:, 0]
        local_unit = solve(basis, unit.reshape(-1, 1), fs)
        if local_unit is None:
            raise ValidationError("unit does not lie in the subspace")
        return FDAlgebra(fs, labels, table, local_unit[:, 0], None, name)

    def opposite(self) -> "FDAlgebra":
        return FDAlgebra(
            self.field,
            list(self.labels),
            self.table.transpose(1, 0, 2).copy(),
            self.unit,
            list(self.idempotents),
            f"{self.name}^op",
        )

    def radical(self) -> Mat:
        """Jacobson radical as the kernel of the trace form ``(x, y) -> tr L(x y)``

        Valid in characteristic zero and in characteristic larger than the dimension.
        """
        fs = self.field
        n = self.dimension
        if fs.characteristic and fs.characteristic <= n:
            raise ValidationError(
                f"trace form radical needs characteristic 0 or > {n}",
                {"characteristic": fs.characteristic},
            )
        traces = [np.trace(m) for m in self.left_matrices]
        form = fs.zeros(n, n)
        for i in range(n):
            for j in range(n):
                prod = self.multiply(self.basis_vector(i), self.basis_vector(j))
                form[i, j] = fs.reduce(sum((c * t for c, t in zip(prod, traces)), fs.zero))
        return kernel(form, fs)

    def center_dimension(self) -> int:
        fs = self.field
        n = self.dimension
        blocks = [fs.reduce(self.right_matrices[j] - self.left_matrices[j]) for j in range(n)]
        return n - matrix_rank(vstack(blocks, n, fs), fs)


class PathAlgebra(FDAlgebra):
    """``KQ/I`` with basis the irreducible words of its rewriting system"""

    def __init__(
        self,
        presentation: AlgebraPresentation,
        system: RewritingSystem,
        words: List[Path],
        table: Mat,
        mirror: Optional["PathAlgebra"] = None,
    ):
        fs = presentation.field
        quiver = presentation.quiver if mirror is None else presentation.quiver.opposite()
        self.presentation = presentation
        self.quiver = quiver
        self.system = system
        self.words = words
        self.word_index = {w: i for i, w in enumerate(words)}
        self._mirror = mirror
        unit = fs.zeros(len(words), 1)[:, 0]
        idempotents = []
        for v in range(quiver.vertex_count):
            e = fs.zeros(len(words), 1)[:, 0]
            e[self.word_index[trivial_path(v)]] = fs.one
            unit[self.word_index[trivial_path(v)]] = fs.one
            idempotents.append(e)
        name = presentation.name if mirror is None else f"{presentation.name}^op"
        super().__init__(fs, [quiver.label(w) for w in words], table, unit, idempotents, name)

    @property
    def vertex_count(self) -> int:
        return self.quiver.vertex_count

    @property
    def relations(self) -> List[LinComb]:
        if self._mirror is None:
            return self.presentation.relations
        return [{p.reversed(): c for p, c in rel.items()} for rel in self.presentation.relations]

    def normal_form(self, x: LinComb) -> LinComb:
        for p in x:
            self.quiver.path_of(p.arrows, p.source)
        if self._mirror is not None:
            reduced = self.system.reduce({p.reversed(): c for p, c in x.items()})
            return {p.reversed(): c for p, c in reduced.items()}
        return self.system.reduce(x)

    def element(self, x: LinComb) -> Mat:
        """Coordinates of ``x`` in the word basis"""
        v = self.field.zeros(self.dimension, 1)[:, 0]
        for p, c in self.normal_form(x).items():
            v[self.word_index[p]] = self.field.reduce(v[self.word_index[p]] + c)
        return v

    def lincomb(self, v: Mat) -> LinComb:
        return {self.words[i]: c for i, c in enumerate(v) if c != 0}

    def vertex_word(self, vertex: int) -> int:
        return self.word_index[trivial_path(vertex)]

    def arrow_word(self, arrow: int) -> int:
        return self.word_index[self.quiver.path_of([arrow])]

    def words_from(self, vertex: int) -> List[int]:
        return [i for i, w in enumerate(self.words) if w.source == vertex]

    def words_between(self, source: int, target: int) -> List[int]:
        return [i for i, w in enumerate(self.words) if w.source == source and w.target == target]

    def opposite(self) -> "PathAlgebra":
        if self._mirror is not None:
            return self._mirror
        return self._opposite

    @cached_property
    def _opposite(self) -> "PathAlgebra":
        words = [w.reversed() for w in self.words]
        return PathAlgebra(
            self.presentation, self.system, words, self.table.transpose(1, 0, 2).copy(), self
        )

    def is_opposite_of(self, other: "PathAlgebra") -> bool:
        return self._mirror is other or other._mirror is self


def build_algebra(
    presentation: AlgebraPresentation, max_words: Optional[int] = None
) -> PathAlgebra:
    """Complete the relations and tabulate the structure constants of ``KQ/I``

    :param presentation: Quiver, relations and degree cap
    :param max_words: Guard on the basis size, defaults to the configured max_dim
    :return: The algebra with basis the irreducible words
    """
    fs = presentation.field
    system, words = complete(presentation, max_words)
    index = {w: i for i, w in enumerate(words)}
    n = len(words)
    table = np.empty((n, n, n), dtype=object)
    table.fill(fs.zero)
    for i, u in enumerate(words):
        for j, v in enumerate(words):
            w = u * v
            if w is None:
                continue
            for p, c in system.reduce({w: fs.one}).items():
                table[i, j, index[p]] = c
    algebra = PathAlgebra(presentation, system, words, table)
    _check_radical_nilpotent(algebra)
    logger.info(f"built {presentation.name} of dimension {n}")
    return algebra


def _check_radical_nilpotent(algebra: PathAlgebra):
    fs = algebra.field
    n = algebra.dimension
    arrows = [
        algebra.left_matrices[algebra.arrow_word(a)] for a in range(len(algebra.quiver.arrows))
    ]
    current = fs.identity(n)[:, [i for i, w in enumerate(algebra.words) if not w.is_trivial]]
    while current.shape[1] > 0:
        grown = image_basis(hstack([fs.matmul(m, current) for m in arrows], n, fs), fs)
        if grown.shape[1] >= current.shape[1]:
            raise NotAdmissible("the arrow ideal is not nilpotent in the built algebra")
        current = grown


def normal_form(algebra: PathAlgebra, x: LinComb) -> LinComb:
    return algebra.normal_form(x)


def opposite(algebra: FDAlgebra) -> FDAlgebra:
    return algebra.opposite()


def make_presentation(
    vertex_count: int,
    arrows: Iterable[Tuple[str, int, int]],
    relations: Iterable[Sequence[Tuple[Any, Sequence[str]]]] = (),
    fs: FieldSpec = RATIONALS,
    degree_cap: int = DEFAULT_DEGREE_CAP,
    name: str = "A",
) -> AlgebraPresentation:
    """Presentation from python literals with one-based vertices

    :param arrows: ``(name, source, target)`` triples
    :param relations: Each relation is a list of ``(coefficient, [names...])`` terms
    """
    quiver = Quiver(vertex_count, tuple(Arrow(n, s - 1, t - 1) for n, s, t in arrows))
    rels = []
    for rel in relations:
        lc: LinComb = {}
        for coeff, names in rel:
            lc = lincomb_add(lc, {quiver.path(names): fs(coeff)}, fs)
        rels.append(lc)
    return AlgebraPresentation(fs, quiver, rels, degree_cap, name)
