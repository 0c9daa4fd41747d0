"""Finite dimensional left modules over a built path algebra

A module is a quiver representation: one vector space per vertex and one matrix per arrow
of shape ``dims[target] x dims[source]``. Vectors of the whole module ("total" vectors)
are the concatenation of the vertex spaces in vertex order. Right modules are left modules
over :meth:`PathAlgebra.opposite`.
"""
import logging
from dataclasses import dataclass
from functools import cached_property
from typing import List, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np

from qha.errors import AlgebraMismatch, ValidationError
from qha.exactlin import (
    FieldSpec,
    Mat,
    block_diag,
    hstack,
    image_basis,
    inverse,
    is_zero,
    kernel,
    kron,
    quotient_map,
    rank,
    solve,
    vstack,
)
from qha.presentations import FDAlgebra, Path, PathAlgebra
from qha.utils import DEFAULT_RESOLUTION_CAP

logger = logging.getLogger(__name__)


class Representation:
    """Left module over ``algebra`` given by vertex dimensions and arrow matrices

    :param algebra: Built path algebra
    :param dims: Dimension of the space at each vertex
    :param arrows: One matrix per arrow of ``algebra.quiver``
    :param name: Label used in reports
    :param summands: Vertices ``i_1, ..., i_k`` when the module is ``P_{i_1} + ... + P_{i_k}``
        laid out by :func:`direct_sum`
    :param check: Evaluate every relation on the matrices
    """

    def __init__(
        self,
        algebra: PathAlgebra,
        dims: Sequence[int],
        arrows: Sequence[Mat],
        name: str = "",
        summands: Optional[Sequence[int]] = None,
        check: bool = True,
    ):
        quiver = algebra.quiver
        if len(dims) != quiver.vertex_count:
            raise ValidationError(
                f"expected {quiver.vertex_count} vertex dimensions, got {len(dims)}",
                {"dims": list(dims)},
            )
        if len(arrows) != len(quiver.arrows):
            raise ValidationError(f"expected {len(quiver.arrows)} arrow matrices")
        for a, m in zip(quiver.arrows, arrows):
            if m.shape != (dims[a.target], dims[a.source]):
                raise ValidationError(
                    f"arrow {a.name} needs a {dims[a.target]}x{dims[a.source]} matrix, "
                    f"got {m.shape[0]}x{m.shape[1]}",
                    {"arrow": a.name},
                )
        self.algebra = algebra
        self.dims = tuple(int(d) for d in dims)
        self.arrows = list(arrows)
        self.name = name
        self.summands = None if summands is None else tuple(summands)
        if check:
            for rel in algebra.relations:
                if not is_zero(self.evaluate(rel)):
                    raise ValidationError(
                        f"module {name or '<anonymous>'} violates a relation of {algebra.name}",
                        {"relation": algebra.presentation.relation_label(rel)},
                    )

    def __repr__(self) -> str:
        return f"Representation({self.name!r}, dims={list(self.dims)})"

    @property
    def field(self) -> FieldSpec:
        return self.algebra.field

    @property
    def dimension(self) -> int:
        return sum(self.dims)

    @cached_property
    def offsets(self) -> List[int]:
        out = [0]
        for d in self.dims:
            out.append(out[-1] + d)
        return out

    def block(self, vertex: int) -> slice:
        return slice(self.offsets[vertex], self.offsets[vertex + 1])

    @cached_property
    def arrow_totals(self) -> List[Mat]:
        out = []
        for a, m in zip(self.algebra.quiver.arrows, self.arrows):
            total = self.field.zeros(self.dimension, self.dimension)
            total[self.block(a.target), self.block(a.source)] = m
            out.append(total)
        return out

    def path_matrix(self, p: Path) -> Mat:
        """Action of a path on total vectors"""
        fs = self.field
        if p.is_trivial:
            out = fs.zeros(self.dimension, self.dimension)
            out[self.block(p.source), self.block(p.source)] = fs.identity(self.dims[p.source])
            return out
        out = self.arrow_totals[p.arrows[0]]
        for a in p.arrows[1:]:
            out = fs.matmul(out, self.arrow_totals[a])
        return out

    def evaluate(self, x) -> Mat:
        """Action of a linear combination of paths"""
        fs = self.field
        out = fs.zeros(self.dimension, self.dimension)
        for p, c in x.items():
            out = fs.reduce(out + c * self.path_matrix(p))
        return out

    @cached_property
    def basis_action(self) -> List[Mat]:
        return [self.path_matrix(w) for w in self.algebra.words]

    def act(self, x: Mat) -> Mat:
        """Action of an algebra element given in word coordinates"""
        fs = self.field
        out = fs.zeros(self.dimension, self.dimension)
        for c, m in zip(x, self.basis_action):
            if c != 0:
                out = fs.reduce(out + c * m)
        return out

    def total_vector(self, vertex: int, local: Mat) -> Mat:
        v = self.field.zeros(self.dimension, 1)[:, 0]
        v[self.block(vertex)] = local
        return v

    def is_zero(self) -> bool:
        return self.dimension == 0

    @cached_property
    def generators(self) -> List[int]:
        """Total positions of the generators ``e_i`` of each projective summand"""
        if self.summands is None:
            raise ValidationError(f"{self!r} is not laid out as a sum of projectives")
        seen = [0] * len(self.dims)
        out = []
        for i in self.summands:
            out.append(self.offsets[i] + seen[i])
            for v in range(len(self.dims)):
                seen[v] += len(self.algebra.words_between(i, v))
        return out


class ModuleMap:
    """Module homomorphism given by one matrix per vertex"""

    def __init__(
        self,
        source: Representation,
        target: Representation,
        blocks: Sequence[Mat],
        check: bool = True,
    ):
        if source.algebra is not target.algebra:
            raise AlgebraMismatch("module map between modules over different algebras")
        for v, b in enumerate(blocks):
            if b.shape != (target.dims[v], source.dims[v]):
                raise ValidationError(f"vertex {v + 1} block has shape {b.shape}")
        self.source = source
        self.target = target
        self.blocks = list(blocks)
        if check:
            fs = source.field
            for a, ms, mt in zip(source.algebra.quiver.arrows, source.arrows, target.arrows):
                lhs = fs.matmul(mt, self.blocks[a.source])
                rhs = fs.matmul(self.blocks[a.target], ms)
                if np.any(lhs != rhs):
                    raise ValidationError(f"map does not commute with arrow {a.name}")

    @property
    def field(self) -> FieldSpec:
        return self.source.field

    @classmethod
    def from_total(cls, source: Representation, target: Representation, total: Mat, check=True):
        blocks = [total[target.block(v), source.block(v)] for v in range(len(source.dims))]
        return cls(source, target, blocks, check)

    @classmethod
    def identity(cls, module: Representation) -> "ModuleMap":
        return cls(module, module, [module.field.identity(d) for d in module.dims], False)

    @classmethod
    def zero(cls, source: Representation, target: Representation) -> "ModuleMap":
        fs = source.field
        blocks = [fs.zeros(t, s) for s, t in zip(source.dims, target.dims)]
        return cls(source, target, blocks, False)

    @cached_property
    def total(self) -> Mat:
        return block_diag(self.blocks, self.field)

    def flat(self) -> Mat:
        return np.concatenate([b.reshape(-1) for b in self.blocks] + [np.empty(0, dtype=object)])

    def compose(self, other: "ModuleMap") -> "ModuleMap":
        """``self`` after ``other``"""
        if other.target is not self.source and other.target.dims != self.source.dims:
            raise ValidationError("maps are not composable")
        fs = self.field
        blocks = [fs.matmul(a, b) for a, b in zip(self.blocks, other.blocks)]
        return ModuleMap(other.source, self.target, blocks, False)

    def __add__(self, other: "ModuleMap") -> "ModuleMap":
        fs = self.field
        blocks = [fs.reduce(a + b) for a, b in zip(self.blocks, other.blocks)]
        return ModuleMap(self.source, self.target, blocks, False)

    def scale(self, c) -> "ModuleMap":
        fs = self.field
        return ModuleMap(self.source, self.target, [fs.reduce(c * b) for b in self.blocks], False)

    def is_zero(self) -> bool:
        return all(is_zero(b) for b in self.blocks)

    def rank(self) -> int:
        return sum(rank(b, self.field) for b in self.blocks)

    def is_injective(self) -> bool:
        return self.rank() == self.source.dimension

    def is_surjective(self) -> bool:
        return self.rank() == self.target.dimension

    def is_isomorphism(self) -> bool:
        return self.source.dims == self.target.dims and self.is_injective()

    def inverse(self) -> "ModuleMap":
        fs = self.field
        return ModuleMap(self.target, self.source, [inverse(b, fs) for b in self.blocks], False)

    def apply(self, v: Mat) -> Mat:
        return self.field.matmul(self.total, v.reshape(-1, 1))[:, 0]


def combine(maps: Sequence[ModuleMap], coeffs: Sequence) -> ModuleMap:
    out = maps[0].scale(coeffs[0])
    for m, c in zip(maps[1:], coeffs[1:]):
        out = out + m.scale(c)
    return out


def _check_same_algebra(m: Representation, n: Representation):
    if m.algebra is not n.algebra:
        raise AlgebraMismatch(
            f"{m!r} is over {m.algebra.name}, {n!r} is over {n.algebra.name}",
            {"left": m.algebra.name, "right": n.algebra.name},
        )


def zero_module(algebra: PathAlgebra, name: str = "0") -> Representation:
    fs = algebra.field
    arrows = [fs.zeros(0, 0) for _ in algebra.quiver.arrows]
    dims = [0] * algebra.vertex_count
    return Representation(algebra, dims, arrows, name, summands=(), check=False)


def projective(algebra: PathAlgebra, i: int) -> Representation:
    """``P_i = A e_i``: the vertex ``v`` space has basis the words from ``i`` to ``v``"""
    fs = algebra.field
    n = algebra.vertex_count
    bases = [algebra.words_between(i, v) for v in range(n)]
    arrows = []
    for idx, a in enumerate(algebra.quiver.arrows):
        m = fs.zeros(len(bases[a.target]), len(bases[a.source]))
        left = algebra.left_matrices[algebra.arrow_word(idx)]
        for col, k in enumerate(bases[a.source]):
            for row, k2 in enumerate(bases[a.target]):
                m[row, col] = left[k2, k]
        arrows.append(m)
    return Representation(algebra, [len(b) for b in bases], arrows, f"P{i + 1}", (i,), False)


def simple(algebra: PathAlgebra, i: int) -> Representation:
    fs = algebra.field
    dims = [1 if v == i else 0 for v in range(algebra.vertex_count)]
    arrows = [fs.zeros(dims[a.target], dims[a.source]) for a in algebra.quiver.arrows]
    return Representation(algebra, dims, arrows, f"S{i + 1}", check=False)


class DirectSum(NamedTuple):
    module: Representation
    inclusions: List[ModuleMap]
    projections: List[ModuleMap]


def direct_sum(modules: Sequence[Representation], name: str = "") -> DirectSum:
    """Direct sum laid out vertex by vertex, the summands in order inside each vertex"""
    if not modules:
        raise ValidationError("direct sum of no modules needs an algebra, use zero_module")
    algebra = modules[0].algebra
    for m in modules[1:]:
        _check_same_algebra(modules[0], m)
    fs = algebra.field
    n = algebra.vertex_count
    dims = [sum(m.dims[v] for m in modules) for v in range(n)]
    arrows = [
        block_diag([m.arrows[k] for m in modules], fs) for k in range(len(algebra.quiver.arrows))
    ]
    summands = None
    if all(m.summands is not None for m in modules):
        summands = tuple(i for m in modules for i in m.summands)
    total = Representation(
        algebra, dims, arrows, name or "+".join(m.name for m in modules), summands, False
    )
    inclusions, projections = [], []
    starts = [0] * n
    for m in modules:
        inc, pro = [], []
        for v in range(n):
            b = fs.zeros(dims[v], m.dims[v])
            b[starts[v] : starts[v] + m.dims[v], :] = fs.identity(m.dims[v])
            inc.append(b)
            pro.append(b.T.copy())
            starts[v] += m.dims[v]
        inclusions.append(ModuleMap(m, total, inc, False))
        projections.append(ModuleMap(total, m, pro, False))
    return DirectSum(total, inclusions, projections)


def projective_sum(algebra: PathAlgebra, summands: Sequence[int]) -> Representation:
    if not summands:
        return zero_module(algebra)
    return direct_sum([projective(algebra, i) for i in summands]).module


def regular_module(algebra: PathAlgebra) -> Tuple[Representation, Mat]:
    """``A`` as a left module over itself

    :return: The module ``P_1 + ... + P_n`` and the permutation matrix taking word
        coordinates of ``A`` to total coordinates of the module
    """
    fs = algebra.field
    n = algebra.vertex_count
    module = projective_sum(algebra, list(range(n)))
    coords = fs.zeros(module.dimension, algebra.dimension)
    pos = 0
    for v in range(n):
        for i in range(n):
            for k in algebra.words_between(i, v):
                coords[pos, k] = fs.one
                pos += 1
    module.name = algebra.name or "A"
    return module, coords


def map_from_generators(
    source: Representation, target: Representation, images: Sequence[Mat]
) -> ModuleMap:
    """The map out of a sum of projectives sending the generator of each summand to ``images``"""
    _check_same_algebra(source, target)
    algebra = source.algebra
    fs = source.field
    n = algebra.vertex_count
    assert source.summands is not None and len(images) == len(source.summands), f"{source!r}"
    blocks = []
    for v in range(n):
        cols = []
        for i, img in zip(source.summands, images):
            for k in algebra.words_between(i, v):
                moved = fs.matmul(target.basis_action[k], img.reshape(-1, 1))
                cols.append(moved[target.block(v), :])
        blocks.append(hstack(cols, target.dims[v], fs))
    return ModuleMap(source, target, blocks, False)


def hom_space(m: Representation, n: Representation) -> List[ModuleMap]:
    """Basis of ``Hom_A(m, n)`` from the intertwining equations ``N_a phi_s = phi_t M_a``"""
    _check_same_algebra(m, n)
    fs = m.field
    quiver = m.algebra.quiver
    sizes = [n.dims[v] * m.dims[v] for v in range(quiver.vertex_count)]
    starts = np.cumsum([0] + sizes)
    unknowns = int(starts[-1])
    if unknowns == 0:
        return []
    rows = []
    for a, ma, na in zip(quiver.arrows, m.arrows, n.arrows):
        s, t = a.source, a.target
        eq = fs.zeros(n.dims[t] * m.dims[s], unknowns)
        if eq.shape[0] == 0:
            continue
        eq[:, starts[s] : starts[s + 1]] = fs.reduce(
            eq[:, starts[s] : starts[s + 1]] + kron(na, fs.identity(m.dims[s]), fs)
        )
        eq[:, starts[t] : starts[t + 1]] = fs.reduce(
            eq[:, starts[t] : starts[t + 1]] - kron(fs.identity(n.dims[t]), ma.T, fs)
        )
        rows.append(eq)
    solutions = kernel(vstack(rows, unknowns, fs), fs)
    basis = []
    for col in range(solutions.shape[1]):
        x = solutions[:, col]
        blocks = [
            x[starts[v] : starts[v + 1]].reshape(n.dims[v], m.dims[v])
            for v in range(quiver.vertex_count)
        ]
        basis.append(ModuleMap(m, n, blocks, False))
    logger.debug(f"dim Hom({m.name}, {n.name}) = {len(basis)}")
    return basis


def hom_coordinates(basis: Sequence[ModuleMap], h: ModuleMap) -> Optional[Mat]:
    """Coordinates of ``h`` in a hom basis, ``None`` when ``h`` is not in the span"""
    fs = h.field
    if not basis:
        return fs.zeros(0, 1)[:, 0] if h.is_zero() else None
    matrix = np.column_stack([b.flat() for b in basis])
    if matrix.shape[0] == 0:
        return fs.zeros(len(basis), 1)[:, 0]
    x = solve(matrix, h.flat().reshape(-1, 1), fs)
    return None if x is None else x[:, 0]


def subrepresentation(module: Representation, bases: Sequence[Mat], name: str = "") -> ModuleMap:
    """Inclusion of the submodule whose vertex ``v`` part is spanned by ``bases[v]``"""
    fs = module.field
    arrows = []
    for a, m in zip(module.algebra.quiver.arrows, module.arrows):
        moved = fs.matmul(m, bases[a.source])
        coords = solve(bases[a.target], moved, fs)
        if coords is None:
            raise ValidationError(f"subspace is not stable under arrow {a.name}")
        arrows.append(coords)
    sub = Representation(module.algebra, [b.shape[1] for b in bases], arrows, name, check=False)
    return ModuleMap(sub, module, list(bases), False)


def quotient_representation(
    module: Representation, bases: Sequence[Mat], name: str = ""
) -> ModuleMap:
    """Projection onto the quotient by the submodule spanned vertexwise by ``bases``"""
    fs = module.field
    projections, sections = [], []
    for b in bases:
        p, s = quotient_map(b, fs)
        projections.append(p)
        sections.append(s)
    arrows = [
        fs.matmul(fs.matmul(projections[a.target], m), sections[a.source])
        for a, m in zip(module.algebra.quiver.arrows, module.arrows)
    ]
    dims = [p.shape[0] for p in projections]
    quot = Representation(module.algebra, dims, arrows, name, check=False)
    return ModuleMap(module, quot, projections, False)


def _vertex_parts(module: Representation, vectors: Mat) -> List[Mat]:
    fs = module.field
    return [image_basis(vectors[module.block(v), :], fs) for v in range(len(module.dims))]


def submodule(module: Representation, vectors: Mat, name: str = "") -> ModuleMap:
    """Inclusion of the submodule generated by the columns of ``vectors`` (total coordinates)"""
    fs = module.field
    spans = [fs.matmul(b, vectors) for b in module.basis_action]
    generated = hstack(spans, module.dimension, fs)
    return subrepresentation(module, _vertex_parts(module, generated), name)


def quotient(module: Representation, vectors: Mat, name: str = "") -> ModuleMap:
    """Projection onto the quotient by the submodule generated by the columns of ``vectors``"""
    inclusion = submodule(module, vectors)
    return quotient_representation(module, inclusion.blocks, name)


class KernelCokernel(NamedTuple):
    kernel: ModuleMap
    cokernel: ModuleMap
    image: ModuleMap


def kernel_cokernel(h: ModuleMap) -> KernelCokernel:
    """Kernel inclusion, cokernel projection and image inclusion of ``h``"""
    fs = h.field
    ker_bases = [kernel(b, fs) for b in h.blocks]
    img_bases = [image_basis(b, fs) for b in h.blocks]
    inclusion = subrepresentation(h.source, ker_bases, f"ker({h.source.name}->{h.target.name})")
    image = subrepresentation(h.target, img_bases, f"im({h.source.name}->{h.target.name})")
    projection = quotient_representation(
        h.target, img_bases, f"coker({h.source.name}->{h.target.name})"
    )
    return KernelCokernel(inclusion, projection, image)


def radical_bases(module: Representation) -> List[Mat]:
    """Vertex parts of ``rad(A) M``: the span of the images of the arrows"""
    fs = module.field
    quiver = module.algebra.quiver
    out = []
    for v in range(quiver.vertex_count):
        images = [module.arrows[k] for k in quiver.ending_at(v)]
        out.append(image_basis(hstack(images, module.dims[v], fs), fs))
    return out


def top_dimensions(module: Representation) -> List[int]:
    return [d - b.shape[1] for d, b in zip(module.dims, radical_bases(module))]


def projective_cover(module: Representation) -> ModuleMap:
    """Minimal surjection ``P(M) -> M`` with ``P(M)`` a sum of indecomposable projectives"""
    fs = module.field
    summands, images = [], []
    for v, rad in enumerate(radical_bases(module)):
        _, section = quotient_map(rad, fs)
        for col in range(section.shape[1]):
            summands.append(v)
            images.append(module.total_vector(v, section[:, col]))
    cover = projective_sum(module.algebra, summands)
    return map_from_generators(cover, module, images)


def is_projective(module: Representation) -> bool:
    return projective_cover(module).source.dimension == module.dimension


@dataclass
class ResolutionReport:
    """Minimal projective resolution ``... -> P_1 -> P_0 -> M``

    ``differentials[0]`` is the augmentation ``P_0 -> M`` and ``differentials[k]`` is
    ``P_k -> P_{k-1}`` for ``k >= 1``. ``projective_dimension`` is ``None`` when the
    kernel is still nonzero after ``cap`` terms.
    """

    module: Representation
    terms: List[Representation]
    differentials: List[ModuleMap]
    projective_dimension: Optional[int]
    cap: int

    @property
    def verdict(self) -> Union[int, str]:
        if self.projective_dimension is None:
            return f">= {self.cap}"
        return self.projective_dimension

    @property
    def is_finite(self) -> bool:
        return self.projective_dimension is not None

    def is_exact(self) -> bool:
        """``im d_{k+1} = ker d_k`` at every computed stage and the augmentation is onto"""
        if not self.differentials[0].is_surjective():
            return False
        for k in range(1, len(self.differentials)):
            d, prev = self.differentials[k], self.differentials[k - 1]
            if not prev.compose(d).is_zero():
                return False
            if d.rank() != prev.source.dimension - prev.rank():
                return False
        if self.projective_dimension is not None:
            return self.differentials[-1].is_injective()
        return True


def resolve(module: Representation, cap: int = DEFAULT_RESOLUTION_CAP) -> ResolutionReport:
    """Iterated projective covers of ``module``, at most ``cap`` terms"""
    if cap < 1:
        raise ValidationError(f"resolution cap must be positive, got {cap}")
    cover = projective_cover(module)
    terms, differentials = [cover.source], [cover]
    pd = None
    syzygy = kernel_cokernel(cover).kernel
    for k in range(cap):
        if syzygy.source.is_zero():
            pd = k
            break
        if k + 1 == cap:
            break
        step = projective_cover(syzygy.source)
        differentials.append(syzygy.compose(step))
        terms.append(step.source)
        syzygy = kernel_cokernel(step).kernel
    logger.debug(f"resolved {module.name}: terms {[t.dimension for t in terms]}, pd {pd}")
    return ResolutionReport(module, terms, differentials, pd, cap)


def trace_submodule(m: Representation, n: Representation) -> ModuleMap:
    """Inclusion of the sum of the images of all maps ``m -> n``"""
    _check_same_algebra(m, n)
    fs = n.field
    basis = hom_space(m, n)
    bases = [
        image_basis(hstack([h.blocks[v] for h in basis], n.dims[v], fs), fs)
        for v in range(len(n.dims))
    ]
    return subrepresentation(n, bases, f"tr_{m.name}({n.name})")


def module_from_action(
    algebra: PathAlgebra,
    dimension: int,
    idempotents: Sequence[Mat],
    arrow_actions: Sequence[Mat],
    name: str = "",
) -> Tuple[Representation, Mat]:
    """Representation of a module given by the action matrices of vertices and arrows

    :param dimension: Dimension of the underlying space
    :param idempotents: Action of each ``e_v``; they must sum to the identity
    :param arrow_actions: Action of each arrow
    :return: The representation and the change of basis ``T`` whose columns are the vertex
        bases in order, so that total coordinates ``x`` correspond to ``T x``
    """
    fs = algebra.field
    bases = [image_basis(e, fs) for e in idempotents]
    change = hstack(bases, dimension, fs)
    if change.shape != (dimension, dimension):
        raise ValidationError("vertex idempotents do not decompose the space")
    back = inverse(change, fs)
    dims = [b.shape[1] for b in bases]
    offsets = np.cumsum([0] + dims)
    arrows = []
    for a, act in zip(algebra.quiver.arrows, arrow_actions):
        moved = fs.matmul(fs.matmul(back, act), change)
        rows = slice(offsets[a.target], offsets[a.target + 1])
        cols = slice(offsets[a.source], offsets[a.source + 1])
        arrows.append(moved[rows, cols])
    return Representation(algebra, dims, arrows, name), change


def find_isomorphism(
    m: Representation, n: Representation, attempts: int = 32, seed: int = 0
) -> Optional[ModuleMap]:
    """Search the hom space for an isomorphism; every candidate is verified exactly"""
    _check_same_algebra(m, n)
    if m.dims != n.dims:
        return None
    if m.dimension == 0:
        return ModuleMap.zero(m, n)
    basis = hom_space(m, n)
    if not basis:
        return None
    for h in basis:
        if h.is_isomorphism():
            return h
    rng = np.random.default_rng(seed)
    for _ in range(attempts):
        coeffs = [m.field(int(c)) for c in rng.integers(-9, 10, size=len(basis))]
        h = combine(basis, coeffs)
        if h.is_isomorphism():
            return h
    return None


def projective_summand(i: int, module: Representation) -> Optional[Tuple[ModuleMap, ModuleMap]]:
    """Split ``P_i`` off ``module``: maps ``phi: P_i -> M`` and ``psi: M -> P_i`` with
    ``psi phi = id``, or ``None`` when ``P_i`` is not a direct summand"""
    p = projective(module.algebra, i)
    fs = module.field
    gen = p.generators[0]
    into = hom_space(p, module)
    out_of = hom_space(module, p)
    for phi in into:
        for psi in out_of:
            u = psi.compose(phi)
            if u.apply(p.total_vector(i, fs.identity(p.dims[i])[:, 0]))[gen] != 0:
                return phi, u.inverse().compose(psi)
    return None


@dataclass
class TensorProduct:
    """``M (x)_A N`` for a right module ``M`` (over ``A^op``) and a left module ``N``

    The space is a quotient of ``sum_v M_v (x) N_v``; ``projection`` maps that sum onto
    the tensor product and ``section`` lifts back.
    """

    right: Representation
    left: Representation
    projection: Mat
    section: Mat

    @property
    def dimension(self) -> int:
        return self.projection.shape[0]

    def induced(
        self,
        target: "TensorProduct",
        right_map: Optional[ModuleMap] = None,
        left_map: Optional[ModuleMap] = None,
    ) -> Mat:
        """Matrix of ``g (x) h`` from this tensor product to ``target``"""
        fs = self.right.field
        n = len(self.left.dims)
        blocks = []
        for v in range(n):
            g = right_map.blocks[v] if right_map is not None else fs.identity(self.right.dims[v])
            h = left_map.blocks[v] if left_map is not None else fs.identity(self.left.dims[v])
            blocks.append(kron(g, h, fs))
        big = block_diag(blocks, fs)
        return fs.matmul(fs.matmul(target.projection, big), self.section)


def tensor(right: Representation, left: Representation) -> TensorProduct:
    """Tensor product over the algebra of ``left``

    Relators ``(m a) (x) n - m (x) (a n)`` for every arrow ``a: s -> t`` span the kernel of
    ``sum_v M_v (x) N_v -> M (x)_A N``.
    """
    algebra = left.algebra
    if not right.algebra.is_opposite_of(algebra):
        raise AlgebraMismatch(
            f"{right!r} must be a module over the opposite of {algebra.name}",
            {"left": right.algebra.name, "right": algebra.name},
        )
    fs = algebra.field
    n = algebra.vertex_count
    sizes = [right.dims[v] * left.dims[v] for v in range(n)]
    starts = np.cumsum([0] + sizes)
    total = int(starts[-1])
    relators = []
    for k, a in enumerate(algebra.quiver.arrows):
        s, t = a.source, a.target
        cols = right.dims[t] * left.dims[s]
        if cols == 0:
            continue
        block = fs.zeros(total, cols)
        block[starts[s] : starts[s + 1], :] = fs.reduce(
            block[starts[s] : starts[s + 1], :]
            + kron(right.arrows[k], fs.identity(left.dims[s]), fs)
        )
        block[starts[t] : starts[t + 1], :] = fs.reduce(
            block[starts[t] : starts[t + 1], :]
            - kron(fs.identity(right.dims[t]), left.arrows[k], fs)
        )
        relators.append(block)
    projection, section = quotient_map(hstack(relators, total, fs), fs)
    logger.debug(f"dim {right.name} (x) {left.name} = {projection.shape[0]}")
    return TensorProduct(right, left, projection, section)


def endomorphism_algebra(
    module: Representation, name: str = ""
) -> Tuple[FDAlgebra, List[ModuleMap]]:
    """``End_A(M)`` with composition written on the right: ``phi * psi = psi o phi``

    :return: The algebra and the hom basis its coordinates refer to
    """
    fs = module.field
    basis = hom_space(module, module)
    k = len(basis)
    table = np.empty((k, k, k), dtype=object)
    table.fill(fs.zero)
    for i, phi in enumerate(basis):
        for j, psi in enumerate(basis):
            coords = hom_coordinates(basis, psi.compose(phi))
            if coords is None:
                raise ValidationError("endomorphisms are not closed under composition")
            table[i, j, :] = coords
    unit = hom_coordinates(basis, ModuleMap.identity(module))
    if unit is None:
        unit = fs.zeros(k, 1)[:, 0]
    labels = [f"phi{i + 1}" for i in range(k)]
    return FDAlgebra(fs, labels, table, unit, None, name or f"End({module.name})"), basis
