"""Ring epimorphisms out of a path algebra and universal localisation

A map ``sigma: P -> Q`` between sums of indecomposable projectives is stored as a matrix of
paths. Entry ``(t, s)`` runs from the vertex of target summand ``t`` to the vertex of
source summand ``s``; the generator of source summand ``s`` goes to
``sum_t entry(t, s)`` placed in target summand ``t``, so ``e_2 -> gamma`` for an arrow
``gamma: 1 -> 2`` is the map ``P_2 -> P_1``.
"""
import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from qha.errors import (
    CapExceeded,
    HypothesesNotMet,
    InvariantError,
    NotFinite,
    ProjectiveDimensionTooLarge,
    ValidationError,
)
from qha.exactlin import (
    FieldSpec,
    Mat,
    hstack,
    inverse,
    kernel,
    quotient_map,
    rank,
    same_span,
    solve,
)
from qha.homology import KfResolution, build_Kf_resolution, tor
from qha.modcat import (
    ModuleMap,
    Representation,
    direct_sum,
    hom_space,
    is_projective,
    kernel_cokernel,
    map_from_generators,
    module_from_action,
    projective_sum,
    projective_summand,
    quotient,
    regular_module,
    resolve,
    simple,
    tensor,
    top_dimensions,
    trace_submodule,
)
from qha.presentations import FDAlgebra, LinComb, PathAlgebra, lincomb_add
from qha.utils import (
    DEFAULT_MAX_ITER,
    DEFAULT_RESOLUTION_CAP,
    DEFAULT_TOR_CAP,
    default_max_dim,
)

logger = logging.getLogger(__name__)


@dataclass
class ProjMap:
    """Map between sums of indecomposable projectives, see the module docstring

    :param source: Vertices ``j_s`` of ``P = sum_s A e_{j_s}`` (zero-based)
    :param target: Vertices ``i_t`` of ``Q = sum_t A e_{i_t}`` (zero-based)
    :param entries: Nonzero entries keyed by ``(t, s)``
    """

    source: Tuple[int, ...]
    target: Tuple[int, ...]
    entries: Dict[Tuple[int, int], LinComb] = field(default_factory=dict)
    name: str = "sigma"

    def validate(self, algebra: PathAlgebra):
        n = algebra.vertex_count
        for v in self.source + self.target:
            if not 0 <= v < n:
                raise ValidationError(f"{self.name}: no vertex {v + 1}", {"vertex": v + 1})
        for (t, s), lc in self.entries.items():
            if not (0 <= t < len(self.target) and 0 <= s < len(self.source)):
                raise ValidationError(f"{self.name}: entry ({t + 1}, {s + 1}) out of range")
            for p in lc:
                algebra.quiver.path_of(p.arrows, p.source)
                if p.source != self.target[t] or p.target != self.source[s]:
                    raise ValidationError(
                        f"{self.name}: entry ({t + 1}, {s + 1}) must run from vertex "
                        f"{self.target[t] + 1} to vertex {self.source[s] + 1}",
                        {"entry": [t + 1, s + 1]},
                    )

    def element(self, algebra: PathAlgebra, t: int, s: int) -> Mat:
        return algebra.element(self.entries.get((t, s), {}))

    def module_map(self, algebra: PathAlgebra, copies: int = 1) -> ModuleMap:
        """``sigma`` repeated ``copies`` times as a map of representations"""
        self.validate(algebra)
        src = projective_sum(algebra, self.source * copies)
        tgt = projective_sum(algebra, self.target * copies)
        images = []
        for c in range(copies):
            for s in range(len(self.source)):
                v = tgt.field.zeros(tgt.dimension, 1)[:, 0]
                for t in range(len(self.target)):
                    gen = tgt.field.zeros(tgt.dimension, 1)[:, 0]
                    gen[tgt.generators[c * len(self.target) + t]] = tgt.field.one
                    moved = tgt.act(self.element(algebra, t, s))
                    v = tgt.field.reduce(v + tgt.field.matmul(moved, gen.reshape(-1, 1))[:, 0])
                images.append(v)
        return map_from_generators(src, tgt, images)

    def hom_matrix(self, module: Representation) -> Mat:
        """``Hom(sigma, M): sum_t e_{i_t} M -> sum_s e_{j_s} M``"""
        fs = module.field
        algebra = module.algebra
        rows = [module.dims[j] for j in self.source]
        cols = [module.dims[i] for i in self.target]
        out = fs.zeros(sum(rows), sum(cols))
        r0 = 0
        for s, j in enumerate(self.source):
            c0 = 0
            for t, i in enumerate(self.target):
                lc = self.entries.get((t, s))
                if lc:
                    action = module.act(algebra.element(lc))
                    block = action[module.block(j), module.block(i)]
                    out[r0 : r0 + rows[s], c0 : c0 + cols[t]] = block
                c0 += cols[t]
            r0 += rows[s]
        return out

    def is_zero(self) -> bool:
        return not self.source and not self.target

    def minimise(self, algebra: PathAlgebra) -> "ProjMap":
        """Split off isomorphisms ``P_v -> P_v`` until no entry is invertible

        The result is homotopy equivalent to ``self`` as a two-term complex.
        """
        fs = algebra.field
        src, tgt = list(self.source), list(self.target)
        m = {(t, s): self.element(algebra, t, s) for t in range(len(tgt)) for s in range(len(src))}
        while True:
            pivot = next(
                (
                    (t, s)
                    for (t, s), x in sorted(m.items())
                    if tgt[t] == src[s] and x[algebra.vertex_word(tgt[t])] != 0
                ),
                None,
            )
            if pivot is None:
                break
            t0, s0 = pivot
            v = tgt[t0]
            u_inv = _local_inverse(algebra, m[pivot], v)
            reduced = {}
            for t in range(len(tgt)):
                for s in range(len(src)):
                    if t == t0 or s == s0:
                        continue
                    correction = algebra.multiply(algebra.multiply(m[(t0, s)], u_inv), m[(t, s0)])
                    reduced[(t, s)] = fs.reduce(m[(t, s)] - correction)
            keep_t = [t for t in range(len(tgt)) if t != t0]
            keep_s = [s for s in range(len(src)) if s != s0]
            m = {
                (nt, ns): reduced[(t, s)]
                for nt, t in enumerate(keep_t)
                for ns, s in enumerate(keep_s)
            }
            tgt = [tgt[t] for t in keep_t]
            src = [src[s] for s in keep_s]
        entries = {k: algebra.lincomb(x) for k, x in m.items() if np.any(x != 0)}
        return ProjMap(tuple(src), tuple(tgt), entries, self.name)

    @classmethod
    def from_module_map(cls, algebra: PathAlgebra, h: ModuleMap, name: str = "sigma") -> "ProjMap":
        """Read off the path matrix of a map between sums of projectives"""
        src, tgt = h.source, h.target
        if src.summands is None or tgt.summands is None:
            raise ValidationError("both modules must be laid out as sums of projectives")
        positions = _summand_positions(tgt)
        entries: Dict[Tuple[int, int], LinComb] = {}
        fs = algebra.field
        for s, gen in enumerate(src.generators):
            unit = fs.zeros(src.dimension, 1)[:, 0]
            unit[gen] = fs.one
            image = h.apply(unit)
            for pos, c in enumerate(image):
                if c == 0:
                    continue
                t, k = positions[pos]
                entries[(t, s)] = lincomb_add(entries.get((t, s), {}), {algebra.words[k]: c}, fs)
        entries = {k: v for k, v in entries.items() if v}
        return cls(tuple(src.summands), tuple(tgt.summands), entries, name)


def _summand_positions(module: Representation) -> List[Tuple[int, int]]:
    """For each total position of a sum of projectives: summand index and word index"""
    algebra = module.algebra
    out = []
    for v in range(algebra.vertex_count):
        for t, i in enumerate(module.summands):
            out.extend((t, k) for k in algebra.words_between(i, v))
    return out


def _local_inverse(algebra: PathAlgebra, u: Mat, vertex: int) -> Mat:
    fs = algebra.field
    e = algebra.basis_vector(algebra.vertex_word(vertex))
    y = solve(algebra.left_matrix(u), e.reshape(-1, 1), fs)
    if y is None:
        raise InvariantError("entry with a unit coefficient is not invertible")
    return algebra.multiply(algebra.multiply(e, y[:, 0]), e)


def in_X(sigmas: Sequence[ProjMap], module: Representation) -> bool:
    """Whether ``Hom(sigma, M)`` is bijective for every ``sigma``"""
    fs = module.field
    for sigma in sigmas:
        h = sigma.hom_matrix(module)
        if h.shape[0] != h.shape[1] or rank(h, fs) != h.shape[0]:
            return False
    return True


@dataclass
class ReflectionResult:
    module: Representation
    unit: ModuleMap
    iterations: int
    history: List[int]


def _kill_step(sigmas: Sequence[ProjMap], module: Representation) -> Optional[ModuleMap]:
    """Quotient by the images of all maps ``coker(sigma) -> M``"""
    fs = module.field
    vectors = []
    for sigma in sigmas:
        k = kernel(sigma.hom_matrix(module), fs)
        c0 = 0
        for i in sigma.target:
            d = module.dims[i]
            for col in range(k.shape[1]):
                if np.any(k[c0 : c0 + d, col] != 0):
                    vectors.append(module.total_vector(i, k[c0 : c0 + d, col]))
            c0 += d
    if not vectors:
        return None
    return quotient(module, hstack([v.reshape(-1, 1) for v in vectors], module.dimension, fs))


def _extend_step(sigma: ProjMap, module: Representation) -> Optional[ModuleMap]:
    """Pushout along ``sigma^r`` that makes every map ``P -> M`` extend over ``Q``"""
    fs = module.field
    algebra = module.algebra
    h = sigma.hom_matrix(module)
    _, missing = quotient_map(h, fs)
    r = missing.shape[1]
    if r == 0:
        return None
    sigma_r = sigma.module_map(algebra, r)
    images = []
    for c in range(r):
        r0 = 0
        for j in sigma.source:
            d = module.dims[j]
            images.append(module.total_vector(j, missing[r0 : r0 + d, c]))
            r0 += d
    p = map_from_generators(sigma_r.source, module, images)
    ds = direct_sum([sigma_r.target, module])
    glue = ds.inclusions[0].compose(sigma_r) + ds.inclusions[1].compose(p.scale(fs(-1)))
    projection = kernel_cokernel(glue).cokernel
    return projection.compose(ds.inclusions[1])


def reflect(
    sigmas: Sequence[ProjMap],
    module: Representation,
    max_dim: Optional[int] = None,
    max_iter: int = DEFAULT_MAX_ITER,
) -> ReflectionResult:
    """Reflection of ``module`` into the modules on which every ``Hom(sigma, -)`` is bijective

    Alternates quotienting by images of ``coker(sigma)`` with pushouts that extend maps
    out of the source of ``sigma``, until the result is certified.
    """
    max_dim = default_max_dim() if max_dim is None else max_dim
    if max_dim < 1 or max_iter < 1:
        raise ValidationError("reflection caps must be positive")
    current = module
    unit = ModuleMap.identity(module)
    history = [module.dimension]
    for iteration in range(max_iter):
        if in_X(sigmas, current):
            logger.debug(f"reflected {module.name} after {iteration} rounds: {history}")
            if current is not module:
                current.name = f"L({module.name})"
            return ReflectionResult(current, unit, iteration, history)
        step = _kill_step(sigmas, current)
        if step is None:
            for sigma in sigmas:
                step = _extend_step(sigma, current)
                if step is not None:
                    break
        if step is None:
            raise InvariantError("reflection is stuck outside the subcategory")
        current = step.target
        unit = step.compose(unit)
        history.append(current.dimension)
        logger.debug(f"reflection round {iteration + 1}: dimension {current.dimension}")
        if current.dimension > max_dim:
            raise CapExceeded("max_dim", history)
    if in_X(sigmas, current):
        if current is not module:
            current.name = f"L({module.name})"
        return ReflectionResult(current, unit, max_iter, history)
    raise CapExceeded("max_iter", history)


class RingEpi:
    """Ring homomorphism ``f: A -> B`` given by its matrix over the two bases

    ``B`` becomes a left module (``a . b = f(a) b``) and a right module over ``A`` through
    ``f``; the right module is a representation of the opposite algebra.
    """

    def __init__(self, source: PathAlgebra, target: FDAlgebra, matrix: Mat, name: str = "f"):
        if matrix.shape != (target.dimension, source.dimension):
            raise ValidationError(
                f"matrix of {name} must be {target.dimension}x{source.dimension}",
                {"shape": list(matrix.shape)},
            )
        self.source = source
        self.target = target
        self.matrix = matrix
        self.name = name
        self.reflection: Optional[ReflectionResult] = None

    @classmethod
    def from_matrix(
        cls, source: PathAlgebra, target: FDAlgebra, matrix: Mat, name: str = "f"
    ) -> "RingEpi":
        """Build and check unitality and multiplicativity on all basis pairs"""
        f = cls(source, target, matrix, name)
        fs = source.field
        if np.any(f.image(source.unit) != target.unit):
            raise ValidationError(f"{name} does not preserve the unit")
        for i in range(source.dimension):
            for j in range(source.dimension):
                a, b = source.basis_vector(i), source.basis_vector(j)
                lhs = f.image(source.multiply(a, b))
                rhs = target.multiply(f.image(a), f.image(b))
                if np.any(fs.reduce(lhs - rhs) != 0):
                    raise ValidationError(
                        f"{name} is not multiplicative on {source.labels[i]}, {source.labels[j]}"
                    )
        return f

    @classmethod
    def identity(cls, algebra: PathAlgebra) -> "RingEpi":
        return cls(algebra, algebra, algebra.field.identity(algebra.dimension), "id")

    @property
    def field(self) -> FieldSpec:
        return self.source.field

    def image(self, a: Mat) -> Mat:
        return self.field.matmul(self.matrix, a.reshape(-1, 1))[:, 0]

    @cached_property
    def _regular(self) -> Tuple[Representation, Mat]:
        return regular_module(self.source)

    @property
    def regular(self) -> Representation:
        return self._regular[0]

    @property
    def regular_coords(self) -> Mat:
        return self._regular[1]

    def _action(self, multiplication) -> Tuple[List[Mat], List[Mat]]:
        a = self.source
        idempotents = [
            multiplication(self.image(a.basis_vector(a.vertex_word(v))))
            for v in range(a.vertex_count)
        ]
        arrows = [
            multiplication(self.image(a.basis_vector(a.arrow_word(k))))
            for k in range(len(a.quiver.arrows))
        ]
        return idempotents, arrows

    @cached_property
    def _left(self) -> Tuple[Representation, Mat]:
        idempotents, arrows = self._action(self.target.left_matrix)
        return module_from_action(self.source, self.target.dimension, idempotents, arrows, "B")

    @cached_property
    def _right(self) -> Tuple[Representation, Mat]:
        idempotents, arrows = self._action(self.target.right_matrix)
        return module_from_action(
            self.source.opposite(), self.target.dimension, idempotents, arrows, "B"
        )

    @property
    def left(self) -> Representation:
        return self._left[0]

    @property
    def left_basis(self) -> Mat:
        return self._left[1]

    @property
    def right(self) -> Representation:
        return self._right[0]

    @cached_property
    def left_map(self) -> ModuleMap:
        """``f`` as a map of left modules ``A -> B``"""
        fs = self.field
        back = inverse(self.left_basis, fs)
        total = fs.matmul(fs.matmul(back, self.matrix), self.regular_coords.T)
        return ModuleMap.from_total(self.regular, self.left, total)

    @cached_property
    def _kernel_cokernel(self):
        return kernel_cokernel(self.left_map)

    @property
    def kernel_inclusion(self) -> ModuleMap:
        return self._kernel_cokernel.kernel

    @property
    def cokernel_projection(self) -> ModuleMap:
        return self._kernel_cokernel.cokernel

    @property
    def kernel(self) -> Representation:
        return self.kernel_inclusion.source

    @property
    def cokernel(self) -> Representation:
        return self.cokernel_projection.target

    def is_injective(self) -> bool:
        return self.kernel.dimension == 0

    def is_surjective(self) -> bool:
        return self.cokernel.dimension == 0

    def right_multiplication(self, a: Mat) -> Tuple[ModuleMap, ModuleMap]:
        """Right multiplication by ``a`` on ``A`` and by ``f(a)`` on ``B`` as module maps"""
        fs = self.field
        coords = self.regular_coords
        on_a = fs.matmul(fs.matmul(coords, self.source.right_matrix(a)), coords.T)
        basis = self.left_basis
        on_b = fs.matmul(
            fs.matmul(inverse(basis, fs), self.target.right_matrix(self.image(a))), basis
        )
        return (
            ModuleMap.from_total(self.regular, self.regular, on_a, False),
            ModuleMap.from_total(self.left, self.left, on_b, False),
        )


def universal_localise(
    algebra: PathAlgebra,
    sigmas: Sequence[ProjMap],
    max_dim: Optional[int] = None,
    max_iter: int = DEFAULT_MAX_ITER,
) -> RingEpi:
    """``A -> A_Sigma`` with ``A_Sigma`` the opposite of ``End_A(L(A))``

    ``L(A)`` is the reflection of the regular module with unit ``psi``; the ring has the
    basis of ``L(A)``, the unit ``u = psi(1)``, and ``v * w = phi_w(v)`` where ``phi_w`` is
    the endomorphism with ``phi_w(u) = w``.
    """
    fs = algebra.field
    for sigma in sigmas:
        sigma.validate(algebra)
    regular, coords = regular_module(algebra)
    reflection = reflect(sigmas, regular, max_dim, max_iter)
    module, psi = reflection.module, reflection.unit
    d = module.dimension
    u = psi.apply(fs.matmul(coords, algebra.unit.reshape(-1, 1))[:, 0])
    basis = hom_space(module, module)
    if len(basis) != d:
        raise InvariantError(f"End of the reflection has dimension {len(basis)}, expected {d}")
    evaluation = hstack([h.apply(u).reshape(-1, 1) for h in basis], d, fs)
    to_endo = inverse(evaluation, fs)

    table = np.empty((d, d, d), dtype=object)
    table.fill(fs.zero)
    for j in range(d):
        phi = fs.zeros(d, d)
        for c, h in zip(to_endo[:, j], basis):
            if c != 0:
                phi = fs.reduce(phi + c * h.total)
        table[:, j, :] = phi.T
    matrix = fs.matmul(psi.total, coords)
    idempotents = [
        matrix[:, algebra.vertex_word(v)]
        for v in range(algebra.vertex_count)
        if np.any(matrix[:, algebra.vertex_word(v)] != 0)
    ]
    name = f"{algebra.name}_{'+'.join(s.name for s in sigmas) or 'id'}"
    target = FDAlgebra(fs, [f"b{k + 1}" for k in range(d)], table, u, idempotents, name)
    f = RingEpi.from_matrix(algebra, target, matrix, f"{algebra.name}->{name}")
    f.reflection = reflection
    if not in_X(sigmas, f.left):
        raise InvariantError("localised ring does not invert sigma")
    logger.info(f"universal localisation {name} has dimension {d}")
    return f


def projective_reflections(f: RingEpi) -> List[Representation]:
    """Reflections ``B (x)_A P_k`` of the indecomposable projectives, as the left ideals
    ``B f(e_k)`` of ``B``"""
    algebra = f.source
    out = []
    for k in range(algebra.vertex_count):
        e = algebra.basis_vector(algebra.vertex_word(k))
        _, on_b = f.right_multiplication(e)
        module = kernel_cokernel(on_b).image.source
        module.name = f"B e{k + 1}"
        out.append(module)
    return out


def is_ring_epi(f: RingEpi) -> bool:
    """``B (x)_A coker(f) = 0``, cross-checked against ``dim B (x)_A B = dim B``"""
    vanishing = tensor(f.right, f.cokernel).dimension == 0
    square = tensor(f.right, f.left).dimension == f.target.dimension
    if vanishing != square:
        raise InvariantError(
            "epimorphism criteria disagree", {"tensor": vanishing, "square": square}
        )
    return vanishing


@dataclass
class EpiClassification:
    is_epi: bool
    finite: Optional[bool] = None
    flat: Optional[bool] = None
    one_finite: Optional[bool] = None
    homological: Optional[str] = None
    projective_dimension: Union[int, str, None] = None
    tor: Dict[int, int] = field(default_factory=dict)

    def as_dict(self) -> Dict:
        return {
            "is_epi": self.is_epi,
            "finite": self.finite,
            "flat": self.flat,
            "one_finite": self.one_finite,
            "homological": self.homological,
            "projective_dimension": self.projective_dimension,
            "tor": {str(i): d for i, d in sorted(self.tor.items())},
        }


def is_flat(f: RingEpi) -> bool:
    """``Tor_1(S, B) = 0`` for every simple right module ``S``"""
    opposite = f.source.opposite()
    return all(
        tor(simple(opposite, i), f.left, 1) == 0 for i in range(f.source.vertex_count)
    )


def classify(
    f: RingEpi,
    resolution_cap: int = DEFAULT_RESOLUTION_CAP,
    tor_cap: int = DEFAULT_TOR_CAP,
) -> EpiClassification:
    if not is_ring_epi(f):
        return EpiClassification(False)
    res = resolve(f.left, resolution_cap)
    pd = res.projective_dimension
    finite = is_projective(f.left)
    flat = is_flat(f)
    if flat != finite:
        raise InvariantError("flat and finite verdicts disagree")
    top = pd if pd is not None else tor_cap
    right_res = resolve(f.right, top + 2)
    dims = {}
    verdict = "yes"
    for i in range(1, top + 1):
        dims[i] = tor(f.right, f.left, i, max(tor_cap, top), right_res)
        if dims[i] != 0:
            verdict = "no"
            break
    if pd is None and verdict == "yes":
        verdict = "inconclusive"
    one_finite = pd is not None and pd <= 1
    result = EpiClassification(True, finite, flat, one_finite, verdict, res.verdict, dims)
    logger.info(f"{f.name}: {result.as_dict()}")
    return result


def comparison_map(f: RingEpi, g: RingEpi) -> Optional[Mat]:
    """The unique left module map ``h: B -> C`` with ``h(1) = 1`` in ring coordinates

    :return: Matrix from the basis of ``f.target`` to that of ``g.target``, or ``None``
        when no such map exists or it is not unique or not multiplicative
    """
    if f.source is not g.source:
        return None
    fs = f.field
    basis = hom_space(f.left, g.left)
    back_f = inverse(f.left_basis, fs)
    one_f = fs.matmul(back_f, f.target.unit.reshape(-1, 1))[:, 0]
    one_g = fs.matmul(inverse(g.left_basis, fs), g.target.unit.reshape(-1, 1))
    if not basis:
        if g.target.dimension == 0:
            return fs.zeros(0, f.target.dimension)
        return None
    evaluation = hstack([h.apply(one_f).reshape(-1, 1) for h in basis], g.left.dimension, fs)
    x = solve(evaluation, one_g, fs)
    if x is None or kernel(evaluation, fs).shape[1] > 0:
        return None
    total = fs.zeros(g.left.dimension, f.left.dimension)
    for c, h in zip(x[:, 0], basis):
        if c != 0:
            total = fs.reduce(total + c * h.total)
    h_ring = fs.matmul(fs.matmul(g.left_basis, total), back_f)
    b, c_alg = f.target, g.target
    for i in range(b.dimension):
        for j in range(b.dimension):
            x_i, x_j = b.basis_vector(i), b.basis_vector(j)
            lhs = fs.matmul(h_ring, b.multiply(x_i, x_j).reshape(-1, 1))[:, 0]
            h_i = fs.matmul(h_ring, x_i.reshape(-1, 1))[:, 0]
            h_j = fs.matmul(h_ring, x_j.reshape(-1, 1))[:, 0]
            rhs = c_alg.multiply(h_i, h_j)
            if np.any(fs.reduce(lhs - rhs) != 0):
                return None
    return h_ring


def epiclass_equal(f: RingEpi, g: RingEpi) -> bool:
    if f.source is not g.source or f.target.dimension != g.target.dimension:
        return False
    h = comparison_map(f, g)
    return h is not None and rank(h, f.field) == f.target.dimension


def quotient_and_corner(
    algebra: PathAlgebra, vertices: Sequence[int]
) -> Tuple[RingEpi, FDAlgebra]:
    """``A -> A/AeA`` and ``eAe`` for ``e`` the sum of the given vertex idempotents"""
    fs = algebra.field
    n = algebra.dimension
    chosen = sorted(set(vertices))
    for v in chosen:
        if not 0 <= v < algebra.vertex_count:
            raise ValidationError(f"no vertex {v + 1}", {"vertex": v + 1})
    label = ",".join(str(v + 1) for v in chosen)
    e = fs.zeros(n, 1)[:, 0]
    for v in chosen:
        e[algebra.vertex_word(v)] = fs.one
    generators = hstack(
        [algebra.basis_vector(algebra.vertex_word(v)).reshape(-1, 1) for v in chosen], n, fs
    )
    ideal = algebra.ideal(generators)
    quot, projection = algebra.quotient(ideal, f"{algebra.name}/Ae{{{label}}}A")
    epi = RingEpi.from_matrix(algebra, quot, projection, f"{algebra.name}->{quot.name}")
    words = [k for k, w in enumerate(algebra.words) if w.source in chosen and w.target in chosen]
    basis = fs.identity(n)[:, words]
    corner = algebra.subalgebra(
        basis, e, [algebra.labels[k] for k in words], f"e{{{label}}}{algebra.name}e{{{label}}}"
    )
    return epi, corner


@dataclass
class TraceIdeal:
    inclusion: ModuleMap
    vertices: List[int]
    basis: Mat

    @property
    def dimension(self) -> int:
        return self.inclusion.source.dimension


def trace_ideal(f: RingEpi) -> TraceIdeal:
    """``tau_B(A)`` from the trace and from the projective summands of ``B``"""
    if not is_projective(f.left):
        raise NotFinite(f"{f.name} is not finite, B is not projective over A")
    algebra = f.source
    fs = f.field
    inclusion = trace_submodule(f.left, f.regular)
    vertices = [
        i for i in range(algebra.vertex_count) if projective_summand(i, f.left) is not None
    ]
    generators = hstack(
        [algebra.basis_vector(algebra.vertex_word(v)).reshape(-1, 1) for v in vertices],
        algebra.dimension,
        fs,
    )
    ideal = algebra.ideal(generators)
    as_module = fs.matmul(f.regular_coords, ideal)
    traced = inclusion.total
    if not same_span(as_module, traced, fs):
        raise InvariantError(
            "trace and summand formula disagree", {"vertices": [v + 1 for v in vertices]}
        )
    basis = fs.matmul(f.regular_coords.T, traced)
    return TraceIdeal(inclusion, vertices, basis)


def sigma_for_module(
    algebra: PathAlgebra, module: Representation, cap: int = DEFAULT_RESOLUTION_CAP
) -> ProjMap:
    """Minimal projective presentation ``P_1 -> P_0`` of a module of projective dimension <= 1"""
    res = resolve(module, min(cap, 3))
    pd = res.projective_dimension
    if pd is None or pd > 1:
        raise ProjectiveDimensionTooLarge(
            f"{module.name} has projective dimension {res.verdict}",
            {"module": module.name, "projective_dimension": res.verdict},
        )
    if pd == 0:
        return ProjMap((), tuple(res.terms[0].summands), {}, f"sigma_{module.name}")
    return ProjMap.from_module_map(algebra, res.differentials[1], f"sigma_{module.name}")


@dataclass
class SigmaExtraction:
    """Universal localisation data in the epiclass of ``f``

    ``kind`` is ``finite``, ``injective``, ``surjective`` or ``general``; the injective
    case also gives ``module_sigma`` (localise at ``B/A``) and the surjective case gives
    ``idempotent`` with ``B`` in the epiclass of ``A/AeA``.
    """

    sigma: ProjMap
    kind: str
    resolution: KfResolution
    module_sigma: Optional[ProjMap] = None
    idempotent: Optional[List[int]] = None


def hypotheses(
    f: RingEpi,
    resolution_cap: int = DEFAULT_RESOLUTION_CAP,
    tor_cap: int = DEFAULT_TOR_CAP,
) -> Tuple[EpiClassification, List[str]]:
    """Classification of ``f`` and the names of the failed hypotheses of the extraction"""
    flags = classify(f, resolution_cap, tor_cap)
    failed = []
    if not flags.is_epi:
        failed.append("epi")
    else:
        if not flags.one_finite:
            failed.append("one_finite")
        if flags.homological != "yes":
            failed.append("homological")
    return flags, failed


def extract_sigma(
    f: RingEpi,
    resolution_cap: int = DEFAULT_RESOLUTION_CAP,
    tor_cap: int = DEFAULT_TOR_CAP,
) -> SigmaExtraction:
    """The differential of ``P_f`` as a map of projectives, minimised"""
    flags, failed = hypotheses(f, resolution_cap, tor_cap)
    if failed:
        raise HypothesesNotMet(failed)
    kf = build_Kf_resolution(f, resolution_cap)
    algebra = f.source
    sigma = ProjMap.from_module_map(algebra, kf.complex.differential, f"g_{f.name}")
    sigma = sigma.minimise(algebra)
    if flags.finite:
        kind = "finite"
    elif f.is_injective():
        kind = "injective"
    elif f.is_surjective():
        kind = "surjective"
    else:
        kind = "general"
    module_sigma = None
    idempotent = None
    if f.is_injective() and not f.is_surjective():
        module_sigma = sigma_for_module(algebra, f.cokernel, resolution_cap)
    if f.is_surjective():
        kernel_module = f.kernel
        if not is_projective(kernel_module):
            raise InvariantError("kernel of a homological surjection is not projective")
        idempotent = [v for v, d in enumerate(top_dimensions(kernel_module)) if d > 0]
    logger.info(f"extracted {sigma.name} ({kind}) from {f.name}")
    return SigmaExtraction(sigma, kind, kf, module_sigma, idempotent)
