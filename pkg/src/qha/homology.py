"""Tor, two-term complexes and Hom spaces in the homotopy category

Complexes have two terms ``X^-1 -> X^0``. For a ring epimorphism ``f: A -> B`` the complex
``K_f`` is ``A -> B`` with ``A`` in degree -1, and ``P_f`` is a complex of finitely
generated projectives quasi-isomorphic to it.
"""
import logging
from dataclasses import dataclass
from typing import TYPE_CHECKING, List, Optional, Sequence, Tuple

import numpy as np

from qha.errors import InvariantError, ProjectiveDimensionTooLarge, ResolutionCapExceeded
from qha.exactlin import (
    FieldSpec,
    Mat,
    hstack,
    image_basis,
    kernel,
    quotient_map,
    rank,
    solve,
)
from qha.modcat import (
    ModuleMap,
    Representation,
    ResolutionReport,
    combine,
    direct_sum,
    endomorphism_algebra,
    hom_coordinates,
    hom_space,
    kernel_cokernel,
    map_from_generators,
    resolve,
    tensor,
    zero_module,
)
from qha.presentations import FDAlgebra, trivial_path
from qha.utils import DEFAULT_RESOLUTION_CAP, DEFAULT_TOR_CAP

if TYPE_CHECKING:
    from qha.localisation import RingEpi

logger = logging.getLogger(__name__)


def tor(
    right: Representation,
    left: Representation,
    i: int,
    cap: int = DEFAULT_TOR_CAP,
    resolution: Optional[ResolutionReport] = None,
) -> int:
    """``dim Tor_i^A(right, left)`` from a minimal resolution of the right module

    :param right: Module over the opposite algebra
    :param left: Left module
    :param i: Homological degree
    :param cap: Largest degree that may be asked for
    :param resolution: Minimal resolution of ``right`` reaching degree ``i + 1``, if at hand
    """
    if i < 0:
        return 0
    if i > cap:
        raise ResolutionCapExceeded(f"Tor_{i} is beyond the cap {cap}", {"degree": i, "cap": cap})
    if resolution is None or (
        resolution.projective_dimension is None and len(resolution.terms) < i + 2
    ):
        resolution = resolve(right, i + 2)
    terms = resolution.terms
    tensors = {k: tensor(terms[k], left) for k in (i - 1, i, i + 1) if 0 <= k < len(terms)}
    if i not in tensors:
        return 0
    fs = left.field

    def differential_rank(k: int) -> int:
        if k < 1 or k not in tensors or k - 1 not in tensors:
            return 0
        matrix = tensors[k].induced(tensors[k - 1], right_map=resolution.differentials[k])
        return rank(matrix, fs)

    dim = tensors[i].dimension - differential_rank(i) - differential_rank(i + 1)
    logger.debug(f"dim Tor_{i}({right.name}, {left.name}) = {dim}")
    return dim


@dataclass
class TwoTermComplex:
    """``minus1 -> zero`` in degrees -1 and 0"""

    minus1: Representation
    zero: Representation
    differential: ModuleMap
    projective_terms: bool = False

    @property
    def field(self) -> FieldSpec:
        return self.zero.field

    def cohomology(self) -> Tuple[ModuleMap, ModuleMap]:
        """Inclusion of ``H^-1`` into ``minus1`` and projection of ``zero`` onto ``H^0``"""
        kc = kernel_cokernel(self.differential)
        return kc.kernel, kc.cokernel

    def is_acyclic(self) -> bool:
        return self.differential.is_isomorphism()


def Kf(f: "RingEpi") -> TwoTermComplex:
    return TwoTermComplex(f.regular, f.left, f.left_map, False)


@dataclass
class KfResolution:
    """``P_f`` together with the quasi-isomorphism ``q: P_f -> K_f``

    ``P^-1 = A + P_1`` and ``P^0 = P_0`` where ``P_1 -> P_0 -> B`` is a minimal projective
    resolution of ``B`` as a left module; ``q`` projects onto ``A`` in degree -1 and is the
    augmentation in degree 0.
    """

    epi: "RingEpi"
    complex: TwoTermComplex
    q_minus1: ModuleMap
    q_zero: ModuleMap
    lift: ModuleMap
    resolution: ResolutionReport

    @property
    def Kf(self) -> TwoTermComplex:
        return Kf(self.epi)


def build_Kf_resolution(f: "RingEpi", cap: int = DEFAULT_RESOLUTION_CAP) -> KfResolution:
    """Two-term projective model of ``K_f``; needs ``pd B <= 1`` as a left module"""
    res = resolve(f.left, cap)
    pd = res.projective_dimension
    if pd is None or pd > 1:
        raise ProjectiveDimensionTooLarge(
            f"B has projective dimension {res.verdict} as a left module",
            {"projective_dimension": res.verdict},
        )
    algebra = f.source
    fs = algebra.field
    regular = f.regular
    augmentation = res.differentials[0]
    p0 = res.terms[0]
    if pd == 1:
        p1, d1 = res.terms[1], res.differentials[1]
    else:
        p1 = zero_module(algebra)
        d1 = ModuleMap.zero(p1, p0)

    images = []
    for v, gen in enumerate(regular.generators):
        generator = fs.zeros(regular.dimension, 1)[:, 0]
        generator[gen] = fs.one
        image = f.left_map.apply(generator)
        x = solve(augmentation.total, image.reshape(-1, 1), fs)
        if x is None:
            raise InvariantError("augmentation does not reach f(e_v)")
        images.append(fs.matmul(p0.path_matrix(trivial_path(v)), x)[:, 0])
    lift = map_from_generators(regular, p0, images)

    total = direct_sum([regular, p1], f"{algebra.name}+{p1.name}")
    minus1 = total.module
    differential = lift.compose(total.projections[0]) + d1.compose(total.projections[1])
    complex_ = TwoTermComplex(minus1, p0, differential, True)
    logger.info(f"P_f has terms of dimension {minus1.dimension} and {p0.dimension}")
    return KfResolution(f, complex_, total.projections[0], augmentation, lift, res)


def verify_quasi_isomorphism(kf: KfResolution) -> bool:
    """``q`` induces isomorphisms ``H^-1(P_f) -> ker f`` and ``H^0(P_f) -> coker f``"""
    h_minus1, h_zero = kf.complex.cohomology()
    ker_f, coker_f = kf.epi.kernel_inclusion, kf.epi.cokernel_projection
    into = kf.q_minus1.compose(h_minus1)
    if not into.is_injective() or h_minus1.source.dimension != ker_f.source.dimension:
        return False
    if not kf.epi.left_map.compose(into).is_zero():
        return False
    onto = coker_f.compose(kf.q_zero)
    if not onto.is_surjective() or h_zero.target.dimension != coker_f.target.dimension:
        return False
    return onto.compose(kf.complex.differential).is_zero()


def reverse_sequence_exact(kf: KfResolution) -> bool:
    """Exactness of ``0 -> P^-1 -> A + P^0 -> B -> 0``

    The maps are ``x -> (q(x), -d(x))`` and ``(a, p) -> f(a) + e(p)`` with ``e`` the augmentation.
    """
    fs = kf.complex.field
    a = kf.epi.regular
    b = kf.epi.left
    p_minus1, p_zero = kf.complex.minus1, kf.complex.zero
    middle = direct_sum([a, p_zero])
    inject = middle.inclusions[0].compose(kf.q_minus1) + middle.inclusions[1].compose(
        kf.complex.differential.scale(fs(-1))
    )
    project = kf.epi.left_map.compose(middle.projections[0]) + kf.q_zero.compose(
        middle.projections[1]
    )
    return (
        project.compose(inject).is_zero()
        and inject.is_injective()
        and project.is_surjective()
        and p_minus1.dimension + b.dimension == middle.module.dimension
    )


class _Hom:
    """Hom space with coordinates"""

    def __init__(self, source: Representation, target: Representation):
        self.source = source
        self.target = target
        self.basis = hom_space(source, target)

    def __len__(self) -> int:
        return len(self.basis)

    def build(self, coords: Mat) -> ModuleMap:
        if not self.basis:
            return ModuleMap.zero(self.source, self.target)
        return combine(self.basis, list(coords))

    def coords(self, h: ModuleMap) -> Mat:
        x = hom_coordinates(self.basis, h)
        if x is None:
            raise InvariantError("map is not a module homomorphism of the expected type")
        return x


def _flatten(maps: Sequence[ModuleMap]) -> Mat:
    parts = [m.flat() for m in maps]
    return np.concatenate(parts + [np.empty(0, dtype=object)]).astype(object)


def _flat_size(source: Representation, target: Representation) -> int:
    return sum(s * t for s, t in zip(source.dims, target.dims))


def _columns(vectors: List[Mat], rows: int, field: FieldSpec) -> Mat:
    return hstack([v.reshape(-1, 1) for v in vectors], rows, field)


@dataclass
class HomotopyHomSpace:
    """Chain maps ``P -> C[shift]`` modulo null-homotopic ones

    Chain maps are coordinate vectors over the concatenated bases of ``homs``; the columns
    of ``chain_maps`` span the chain maps and those of ``null_homotopic`` the
    null-homotopic ones.
    """

    shift: int
    homs: List[_Hom]
    chain_maps: Mat
    null_homotopic: Mat
    field: FieldSpec

    @property
    def dimension(self) -> int:
        return rank(self.chain_maps, self.field) - rank(self.null_homotopic, self.field)

    @property
    def coordinate_count(self) -> int:
        return sum(len(h) for h in self.homs)

    def maps(self, coords: Mat) -> List[ModuleMap]:
        out, start = [], 0
        for h in self.homs:
            out.append(h.build(coords[start : start + len(h)]))
            start += len(h)
        return out

    def coords(self, maps: Sequence[ModuleMap]) -> Mat:
        parts = [h.coords(m) for h, m in zip(self.homs, maps)]
        return np.concatenate(parts + [np.empty(0, dtype=object)]).astype(object)


def homotopy_hom(p: TwoTermComplex, c: TwoTermComplex, shift: int) -> HomotopyHomSpace:
    """``Hom_K(A)(P, C[shift])`` for a complex ``P`` of projectives"""
    fs = c.field
    dp, dc = p.differential, c.differential
    if abs(shift) >= 2:
        return HomotopyHomSpace(shift, [], fs.zeros(0, 0), fs.zeros(0, 0), fs)
    if shift == 0:
        h1, h0 = _Hom(p.minus1, c.minus1), _Hom(p.zero, c.zero)
        homs = [h1, h0]
        n = len(h1) + len(h0)
        # d_C phi^-1 - phi^0 d_P = 0
        cols = [_flatten([dc.compose(b)]) for b in h1.basis]
        cols += [_flatten([b.compose(dp).scale(fs(-1))]) for b in h0.basis]
        square = _columns(cols, _flat_size(p.minus1, c.zero), fs)
        chain = kernel(square, fs) if n else fs.zeros(0, 0)
        homotopies = _Hom(p.zero, c.minus1)
        null = [
            np.concatenate([h1.coords(h.compose(dp)), h0.coords(dc.compose(h))])
            for h in homotopies.basis
        ]
        null_matrix = _columns(null, n, fs)
    elif shift == 1:
        h = _Hom(p.minus1, c.zero)
        homs = [h]
        n = len(h)
        chain = fs.identity(n)
        null = [h.coords(b.compose(dp)) for b in _Hom(p.zero, c.zero).basis]
        null += [h.coords(dc.compose(b)) for b in _Hom(p.minus1, c.minus1).basis]
        null_matrix = _columns(null, n, fs)
    else:
        h = _Hom(p.zero, c.minus1)
        homs = [h]
        n = len(h)
        cols = [_flatten([dc.compose(b), b.compose(dp)]) for b in h.basis]
        size = _flat_size(p.zero, c.zero) + _flat_size(p.minus1, c.minus1)
        chain = kernel(_columns(cols, size, fs), fs) if n else fs.zeros(0, 0)
        null_matrix = fs.zeros(n, 0)
    result = HomotopyHomSpace(shift, homs, chain, null_matrix, fs)
    logger.debug(f"homotopy Hom at shift {shift} has dimension {result.dimension}")
    return result


@dataclass
class EndRing:
    """``End_K(A)(P_f)`` with the ring map ``omega: A -> End``

    Multiplication is composition written on the right, ``x * y = y o x``, so that right
    multiplication on ``K_f`` induces a ring homomorphism.
    """

    algebra: FDAlgebra
    omega: Mat
    space: HomotopyHomSpace
    representatives: Mat

    @property
    def omega_kernel(self) -> Mat:
        return kernel(self.omega, self.algebra.field)

    def omega_is_surjective(self) -> bool:
        return rank(self.omega, self.algebra.field) == self.algebra.dimension


def _end_coordinates(space: HomotopyHomSpace, chain_basis: Mat, projection: Mat, v: Mat) -> Mat:
    fs = space.field
    x = solve(chain_basis, v.reshape(-1, 1), fs)
    if x is None:
        raise InvariantError("composite is not a chain map")
    return fs.matmul(projection, x)[:, 0]


def homotopy_end_ring(kf: KfResolution) -> EndRing:
    """Endomorphism ring of ``P_f`` up to homotopy and the map induced by right multiplication"""
    p = kf.complex
    fs = p.field
    f = kf.epi
    space = homotopy_hom(p, p, 0)
    chain_basis = image_basis(space.chain_maps, fs)
    null_coords = solve(chain_basis, space.null_homotopic, fs)
    if null_coords is None:
        raise InvariantError("null-homotopic maps are not chain maps")
    projection, section = quotient_map(null_coords, fs)
    reps = fs.matmul(chain_basis, section)
    e = reps.shape[1]

    table = np.empty((e, e, e), dtype=object)
    table.fill(fs.zero)
    maps = [space.maps(reps[:, k]) for k in range(e)]
    for i in range(e):
        for j in range(e):
            composite = [maps[j][0].compose(maps[i][0]), maps[j][1].compose(maps[i][1])]
            coords = space.coords(composite)
            table[i, j, :] = _end_coordinates(space, chain_basis, projection, coords)
    identity = [ModuleMap.identity(p.minus1), ModuleMap.identity(p.zero)]
    unit = _end_coordinates(space, chain_basis, projection, space.coords(identity))
    labels = [f"w{k + 1}" for k in range(e)]
    ring = FDAlgebra(fs, labels, table, unit, None, "End(K_f)")
    if not ring.is_associative():
        raise InvariantError("homotopy endomorphism ring is not associative")

    omega = fs.zeros(e, f.source.dimension)
    for k in range(f.source.dimension):
        omega[:, k] = _omega_column(kf, space, chain_basis, projection, f.source.basis_vector(k))
    logger.info(f"End(K_f) has dimension {e}, rank of omega {rank(omega, fs)}")
    return EndRing(ring, omega, space, reps)


def _omega_column(
    kf: KfResolution, space: HomotopyHomSpace, chain_basis: Mat, projection: Mat, a: Mat
) -> Mat:
    """Class of the chain endomorphism ``w`` with ``q w`` homotopic to ``r_a q``"""
    p = kf.complex
    fs = p.field
    f = kf.epi
    k_minus1, k_zero = f.regular, f.left
    rho_minus1, rho_zero = f.right_multiplication(a)
    target = _flatten([rho_minus1.compose(kf.q_minus1), rho_zero.compose(kf.q_zero)])

    cols = []
    for col in range(chain_basis.shape[1]):
        w = space.maps(chain_basis[:, col])
        cols.append(_flatten([kf.q_minus1.compose(w[0]), kf.q_zero.compose(w[1])]))
    for h in hom_space(p.zero, k_minus1):
        homotopic = [h.compose(p.differential), f.left_map.compose(h)]
        cols.append(_flatten([m.scale(fs(-1)) for m in homotopic]))
    system = _columns(cols, len(target), fs)
    x = solve(system, target.reshape(-1, 1), fs)
    if x is None:
        raise InvariantError("right multiplication does not lift to P_f")
    return fs.matmul(projection, x[: chain_basis.shape[1], :])[:, 0]


def end_ring_of_module(module: Representation) -> FDAlgebra:
    """``End_A(M)`` with composition written on the right"""
    algebra, _ = endomorphism_algebra(module)
    return algebra
