"""Recollement data from homological ring epimorphisms and searches for witnesses

A recollement is reported through its three rings ``B``, ``A`` and ``E = End(K_f)`` and
the certificates that were checked on the way.
"""
import itertools
import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from qha.errors import CapExceeded, HypothesisFailed, InvariantError, ValidationError
from qha.exactlin import Mat, quotient_map, rank, same_span
from qha.homology import (
    EndRing,
    Kf,
    build_Kf_resolution,
    end_ring_of_module,
    homotopy_end_ring,
    homotopy_hom,
)
from qha.localisation import (
    EpiClassification,
    ProjMap,
    RingEpi,
    classify,
    epiclass_equal,
    extract_sigma,
    hypotheses,
    projective_reflections,
    quotient_and_corner,
    trace_ideal,
    universal_localise,
)
from qha.modcat import (
    find_isomorphism,
    hom_space,
    projective,
    projective_sum,
    simple,
    top_dimensions,
)
from qha.presentations import FDAlgebra, PathAlgebra
from qha.utils import DEFAULT_MAX_ITER, DEFAULT_RESOLUTION_CAP, DEFAULT_TOR_CAP

logger = logging.getLogger(__name__)


def algebra_summary(algebra: FDAlgebra) -> Dict[str, Any]:
    out = {"name": algebra.name, "dimension": algebra.dimension}
    if algebra.dimension:
        out["center_dimension"] = algebra.center_dimension()
        fs = algebra.field
        if fs.characteristic == 0 or fs.characteristic > algebra.dimension:
            out["radical_dimension"] = algebra.radical().shape[1]
    return out


@dataclass
class LocalisationCertificate:
    """Whether ``homological`` and ``universal localisation`` agree for a 1-finite epi

    ``status`` is ``certified``, ``not_one_finite`` or ``not_epi``.
    """

    status: str
    flags: EpiClassification
    sigma: Optional[ProjMap] = None
    round_trip: Optional[bool] = None
    tor_witness: Dict[int, int] = field(default_factory=dict)

    def as_dict(self) -> Dict[str, Any]:
        return {
            "status": self.status,
            "flags": self.flags.as_dict(),
            "sigma": None if self.sigma is None else sigma_summary(self.sigma),
            "round_trip": self.round_trip,
            "tor_witness": {str(i): d for i, d in sorted(self.tor_witness.items())},
        }


def sigma_summary(sigma: ProjMap) -> Dict[str, Any]:
    return {
        "name": sigma.name,
        "source": [v + 1 for v in sigma.source],
        "target": [v + 1 for v in sigma.target],
        "entries": len(sigma.entries),
    }


def certify_homological_localisation(
    f: RingEpi,
    resolution_cap: int = DEFAULT_RESOLUTION_CAP,
    tor_cap: int = DEFAULT_TOR_CAP,
) -> LocalisationCertificate:
    """Constructive check that a 1-finite epi is homological exactly when it is a
    universal localisation"""
    flags = classify(f, resolution_cap, tor_cap)
    nonzero = {i: d for i, d in flags.tor.items() if d}
    if not flags.is_epi:
        return LocalisationCertificate("not_epi", flags)
    if not flags.one_finite:
        logger.info(f"{f.name} is not 1-finite, pd {flags.projective_dimension}")
        return LocalisationCertificate("not_one_finite", flags, tor_witness=nonzero)
    if flags.homological != "yes":
        return LocalisationCertificate("certified", flags, tor_witness=nonzero)
    extraction = extract_sigma(f, resolution_cap, tor_cap)
    g = universal_localise(f.source, [extraction.sigma] if not extraction.sigma.is_zero() else [])
    round_trip = epiclass_equal(g, f)
    if not round_trip:
        raise InvariantError(f"localising at the extracted map does not recover {f.name}")
    return LocalisationCertificate("certified", flags, extraction.sigma, True)


@dataclass
class RecollementReport:
    """Endpoints ``D(B) -> D(A) -> D(E)`` of a recollement with their certificates"""

    left: FDAlgebra
    middle: PathAlgebra
    right: FDAlgebra
    epi: RingEpi
    sigma: Optional[ProjMap] = None
    end_ring: Optional[EndRing] = None
    exceptional: Dict[int, int] = field(default_factory=dict)
    omega_surjective: Optional[bool] = None
    trace_check: Optional[bool] = None
    right_isomorphism: Optional[bool] = None
    cross_checks: Dict[str, Any] = field(default_factory=dict)
    provenance: Dict[str, Any] = field(default_factory=dict)

    @property
    def nontrivial(self) -> bool:
        return self.left.dimension > 0 and self.right.dimension > 0

    def as_dict(self) -> Dict[str, Any]:
        return {
            "left": algebra_summary(self.left),
            "middle": algebra_summary(self.middle),
            "right": algebra_summary(self.right),
            "sigma": None if self.sigma is None else sigma_summary(self.sigma),
            "exceptional": {str(i): d for i, d in sorted(self.exceptional.items())},
            "omega_surjective": self.omega_surjective,
            "trace_check": self.trace_check,
            "right_isomorphism": self.right_isomorphism,
            "cross_checks": self.cross_checks,
            "provenance": self.provenance,
            "nontrivial": self.nontrivial,
        }


def _quotient_isomorphism(f: RingEpi, end: EndRing, tau: Mat) -> bool:
    """``omega`` induces a bijective multiplicative map ``A / tau -> E``"""
    algebra = f.source
    fs = algebra.field
    quot, projection = algebra.quotient(tau)
    _, section = quotient_map(tau, fs)
    phi = fs.matmul(end.omega, section)
    e = end.algebra
    if phi.shape[0] != phi.shape[1] or rank(phi, fs) != e.dimension:
        return False
    if np.any(fs.matmul(phi, quot.unit.reshape(-1, 1))[:, 0] != e.unit):
        return False
    for i in range(quot.dimension):
        for j in range(quot.dimension):
            x, y = quot.basis_vector(i), quot.basis_vector(j)
            lhs = fs.matmul(phi, quot.multiply(x, y).reshape(-1, 1))[:, 0]
            rhs = e.multiply(phi[:, i], phi[:, j])
            if np.any(fs.reduce(lhs - rhs) != 0):
                return False
    return True


def build_recollement(
    f: RingEpi,
    resolution_cap: int = DEFAULT_RESOLUTION_CAP,
    tor_cap: int = DEFAULT_TOR_CAP,
    provenance: Optional[Dict[str, Any]] = None,
) -> RecollementReport:
    """Right ring ``End(K_f)`` computed up to homotopy on ``P_f``, with certificates"""
    flags, failed = hypotheses(f, resolution_cap, tor_cap)
    if flags.is_epi and hom_space(f.cokernel, f.kernel):
        failed.append("hom_coker_ker")
    if failed:
        raise HypothesisFailed(failed)
    kf = build_Kf_resolution(f, resolution_cap)
    complex_kf = Kf(f)
    exceptional = {i: homotopy_hom(kf.complex, complex_kf, i).dimension for i in (-1, 1)}
    if any(exceptional.values()):
        raise InvariantError("K_f is not exceptional", {"dimensions": exceptional})
    end = homotopy_end_ring(kf)
    ring = end.algebra
    if ring.dimension and not ring.is_unital():
        raise InvariantError("End(K_f) has no unit")
    report = RecollementReport(
        left=f.target,
        middle=f.source,
        right=ring,
        epi=f,
        end_ring=end,
        exceptional=exceptional,
        omega_surjective=end.omega_is_surjective(),
        provenance=dict(provenance or {"via_user_sigma": True}),
    )
    fs = f.field
    if flags.finite:
        if not report.omega_surjective:
            raise InvariantError("omega is not surjective for a finite epi")
        tau = trace_ideal(f)
        report.trace_check = same_span(end.omega_kernel, tau.basis, fs)
        report.right_isomorphism = _quotient_isomorphism(f, end, tau.basis)
        report.cross_checks["trace_vertices"] = [v + 1 for v in tau.vertices]
        report.cross_checks["trace_dimension"] = tau.dimension
    if f.is_injective() and not f.is_surjective():
        report.cross_checks["end_cokernel_dimension"] = end_ring_of_module(f.cokernel).dimension
    if f.is_surjective() and not f.is_injective():
        kernel_module = f.kernel
        report.cross_checks["end_kernel_dimension"] = end_ring_of_module(kernel_module).dimension
        report.cross_checks["morita_dimension"] = _morita_dimension(f.source, kernel_module)
    logger.info(f"recollement for {f.name}: right ring of dimension {ring.dimension}")
    return report


def _morita_dimension(algebra: PathAlgebra, module) -> int:
    """``sum m_i m_j dim e_j A e_i`` over the projective summands ``P_i^{m_i}`` of ``module``"""
    tops = top_dimensions(module)
    n = algebra.vertex_count
    return sum(
        tops[i] * tops[j] * len(algebra.words_between(i, j)) for i in range(n) for j in range(n)
    )


def alpha_star(algebra: PathAlgebra, arrow: int) -> ProjMap:
    """Right multiplication by an arrow ``i -> j`` as the map ``P_j -> P_i``"""
    a = algebra.quiver.arrows[arrow]
    path = algebra.quiver.path_of([arrow])
    return ProjMap((a.target,), (a.source,), {(0, 0): {path: algebra.field.one}}, f"{a.name}_star")


def arrow_conditions(algebra: PathAlgebra, arrow: int) -> Dict[str, bool]:
    """Conditions under which localising at ``alpha*`` gives a recollement with right term ``K``

    ``unique_start``: the arrow is the only one starting at its source ``i``;
    ``unique_end``: the only one ending at its target ``j``;
    ``no_relation_ends``: no relation ends at ``j``.

    An admissible ideal contains a power of any loop, and that relation ends at ``j``, so the
    three conditions already force ``i != j``.
    """
    quiver = algebra.quiver
    a = quiver.arrows[arrow]
    relations = algebra.presentation.relations
    return {
        "unique_start": quiver.starting_at(a.source) == [arrow],
        "unique_end": quiver.ending_at(a.target) == [arrow],
        "no_relation_ends": all(p.target != a.target for rel in relations for p in rel),
    }


@dataclass
class ArrowScan:
    arrow: str
    conditions: Dict[str, bool]
    report: Optional[RecollementReport] = None
    reflection_table: Optional[bool] = None
    module_form: Optional[bool] = None
    injective_matches: Optional[bool] = None
    cokernel_simple: Optional[bool] = None

    @property
    def qualifies(self) -> bool:
        return all(self.conditions.values())

    def as_dict(self) -> Dict[str, Any]:
        return {
            "arrow": self.arrow,
            "conditions": self.conditions,
            "reflection_table": self.reflection_table,
            "module_form": self.module_form,
            "injective_matches": self.injective_matches,
            "cokernel_simple": self.cokernel_simple,
            "report": None if self.report is None else self.report.as_dict(),
        }


def scan_arrow(
    algebra: PathAlgebra,
    arrow: int,
    resolution_cap: int = DEFAULT_RESOLUTION_CAP,
    tor_cap: int = DEFAULT_TOR_CAP,
    max_dim: Optional[int] = None,
    max_iter: int = DEFAULT_MAX_ITER,
) -> ArrowScan:
    a = algebra.quiver.arrows[arrow]
    scan = ArrowScan(a.name, arrow_conditions(algebra, arrow))
    if not scan.qualifies:
        return scan
    i, j = a.source, a.target
    sigma = alpha_star(algebra, arrow)
    f = universal_localise(algebra, [sigma], max_dim, max_iter)
    swapped = [i if k == j else k for k in range(algebra.vertex_count)]
    scan.reflection_table = all(
        find_isomorphism(reflection, projective(algebra, swapped[k])) is not None
        for k, reflection in enumerate(projective_reflections(f))
    )
    expected_sum = projective_sum(algebra, swapped)
    scan.module_form = find_isomorphism(f.reflection.module, expected_sum) is not None
    no_relation_starts = all(p.source != i for rel in algebra.presentation.relations for p in rel)
    scan.injective_matches = f.is_injective() == no_relation_starts
    if f.is_injective():
        scan.cokernel_simple = find_isomorphism(f.cokernel, simple(algebra, i)) is not None
    scan.report = build_recollement(f, resolution_cap, tor_cap, {"via_arrow": a.name})
    scan.report.sigma = sigma
    return scan


def scan_arrows(
    algebra: PathAlgebra,
    resolution_cap: int = DEFAULT_RESOLUTION_CAP,
    tor_cap: int = DEFAULT_TOR_CAP,
    max_dim: Optional[int] = None,
    max_iter: int = DEFAULT_MAX_ITER,
) -> List[ArrowScan]:
    """Every arrow meeting the conditions, localised and turned into a recollement"""
    out = []
    for arrow in range(len(algebra.quiver.arrows)):
        scan = scan_arrow(algebra, arrow, resolution_cap, tor_cap, max_dim, max_iter)
        logger.debug(f"arrow {scan.arrow}: {scan.conditions}")
        if scan.qualifies:
            out.append(scan)
    return out


@dataclass
class StratifyingScan:
    vertices: List[int]
    verdict: str
    corner: FDAlgebra
    quotient: FDAlgebra
    flags: EpiClassification
    report: Optional[RecollementReport] = None

    def as_dict(self) -> Dict[str, Any]:
        return {
            "vertices": [v + 1 for v in self.vertices],
            "verdict": self.verdict,
            "corner": algebra_summary(self.corner),
            "quotient": algebra_summary(self.quotient),
            "flags": self.flags.as_dict(),
            "report": None if self.report is None else self.report.as_dict(),
        }


def check_stratifying(
    algebra: PathAlgebra,
    vertices: Sequence[int],
    resolution_cap: int = DEFAULT_RESOLUTION_CAP,
    tor_cap: int = DEFAULT_TOR_CAP,
) -> StratifyingScan:
    """Whether ``AeA`` is stratifying, with the recollement ``D(A/AeA), D(A), D(eAe)``"""
    epi, corner = quotient_and_corner(algebra, vertices)
    flags = classify(epi, resolution_cap, tor_cap)
    scan = StratifyingScan(list(vertices), flags.homological, corner, epi.target, flags)
    if flags.homological != "yes":
        return scan
    report = RecollementReport(
        left=epi.target,
        middle=algebra,
        right=corner,
        epi=epi,
        provenance={"via_idempotent": [v + 1 for v in vertices]},
    )
    if flags.one_finite:
        derived = build_recollement(epi, resolution_cap, tor_cap, report.provenance)
        report.end_ring = derived.end_ring
        report.exceptional = derived.exceptional
        report.omega_surjective = derived.omega_surjective
        report.cross_checks = dict(derived.cross_checks)
        report.cross_checks["end_dimension"] = derived.right.dimension
    scan.report = report
    return scan


def scan_stratifying(
    algebra: PathAlgebra,
    resolution_cap: int = DEFAULT_RESOLUTION_CAP,
    tor_cap: int = DEFAULT_TOR_CAP,
) -> List[StratifyingScan]:
    """All proper nonempty vertex subsets, in order of size then lexicographically"""
    if tor_cap < 1:
        raise ValidationError(f"tor cap must be positive, got {tor_cap}")
    return list(_lazy_stratifying_scans(algebra, resolution_cap, tor_cap))


def _source_arrow_vertices(algebra: PathAlgebra) -> List[Tuple[int, ...]]:
    """All vertices but ``r``, for each arrow ``r -> s`` with no relation starting at ``r``"""
    relations = algebra.presentation.relations
    out = []
    for a in algebra.quiver.arrows:
        r = a.source
        if any(p.source == r for rel in relations for p in rel):
            continue
        vertices = tuple(v for v in range(algebra.vertex_count) if v != r)
        if vertices and vertices not in out:
            out.append(vertices)
    return out


def stratifying_from_source_arrows(
    algebra: PathAlgebra,
    resolution_cap: int = DEFAULT_RESOLUTION_CAP,
    tor_cap: int = DEFAULT_TOR_CAP,
) -> List[StratifyingScan]:
    """For arrows ``r -> s`` with no relation starting at ``r``, the idempotent of all vertices
    except ``r``"""
    return [
        check_stratifying(algebra, vertices, resolution_cap, tor_cap)
        for vertices in _source_arrow_vertices(algebra)
    ]


@dataclass
class DerivedSimplicityWitness:
    kind: str
    label: str
    report: RecollementReport

    def as_dict(self) -> Dict[str, Any]:
        return {"kind": self.kind, "label": self.label, "report": self.report.as_dict()}


def derived_simplicity_witness(
    algebra: PathAlgebra,
    resolution_cap: int = DEFAULT_RESOLUTION_CAP,
    tor_cap: int = DEFAULT_TOR_CAP,
    max_dim: Optional[int] = None,
    max_iter: int = DEFAULT_MAX_ITER,
    arrow_scans: Optional[List[ArrowScan]] = None,
    stratifying_scans: Optional[List[StratifyingScan]] = None,
) -> Optional[DerivedSimplicityWitness]:
    """First nontrivial recollement found by the arrow and idempotent searches

    Scans that were already computed are reused; the missing ones run lazily and stop at the
    first witness. ``None`` means no witness was found, not that the algebra is derived
    simple.
    """
    if arrow_scans is None:
        arrow_scans = _lazy_arrow_scans(algebra, resolution_cap, tor_cap, max_dim, max_iter)
    for scan in arrow_scans:
        if scan.qualifies and scan.report is not None and scan.report.nontrivial:
            return DerivedSimplicityWitness("arrow", scan.arrow, scan.report)
    preferred = _source_arrow_vertices(algebra)
    if stratifying_scans is None:
        candidates = itertools.chain(
            (check_stratifying(algebra, v, resolution_cap, tor_cap) for v in preferred),
            _lazy_stratifying_scans(algebra, resolution_cap, tor_cap, preferred),
        )
    else:
        candidates = sorted(stratifying_scans, key=lambda s: tuple(s.vertices) not in preferred)
    for scan in candidates:
        if scan.report is not None and scan.report.nontrivial:
            label = ",".join(str(v + 1) for v in scan.vertices)
            return DerivedSimplicityWitness("idempotent", label, scan.report)
    return None


def _lazy_arrow_scans(algebra, resolution_cap, tor_cap, max_dim, max_iter):
    for arrow in range(len(algebra.quiver.arrows)):
        try:
            yield scan_arrow(algebra, arrow, resolution_cap, tor_cap, max_dim, max_iter)
        except CapExceeded:
            continue


def _lazy_stratifying_scans(algebra, resolution_cap, tor_cap, skip=()):
    """Proper nonempty vertex subsets, in order of size then lexicographically"""
    n = algebra.vertex_count
    for size in range(1, n):
        for vertices in itertools.combinations(range(n), size):
            if vertices in skip:
                continue
            scan = check_stratifying(algebra, vertices, resolution_cap, tor_cap)
            logger.debug(f"e = {[v + 1 for v in vertices]}: {scan.verdict}")
            yield scan
