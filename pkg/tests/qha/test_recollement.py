import pytest
from hypothesis import HealthCheck, given, settings

from qha.errors import HypothesisFailed, ValidationError
from qha.evaluation.regression import diagonal_embedding
from qha.localisation import ProjMap, projective_reflections, universal_localise
from qha.modcat import find_isomorphism, projective
from qha.presentations import build_algebra, make_presentation
from qha.recollement import (
    alpha_star,
    arrow_conditions,
    build_recollement,
    certify_homological_localisation,
    check_stratifying,
    derived_simplicity_witness,
    scan_arrow,
    scan_arrows,
    scan_stratifying,
)

from .strategies import qualifying_arrows


def test_recollement_from_finite_epi(two_cycle):
    f = universal_localise(two_cycle, [alpha_star(two_cycle, 0)])
    report = build_recollement(f)
    assert report.left.dimension == 8
    assert report.right.dimension == 1
    assert report.exceptional == {-1: 0, 1: 0}
    assert report.omega_surjective
    assert report.trace_check
    assert report.right_isomorphism
    assert report.cross_checks["trace_dimension"] == 6
    assert report.nontrivial
    assert report.as_dict()["right"]["dimension"] == 1


def test_recollement_from_injective_epi(triangle):
    f = universal_localise(triangle, [alpha_star(triangle, 0)])
    report = build_recollement(f)
    assert report.right.dimension == 4
    assert report.cross_checks["end_cokernel_dimension"] == 4
    assert report.trace_check is None


def test_recollement_needs_hypotheses(a3_rad2):
    f = universal_localise(a3_rad2, [ProjMap((), (1,), {}, "kill_p2")])
    with pytest.raises(HypothesisFailed) as info:
        build_recollement(f)
    assert "one_finite" in info.value.which
    assert info.value.reason == "hypothesis_failed"


def test_certificates(two_cycle, a3_rad2):
    f = universal_localise(two_cycle, [alpha_star(two_cycle, 0)])
    certificate = certify_homological_localisation(f)
    assert certificate.status == "certified"
    assert certificate.round_trip
    g = universal_localise(a3_rad2, [ProjMap((), (1,), {}, "kill_p2")])
    certificate = certify_homological_localisation(g)
    assert certificate.status == "not_one_finite"
    assert certificate.tor_witness == {2: 1}
    assert certify_homological_localisation(diagonal_embedding()).status == "not_epi"


def test_arrow_conditions(two_cycle, a3_rad2):
    assert all(arrow_conditions(two_cycle, 0).values())
    # beta ends at vertex 1 where the relation ends
    assert not arrow_conditions(two_cycle, 1)["no_relation_ends"]
    conditions = arrow_conditions(a3_rad2, 0)
    assert conditions["unique_start"] and conditions["unique_end"]


def test_scan_arrow(two_cycle):
    scan = scan_arrow(two_cycle, 0)
    assert scan.qualifies
    assert scan.injective_matches
    assert scan.cokernel_simple
    assert scan.report is not None
    assert scan.report.right.dimension == 1
    assert scan.as_dict()["arrow"] == "alpha"
    assert [s.arrow for s in scan_arrows(two_cycle)] == ["alpha"]


def test_scan_arrow_skips_unqualified(two_cycle):
    scan = scan_arrow(two_cycle, 1)
    assert not scan.qualifies
    assert scan.report is None


def test_stratifying_idempotent(a3_linear):
    scan = check_stratifying(a3_linear, [1, 2])
    assert scan.verdict == "yes"
    assert scan.corner.dimension == 3
    assert scan.quotient.dimension == 1
    assert scan.report is not None
    assert scan.report.nontrivial
    assert scan.as_dict()["vertices"] == [2, 3]


def test_scan_stratifying(a3_linear):
    scans = scan_stratifying(a3_linear)
    assert len(scans) == 6
    assert [s.vertices for s in scans[:3]] == [[0], [1], [2]]
    # hereditary, so every idempotent ideal is stratifying
    assert all(s.verdict == "yes" for s in scans)


def test_derived_simplicity_witness(two_cycle, a3_linear):
    witness = derived_simplicity_witness(two_cycle)
    assert witness is not None
    assert witness.kind == "arrow"
    assert witness.label == "alpha"
    assert derived_simplicity_witness(a3_linear) is not None


def test_derived_simplicity_witness_reuses_scans(two_cycle, a3_linear):
    assert derived_simplicity_witness(two_cycle, arrow_scans=[], stratifying_scans=[]) is None
    witness = derived_simplicity_witness(two_cycle, arrow_scans=scan_arrows(two_cycle))
    assert witness.kind == "arrow"
    scans = scan_stratifying(a3_linear)
    witness = derived_simplicity_witness(a3_linear, arrow_scans=[], stratifying_scans=scans)
    assert witness.kind == "idempotent"
    assert witness.label == "2,3"


def test_two_cycle_corner_is_stratifying(two_cycle):
    scan = check_stratifying(two_cycle, [1])
    assert scan.verdict == "yes"
    assert scan.corner.dimension == 2


def test_scan_stratifying_caps_are_positional(a3_linear):
    scans = scan_stratifying(a3_linear, 32, 8)
    assert len(scans) == 6
    with pytest.raises(ValidationError):
        scan_stratifying(a3_linear, 32, 0)


def test_projective_reflections(two_cycle):
    f = universal_localise(two_cycle, [alpha_star(two_cycle, 0)])
    reflections = projective_reflections(f)
    assert [m.name for m in reflections] == ["B e1", "B e2"]
    assert sum(m.dimension for m in reflections) == f.target.dimension
    p1 = projective(two_cycle, 0)
    assert all(find_isomorphism(m, p1) is not None for m in reflections)


def test_arrow_conditions_on_a_loop():
    loop = build_algebra(make_presentation(1, [("x", 1, 1)], [[(1, ["x", "x"])]], name="loop"))
    conditions = arrow_conditions(loop, 0)
    assert set(conditions) == {"unique_start", "unique_end", "no_relation_ends"}
    assert conditions["unique_start"] and conditions["unique_end"]
    assert not conditions["no_relation_ends"]
    assert not scan_arrow(loop, 0).qualifies


@given(qualifying_arrows())
@settings(
    max_examples=20,
    derandomize=True,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
def test_localising_at_a_lonely_arrow_swaps_projectives(case):
    algebra, arrow = case
    scan = scan_arrow(algebra, arrow)
    assert scan.qualifies
    assert scan.reflection_table
    assert scan.module_form
    assert scan.report.right.dimension == 1
