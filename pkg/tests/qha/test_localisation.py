import numpy as np
import pytest
from hypothesis import HealthCheck, assume, given, settings
from hypothesis import strategies as st

from qha.data.loaders import load_sigma
from qha.errors import (
    CapExceeded,
    HypothesesNotMet,
    NotFinite,
    ProjectiveDimensionTooLarge,
    ValidationError,
)
from qha.evaluation.regression import diagonal_embedding
from qha.exactlin import hstack, rank
from qha.homology import tor
from qha.localisation import (
    ProjMap,
    RingEpi,
    classify,
    comparison_map,
    epiclass_equal,
    extract_sigma,
    in_X,
    is_flat,
    is_ring_epi,
    quotient_and_corner,
    reflect,
    sigma_for_module,
    trace_ideal,
    universal_localise,
)
from qha.modcat import (
    ModuleMap,
    combine,
    direct_sum,
    find_isomorphism,
    hom_space,
    is_projective,
    kernel_cokernel,
    projective,
    projective_sum,
    simple,
    tensor,
)
from qha.recollement import alpha_star

from .strategies import linear_localisations, presented_modules


@pytest.fixture
def kill_p2():
    return ProjMap((), (1,), {}, "kill_p2")


def test_killing_a_projective(a3_rad2, kill_p2):
    f = universal_localise(a3_rad2, [kill_p2])
    assert f.target.dimension == 2
    assert f.target.is_associative()
    assert f.target.is_unital()
    assert f.is_surjective()
    flags = classify(f)
    assert flags.is_epi
    assert flags.one_finite is False
    assert flags.homological == "no"
    assert flags.projective_dimension == 2
    assert flags.tor == {1: 0, 2: 1}
    assert epiclass_equal(f, quotient_and_corner(a3_rad2, [1])[0])


def test_localising_at_an_arrow(two_cycle, triangle):
    f = universal_localise(two_cycle, [alpha_star(two_cycle, 0)])
    assert f.target.dimension == 8
    flags = classify(f)
    assert flags.finite and flags.flat and flags.one_finite
    assert flags.homological == "yes"
    assert in_X([alpha_star(two_cycle, 0)], f.left)
    assert find_isomorphism(f.left, projective_sum(two_cycle, [0, 0])) is not None

    g = universal_localise(triangle, [alpha_star(triangle, 0)])
    assert g.target.dimension == 10
    assert g.is_injective()
    gamma = kernel_cokernel(alpha_star(triangle, 0).module_map(triangle)).cokernel.target
    assert find_isomorphism(g.cokernel, direct_sum([gamma, gamma]).module) is not None
    flags = classify(g)
    assert not flags.finite
    assert flags.one_finite
    assert flags.homological == "yes"


def test_sigma_file_matches_arrow(two_cycle, corpus_file):
    sigmas = load_sigma(corpus_file("alpha_star.map"), two_cycle)
    f = universal_localise(two_cycle, sigmas)
    g = universal_localise(two_cycle, [alpha_star(two_cycle, 0)])
    assert epiclass_equal(f, g)


def test_empty_localisation_is_identity(a3_rad2):
    f = universal_localise(a3_rad2, [])
    assert f.target.dimension == a3_rad2.dimension
    assert epiclass_equal(f, RingEpi.identity(a3_rad2))
    e1 = a3_rad2.quiver.path_of([], 0)
    identity = ProjMap((0,), (0,), {(0, 0): {e1: a3_rad2.field.one}}, "id")
    assert epiclass_equal(universal_localise(a3_rad2, [identity]), f)


def test_different_epiclasses(a3_rad2, kill_p2):
    f = universal_localise(a3_rad2, [kill_p2])
    assert not epiclass_equal(f, RingEpi.identity(a3_rad2))


def test_diagonal_is_not_an_epi():
    f = diagonal_embedding()
    assert not is_ring_epi(f)
    assert classify(f).is_epi is False


def test_kronecker_does_not_stabilise(kronecker):
    sigma = alpha_star(kronecker, 0)
    with pytest.raises(CapExceeded) as info:
        universal_localise(kronecker, [sigma], max_dim=10000, max_iter=8)
    assert info.value.which == "max_iter"
    history = info.value.history
    assert history[0] == kronecker.dimension
    assert len(history) == 9
    assert all(a < b for a, b in zip(history, history[1:]))


def test_reflection_caps_are_checked(kronecker):
    with pytest.raises(ValidationError):
        reflect([], projective(kronecker, 0), max_dim=0)
    with pytest.raises(ValidationError):
        reflect([], projective(kronecker, 0), max_iter=0)


def test_reflection_of_a_module_already_inverting(two_cycle):
    sigma = alpha_star(two_cycle, 0)
    f = universal_localise(two_cycle, [sigma])
    result = reflect([sigma], f.left)
    assert result.iterations == 0
    assert result.unit.is_isomorphism()


def test_sigma_for_module(a3_rad2):
    sigma = sigma_for_module(a3_rad2, simple(a3_rad2, 1))
    assert sigma.source == (2,)
    assert sigma.target == (1,)
    assert len(sigma.entries) == 1
    projective_sigma = sigma_for_module(a3_rad2, projective(a3_rad2, 0))
    assert projective_sigma.source == ()
    assert projective_sigma.target == (0,)
    with pytest.raises(ProjectiveDimensionTooLarge):
        sigma_for_module(a3_rad2, simple(a3_rad2, 0))


def test_sigma_for_module_localises_like_a_map(a3_rad2, kill_p2):
    sigma = sigma_for_module(a3_rad2, projective(a3_rad2, 1))
    assert epiclass_equal(
        universal_localise(a3_rad2, [sigma]), universal_localise(a3_rad2, [kill_p2])
    )


def test_projmap_validation(a3_rad2):
    quiver = a3_rad2.quiver
    one = a3_rad2.field.one
    with pytest.raises(ValidationError):
        ProjMap((3,), (0,)).validate(a3_rad2)
    with pytest.raises(ValidationError):
        ProjMap((1,), (0,), {(1, 0): {quiver.path(["alpha"]): one}}).validate(a3_rad2)
    # alpha runs from vertex 1 to vertex 2, so it lives in Hom(P2, P1)
    with pytest.raises(ValidationError):
        ProjMap((0,), (1,), {(0, 0): {quiver.path(["alpha"]): one}}).validate(a3_rad2)
    ProjMap((1,), (0,), {(0, 0): {quiver.path(["alpha"]): one}}).validate(a3_rad2)


def test_minimise(a3_rad2):
    one = a3_rad2.field.one
    e1 = a3_rad2.quiver.path_of([], 0)
    identity = ProjMap((0,), (0,), {(0, 0): {e1: one}})
    assert identity.minimise(a3_rad2).is_zero()
    alpha = {a3_rad2.quiver.path(["alpha"]): one}
    mixed = ProjMap((0, 1), (0,), {(0, 0): {e1: one}, (0, 1): alpha})
    reduced = mixed.minimise(a3_rad2)
    assert reduced.source == (1,)
    assert reduced.target == ()


def test_projmap_module_map_round_trip(two_cycle):
    sigma = alpha_star(two_cycle, 0)
    h = sigma.module_map(two_cycle)
    back = ProjMap.from_module_map(two_cycle, h, sigma.name)
    assert back.source == sigma.source and back.target == sigma.target
    assert back.entries == sigma.entries


def test_extract_sigma(two_cycle, a3_rad2, kill_p2):
    f = universal_localise(two_cycle, [alpha_star(two_cycle, 0)])
    extraction = extract_sigma(f)
    assert extraction.kind == "finite"
    g = universal_localise(two_cycle, [extraction.sigma])
    assert epiclass_equal(f, g)
    with pytest.raises(HypothesesNotMet) as info:
        extract_sigma(universal_localise(a3_rad2, [kill_p2]))
    assert "one_finite" in info.value.failed


def test_extract_sigma_from_injective(triangle):
    f = universal_localise(triangle, [alpha_star(triangle, 0)])
    extraction = extract_sigma(f)
    assert extraction.kind == "injective"
    assert extraction.module_sigma is not None
    g = universal_localise(triangle, [extraction.module_sigma])
    assert epiclass_equal(f, g)


def test_trace_ideal(two_cycle, triangle):
    f = universal_localise(two_cycle, [alpha_star(two_cycle, 0)])
    trace = trace_ideal(f)
    assert trace.dimension == 6
    assert trace.basis.shape == (two_cycle.dimension, 6)
    with pytest.raises(NotFinite):
        trace_ideal(universal_localise(triangle, [alpha_star(triangle, 0)]))


def test_quotient_and_corner(two_cycle, a3_linear):
    epi, corner = quotient_and_corner(two_cycle, [1])
    assert corner.dimension == 2
    assert corner.is_unital()
    radical = corner.radical()
    assert radical.shape[1] == 1
    assert not np.any(corner.multiply(radical[:, 0], radical[:, 0]) != 0)
    assert epi.is_surjective()
    epi, corner = quotient_and_corner(a3_linear, [1, 2])
    assert corner.dimension == 3
    assert epi.target.dimension == 1
    assert find_isomorphism(epi.left, simple(a3_linear, 0)) is not None
    assert np.all(epi.target.unit == epi.target.field.one)
    with pytest.raises(ValidationError):
        quotient_and_corner(a3_linear, [5])


@given(linear_localisations())
@settings(
    max_examples=1000,
    derandomize=True,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
def test_epimorphism_tor_identities(case):
    _, f = case
    assert is_ring_epi(f)
    image = kernel_cokernel(f.left_map).image.source
    assert tensor(f.right, image).dimension == f.target.dimension
    assert tensor(f.right, f.kernel).dimension == tor(f.right, image, 1)
    if tor(f.right, f.left, 1) == 0:
        assert tor(f.right, f.cokernel, 1) == 0


@given(linear_localisations())
@settings(
    max_examples=1000,
    derandomize=True,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
def test_flat_exactly_when_finite(case):
    _, f = case
    assert is_flat(f) == is_projective(f.left)


@given(st.data())
@settings(
    max_examples=1000,
    derandomize=True,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
def test_reflection_is_universal(data):
    sigma, f = data.draw(linear_localisations())
    m = data.draw(presented_modules(f.source))
    n = reflect([sigma], data.draw(presented_modules(f.source))).module
    result = reflect([sigma], m)
    assert in_X([sigma], result.module)
    assert in_X([sigma], n)
    # precomposition with the unit is a bijection Hom(L(M), N) -> Hom(M, N)
    through = hom_space(result.module, n)
    assert len(through) == len(hom_space(m, n))
    if through:
        fs = f.field
        pulled = [h.compose(result.unit).flat().reshape(-1, 1) for h in through]
        assert rank(hstack(pulled, len(pulled[0]), fs), fs) == len(through)


@given(st.data())
@settings(
    max_examples=1000,
    derandomize=True,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
def test_inverting_modules_are_closed_under_kernels_and_cokernels(data):
    sigma, f = data.draw(linear_localisations())
    m = reflect([sigma], data.draw(presented_modules(f.source))).module
    n = reflect([sigma], data.draw(presented_modules(f.source))).module
    basis = hom_space(m, n)
    if basis:
        coeffs = data.draw(st.lists(st.integers(-2, 2), min_size=len(basis), max_size=len(basis)))
        h = combine(basis, [f.field(c) for c in coeffs])
    else:
        h = ModuleMap.zero(m, n)
    kc = kernel_cokernel(h)
    assert in_X([sigma], kc.kernel.source)
    assert in_X([sigma], kc.cokernel.target)


@given(st.data())
@settings(
    max_examples=1000,
    derandomize=True,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.filter_too_much],
)
def test_maps_inverting_sigma_factor_through_the_localisation(data):
    sigma, f = data.draw(linear_localisations())
    algebra = f.source
    killed = set(sigma.source) | set(sigma.target)
    extra = data.draw(st.sets(st.integers(0, algebra.vertex_count - 1)))
    vertices = sorted(killed | extra)
    assume(len(vertices) < algebra.vertex_count)
    g, _ = quotient_and_corner(algebra, vertices)
    assert in_X([sigma], g.left)
    h = comparison_map(f, g)
    assert h is not None
    assert np.array_equal(f.field.matmul(h, f.matrix), g.matrix)
