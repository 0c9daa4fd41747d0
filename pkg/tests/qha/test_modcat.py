import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qha.errors import AlgebraMismatch, ValidationError
from qha.exactlin import RATIONALS
from qha.modcat import (
    ModuleMap,
    Representation,
    direct_sum,
    endomorphism_algebra,
    find_isomorphism,
    hom_space,
    is_projective,
    kernel_cokernel,
    projective,
    projective_cover,
    projective_summand,
    quotient,
    regular_module,
    resolve,
    simple,
    submodule,
    tensor,
    top_dimensions,
)
from qha.presentations import build_algebra, make_presentation

from .strategies import fields, linear_arrows, linear_modules


def test_projectives(a3_rad2):
    assert projective(a3_rad2, 0).dims == (1, 1, 0)
    assert projective(a3_rad2, 1).dims == (0, 1, 1)
    assert projective(a3_rad2, 2).dims == (0, 0, 1)
    module, coords = regular_module(a3_rad2)
    assert module.dimension == a3_rad2.dimension
    assert np.all(coords.sum(axis=0) == 1)


def test_relations_are_checked(a3_rad2):
    one = RATIONALS.identity(1)
    with pytest.raises(ValidationError):
        Representation(a3_rad2, [1, 1, 1], [one, one], "bad")
    m = Representation(a3_rad2, [1, 1, 1], [one, RATIONALS.zeros(1, 1)], "ok")
    assert m.dimension == 3


def test_module_map_must_commute(a3_rad2):
    p1, s1 = projective(a3_rad2, 0), simple(a3_rad2, 0)
    blocks = [RATIONALS.zeros(0, 1), RATIONALS.identity(1), RATIONALS.zeros(0, 0)]
    with pytest.raises(ValidationError):
        ModuleMap(s1, p1, [RATIONALS.identity(1), RATIONALS.zeros(1, 0), RATIONALS.zeros(0, 0)])
    with pytest.raises(ValidationError):
        ModuleMap(p1, s1, blocks)


def test_hom_dimensions(a3_rad2):
    for i in range(3):
        p = projective(a3_rad2, i)
        for j in range(3):
            assert len(hom_space(p, projective(a3_rad2, j))) == projective(a3_rad2, j).dims[i]
            assert len(hom_space(p, simple(a3_rad2, j))) == int(i == j)


def test_modules_over_different_algebras(a3_rad2, a3_linear):
    with pytest.raises(AlgebraMismatch):
        hom_space(projective(a3_rad2, 0), projective(a3_linear, 0))


def test_resolutions(a3_rad2):
    s1 = resolve(simple(a3_rad2, 0))
    assert s1.projective_dimension == 2
    assert [t.dims for t in s1.terms] == [(1, 1, 0), (0, 1, 1), (0, 0, 1)]
    assert s1.is_exact()
    assert resolve(simple(a3_rad2, 1)).projective_dimension == 1
    assert resolve(simple(a3_rad2, 2)).projective_dimension == 0
    capped = resolve(simple(a3_rad2, 0), cap=1)
    assert capped.projective_dimension is None
    assert capped.verdict == ">= 1"


def test_projective_cover_and_kernel(a3_rad2):
    cover = projective_cover(simple(a3_rad2, 0))
    assert cover.source.dims == (1, 1, 0)
    parts = kernel_cokernel(cover)
    assert parts.kernel.source.dims == (0, 1, 0)
    assert parts.cokernel.target.dimension == 0
    assert is_projective(projective(a3_rad2, 1))
    assert not is_projective(simple(a3_rad2, 0))
    assert top_dimensions(projective(a3_rad2, 0)) == [1, 0, 0]


def test_submodule_and_quotient(a3_rad2):
    p1 = projective(a3_rad2, 0)
    gen = RATIONALS.zeros(p1.dimension, 1)
    gen[p1.generators[0], 0] = RATIONALS.one
    assert submodule(p1, gen).source.dims == p1.dims
    radical = RATIONALS.zeros(p1.dimension, 1)
    radical[p1.block(1), 0] = RATIONALS.one
    top = quotient(p1, radical).target
    assert find_isomorphism(top, simple(a3_rad2, 0)) is not None


def test_direct_sums(a3_rad2):
    parts = [projective(a3_rad2, 0), simple(a3_rad2, 2)]
    total = direct_sum(parts)
    assert total.module.dims == (1, 1, 1)
    for inc, pro in zip(total.inclusions, total.projections):
        assert pro.compose(inc).is_isomorphism()
    swapped = direct_sum(parts[::-1]).module
    assert find_isomorphism(total.module, swapped) is not None
    assert find_isomorphism(projective(a3_rad2, 0), simple(a3_rad2, 0)) is None


def test_projective_summand(a3_rad2):
    m = direct_sum([simple(a3_rad2, 0), projective(a3_rad2, 1)]).module
    found = projective_summand(1, m)
    assert found is not None
    phi, psi = found
    assert psi.compose(phi).is_isomorphism()
    assert projective_summand(0, m) is None


def test_tensor_with_projectives(a3_rad2):
    opposite = a3_rad2.opposite()
    m = projective(a3_rad2, 0)
    for v in range(3):
        assert tensor(projective(opposite, v), m).dimension == m.dims[v]
        assert tensor(simple(opposite, v), m).dimension == top_dimensions(m)[v]
    with pytest.raises(AlgebraMismatch):
        tensor(projective(a3_rad2, 0), m)


def test_endomorphism_algebra(a3_rad2):
    m = direct_sum([projective(a3_rad2, 0), projective(a3_rad2, 1)]).module
    end, basis = endomorphism_algebra(m)
    assert end.dimension == len(basis) == 3
    assert end.is_associative()
    assert end.is_unital()


@given(st.data())
@settings(max_examples=200, derandomize=True, deadline=None)
def test_hereditary_modules(data):
    fs = data.draw(fields)
    n = data.draw(st.integers(2, 4))
    algebra = build_algebra(make_presentation(n, linear_arrows(n), fs=fs))
    dims, arrows = data.draw(linear_modules(n, fs))
    m = Representation(algebra, dims, arrows, "M")
    for v in range(n):
        assert len(hom_space(projective(algebra, v), m)) == dims[v]
        assert tensor(projective(algebra.opposite(), v), m).dimension == dims[v]
    report = resolve(m)
    assert report.is_exact()
    assert report.projective_dimension <= 1
