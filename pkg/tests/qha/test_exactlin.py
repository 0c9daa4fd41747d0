import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qha.errors import ValidationError
from qha.exactlin import (
    RATIONALS,
    contains,
    image_basis,
    inverse,
    is_zero,
    kernel,
    kron,
    prime_field,
    quotient_map,
    rank,
    same_span,
    solve,
)

from .strategies import fields, matrices


def random_matrix(rng, fs, rows, cols, bound=3):
    return fs.matrix(rng.integers(-bound, bound + 1, size=(rows, cols)).tolist(), cols)


def test_field_coercion(f5):
    assert RATIONALS("1/2") == Fraction(1, 2)
    assert RATIONALS.format(Fraction(-3, 4)) == "-3/4"
    assert f5("1/2") == 3
    assert f5(-1) == 4
    assert f5.inv(2) == 3
    with pytest.raises(ValidationError):
        f5(Fraction(1, 5))
    with pytest.raises(ValidationError):
        prime_field(4)


def test_rank_nullity():
    rng = np.random.default_rng(0)
    for fs in (RATIONALS, prime_field(3)):
        for _ in range(50):
            rows, cols = rng.integers(1, 6, size=2)
            m = random_matrix(rng, fs, int(rows), int(cols))
            k = kernel(m, fs)
            assert rank(m, fs) + k.shape[1] == cols
            assert is_zero(fs.matmul(m, k))


def test_kernel_matches_enumeration():
    fs = prime_field(3)
    rng = np.random.default_rng(0)
    for _ in range(20):
        m = random_matrix(rng, fs, 2, 3)
        m = fs.coerce_array(m)
        count = sum(
            1
            for v in itertools.product(range(3), repeat=3)
            if is_zero(fs.matmul(m, np.array(v, dtype=object).reshape(-1, 1)))
        )
        assert count == 3 ** kernel(m, fs).shape[1]


def test_solve():
    rng = np.random.default_rng(0)
    m = random_matrix(rng, RATIONALS, 4, 3)
    x = random_matrix(rng, RATIONALS, 3, 2)
    b = RATIONALS.matmul(m, x)
    y = solve(m, b)
    assert y is not None
    assert np.all(RATIONALS.matmul(m, y) == b)

    m = RATIONALS.matrix([[1, 0], [0, 0]])
    assert solve(m, RATIONALS.matrix([[0], [1]])) is None


def test_inverse():
    m = RATIONALS.matrix([[2, 1], [1, 1]])
    assert np.all(RATIONALS.matmul(m, inverse(m)) == RATIONALS.identity(2))
    with pytest.raises(ValidationError):
        inverse(RATIONALS.matrix([[1, 2], [2, 4]]))
    with pytest.raises(ValidationError):
        inverse(RATIONALS.zeros(2, 3))


def test_quotient_map():
    rng = np.random.default_rng(0)
    for fs in (RATIONALS, prime_field(5)):
        sub = random_matrix(rng, fs, 4, 2)
        projection, section = quotient_map(sub, fs)
        q = 4 - rank(sub, fs)
        assert projection.shape == (q, 4)
        assert is_zero(fs.matmul(projection, sub))
        assert np.all(fs.matmul(projection, section) == fs.identity(q))


def test_image_basis_and_spans():
    m = RATIONALS.matrix([[1, 2, 3], [2, 4, 6]])
    basis = image_basis(m)
    assert basis.shape == (2, 1)
    assert same_span(basis, m)
    assert contains(m, RATIONALS.matrix([[-1], [-2]]))
    assert not contains(m, RATIONALS.matrix([[1], [0]]))


def test_kron_mixed_product():
    rng = np.random.default_rng(0)
    a, c = random_matrix(rng, RATIONALS, 2, 3), random_matrix(rng, RATIONALS, 3, 2)
    b, d = random_matrix(rng, RATIONALS, 2, 2), random_matrix(rng, RATIONALS, 2, 1)
    lhs = RATIONALS.matmul(kron(a, b), kron(c, d))
    rhs = kron(RATIONALS.matmul(a, c), RATIONALS.matmul(b, d))
    assert np.all(lhs == rhs)


@given(st.data())
@settings(max_examples=1000, derandomize=True, deadline=None)
def test_rank_of_transpose(data):
    fs = data.draw(fields)
    m = data.draw(matrices(fs))
    assert rank(m, fs) == rank(m.T.copy(), fs)


@given(st.data())
@settings(max_examples=1000, derandomize=True, deadline=None)
def test_kernel_is_annihilated(data):
    fs = data.draw(fields)
    m = data.draw(matrices(fs))
    k = kernel(m, fs)
    assert k.shape[1] == m.shape[1] - rank(m, fs)
    assert is_zero(fs.matmul(m, k))
