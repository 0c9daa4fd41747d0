import os

import pytest

from qha.evaluation.regression import CORPUS_DIR
from qha.exactlin import prime_field
from qha.presentations import build_algebra, make_presentation


@pytest.fixture
def corpus_dir():
    return CORPUS_DIR


@pytest.fixture
def corpus_file(corpus_dir):
    return lambda name: os.path.join(corpus_dir, name)


@pytest.fixture
def a3_rad2():
    presentation = make_presentation(
        3, [("alpha", 1, 2), ("beta", 2, 3)], [[(1, ["beta", "alpha"])]], name="a3_rad2"
    )
    return build_algebra(presentation)


@pytest.fixture
def triangle():
    arrows = [("gamma", 1, 2), ("alpha", 1, 3), ("beta", 3, 2)]
    return build_algebra(make_presentation(3, arrows, [[(1, ["beta", "alpha"])]], name="triangle"))


@pytest.fixture
def two_cycle():
    arrows = [("alpha", 1, 2), ("beta", 2, 1)]
    relations = [[(1, ["beta", "alpha", "beta"])]]
    return build_algebra(make_presentation(2, arrows, relations, name="two_cycle"))


@pytest.fixture
def a3_linear():
    return build_algebra(make_presentation(3, [("alpha", 1, 2), ("beta", 2, 3)], name="a3_linear"))


@pytest.fixture
def kronecker():
    return build_algebra(make_presentation(2, [("a", 1, 2), ("b", 1, 2)], name="kronecker"))


@pytest.fixture
def commutative_square():
    arrows = [("a", 1, 2), ("b", 2, 3), ("c", 1, 4), ("d", 4, 3)]
    relations = [[(1, ["b", "a"]), (-1, ["d", "c"])]]
    return make_presentation(4, arrows, relations, name="square")


@pytest.fixture
def f5():
    return prime_field(5)
