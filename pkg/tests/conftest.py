import pytest
from gmpy2 import mpq

from shadowlab.operators import ConstantTail, PowerLawTail, ShiftOperator, WeightSequence
from shadowlab.spaces import Lp, RapidDecrease


def split_weights(a, b=None):
    # a on j >= 0, b (default 1/a) on j <= -1
    a = mpq(a)
    b = 1 / a if b is None else mpq(b)
    return WeightSequence.from_table({-1: b, 0: a}, ConstantTail(b), ConstantTail(a))


@pytest.fixture
def split_shift():
    """Forward shift on s(Z) with rate 1/4 to the right, 4 to the left."""
    return ShiftOperator("forward", split_weights(mpq(1, 4)))


@pytest.fixture
def doubling():
    return ShiftOperator("forward", WeightSequence.constant(2))


@pytest.fixture
def rapid():
    return RapidDecrease()


@pytest.fixture
def l2():
    return Lp(2)


def power_law_weights(r, l):
    # w_j = (|j|+1)^r for j >= 1 and (|j|+1)^-l for j <= 0
    return WeightSequence.from_table({0: 1}, PowerLawTail(l, -1), PowerLawTail(r, 1))
