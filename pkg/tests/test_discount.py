import math

import pytest

from cesaro_vi import DiscountFunction, InvalidDiscountError, discount, validate_discount


def test_builtin_profiles():
    lin, quad = discount("linear"), discount("quad")
    assert lin(0.0) == 1.0 and lin(1.0) == 0.0 and lin(0.25) == 0.75
    assert quad(0.5) == 0.75
    assert lin.lipschitz == 1.0 and quad.lipschitz == 2.0
    assert lin.weights(4).tolist() == [1.0, 0.75, 0.5, 0.25]


def test_unknown_profile():
    with pytest.raises(InvalidDiscountError):
        discount("cubic")


@pytest.mark.parametrize(
    "beta",
    [
        lambda t: 1.0 - t + 1e-6,  # beta(0) != 1
        lambda t: 1.0 - 0.9 * t,  # beta(1) != 0
        lambda t: 1.0 - t + 0.1 * math.sin(20 * math.pi * t),  # not monotone
    ],
)
def test_invalid_profiles(beta):
    with pytest.raises(InvalidDiscountError):
        DiscountFunction("bad", beta)


def test_flat_end_is_rejected():
    with pytest.raises(InvalidDiscountError, match="slope"):
        DiscountFunction("flat", lambda t: (1.0 - t) ** 4)


def test_out_of_range_and_failures():
    with pytest.raises(InvalidDiscountError):
        DiscountFunction("neg", lambda t: 1.0 - 2 * t if t < 1 else 0.0)
    with pytest.raises(InvalidDiscountError):
        DiscountFunction("boom", lambda t: 1.0 if t < 0.5 else {}[t])
    with pytest.raises(InvalidDiscountError):
        DiscountFunction("nan", lambda t: math.nan)


def test_table_profile():
    beta = DiscountFunction.from_table([0.0, 0.5, 1.0], [1.0, 0.8, 0.0])
    assert beta(0.25) == pytest.approx(0.9)
    assert beta.lipschitz == pytest.approx(1.6)
    with pytest.raises(InvalidDiscountError):
        DiscountFunction.from_table([0.0, 1.0], [1.0, 0.2])
    with pytest.raises(InvalidDiscountError):
        DiscountFunction.from_table([0.0, 0.7, 0.5, 1.0], [1.0, 0.5, 0.5, 0.0])
    with pytest.raises(InvalidDiscountError):
        DiscountFunction.from_table([0.0], [1.0])


def test_validate_returns_grid_slope():
    assert validate_discount(lambda t: 1.0 - t) == pytest.approx(1.0)
    assert validate_discount(lambda t: 1.0 - t * t) == pytest.approx(2.0, abs=2e-3)
    assert validate_discount(lambda t: math.cos(math.pi * t / 2)) == pytest.approx(math.pi / 2, abs=1e-3)
