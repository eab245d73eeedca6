import math

import pytest

from core.exceptions import DomainError
from core.oracles import check_exp_integral, quad_exp_integral
from core.special import exp_integral_neg_order, exp_integral_recurrence, log_exp_integral_neg_order


def test_order_zero_is_exp_over_z():
    assert exp_integral_neg_order(0, 1.0) == pytest.approx(math.exp(-1.0), rel=1e-14)
    assert exp_integral_neg_order(0, 2.5) == pytest.approx(math.exp(-2.5) / 2.5, rel=1e-14)


def test_order_one_matches_quadrature():
    assert exp_integral_neg_order(1, 1.0) == pytest.approx(2.0 * math.exp(-1.0), rel=1e-14)
    assert exp_integral_neg_order(1, 1.0) == pytest.approx(quad_exp_integral(1, 1.0), rel=1e-10)


@pytest.mark.parametrize(("n", "z"), [(5, 2.5), (12, 0.3), (30, 40.0)])
def test_finite_sum_matches_quadrature(n, z):
    assert exp_integral_neg_order(n, z) == pytest.approx(quad_exp_integral(n, z), rel=1e-10)


@pytest.mark.parametrize(("n", "z"), [(0, 0.1), (3, 1.0), (20, 7.5), (50, 50.0)])
def test_incomplete_gamma_route_agrees(n, z):
    direct = exp_integral_neg_order(n, z)
    via_gamma = exp_integral_neg_order(n, z, method="incomplete_gamma")
    assert via_gamma == pytest.approx(direct, rel=1e-10)


def test_recurrence_steps_up_one_order():
    z = 0.7
    previous = exp_integral_neg_order(3, z)
    assert exp_integral_recurrence(4, z, previous) == pytest.approx(exp_integral_neg_order(4, z), rel=1e-13)


def test_huge_values_overflow_to_inf_but_log_stays_finite():
    log_value = log_exp_integral_neg_order(200, 0.1)
    assert math.isfinite(log_value)
    assert log_value > 709.0
    assert exp_integral_neg_order(200, 0.1) == math.inf


@pytest.mark.parametrize("z", [0.0, -1.0, math.nan])
def test_nonpositive_argument_is_rejected(z):
    with pytest.raises(DomainError):
        exp_integral_neg_order(2, z)


def test_bad_order_and_method_are_rejected():
    with pytest.raises(DomainError):
        exp_integral_neg_order(-1, 1.0)
    with pytest.raises(DomainError):
        exp_integral_neg_order(1.5, 1.0)
    with pytest.raises(DomainError):
        exp_integral_neg_order(2, 1.0, method="continued_fraction")
    with pytest.raises(DomainError):
        exp_integral_recurrence(0, 1.0, 1.0)


def test_cross_checks_pass_over_the_full_range():
    check = check_exp_integral()
    assert check.passed
    assert check.recurrence < 1e-10
    assert check.quadrature < 1e-10
    assert check.incomplete_gamma < 1e-10
