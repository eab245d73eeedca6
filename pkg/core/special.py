"""Negative-order exponential integral E_{-n}(z) for the appendix closed form."""

import math

import numpy as np
from scipy.special import gammaincc, gammaln, logsumexp

from .constants import EXPINT_FINITE_SUM, EXPINT_INCOMPLETE_GAMMA
from .exceptions import DomainError


def _check_args(n: int, z: float):
    if int(n) != n or n < 0:
        raise DomainError(f"order n must be a nonnegative integer, got {n!r}")
    if not (math.isfinite(z) and z > 0.0):
        raise DomainError(f"argument z must be positive, got {z!r}")


def log_exp_integral_neg_order(n: int, z: float, method: str = EXPINT_FINITE_SUM) -> float:
    """Return log E_{-n}(z), where E_{-n}(z) = integral_1^inf exp(-z t) t^n dt.

    The finite-sum route uses
    E_{-n}(z) = exp(-z) sum_{k=0}^{n} n!/(n-k)! z^{-(k+1)}
    with every term positive, so the log-sum-exp has no cancellation.
    The incomplete-gamma route uses E_{-n}(z) = Gamma(n+1, z) / z^{n+1}.

    Args:
        n: Nonnegative integer order (the function evaluated is E_{-n})
        z: Positive real argument
        method: "finite_sum" or "incomplete_gamma"

    Returns:
        Natural log of E_{-n}(z)

    Raises:
        DomainError: If z <= 0, n is not a nonnegative integer, or method is unknown
    """
    _check_args(n, z)
    n = int(n)
    if method == EXPINT_FINITE_SUM:
        k = np.arange(n + 1)
        terms = gammaln(n + 1) - gammaln(n - k + 1) - (k + 1) * math.log(z)
        return float(-z + logsumexp(terms))
    if method == EXPINT_INCOMPLETE_GAMMA:
        upper = gammaincc(n + 1, z)
        if upper <= 0.0:
            # regularized upper gamma underflowed; the finite sum is still exact
            return log_exp_integral_neg_order(n, z, EXPINT_FINITE_SUM)
        return float(math.log(upper) + gammaln(n + 1) - (n + 1) * math.log(z))
    raise DomainError(f"unknown exponential integral method {method!r}")


def exp_integral_neg_order(n: int, z: float, method: str = EXPINT_FINITE_SUM) -> float:
    """Return E_{-n}(z) = integral_1^inf exp(-z t) t^n dt.

    Args:
        n: Nonnegative integer order
        z: Positive real argument
        method: "finite_sum" or "incomplete_gamma"

    Returns:
        E_{-n}(z); overflows to inf only when the value exceeds the float range

    Raises:
        DomainError: If z <= 0 or n is not a nonnegative integer
    """
    log_value = log_exp_integral_neg_order(n, z, method)
    if log_value > 709.0:
        return math.inf
    return math.exp(log_value)


def exp_integral_recurrence(n: int, z: float, previous: float) -> float:
    """Return E_{-n}(z) from E_{-(n-1)}(z) via (exp(-z) + n E_{-(n-1)}(z)) / z.

    Args:
        n: Order, at least 1
        z: Positive real argument
        previous: E_{-(n-1)}(z)

    Returns:
        E_{-n}(z)
    """
    _check_args(n, z)
    if n < 1:
        raise DomainError("the recurrence needs n >= 1")
    return (math.exp(-z) + n * previous) / z
