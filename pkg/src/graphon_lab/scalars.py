"""Scalar special functions of the edge/odd-cycle entropy problem.

Everything here is a pure function of one or two floats: the binary entropy
H and its first three derivatives, relative entropies, the entropy-per-L2-mass
trade-off constant C(e), the two-well mass functional V_a, and the root a0 of
H'(a0) = (1 - 2/e) H'(e).  All operations are reentrant and allocation-free.
"""

from __future__ import annotations

import math

from .errors import DomainError

__all__ = [
    "entropy_h",
    "entropy_h_deriv",
    "rel_entropy",
    "rel_entropy_shift",
    "tradeoff_c",
    "mass_distance",
    "solve_a0",
    "a0_closed_form",
]


def entropy_h(p: float) -> float:
    """Binary entropy -[p ln p + (1-p) ln(1-p)], natural log.

    Endpoints use the limit convention 0*ln(0) = 0.
    """
    if not 0.0 <= p <= 1.0:
        raise DomainError(f"entropy_h requires p in [0,1], got {p}")
    if p == 0.0 or p == 1.0:
        return 0.0
    return -(p * math.log(p) + (1.0 - p) * math.log(1.0 - p))


def entropy_h_deriv(p: float, order: int) -> float:
    """Derivative of entropy_h of the given order (1, 2 or 3) at p in (0,1)."""
    if not 0.0 < p < 1.0:
        raise DomainError(f"entropy_h_deriv requires p in (0,1), got {p}")
    if order == 1:
        return math.log((1.0 - p) / p)
    if order == 2:
        return -1.0 / (p * (1.0 - p))
    if order == 3:
        q = p * (1.0 - p)
        return (1.0 - 2.0 * p) / (q * q)
    raise DomainError(f"entropy_h_deriv order must be 1, 2 or 3, got {order}")


def rel_entropy(p: float, q: float) -> float:
    """Relative entropy p ln(p/q) + (1-p) ln((1-p)/(1-q)).

    Nonnegative, zero iff p == q.  Requires q in (0,1); p may touch {0,1}.
    """
    if not 0.0 < q < 1.0:
        raise DomainError(f"rel_entropy requires q in (0,1), got {q}")
    if not 0.0 <= p <= 1.0:
        raise DomainError(f"rel_entropy requires p in [0,1], got {p}")
    if p == 0.0:
        return -math.log1p(-q)
    if p == 1.0:
        return -math.log(q)
    # log1p form keeps precision when p is close to q
    x = p - q
    return p * math.log1p(x / q) + (1.0 - p) * math.log1p(-x / (1.0 - q))


def rel_entropy_shift(dx: float, q: float) -> float:
    """rel_entropy(q + dx, q) evaluated from the shift dx itself.

    Quadratically small in dx; taking dx directly (instead of q+dx rounded
    to a float first) preserves the full relative precision the optimizer
    needs for finite-difference gradients.
    """
    if not 0.0 < q < 1.0:
        raise DomainError(f"rel_entropy_shift requires q in (0,1), got {q}")
    p = q + dx
    if p <= 0.0:
        if p < 0.0:
            raise DomainError(f"rel_entropy_shift: q+dx = {p} below 0")
        return -math.log1p(-q)
    if p >= 1.0:
        if p > 1.0:
            raise DomainError(f"rel_entropy_shift: q+dx = {p} above 1")
        return -math.log(q)
    return p * math.log1p(dx / q) + (1.0 - p) * math.log1p(-dx / (1.0 - q))


_C_SERIES_CUT = 1e-6


def tradeoff_c(e: float) -> float:
    """Optimal entropy/L2-mass trade-off constant ln(e/(1-e)) / (2e-1).

    The singularity at e = 1/2 is removable; a short even series in
    u = 2e-1 is used for |u| < 1e-6 to avoid cancellation.
    """
    if not 0.0 < e < 1.0:
        raise DomainError(f"tradeoff_c requires e in (0,1), got {e}")
    u = 2.0 * e - 1.0
    if abs(u) < _C_SERIES_CUT:
        # ln(e/(1-e)) = 2 atanh(u), so C = 2 (1 + u^2/3 + u^4/5 + ...)
        u2 = u * u
        return 2.0 * (1.0 + u2 / 3.0 + u2 * u2 / 5.0)
    return 2.0 * math.atanh(u) / u


def mass_distance(x: float, a: float) -> float:
    """Two-well mass functional V_a(x) = min{x^2, (x-a)^2}."""
    d = x - a
    return min(x * x, d * d)


def _a0_target(e: float) -> float:
    return (1.0 - 2.0 / e) * entropy_h_deriv(e, 1)


def solve_a0(e: float) -> float:
    """Root a0 of H'(a0) = (1 - 2/e) H'(e), by bisection plus Newton polish.

    H' is strictly decreasing on (0,1), so the root is unique.  The closed
    form a0_closed_form is an independent cross-check, not the primary path.
    """
    if not 0.0 < e < 1.0:
        raise DomainError(f"solve_a0 requires e in (0,1), got {e}")
    target = _a0_target(e)
    lo, hi = 1e-15, 1.0 - 1e-15
    # g(a) = H'(a) - target decreases from +inf to -inf
    while hi - lo > 1e-14:
        mid = 0.5 * (lo + hi)
        if entropy_h_deriv(mid, 1) - target > 0.0:
            lo = mid
        else:
            hi = mid
    a = 0.5 * (lo + hi)
    # one Newton step; H'' < 0 keeps it inside (0,1) this close to the root
    a -= (entropy_h_deriv(a, 1) - target) / entropy_h_deriv(a, 2)
    return a


def a0_closed_form(e: float) -> float:
    """Closed form (1 + (e/(1-e))^(2/e - 1))^(-1) for the root of solve_a0."""
    if not 0.0 < e < 1.0:
        raise DomainError(f"a0_closed_form requires e in (0,1), got {e}")
    return 1.0 / (1.0 + (e / (1.0 - e)) ** (2.0 / e - 1.0))
