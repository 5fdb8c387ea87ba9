"""Truncated asymptotic expansions of the optimal parameters and entropy.

Below the curve the expansion variable is delta (tau = e^k - delta^k), above
it is dtau (tau = e^k + dtau).  Every prediction is a finite polynomial with
coefficients built from the scalar functions; the stated_orders table records
the error exponent of each truncated field so tests can derive tolerances
mechanically (tolerance = C * scale^order with C fitted at the coarsest
scale, since the O-constants are never quantified).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

from .errors import DomainError
from .scalars import entropy_h, entropy_h_deriv, solve_a0

__all__ = [
    "SeriesPrediction",
    "params_below",
    "params_above",
    "entropy_below",
    "entropy_above",
    "convergence_order",
]


@dataclass(frozen=True)
class SeriesPrediction:
    a: float
    b: float
    c: float
    d: float
    mu: float
    entropy: float
    stated_orders: Mapping[str, int]


def _nu(e: float) -> float:
    return entropy_h_deriv(e, 1) - (e - 0.5) * entropy_h_deriv(e, 2)


def _check_below(e: float, delta: float, k: int) -> None:
    if not 0.5 < e < 1.0:
        raise DomainError(f"below-regime series require e in (1/2,1), got {e}")
    if delta < 0.0:
        raise DomainError(f"delta must be >= 0, got {delta}")
    if k < 3 or k % 2 == 0:
        raise DomainError(f"k must be an odd integer >= 3, got {k}")


def _check_above(e: float, dtau: float, k: int) -> None:
    if not 0.0 < e < 1.0 or e == 0.5:
        raise DomainError(f"above-regime series require e in (0,1), e != 1/2, got {e}")
    if dtau < 0.0:
        raise DomainError(f"dtau must be >= 0, got {dtau}")
    if k < 3 or k % 2 == 0:
        raise DomainError(f"k must be an odd integer >= 3, got {k}")


def mu_below(e: float, delta: float, k: int) -> float:
    """Leading optimal degree imbalance: order delta^2 for k=3, delta^(k-1) beyond."""
    hp = entropy_h_deriv(e, 1)
    if k == 3:
        return delta * delta * _nu(e) / (e * hp)
    return _nu(e) * delta ** (k - 1) / (e ** (k - 2) * hp)


def params_below(e: float, delta: float, k: int) -> SeriesPrediction:
    """Parameter series below the curve, truncated at the proven orders."""
    _check_below(e, delta, k)
    u = 2.0 * e - 1.0
    mu = mu_below(e, delta, k)
    a = 1.0 - e - delta
    b = e - delta * delta / u
    c = delta / u - 2.0 * delta * delta / (u * u)
    if k == 3:
        d = e + delta + mu
        d_order = 3
        mu_order = 3
    else:
        d = e + delta
        d_order = k - 1
        mu_order = k
    return SeriesPrediction(
        a=a,
        b=b,
        c=c,
        d=d,
        mu=mu,
        entropy=entropy_below(e, delta, k),
        stated_orders={"a": 2, "b": 3, "c": 3, "d": d_order, "mu": mu_order, "entropy": 5},
    )


def params_above(e: float, dtau: float, k: int) -> SeriesPrediction:
    """Parameter series above the curve, truncated at the proven orders."""
    _check_above(e, dtau, k)
    u = 2.0 * e - 1.0
    a0 = solve_a0(e)
    lead = dtau / (k * e ** (k - 2))
    c = lead / (u * u)
    b = e + 2.0 * lead / u
    d = 1.0 - e
    mu = c * (a0 - e) / (1.0 - c) + (d - e)
    return SeriesPrediction(
        a=a0,
        b=b,
        c=c,
        d=d,
        mu=mu,
        entropy=entropy_above(e, dtau, k),
        stated_orders={
            "a": 1,
            "b": 2,
            "c": 2,
            "d": 1,
            "mu": 1,
            "entropy": 3 if k == 3 else 2,
        },
    )


def entropy_below(e: float, delta: float, k: int) -> float:
    """Entropy below the curve through the delta^4 term (error O(delta^5)).

    The delta^2 and delta^3 terms are shared by all odd k; only the k=3
    problem keeps the nu^2 piece of the quartic term (the degree imbalance
    enters the entropy at order delta^(k+1)).
    """
    _check_below(e, delta, k)
    u = 2.0 * e - 1.0
    hp = entropy_h_deriv(e, 1)
    nu = _nu(e)
    quartic = entropy_h_deriv(e, 3) / (3.0 * u) + 4.0 * nu / u**3
    if k == 3:
        quartic -= 2.0 * nu * nu / (e * hp * u * u)
    return (
        entropy_h(e)
        + delta**2 * hp / u
        - 2.0 * delta**3 * nu / (u * u)
        + delta**4 * quartic
    )


def entropy_above(e: float, dtau: float, k: int) -> float:
    """Entropy above the curve; linear for k>3, through dtau^2 for k=3."""
    _check_above(e, dtau, k)
    hp = entropy_h_deriv(e, 1)
    w = 1.0 - 2.0 * e
    s = entropy_h(e) - 2.0 * dtau * hp / (k * e ** (k - 2) * w)
    if k == 3:
        a0 = solve_a0(e)
        bracket = (
            entropy_h(a0)
            - entropy_h(e)
            + hp * (3.0 * (a0 - e) + 2.0 * w / e * (a0 + 3.0 * e - 2.0))
        )
        s += dtau * dtau * bracket / (9.0 * e * e * w**4)
        s += 2.0 * dtau * dtau * entropy_h_deriv(e, 2) / (9.0 * e * e * w * w)
    return s


def convergence_order(
    field: str,
    regime: str,
    e: float,
    k: int,
    scales: Sequence[float],
    opts=None,
) -> float:
    """Empirical order: log-log slope of |solver - series| against the scale.

    Runs the solver at each scale (delta below, dtau above), compares the
    requested field against the truncated series, and least-squares fits
    log(error) vs log(scale).  Requires at least three scales.
    """
    from . import optimize  # local import: optimize depends on this module

    if len(scales) < 3:
        raise DomainError("convergence_order needs at least three scales")
    if regime not in ("below", "above"):
        raise DomainError(f"regime must be 'below' or 'above', got {regime}")
    errs = []
    for s in scales:
        if regime == "below":
            t = e**k - s**k
            pred = params_below(e, s, k)
        else:
            t = e**k + s
            pred = params_above(e, s, k)
        rep = optimize.solve(e, t, k, opts)
        if field in ("a", "b", "c", "d"):
            got = getattr(rep.graphon, field)
        elif field == "mu":
            got = rep.mu
        elif field == "entropy":
            got = rep.entropy
        else:
            raise DomainError(f"unknown field {field!r}")
        errs.append(max(abs(got - getattr(pred, field)), 1e-300))
    xs = [math.log(s) for s in scales]
    ys = [math.log(err) for err in errs]
    n = len(xs)
    xbar = sum(xs) / n
    ybar = sum(ys) / n
    sxx = sum((x - xbar) ** 2 for x in xs)
    sxy = sum((x - xbar) * (y - ybar) for x, y in zip(xs, ys))
    return sxy / sxx
