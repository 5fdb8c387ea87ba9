"""Bipodal step graphons: densities, entropy, spectrum, exact assembly.

A bipodal graphon takes the value a on C1 x C1, b on C2 x C2 and d on the
two off-diagonal blocks, where C1 has measure c.  Its kernel operator has
exactly two nonzero eigenvalues, the eigenvalues of the 2x2 reduced matrix

    [[ a c,              d sqrt(c(1-c)) ],
     [ d sqrt(c(1-c)),   b (1-c)        ]]

so the odd-k-cycle density is lambda1^k + lambda2^k.

Assembly works in shifted coordinates.  Fixing the edge density at e
eliminates one parameter exactly; the remaining cycle-density constraint is
a one-dimensional root-finding problem in c which is solved by bracketed
Brent iteration on a cancellation-free form of lambda1^k + lambda2^k - t
(series predictions seed the bracket but are never trusted for the root).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from scipy.optimize import brentq

from .errors import DomainError, NoRootInBracket, OutOfDomain
from .scalars import entropy_h, rel_entropy_shift

__all__ = [
    "BipodalGraphon",
    "BelowCoords",
    "AboveCoords",
    "SpectralPair",
    "edge_density",
    "spectrum",
    "cycle_density",
    "triangle_density",
    "entropy",
    "degree_split",
    "assemble_below",
    "assemble_above",
    "constant_graphon",
    "rank_one_competitor",
]

# rounding grace when mapping assembled shifts back to [0,1] block values
_EDGE_SLACK = 1e-12


@dataclass(frozen=True)
class BipodalGraphon:
    """Step graphon with blocks a (C1xC1), b (C2xC2), d (cross), |C1| = c."""

    a: float
    b: float
    c: float
    d: float

    def __post_init__(self) -> None:
        for name in ("a", "b", "d"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0 or math.isnan(v):
                raise OutOfDomain(f"block value {name}={v} outside [0,1]")
        if not 0.0 < self.c < 1.0 or math.isnan(self.c):
            raise OutOfDomain(f"pode measure c={self.c} outside (0,1)")

    def canonical(self) -> "BipodalGraphon":
        """Orientation with the small pode first (c <= 1/2)."""
        if self.c <= 0.5:
            return self
        return BipodalGraphon(a=self.b, b=self.a, c=1.0 - self.c, d=self.d)

    def to_json_dict(self) -> dict:
        return {"a": self.a, "b": self.b, "c": self.c, "d": self.d}

    @classmethod
    def from_json_dict(cls, obj: dict) -> "BipodalGraphon":
        return cls(a=obj["a"], b=obj["b"], c=obj["c"], d=obj["d"])


@dataclass(frozen=True)
class BelowCoords:
    """Free coordinates in the deficient regime tau = e^k - delta^k.

    mu = c*(a-e)/(1-c) + (d-e) measures the degree imbalance; (a, mu)
    are the two coordinates left free after exact constraint elimination.
    """

    e: float
    delta: float
    a: float
    mu: float

    def __post_init__(self) -> None:
        if not 0.5 < self.e < 1.0:
            raise DomainError(f"below regime requires e in (1/2,1), got {self.e}")
        if not self.delta > 0.0:
            raise DomainError(f"below regime requires delta > 0, got {self.delta}")
        if not 0.0 <= self.a <= 1.0:
            raise DomainError(f"a={self.a} outside [0,1]")


@dataclass(frozen=True)
class AboveCoords:
    """Free coordinates in the oversaturated regime tau = e^k + dtau."""

    e: float
    dtau: float
    a: float
    d: float

    def __post_init__(self) -> None:
        if not 0.0 < self.e < 1.0 or self.e == 0.5:
            raise DomainError(f"above regime requires e in (0,1), e != 1/2, got {self.e}")
        if not self.dtau > 0.0:
            raise DomainError(f"above regime requires dtau > 0, got {self.dtau}")
        if not 0.0 <= self.a <= 1.0:
            raise DomainError(f"a={self.a} outside [0,1]")
        if not 0.0 <= self.d <= 1.0:
            raise DomainError(f"d={self.d} outside [0,1]")


@dataclass(frozen=True)
class SpectralPair:
    lambda1: float
    lambda2: float


def _require_odd_k(k: int) -> None:
    if not isinstance(k, int) or k < 3 or k % 2 == 0:
        raise DomainError(f"cycle length k must be an odd integer >= 3, got {k}")


def edge_density(g: BipodalGraphon) -> float:
    c = g.c
    return c * c * g.a + 2.0 * c * (1.0 - c) * g.d + (1.0 - c) * (1.0 - c) * g.b


def spectrum(g: BipodalGraphon) -> SpectralPair:
    """The two nonzero operator eigenvalues, lambda1 >= lambda2."""
    c = g.c
    m11 = g.a * c
    m22 = g.b * (1.0 - c)
    m12 = g.d * math.sqrt(c * (1.0 - c))
    tr = m11 + m22
    disc = math.hypot(m11 - m22, 2.0 * m12)
    l1 = 0.5 * (tr + disc)
    if l1 != 0.0:
        l2 = (m11 * m22 - m12 * m12) / l1  # product form avoids cancellation
    else:
        l2 = 0.5 * (tr - disc)
    return SpectralPair(lambda1=l1, lambda2=l2)


def cycle_density(g: BipodalGraphon, k: int) -> float:
    """Odd-k-cycle homomorphism density lambda1^k + lambda2^k."""
    _require_odd_k(k)
    s = spectrum(g)
    return s.lambda1**k + s.lambda2**k


def triangle_density(g: BipodalGraphon) -> float:
    """Triangle density by the direct block polynomial (independent of spectrum)."""
    a, b, c, d = g.a, g.b, g.c, g.d
    return (
        c**3 * a**3
        + 3.0 * c**2 * (1.0 - c) * a * d * d
        + 3.0 * c * (1.0 - c) ** 2 * b * d * d
        + (1.0 - c) ** 3 * b**3
    )


def entropy(g: BipodalGraphon) -> float:
    c = g.c
    return (
        c * c * entropy_h(g.a)
        + 2.0 * c * (1.0 - c) * entropy_h(g.d)
        + (1.0 - c) * (1.0 - c) * entropy_h(g.b)
    )


def degree_split(g: BipodalGraphon) -> tuple[float, float]:
    """The two degree values (on C1 and on C2)."""
    c = g.c
    d1 = c * g.a + (1.0 - c) * g.d
    d2 = c * g.d + (1.0 - c) * g.b
    return d1, d2


def constant_graphon(e: float) -> BipodalGraphon:
    return BipodalGraphon(a=e, b=e, c=0.5, d=e)


def rank_one_competitor(e: float, delta: float) -> BipodalGraphon:
    """Explicit rank-1 perturbation graphon with tau_k = e^k - delta^k exactly.

    Eigenvalues are exactly e and -delta; entropy is within O(delta^3) of the
    optimum, which makes it a one-sided oracle for the solver.
    """
    if not 0.5 < e < 1.0 or delta <= 0.0:
        raise DomainError("rank_one_competitor requires e in (1/2,1) and delta > 0")
    u = 2.0 * e - 1.0
    return BipodalGraphon(
        a=1.0 - e,
        b=e - delta * delta / u,
        c=delta / (u + delta),
        d=e + delta,
    )


# ---------------------------------------------------------------------------
# Exact assembly in shifted coordinates
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class _Assembled:
    """Shift-form parameters of an assembled graphon (full precision)."""

    e: float
    k: int
    c: float
    da: float  # a - e
    db: float  # b - e
    dd: float  # d - e

    def graphon(self) -> BipodalGraphon:
        a = _clip_unit(self.e + self.da)
        b = _clip_unit(self.e + self.db)
        d = _clip_unit(self.e + self.dd)
        return BipodalGraphon(a=a, b=b, c=self.c, d=d)

    def entropy_deficit(self) -> float:
        """H(e) - S(g), exactly the weighted relative-entropy sum.

        Tiny (O(delta^2)) and computed from the shifts, so it carries far
        more relative precision than S itself; the optimizer differentiates
        this quantity.
        """
        e, c = self.e, self.c
        return (
            c * c * rel_entropy_shift(self.da, e)
            + 2.0 * c * (1.0 - c) * rel_entropy_shift(self.dd, e)
            + (1.0 - c) * (1.0 - c) * rel_entropy_shift(self.db, e)
        )

    def mu(self) -> float:
        return self.c * self.da / (1.0 - self.c) + self.dd


def _clip_unit(v: float) -> float:
    if v < 0.0:
        if v < -_EDGE_SLACK:
            raise OutOfDomain(f"assembled block value {v} outside [0,1]")
        return 0.0
    if v > 1.0:
        if v > 1.0 + _EDGE_SLACK:
            raise OutOfDomain(f"assembled block value {v} outside [0,1]")
        return 1.0
    return v


def _below_shifts(da: float, mu: float, c: float) -> tuple[float, float]:
    """(db, dd) from (da, mu, c); edge density e holds identically."""
    r = c * da / (1.0 - c)
    db = (c / (1.0 - c)) * (r - 2.0 * mu)
    dd = mu - r
    return db, dd


def _above_shifts(da: float, dd: float, c: float) -> float:
    """db from (da, dd, c); edge density e holds identically."""
    r = c / (1.0 - c)
    return -r * r * da - 2.0 * r * dd


def _shifted_spectrum(
    e: float, da: float, db: float, mu: float, c: float
) -> tuple[float, float]:
    """(lambda1 - e, trace - e) without forming lambda1 - e by subtraction.

    Both constraint eliminations satisfy da*db - dd^2 = -mu^2 identically,
    so (e - lambda1)(e - lambda2) = -c(1-c) mu^2; evaluating the product
    through mu keeps full precision even when mu^2 underflows the rounding
    noise of the subtracted form.  lambda2 = (trace - e) - s1.
    """
    tr_e = c * da + (1.0 - c) * db  # trace - e
    q = -c * (1.0 - c) * mu * mu
    bb = e - tr_e  # = 2e - trace
    disc = math.sqrt(max(bb * bb - 4.0 * q, 0.0))
    if bb + disc > 0.0:
        s1 = -2.0 * q / (bb + disc)  # root of s^2 + bb s + q nearest 0
    else:  # not reachable for admissible parameters; standard formula
        s1 = 0.5 * (-bb + disc)
    return s1, tr_e


def _power_sum(x: float, y: float, k: int) -> float:
    """sum_{i=0}^{k-1} x^i y^(k-1-i), the (x^k - y^k)/(x - y) polynomial."""
    acc = 0.0
    xi = 1.0
    for i in range(k):
        acc += xi * y ** (k - 1 - i)
        xi *= x
    return acc


def _gap_below(e: float, da: float, mu: float, delta: float, k: int, c: float) -> float:
    """tau_k(c) - (e^k - delta^k) in a cancellation-free factored form."""
    db, _ = _below_shifts(da, mu, c)
    s1, tr_e = _shifted_spectrum(e, da, db, mu, c)
    lam2 = tr_e - s1
    p1 = _power_sum(e + s1, e, k)
    p2 = _power_sum(lam2, -delta, k)
    # tr_e is within [-2 delta, -delta/2] near the root, so tr_e + delta is exact
    return s1 * p1 + ((tr_e + delta) - s1) * p2


def _gap_above(e: float, da: float, dd: float, dtau: float, k: int, c: float) -> float:
    """tau_k(c) - (e^k + dtau), factored about lambda1 = e."""
    db = _above_shifts(da, dd, c)
    mu = (c / (1.0 - c)) * da + dd
    s1, tr_e = _shifted_spectrum(e, da, db, mu, c)
    lam2 = tr_e - s1
    p1 = _power_sum(e + s1, e, k)
    return s1 * p1 + lam2**k - dtau


def _solve_c(gap, c_seed: float) -> float:
    """Bracketed Brent root of gap(c) on (0, 1/2), seeded near c_seed."""
    seed = min(max(c_seed, 1e-12), 0.45)
    lo = 0.5 * seed
    hi = min(2.0 * seed, 0.49)
    flo, fhi = gap(lo), gap(hi)
    for _ in range(90):
        if flo == 0.0:
            return lo
        if fhi == 0.0:
            return hi
        if flo * fhi < 0.0:
            break
        lo = max(lo / 1.9, 1e-14)
        hi = min(hi * 1.9, 0.49)
        flo, fhi = gap(lo), gap(hi)
    else:
        raise NoRootInBracket(
            f"no admissible pode size near c ~ {c_seed:.3e} satisfies the cycle constraint"
        )
    return brentq(gap, lo, hi, xtol=1e-17, rtol=9e-16, maxiter=200)


def _assemble_below(e: float, a: float, mu: float, delta: float, k: int) -> _Assembled:
    da = a - e
    if da >= 0.0 or delta - da <= 0.0:
        raise OutOfDomain(f"below regime needs a < e; got a={a}, e={e}")
    seed = delta / (delta - da)  # exact root when mu = 0
    c = _solve_c(lambda cc: _gap_below(e, da, mu, delta, k, cc), seed)
    db, dd = _below_shifts(da, mu, c)
    return _Assembled(e=e, k=k, c=c, da=da, db=db, dd=dd)


def _assemble_above(e: float, a: float, d: float, dtau: float, k: int) -> _Assembled:
    da = a - e
    dd = d - e
    if dd == 0.0:
        raise OutOfDomain("above regime needs d != e")
    seed = dtau / (k * e ** (k - 2) * dd * dd)
    c = _solve_c(lambda cc: _gap_above(e, da, dd, dtau, k, cc), seed)
    db = _above_shifts(da, dd, c)
    return _Assembled(e=e, k=k, c=c, da=da, db=db, dd=dd)


def assemble_below(co: BelowCoords, k: int) -> BipodalGraphon:
    """Graphon with edge density e and cycle density e^k - delta^k, exactly.

    b and d are recovered from the edge identity; c is solved from the cycle
    constraint by bracketed root-finding (never a truncated series).
    """
    _require_odd_k(k)
    return _assemble_below(co.e, co.a, co.mu, co.delta, k).graphon()


def assemble_above(co: AboveCoords, k: int) -> BipodalGraphon:
    """Graphon with edge density e and cycle density e^k + dtau, exactly."""
    _require_odd_k(k)
    return _assemble_above(co.e, co.a, co.d, co.dtau, k).graphon()
