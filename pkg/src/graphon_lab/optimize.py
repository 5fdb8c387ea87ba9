"""Entropy maximization over bipodal graphons at fixed (e, tau_k).

The two density constraints are eliminated exactly (bipodal module), leaving
a two-variable concave problem: (a, mu) below the curve tau = e^k, (a, d)
above it.  The solver runs a damped fixed-matrix Newton iteration

    x_new = x_old - damping * M0^{-1} grad S(x_old)

where M0 is the closed-form model Hessian of the regime; the fixed matrix is
less efficient than a true Newton step but needs no second derivatives and
is robust throughout the trust region.  Gradients are central finite
differences of the entropy deficit H(e) - S, evaluated through exact
assembly so the constraints hold at every probe point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence, Union

from . import series
from .bipodal import (
    AboveCoords,
    BelowCoords,
    BipodalGraphon,
    _Assembled,
    _assemble_above,
    _assemble_below,
    _require_odd_k,
    constant_graphon,
    cycle_density,
    edge_density,
)
from .errors import (
    DomainError,
    GraphonLabError,
    MaxIterExceeded,
    NotNegativeDefinite,
    RegionViolation,
)
from .scalars import entropy_h, entropy_h_deriv, solve_a0

__all__ = [
    "SolveOptions",
    "ModelHessian",
    "SolverReport",
    "SweepPoint",
    "initialize_below",
    "initialize_above",
    "model_hessian",
    "reduced_entropy_and_grad",
    "fd_hessian",
    "solve",
    "sweep",
]

_BOUNDARY_EPS = 1e-14


@dataclass
class SolveOptions:
    tol_grad: float = 1e-10
    max_iter: int = 200
    fd_step_rel: float = 1e-5
    damping: float = 1.0
    eta_region: float = 0.1
    # extra full steps after the tolerance is met; they contract the iterate
    # onto the fixed point so independent starts agree to ~1e-12
    polish_iters: int = 3

    def __post_init__(self) -> None:
        if self.tol_grad <= 0.0:
            raise DomainError("tol_grad must be positive")
        if self.max_iter < 1:
            raise DomainError("max_iter must be >= 1")
        if not 0.0 < self.damping <= 1.0:
            raise DomainError("damping must lie in (0,1]")


@dataclass(frozen=True)
class ModelHessian:
    """Fixed 2x2 model of the entropy Hessian in the free coordinates.

    The second coordinate is mu below the curve and d above it.
    """

    h_aa: float
    h_am: float
    h_mm: float

    def det(self) -> float:
        return self.h_aa * self.h_mm - self.h_am * self.h_am

    def solve(self, g0: float, g1: float) -> tuple[float, float]:
        det = self.det()
        return (
            (self.h_mm * g0 - self.h_am * g1) / det,
            (self.h_aa * g1 - self.h_am * g0) / det,
        )


@dataclass(frozen=True)
class SolverReport:
    graphon: BipodalGraphon
    coords: Union[BelowCoords, AboveCoords, None]
    mu: float
    entropy: float
    grad_norm: float
    iterations: int
    converged: bool
    residual_eps: float
    residual_tau: float
    regime: str
    k: int

    def to_json_dict(self) -> dict:
        if isinstance(self.coords, BelowCoords):
            coords = {"e": self.coords.e, "delta": self.coords.delta,
                      "a": self.coords.a, "mu": self.coords.mu}
        elif isinstance(self.coords, AboveCoords):
            coords = {"e": self.coords.e, "dtau": self.coords.dtau,
                      "a": self.coords.a, "d": self.coords.d}
        else:
            coords = None
        return {
            "graphon": self.graphon.to_json_dict(),
            "coords": coords,
            "mu": self.mu,
            "entropy": self.entropy,
            "grad_norm": self.grad_norm,
            "iterations": self.iterations,
            "converged": self.converged,
            "residual_eps": self.residual_eps,
            "residual_tau": self.residual_tau,
            "regime": self.regime,
            "k": self.k,
        }


def initialize_below(e: float, delta: float, k: int) -> BelowCoords:
    """Series starting point a = 1-e-delta with the matching optimal mu."""
    _require_odd_k(k)
    return BelowCoords(e=e, delta=delta, a=1.0 - e - delta, mu=series.mu_below(e, delta, k))


def initialize_above(e: float, dtau: float, k: int) -> AboveCoords:
    """Series starting point (a, d) = (a0(e), 1-e)."""
    _require_odd_k(k)
    return AboveCoords(e=e, dtau=dtau, a=solve_a0(e), d=1.0 - e)


def model_hessian(regime: str, e: float, scale: float, k: int) -> ModelHessian:
    """Closed-form model of the reduced entropy Hessian.

    Below: h_aa = delta^2/(2e-1)^2 (H''(e) - 2H'(e)/(2e-1)), h_am = 0 and
    h_mm = 4 e^(k-2) H'(e) delta^(3-k) / (2e-1)^2 (order delta^0 at k=3,
    steeply negative for larger k).  Above: first-order entries with c
    replaced by its leading series value.  Raises if not negative definite.
    """
    _require_odd_k(k)
    if scale <= 0.0:
        raise DomainError(f"scale must be positive, got {scale}")
    hp = entropy_h_deriv(e, 1)
    hpp = entropy_h_deriv(e, 2)
    if regime == "below":
        if not 0.5 < e < 1.0:
            raise DomainError("below regime requires e in (1/2,1)")
        u = 2.0 * e - 1.0
        h_aa = scale * scale / (u * u) * (hpp - 2.0 * hp / u)
        h_mm = 4.0 * e ** (k - 2) * hp * scale ** (3 - k) / (u * u)
        h_am = 0.0
    elif regime == "above":
        if not 0.0 < e < 1.0 or e == 0.5:
            raise DomainError("above regime requires e in (0,1), e != 1/2")
        w = 1.0 - 2.0 * e
        c1 = scale / (k * e ** (k - 2) * w * w)
        a0 = solve_a0(e)
        h_aa = c1 * c1 * entropy_h_deriv(a0, 2)
        h_am = 4.0 * c1 * c1 * (1.0 - e) * hp / (e * w)
        h_mm = 2.0 * c1 * (hpp + 2.0 * hp / w)
    else:
        raise DomainError(f"regime must be 'below' or 'above', got {regime}")
    m = ModelHessian(h_aa=h_aa, h_am=h_am, h_mm=h_mm)
    if not (m.h_aa < 0.0 and m.det() > 0.0):
        raise NotNegativeDefinite(
            f"model Hessian not negative definite: h_aa={m.h_aa}, det={m.det()}"
        )
    return m


# ---------------------------------------------------------------------------
# Reduced two-variable problems
# ---------------------------------------------------------------------------


class _ReducedBelow:
    regime = "below"

    def __init__(self, e: float, delta: float, k: int, opts: SolveOptions):
        self.e = e
        self.delta = delta
        self.k = k
        self.opts = opts

    def assemble(self, x) -> _Assembled:
        return _assemble_below(self.e, x[0], x[1], self.delta, self.k)

    def deficit(self, x) -> float:
        return self.assemble(x).entropy_deficit()

    def steps(self, x) -> tuple[float, float]:
        rel = self.opts.fd_step_rel
        return rel * max(abs(x[0]), self.delta), rel * max(abs(x[1]), self.delta)

    def region_check(self, asm: _Assembled) -> None:
        eta = self.opts.eta_region
        delta = self.delta
        mu_cap = eta * delta**1.5 if self.k == 3 else eta * delta ** (self.k / 2.0)
        if asm.c >= eta:
            raise RegionViolation(f"c={asm.c:.4g} outside trust region (eta={eta})")
        if abs(asm.db) >= eta * math.sqrt(delta):
            raise RegionViolation(f"|b-e|={abs(asm.db):.4g} outside trust region")
        if abs(asm.dd) >= eta:
            raise RegionViolation(f"|d-e|={abs(asm.dd):.4g} outside trust region")
        if abs(asm.da) <= eta:
            raise RegionViolation(f"|a-e|={abs(asm.da):.4g} too small for trust region")
        if abs(asm.mu()) > mu_cap:
            raise RegionViolation(f"|mu|={abs(asm.mu()):.4g} above cap {mu_cap:.4g}")

    def coords(self, x) -> BelowCoords:
        return BelowCoords(e=self.e, delta=self.delta, a=x[0], mu=x[1])


class _ReducedAbove:
    regime = "above"

    def __init__(self, e: float, dtau: float, k: int, opts: SolveOptions):
        self.e = e
        self.dtau = dtau
        self.k = k
        self.opts = opts
        self.a0 = solve_a0(e)

    def assemble(self, x) -> _Assembled:
        return _assemble_above(self.e, x[0], x[1], self.dtau, self.k)

    def deficit(self, x) -> float:
        return self.assemble(x).entropy_deficit()

    def steps(self, x) -> tuple[float, float]:
        rel = self.opts.fd_step_rel
        return rel * max(abs(x[0]), self.dtau), rel * max(abs(x[1]), self.dtau)

    def region_check(self, asm: _Assembled) -> None:
        eta = self.opts.eta_region
        if asm.c >= eta:
            raise RegionViolation(f"c={asm.c:.4g} outside trust region (eta={eta})")
        if abs(asm.e + asm.da - self.a0) >= eta:
            raise RegionViolation("a strayed from a0 beyond the trust region")
        if abs(asm.e + asm.dd - (1.0 - self.e)) >= eta:
            raise RegionViolation("d strayed from 1-e beyond the trust region")
        if abs(asm.db) >= eta:
            raise RegionViolation(f"|b-e|={abs(asm.db):.4g} outside trust region")

    def coords(self, x) -> AboveCoords:
        return AboveCoords(e=self.e, dtau=self.dtau, a=x[0], d=x[1])


def _grad_deficit(red, x) -> tuple[float, float]:
    """Central-difference gradient of the entropy deficit in the free coords."""
    h0, h1 = red.steps(x)
    g0 = (red.deficit((x[0] + h0, x[1])) - red.deficit((x[0] - h0, x[1]))) / (2.0 * h0)
    g1 = (red.deficit((x[0], x[1] + h1)) - red.deficit((x[0], x[1] - h1))) / (2.0 * h1)
    return g0, g1


def _reduced_for(coords, k: int, opts: SolveOptions):
    if isinstance(coords, BelowCoords):
        return _ReducedBelow(coords.e, coords.delta, k, opts), (coords.a, coords.mu)
    if isinstance(coords, AboveCoords):
        return _ReducedAbove(coords.e, coords.dtau, k, opts), (coords.a, coords.d)
    raise DomainError(f"unsupported coordinate type {type(coords).__name__}")


def reduced_entropy_and_grad(coords, k: int, opts: Optional[SolveOptions] = None):
    """Entropy S and its finite-difference gradient at the given free coords.

    Assembly inside each probe re-solves c exactly, so the density
    constraints hold at every evaluation point.
    """
    _require_odd_k(k)
    opts = opts or SolveOptions()
    red, x = _reduced_for(coords, k, opts)
    s = entropy_h(red.e) - red.deficit(x)
    g0, g1 = _grad_deficit(red, x)
    return s, (-g0, -g1)


def fd_hessian(coords, k: int, opts: Optional[SolveOptions] = None,
               step_rel: float = 1e-3) -> ModelHessian:
    """Central second differences of S in the free coordinates."""
    _require_odd_k(k)
    opts = opts or SolveOptions()
    red, x = _reduced_for(coords, k, opts)
    scale = red.delta if isinstance(red, _ReducedBelow) else red.dtau
    h0 = step_rel * max(abs(x[0]), scale)
    h1 = step_rel * max(abs(x[1]), scale)
    r0 = red.deficit(x)
    raa = (red.deficit((x[0] + h0, x[1])) - 2.0 * r0 + red.deficit((x[0] - h0, x[1]))) / (h0 * h0)
    rmm = (red.deficit((x[0], x[1] + h1)) - 2.0 * r0 + red.deficit((x[0], x[1] - h1))) / (h1 * h1)
    ram = (
        red.deficit((x[0] + h0, x[1] + h1))
        - red.deficit((x[0] + h0, x[1] - h1))
        - red.deficit((x[0] - h0, x[1] + h1))
        + red.deficit((x[0] - h0, x[1] - h1))
    ) / (4.0 * h0 * h1)
    return ModelHessian(h_aa=-raa, h_am=-ram, h_mm=-rmm)


# ---------------------------------------------------------------------------
# Solve and sweep
# ---------------------------------------------------------------------------


def _boundary_report(e: float, t_target: float, k: int) -> SolverReport:
    g = constant_graphon(e)
    return SolverReport(
        graphon=g,
        coords=None,
        mu=0.0,
        entropy=entropy_h(e),
        grad_norm=0.0,
        iterations=0,
        converged=True,
        residual_eps=abs(edge_density(g) - e),
        residual_tau=abs(cycle_density(g, k) - t_target),
        regime="boundary",
        k=k,
    )


def solve(e: float, t_target: float, k: int,
          opts: Optional[SolveOptions] = None,
          start=None) -> SolverReport:
    """Unique entropy maximizer at edge density e and k-cycle density t_target.

    The regime is inferred from the sign of t_target - e^k; |t - e^k| below
    1e-14 returns the constant graphon directly.  `start` optionally replaces
    the series initial coordinates (it must carry the same (e, scale)).
    Raises MaxIterExceeded or RegionViolation on failure; assembly errors
    propagate.
    """
    _require_odd_k(k)
    if not 0.0 < e < 1.0:
        raise DomainError(f"e must lie in (0,1), got {e}")
    opts = opts or SolveOptions()
    ek = e**k
    if abs(t_target - ek) < _BOUNDARY_EPS:
        return _boundary_report(e, t_target, k)
    if t_target < ek:
        delta = (ek - t_target) ** (1.0 / k)
        coords = start if start is not None else initialize_below(e, delta, k)
        if not isinstance(coords, BelowCoords):
            raise DomainError("below-regime start must be a BelowCoords")
        red = _ReducedBelow(e, delta, k, opts)
        m0 = model_hessian("below", e, delta, k)
        x = (coords.a, coords.mu)
    else:
        dtau = t_target - ek
        coords = start if start is not None else initialize_above(e, dtau, k)
        if not isinstance(coords, AboveCoords):
            raise DomainError("above-regime start must be an AboveCoords")
        red = _ReducedAbove(e, dtau, k, opts)
        m0 = model_hessian("above", e, dtau, k)
        x = (coords.a, coords.d)

    asm = red.assemble(x)
    red.region_check(asm)
    r_cur = asm.entropy_deficit()

    converged = False
    iterations = 0
    gn = math.inf
    for it in range(opts.max_iter):
        iterations = it
        g0, g1 = _grad_deficit(red, x)
        gn = max(abs(g0), abs(g1))
        if gn <= opts.tol_grad:
            converged = True
            break
        # maximizing S: x_new = x - M0^{-1} grad S = x + M0^{-1} grad R
        dx0, dx1 = m0.solve(g0, g1)
        lam = opts.damping
        accepted = False
        for _ in range(30):
            xt = (x[0] + lam * dx0, x[1] + lam * dx1)
            try:
                asm_t = red.assemble(xt)
                r_t = asm_t.entropy_deficit()
            except GraphonLabError:
                lam *= 0.5
                continue
            if r_t <= r_cur + 1e-15 * (1.0 + abs(r_cur)):
                accepted = True
                break
            lam *= 0.5
        if not accepted:
            raise MaxIterExceeded(
                f"line search stalled at iteration {it} (grad_norm={gn:.3e})"
            )
        red.region_check(asm_t)
        x, r_cur = xt, r_t
    if not converged:
        raise MaxIterExceeded(
            f"no convergence in {opts.max_iter} iterations (grad_norm={gn:.3e})"
        )

    # polish: the iteration map has a unique fixed point; extra full steps
    # shrink the stopping scatter well below tol_grad / |h|.  Each step is
    # kept only if the gradient norm actually decreased.
    for _ in range(opts.polish_iters):
        g0, g1 = _grad_deficit(red, x)
        gn = max(abs(g0), abs(g1))
        dx0, dx1 = m0.solve(g0, g1)
        xt = (x[0] + dx0, x[1] + dx1)
        try:
            asm_t = red.assemble(xt)
            red.region_check(asm_t)
        except GraphonLabError:
            break
        g0t, g1t = _grad_deficit(red, xt)
        gn_t = max(abs(g0t), abs(g1t))
        if gn_t >= gn:
            break
        x, gn = xt, gn_t

    asm = red.assemble(x)
    g0, g1 = _grad_deficit(red, x)
    gn = max(abs(g0), abs(g1))
    g = asm.graphon()
    return SolverReport(
        graphon=g,
        coords=red.coords(x),
        mu=asm.mu(),
        entropy=entropy_h(e) - asm.entropy_deficit(),
        grad_norm=gn,
        iterations=iterations,
        converged=gn <= opts.tol_grad,
        residual_eps=abs(edge_density(g) - e),
        residual_tau=abs(cycle_density(g, k) - t_target),
        regime=red.regime,
        k=k,
    )


@dataclass(frozen=True)
class SweepPoint:
    t: float
    report: Optional[SolverReport]
    error: Optional[str] = None


def _solve_point(args) -> SweepPoint:
    e, t, k, opts = args
    try:
        return SweepPoint(t=t, report=solve(e, t, k, opts))
    except GraphonLabError as exc:
        return SweepPoint(t=t, report=None, error=f"{type(exc).__name__}: {exc}")


def sweep(e: float, t_values: Sequence[float], k: int,
          opts: Optional[SolveOptions] = None, jobs: int = 1) -> list[SweepPoint]:
    """Solve a list of cycle-density targets; failures are reported inline.

    Results keep the input order regardless of completion order.
    """
    _require_odd_k(k)
    opts = opts or SolveOptions()
    tasks = [(e, t, k, opts) for t in t_values]
    if jobs > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_solve_point, tasks))
    return [_solve_point(task) for task in tasks]
