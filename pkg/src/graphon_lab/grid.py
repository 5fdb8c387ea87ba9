"""Discretized-graphon oracle: independent entropy maximization on a grid.

An n x n symmetric matrix of edge probabilities stands in for a graphon;
densities are plain array contractions (tau_k = trace(W^k)/n^k).  The
oracle maximizes the discretized entropy under the two density constraints
with an augmented-Lagrangian outer loop around backtracking projected
gradient ascent, entirely independent of the bipodal solver.  The
diagnostics quantify how close an arbitrary grid optimum is to the
theoretical structure: near-constant degrees, L2 mass near the ideal
deviation 1-2e, near-rank-1 deviation, and closeness to an exact two-pode
step function.
"""

from __future__ import annotations

import json
import math
import struct
from dataclasses import dataclass

import numpy as np
from scipy.special import xlogy

from .bipodal import BipodalGraphon
from .errors import ConstraintInfeasible, DegeneratePode, DomainError

__all__ = [
    "GridGraphon",
    "OracleOptions",
    "Diagnostics",
    "grid_densities",
    "grid_entropy",
    "from_bipodal",
    "random_grid",
    "maximize_entropy",
    "diagnostics",
    "dominant_eigenpair",
    "save_grid",
    "load_grid",
    "grid_to_json",
    "grid_from_json",
]

_MAGIC = b"GRPH"
_CLAMP = 1e-9  # keeps H differentiable at iterates
_JSON_MAX_N = 64


@dataclass(frozen=True)
class GridGraphon:
    """Symmetric n x n array of probabilities (n >= 2)."""

    values: np.ndarray

    def __post_init__(self) -> None:
        w = self.values
        if w.ndim != 2 or w.shape[0] != w.shape[1] or w.shape[0] < 2:
            raise DomainError(f"grid must be square with n >= 2, got shape {w.shape}")
        if not np.array_equal(w, w.T):
            raise DomainError("grid values must be exactly symmetric")
        if np.isnan(w).any() or w.min() < 0.0 or w.max() > 1.0:
            raise DomainError("grid entries must lie in [0,1]")

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @classmethod
    def constant(cls, n: int, p: float) -> "GridGraphon":
        return cls(np.full((n, n), float(p)))


@dataclass
class OracleOptions:
    step: float = 0.02
    outer_iters: int = 40
    inner_iters: int = 600
    penalty_growth: float = 10.0
    tol_constraint: float = 1e-8
    seed: int = 0

    def __post_init__(self) -> None:
        if self.step <= 0.0:
            raise DomainError("step must be positive")
        if self.penalty_growth <= 1.0:
            raise DomainError("penalty_growth must exceed 1")


@dataclass(frozen=True)
class Diagnostics:
    degree_variance: float
    ideal_value_mass: float
    rank1_residual: float
    pode_fraction: float
    bipodality_residual: float


def _require_odd_k(k: int) -> None:
    if not isinstance(k, int) or k < 3 or k % 2 == 0:
        raise DomainError(f"cycle length k must be an odd integer >= 3, got {k}")


def grid_densities(W: GridGraphon, k: int) -> tuple[float, float]:
    """(edge density, k-cycle density) = (mean, trace(W^k)/n^k)."""
    _require_odd_k(k)
    w = W.values
    n = W.n
    eps = float(w.mean())
    power = w
    for _ in range(k - 2):
        power = power @ w
    tau = float(np.einsum("ij,ji->", power, w)) / float(n) ** k
    return eps, tau


def grid_entropy(W: GridGraphon) -> float:
    """Mean binary entropy of the entries."""
    w = W.values
    h = -(xlogy(w, w) + xlogy(1.0 - w, 1.0 - w))
    return float(h.mean())


def from_bipodal(g: BipodalGraphon, n: int) -> tuple[GridGraphon, float]:
    """Block discretization; returns the grid and the realized pode size.

    The first round(c*n) rows form C1; exact block values are copied, so
    densities of the result match the closed-form block arithmetic at
    c' = round(c*n)/n.
    """
    if n < 4:
        raise DomainError(f"from_bipodal needs n >= 4, got {n}")
    rows = round(g.c * n)
    if rows == 0 or rows == n:
        raise DegeneratePode(f"c={g.c} rounds to an empty pode at n={n}")
    w = np.full((n, n), g.b)
    w[:rows, :rows] = g.a
    w[:rows, rows:] = g.d
    w[rows:, :rows] = g.d
    return GridGraphon(w), rows / n


def random_grid(n: int, seed: int, center: float = 0.5, spread: float = 0.3) -> GridGraphon:
    """Symmetric uniform-noise grid around `center`, Philox-seeded."""
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))
    a = rng.uniform(center - spread, center + spread, size=(n, n))
    w = 0.5 * (a + a.T)
    np.clip(w, _CLAMP, 1.0 - _CLAMP, out=w)
    return GridGraphon(w)


def _densities_raw(w: np.ndarray, k: int) -> tuple[float, float, np.ndarray]:
    """(eps, tau_k, W^(k-1)) with the power reused for the tau gradient."""
    n = w.shape[0]
    power = w
    for _ in range(k - 2):
        power = power @ w
    tau = float(np.einsum("ij,ji->", power, w)) / float(n) ** k
    return float(w.mean()), tau, power


def maximize_entropy(
    init: GridGraphon, e: float, t: float, k: int, opts: OracleOptions | None = None,
    merit_log: list | None = None,
) -> GridGraphon:
    """Approximate entropy maximizer subject to |eps-e|, |tau_k-t| <= tol.

    Safeguarded augmented Lagrangian.  The inner loop ascends the merit

        mean H(W) - alpha.(residuals) - rho/2 |residuals|^2

    with backtracking modified-Newton steps: the merit Hessian is an
    entropy diagonal minus a rank-2 penalty term, so the Newton direction
    comes from a Woodbury solve in O(n^2).  Iterates are clamped entrywise
    to [1e-9, 1-1e-9] and symmetrized after every step, and each accepted
    step is merit non-decreasing (up to 1e-12 slack).  The outer loop
    updates multipliers on progress and otherwise multiplies the penalty;
    if it detects the iterate pinned to the independence curve
    tau ~ eps^k (where the two constraint gradients are parallel and the
    cycle deficit is a cubic instability, invisible to ascent), it injects
    a deterministic seeded mean-zero rank-one mode sized to close the gap.
    If merit_log is given, the merit of every accepted inner step is
    appended.
    """
    _require_odd_k(k)
    opts = opts or OracleOptions()
    n = init.n
    w = init.values.copy()
    np.clip(w, _CLAMP, 1.0 - _CLAMP, out=w)
    w = 0.5 * (w + w.T)

    alpha_e = 0.0
    alpha_t = 0.0
    rho = 1e4
    nk2 = float(n) ** (k - 2)
    prev_res = math.inf
    res = math.inf
    kick_rng = np.random.Generator(
        np.random.Philox(np.random.SeedSequence([opts.seed, 0x5ADD1E]))
    )

    for _outer in range(opts.outer_iters):
        def merit(wm, eps, tau):
            h = -(xlogy(wm, wm) + xlogy(1.0 - wm, 1.0 - wm))
            re, rt = eps - e, tau - t
            return float(h.mean()) - alpha_e * re - alpha_t * rt \
                - 0.5 * rho * (re * re + rt * rt)

        eps, tau, power = _densities_raw(w, k)
        m_cur = merit(w, eps, tau)
        stall = 0
        for _inner in range(opts.inner_iters):
            tmat = (k / nk2) * power  # n^2-scaled gradient of tau
            grad = np.log1p(-w) - np.log(w)  # H'(w)
            grad -= alpha_e + rho * (eps - e)
            grad -= (alpha_t + rho * (tau - t)) * tmat
            # Newton direction for Hessian diag(H'') - (rho/n^2) rank-2
            hdiag = -1.0 / (w * (1.0 - w))
            y = grad / hdiag
            ju = 1.0 / hdiag  # J/hdiag with J the all-ones matrix
            tu = tmat / hdiag
            r = rho / n**2
            m11 = 1.0 - r * float(ju.sum())
            m12 = -r * float(tu.sum())
            m22 = 1.0 - r * float((tmat * tu).sum())
            det = m11 * m22 - m12 * m12
            w1 = r * float(y.sum())
            w2 = r * float((tmat * y).sum())
            c1 = (m22 * w1 - m12 * w2) / det
            c2 = (m11 * w2 - m12 * w1) / det
            direction = -(y + c1 * ju + c2 * tu)
            accepted = False
            lam = 1.0
            for _ in range(60):
                wt = w + lam * direction
                np.clip(wt, _CLAMP, 1.0 - _CLAMP, out=wt)
                wt = 0.5 * (wt + wt.T)
                eps_t, tau_t, power_t = _densities_raw(wt, k)
                m_t = merit(wt, eps_t, tau_t)
                if m_t >= m_cur - 1e-12 * (1.0 + abs(m_cur)):
                    accepted = True
                    break
                lam *= 0.5
            if not accepted:
                break
            moved = float(np.abs(wt - w).max())
            improved = m_t - m_cur
            w, eps, tau, power, m_cur = wt, eps_t, tau_t, power_t, m_t
            if merit_log is not None:
                merit_log.append(m_cur)
            if moved <= 1e-12:
                break
            if improved <= 1e-13 * (1.0 + abs(m_cur)):
                stall += 1
                if stall >= 3:
                    break
            else:
                stall = 0

        res = max(abs(eps - e), abs(tau - t))
        if res <= opts.tol_constraint:
            return GridGraphon(w)
        if res <= 0.25 * prev_res:
            # good progress: first-order multiplier update
            alpha_e += rho * (eps - e)
            alpha_t += rho * (tau - t)
            prev_res = res
        else:
            rho = min(rho * opts.penalty_growth, 1e12)
            prev_res = min(prev_res, res)
            if abs((tau - eps**k)) < 0.5 * abs(t - e**k):
                # pinned to tau ~ eps^k: inject the symmetry-breaking mode
                f = kick_rng.standard_normal(n)
                f -= f.mean()
                f *= math.sqrt(n) / np.linalg.norm(f)
                gap = (t - e**k) - (tau - eps**k)
                s = math.copysign(abs(gap) ** (1.0 / 3.0), gap)
                w = w + s * np.outer(f, f)
                np.clip(w, _CLAMP, 1.0 - _CLAMP, out=w)
                w = 0.5 * (w + w.T)
    raise ConstraintInfeasible(
        f"constraint residual {res:.3e} above tolerance {opts.tol_constraint} "
        f"after {opts.outer_iters} outer iterations"
    )


def dominant_eigenpair(mat: np.ndarray, tol: float = 1e-10, max_iter: int = 2000):
    """Largest-magnitude eigenpair of a symmetric matrix by power iteration.

    Deterministic ramp start (an all-ones start is exactly orthogonal to
    mean-zero eigenfunctions, which is the common case here).  Returns
    (eigenvalue, unit eigenvector).
    """
    n = mat.shape[0]
    v = 1.0 + np.arange(n) / n
    v /= np.linalg.norm(v)
    lam = 0.0
    for _ in range(max_iter):
        u = mat @ v
        norm = np.linalg.norm(u)
        if norm == 0.0:
            return 0.0, v
        u /= norm
        lam_new = float(u @ (mat @ u))
        if abs(lam_new - lam) <= tol * max(1.0, abs(lam_new)):
            return lam_new, u
        lam, v = lam_new, u
    return lam, v


def _quadrant_average(w: np.ndarray, in_c1: np.ndarray) -> np.ndarray:
    out = np.empty_like(w)
    idx1 = np.where(in_c1)[0]
    idx2 = np.where(~in_c1)[0]
    for rows in (idx1, idx2):
        for cols in (idx1, idx2):
            if rows.size and cols.size:
                block = w[np.ix_(rows, cols)]
                out[np.ix_(rows, cols)] = block.mean()
    return out


def diagnostics(W: GridGraphon, e: float) -> Diagnostics:
    """Structural functionals measuring distance from the ideal optimum shape."""
    if not 0.0 < e < 1.0:
        raise DomainError(f"diagnostics requires e in (0,1), got {e}")
    w = W.values
    n = W.n
    delta = w - e

    deg = w.mean(axis=1)
    degree_variance = float(((deg - e) ** 2).mean())

    ideal = 1.0 - 2.0 * e
    ideal_value_mass = float(np.minimum(delta**2, (delta - ideal) ** 2).mean())

    hs2 = float((delta**2).mean())
    lam_mat, u = dominant_eigenpair(delta)
    lam_op = lam_mat / n
    rank1_residual = max(hs2 - lam_op * lam_op, 0.0)

    # pode extraction: round the dominant eigenfunction to {0, sqrt(2e-1)},
    # then one refinement pass with the which-value-is-closer row rule
    vals = math.sqrt(abs(lam_op)) * u * math.sqrt(n)
    if vals.size and abs(vals[np.argmax(np.abs(vals))]) > 0.0:
        vals = vals * np.sign(vals[np.argmax(np.abs(vals))])
    big = math.sqrt(max(2.0 * e - 1.0, 0.0)) if e > 0.5 else math.sqrt(abs(lam_op))
    in_c1 = vals > 0.5 * big if big > 0.0 else np.zeros(n, dtype=bool)
    if in_c1.any():
        sub = w[:, in_c1]
        to_flip = ((sub - (1.0 - e)) ** 2).mean(axis=1)
        to_keep = ((sub - e) ** 2).mean(axis=1)
        in_c1 = to_flip <= to_keep
    pode_fraction = float(in_c1.mean())

    quad = _quadrant_average(w, in_c1)
    bipodality_residual = math.sqrt(float(((w - quad) ** 2).mean()))

    return Diagnostics(
        degree_variance=degree_variance,
        ideal_value_mass=ideal_value_mass,
        rank1_residual=rank1_residual,
        pode_fraction=pode_fraction,
        bipodality_residual=bipodality_residual,
    )


# ---------------------------------------------------------------------------
# Serialization: 16-byte header + row-major lower triangle of f64, and JSON
# ---------------------------------------------------------------------------


def save_grid(W: GridGraphon, path: str) -> None:
    """Binary format: magic 'GRPH', u32 n, 8 reserved bytes, then the
    row-major lower triangle (diagonal included) as little-endian float64."""
    n = W.n
    tri = W.values[np.tril_indices(n)].astype("<f8")
    with open(path, "wb") as fh:
        fh.write(struct.pack("<4sII4x", _MAGIC, n, 0))
        fh.write(tri.tobytes())


def load_grid(path: str) -> GridGraphon:
    with open(path, "rb") as fh:
        header = fh.read(16)
        if len(header) != 16:
            raise DomainError(f"{path}: truncated header")
        magic, n, _reserved = struct.unpack("<4sII4x", header)
        if magic != _MAGIC:
            raise DomainError(f"{path}: bad magic {magic!r}")
        count = n * (n + 1) // 2
        tri = np.frombuffer(fh.read(8 * count), dtype="<f8")
        if tri.size != count:
            raise DomainError(f"{path}: truncated payload")
    w = np.zeros((n, n))
    w[np.tril_indices(n)] = tri
    w = w + np.tril(w, -1).T
    return GridGraphon(w)


def grid_to_json(W: GridGraphon) -> str:
    if W.n > _JSON_MAX_N:
        raise DomainError(f"JSON serialization limited to n <= {_JSON_MAX_N}, got {W.n}")
    return json.dumps({"n": W.n, "values": W.values.tolist()})


def grid_from_json(text: str) -> GridGraphon:
    obj = json.loads(text)
    w = np.asarray(obj["values"], dtype=float)
    if w.shape != (obj["n"], obj["n"]):
        raise DomainError("JSON grid shape mismatch")
    return GridGraphon(w)
