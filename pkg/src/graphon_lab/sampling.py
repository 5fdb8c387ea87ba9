"""W-random graphs: finite samples from bipodal or grid graphons.

Latents u_1..u_n are i.i.d. uniform and the edge {i,j} appears independently
with probability g(u_i, u_j).  All randomness comes from numpy's Philox
4x64 counter-based generator seeded through SeedSequence, so samples are
reproducible across platforms; repetition r of a Monte Carlo check uses the
substream SeedSequence([seed, r]).  Densities use the labeled-homomorphism
normalization n^|V(K)| (edges: 2m/n^2; triangles: 6 * count / n^3, which
equals trace(A^3)/n^3 since maps sending edges to edges are exactly the
injective ones for loopless graphs).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .bipodal import BipodalGraphon, cycle_density, edge_density
from .errors import DomainError
from .grid import GridGraphon, grid_densities

__all__ = [
    "PRNG_NAME",
    "SampledGraph",
    "sample_graph",
    "graph_densities",
    "triangle_count",
    "McReport",
    "mc_check",
    "save_edge_list",
]

PRNG_NAME = "numpy-philox4x64"

GraphonSource = Union[BipodalGraphon, GridGraphon]


@dataclass(frozen=True)
class SampledGraph:
    """Simple graph: symmetric boolean adjacency with a zero diagonal."""

    adjacency: np.ndarray
    seed: int
    source: str

    def __post_init__(self) -> None:
        a = self.adjacency
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise DomainError(f"adjacency must be square, got shape {a.shape}")
        if a.dtype != np.bool_:
            raise DomainError("adjacency must be boolean")
        if not np.array_equal(a, a.T):
            raise DomainError("adjacency must be symmetric")
        if a.diagonal().any():
            raise DomainError("graph must be loopless (zero diagonal)")

    @property
    def n(self) -> int:
        return self.adjacency.shape[0]


def _describe(source: GraphonSource) -> str:
    if isinstance(source, BipodalGraphon):
        return (
            f"bipodal(a={source.a!r}, b={source.b!r}, c={source.c!r}, d={source.d!r})"
        )
    return f"grid(n={source.n})"


def _edge_probabilities(source: GraphonSource, u: np.ndarray) -> np.ndarray:
    if isinstance(source, BipodalGraphon):
        small = u < source.c
        p = np.where(
            np.outer(small, small),
            source.a,
            np.where(np.outer(small, ~small) | np.outer(~small, small), source.d, source.b),
        )
        return p
    if isinstance(source, GridGraphon):
        idx = np.minimum((u * source.n).astype(int), source.n - 1)
        return source.values[np.ix_(idx, idx)]
    raise DomainError(f"unsupported graphon source {type(source).__name__}")


def _generator(seed_parts) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed_parts)))


def sample_graph(source: GraphonSource, n: int, seed: int) -> SampledGraph:
    """Draw one W-random graph on n vertices; deterministic given seed.

    Draw order is fixed: n latents first, then a row-major n x n uniform
    field of which only the upper triangle is consumed.
    """
    if n < 2:
        raise DomainError(f"sample_graph needs n >= 2, got {n}")
    rng = _generator(seed)
    u = rng.random(n)
    p = _edge_probabilities(source, u)
    field = rng.random((n, n))
    upper = np.triu(field < p, k=1)
    adj = upper | upper.T
    return SampledGraph(adjacency=adj, seed=seed, source=_describe(source))


def graph_densities(graph: SampledGraph, k: int) -> float:
    """Labeled homomorphism density: k=2 edges, odd k in 3..9 k-cycles."""
    a = graph.adjacency
    n = graph.n
    if k == 2:
        return float(a.sum()) / n**2
    if k in (3, 5, 7, 9):
        m = a.astype(np.float64)
        power = m
        for _ in range(k - 2):
            power = power @ m
        return float(np.einsum("ij,ji->", power, m)) / float(n) ** k
    raise DomainError(f"graph_densities supports k=2 or odd k in 3..9, got {k}")


def triangle_count(graph: SampledGraph) -> int:
    """Number of triangles, via trace(A^3) = 6 * count."""
    m = graph.adjacency.astype(np.float64)
    return round(float(np.einsum("ij,jk,ki->", m, m, m)) / 6.0)


@dataclass(frozen=True)
class McReport:
    n: int
    reps: int
    seed: int
    prng: str
    exact_edge: float
    exact_triangle: float
    edge_mean: float
    edge_std: float
    triangle_mean: float
    triangle_std: float
    z_edge: float
    z_triangle: float

    def to_json_dict(self) -> dict:
        return {
            "n": self.n,
            "reps": self.reps,
            "seed": self.seed,
            "prng": self.prng,
            "exact_edge": self.exact_edge,
            "exact_triangle": self.exact_triangle,
            "edge_mean": self.edge_mean,
            "edge_std": self.edge_std,
            "triangle_mean": self.triangle_mean,
            "triangle_std": self.triangle_std,
            "z_edge": self.z_edge,
            "z_triangle": self.z_triangle,
        }


def _exact_densities(source: GraphonSource) -> tuple[float, float]:
    if isinstance(source, BipodalGraphon):
        return edge_density(source), cycle_density(source, 3)
    return grid_densities(source, 3)


def _z_score(mean: float, exact: float, std: float, reps: int) -> float:
    if std == 0.0:
        return 0.0 if mean == exact else math.copysign(math.inf, mean - exact)
    return (mean - exact) / (std / math.sqrt(reps))


def mc_check(source: GraphonSource, n: int, reps: int, seed: int) -> McReport:
    """Sample `reps` graphs and z-score the mean densities against the graphon."""
    if reps < 1:
        raise DomainError(f"mc_check needs reps >= 1, got {reps}")
    exact_edge, exact_tri = _exact_densities(source)
    edges = np.empty(reps)
    tris = np.empty(reps)
    for r in range(reps):
        rng = _generator([seed, r])
        u = rng.random(n)
        p = _edge_probabilities(source, u)
        field = rng.random((n, n))
        upper = np.triu(field < p, k=1)
        adj = upper | upper.T
        g = SampledGraph(adjacency=adj, seed=seed, source=_describe(source))
        edges[r] = graph_densities(g, 2)
        tris[r] = graph_densities(g, 3)
    edge_std = float(edges.std(ddof=1)) if reps > 1 else 0.0
    tri_std = float(tris.std(ddof=1)) if reps > 1 else 0.0
    return McReport(
        n=n,
        reps=reps,
        seed=seed,
        prng=PRNG_NAME,
        exact_edge=exact_edge,
        exact_triangle=exact_tri,
        edge_mean=float(edges.mean()),
        edge_std=edge_std,
        triangle_mean=float(tris.mean()),
        triangle_std=tri_std,
        z_edge=_z_score(float(edges.mean()), exact_edge, edge_std, reps),
        z_triangle=_z_score(float(tris.mean()), exact_tri, tri_std, reps),
    )


def save_edge_list(graph: SampledGraph, path: str) -> None:
    """Text edge list: header '# n=<n> seed=<seed>', then 'u v' per edge."""
    i, j = np.nonzero(np.triu(graph.adjacency, k=1))
    with open(path, "w") as fh:
        fh.write(f"# n={graph.n} seed={graph.seed}\n")
        for u, v in zip(i.tolist(), j.tolist()):
            fh.write(f"{u} {v}\n")
